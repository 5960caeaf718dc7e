//! Comparison output: flat CSV, an aligned text table, and the grouped
//! per-day layout for sweeps. All numbers print with six decimals so runs
//! diff cleanly.

use ltv_core::{CompareRow, Method};

const METHODS: [Method; 3] = [Method::Greedy, Method::Bf, Method::Mreopt];
const METRICS: [&str; 3] = ["ltv", "lt", "ctr"];

fn metric_of(row: &CompareRow, metric: &str) -> f64 {
    match metric {
        "ltv" => row.ltv,
        "lt" => row.lt,
        _ => row.ctr,
    }
}

pub fn render_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("model_id,method,ltv,lt,ctr\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6}\n",
            r.model_id, r.method, r.ltv, r.lt, r.ctr
        ));
    }
    out
}

pub fn render_text(rows: &[CompareRow]) -> String {
    let id_width = rows
        .iter()
        .map(|r| r.model_id.len())
        .chain(std::iter::once("model_id".len()))
        .max()
        .unwrap();
    let mut out = format!(
        "{:<id_width$}  {:<6}  {:>12}  {:>12}  {:>12}\n",
        "model_id", "method", "ltv", "lt", "ctr"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<id_width$}  {:<6}  {:>12.6}  {:>12.6}  {:>12.6}\n",
            r.model_id,
            r.method.to_string(),
            r.ltv,
            r.lt,
            r.ctr
        ));
    }
    out
}

/// One block per (lambda, seed): methods and metrics as rows, send budgets
/// as columns, with the budget the exact solver likes best called out
/// under each block.
pub fn render_sweep_text(
    rows: &[CompareRow],
    lambdas: &[usize],
    ms: &[usize],
    seeds: &[u64],
) -> String {
    let find = |lambda: usize, m: usize, seed: u64, method: Method| -> Option<&CompareRow> {
        let id = format!("lambda{lambda}_m{m}_seed{seed}");
        rows.iter().find(|r| r.model_id == id && r.method == method)
    };

    let mut out = String::new();
    for &lambda in lambdas {
        for &seed in seeds {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("lambda = {lambda}, seed = {seed}\n"));
            out.push_str(&format!("{:<8}  {:<6}", "method", "metric"));
            for &m in ms {
                out.push_str(&format!("  {:>12}", format!("m={m}")));
            }
            out.push('\n');
            for method in METHODS {
                for metric in METRICS {
                    out.push_str(&format!("{:<8}  {:<6}", method.to_string(), metric));
                    for &m in ms {
                        match find(lambda, m, seed, method) {
                            Some(row) => {
                                out.push_str(&format!("  {:>12.6}", metric_of(row, metric)))
                            }
                            None => out.push_str(&format!("  {:>12}", "-")),
                        }
                    }
                    out.push('\n');
                }
            }
            let best = ms
                .iter()
                .filter_map(|&m| find(lambda, m, seed, Method::Mreopt).map(|r| (m, r.ltv)))
                .max_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((m, ltv)) = best {
                out.push_str(&format!("best MREOpt ltv: m={m} ({ltv:.6})\n"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(model_id: &str, method: Method, ltv: f64) -> CompareRow {
        CompareRow {
            model_id: model_id.into(),
            method,
            ltv,
            lt: 2.0 * ltv,
            ctr: 0.5,
            immortal: false,
        }
    }

    #[test]
    fn csv_shape_is_stable() {
        let rows =
            vec![row("t2", Method::Greedy, 1.0), row("t2", Method::Bf, 1.0), row("t2", Method::Mreopt, 7.6)];
        let csv = render_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "model_id,method,ltv,lt,ctr");
        assert_eq!(lines[1], "t2,Greedy,1.000000,2.000000,0.500000");
        assert_eq!(lines[3], "t2,MREOpt,7.600000,15.200000,0.500000");
    }

    #[test]
    fn infinities_render_as_inf() {
        let mut r = row("m", Method::Greedy, 0.0);
        r.lt = f64::INFINITY;
        r.immortal = true;
        let csv = render_csv(&[r]);
        assert!(csv.contains("0.000000,inf,0.500000"), "{csv}");
    }

    #[test]
    fn sweep_layout_groups_by_lambda_and_marks_the_best_budget() {
        let mut rows = Vec::new();
        for m in [10usize, 50] {
            for method in METHODS {
                rows.push(row(&format!("lambda100_m{m}_seed7"), method, m as f64));
            }
        }
        let text = render_sweep_text(&rows, &[100], &[10, 50], &[7]);
        assert!(text.contains("lambda = 100, seed = 7"), "{text}");
        assert!(text.contains("m=10"), "{text}");
        assert!(text.contains("best MREOpt ltv: m=50 (50.000000)"), "{text}");
        // 1 header + 1 column row + 9 value rows + best line.
        assert_eq!(text.lines().count(), 12);

        // A second block arrives separated by one blank line.
        let two = render_sweep_text(&rows, &[100], &[10, 50], &[7, 7]);
        assert_eq!(two.lines().count(), 25);
        assert!(two.contains(")\n\nlambda = 100"), "{two}");
    }
}
