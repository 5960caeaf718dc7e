//! Subcommand implementations. Every command renders its stdout as a
//! returned string so integration tests can drive the whole pipeline
//! in-process; `main` only prints and maps errors to exit codes.

use crate::error::CliError;
use crate::io::{
    load_model, load_policy, policy_to_labels, read_json, save_json, sweep_models, ScenarioFile,
    SweepFile,
};
use crate::render::{render_csv, render_sweep_text, render_text};
use ltv_core::scenario::build_push_dag;
use ltv_core::{
    compare, dp_pass, enumerate_oracle, evaluate_policy, metrics, random_instance,
    simulate_online, solve_bf_one_round, solve_bf_unrolled, solve_greedy, solve_mreopt,
    substream, BracketStep, BranchTaken, EvalError, GreedyMode, InstanceConfig, SimMode,
    POLICY_CAP,
};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

// ── generate ────────────────────────────────────────────────────────────

pub fn cmd_generate(
    scenario_path: &Path,
    out_path: &Path,
    seed: Option<u64>,
) -> Result<String, CliError> {
    let scenario: ScenarioFile = read_json(scenario_path)?;
    let prob = scenario.resolve(seed)?;
    let model = build_push_dag(&prob);
    let report = model.validate();
    if !report.ok() {
        return Err(CliError::Semantic(format!("generated model failed validation:\n{report}")));
    }
    save_json(out_path, &model)?;
    Ok(format!("wrote model with {} states to {}\n", model.n_states(), out_path.display()))
}

// ── solve ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Greedy,
    Bf,
    /// Finite-horizon unrolling; `None` defers to the --k-days flag.
    BfUnrolled(Option<usize>),
    Mreopt,
}

impl FromStr for SolverChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "greedy" => Ok(SolverChoice::Greedy),
            "bf" => Ok(SolverChoice::Bf),
            "bf-unrolled" => Ok(SolverChoice::BfUnrolled(None)),
            "mreopt" => Ok(SolverChoice::Mreopt),
            other => match other.strip_prefix("bf-unrolled:") {
                Some(horizon) => {
                    let k: usize = horizon.parse().map_err(|_| {
                        CliError::Input(format!("bad horizon in `{other}`; use bf-unrolled:K"))
                    })?;
                    if k == 0 {
                        return Err(CliError::Input(
                            "bf-unrolled horizon must be at least 1".into(),
                        ));
                    }
                    Ok(SolverChoice::BfUnrolled(Some(k)))
                }
                None => Err(CliError::Input(format!(
                    "unknown solver `{other}`; choose greedy, bf, bf-unrolled[:K], or mreopt"
                ))),
            },
        }
    }
}

pub struct SolveOpts {
    pub epsilon: f64,
    pub k_days: usize,
    pub greedy_mode: GreedyMode,
    pub trace: bool,
    pub out: Option<PathBuf>,
}

/// What --out writes; fields stay absent for solvers they do not apply to.
#[derive(Serialize, Default)]
struct SolveArtifact {
    solver: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    ltv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    evaluated_ltv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_days: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    policy: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<BracketStep>>,
}

pub fn cmd_solve(
    model_path: &Path,
    solver: SolverChoice,
    opts: &SolveOpts,
) -> Result<String, CliError> {
    if !(opts.epsilon > 0.0) {
        return Err(CliError::Input(format!("epsilon must be positive, got {}", opts.epsilon)));
    }
    let model = load_model(model_path)?;
    let mut out = String::new();
    let mut artifact = SolveArtifact::default();

    let policy = match solver {
        SolverChoice::Greedy => {
            let policy = solve_greedy(&model, opts.greedy_mode);
            let report = metrics(evaluate_policy(&model, &policy)?)?;
            let _ = writeln!(out, "ltv={:.6}", report.ltv);
            artifact.solver = "greedy".into();
            artifact.ltv = Some(report.ltv);
            policy
        }
        SolverChoice::Bf => {
            let (value, policy) = solve_bf_one_round(&model);
            let _ = writeln!(out, "value={value:.6}");
            artifact.solver = "bf".into();
            artifact.value = Some(value);
            policy
        }
        SolverChoice::BfUnrolled(horizon) => {
            let k_days = horizon.unwrap_or(opts.k_days);
            if k_days == 0 {
                return Err(CliError::Input("--k-days must be at least 1".into()));
            }
            let (value, policy) = solve_bf_unrolled(&model, k_days);
            let _ = writeln!(out, "value={value:.6}");
            let _ = writeln!(out, "k_days={k_days}");
            artifact.solver = "bf-unrolled".into();
            artifact.value = Some(value);
            artifact.k_days = Some(k_days);
            policy
        }
        SolverChoice::Mreopt => {
            let res = solve_mreopt(&model, opts.epsilon)?;
            let report = metrics(evaluate_policy(&model, &res.policy)?)?;
            let _ = writeln!(out, "ltv={:.6}", res.ltv);
            let _ = writeln!(out, "evaluated_ltv={:.6}", report.ltv);
            let _ = writeln!(out, "iterations={}", res.iterations);
            if opts.trace {
                for (i, step) in res.bracket_trace.iter().enumerate() {
                    let branch = match step.branch {
                        BranchTaken::Left => "left",
                        BranchTaken::Right => "right",
                    };
                    let _ = writeln!(
                        out,
                        "trace[{i}]: left={:.6} right={:.6} g={:.6} branch={branch}",
                        step.left, step.right, step.g
                    );
                }
            }
            artifact.solver = "mreopt".into();
            artifact.ltv = Some(res.ltv);
            artifact.evaluated_ltv = Some(report.ltv);
            artifact.iterations = Some(res.iterations);
            artifact.trace = opts.trace.then_some(res.bracket_trace);
            res.policy
        }
    };

    let labels = policy_to_labels(&model, &policy)?;
    let _ = writeln!(
        out,
        "policy={}",
        serde_json::to_string(&labels).expect("label maps serialize")
    );
    if let Some(path) = &opts.out {
        artifact.policy = labels;
        save_json(path, &artifact)?;
    }
    Ok(out)
}

// ── eval ────────────────────────────────────────────────────────────────

pub fn cmd_eval(model_path: &Path, policy_path: &Path) -> Result<String, CliError> {
    let model = load_model(model_path)?;
    let policy = load_policy(policy_path, &model)?;
    let stats = evaluate_policy(&model, &policy)?;
    let report = metrics(stats)?;
    Ok(format!(
        "p={:.6}\nr={:.6}\nl={:.6}\nltv={:.6}\nlt={:.6}\nctr={:.6}\nimmortal={}\n",
        stats.p, stats.r, stats.l, report.ltv, report.lt, report.ctr, report.immortal
    ))
}

// ── simulate ────────────────────────────────────────────────────────────

pub struct SimulateOpts {
    pub episodes: usize,
    pub seed: u64,
    pub max_rounds: usize,
    pub mode: SimMode,
}

pub fn cmd_simulate(
    model_path: &Path,
    policy_path: &Path,
    opts: &SimulateOpts,
) -> Result<String, CliError> {
    if opts.episodes == 0 {
        return Err(CliError::Input("--episodes must be at least 1".into()));
    }
    if opts.max_rounds == 0 {
        return Err(CliError::Input("--max-rounds must be at least 1".into()));
    }
    let model = load_model(model_path)?;
    let policy = load_policy(policy_path, &model)?;
    let run =
        simulate_online(&model, &policy, opts.episodes, opts.seed, opts.max_rounds, opts.mode)?;
    Ok(format!(
        "episodes={}\nmean_ltv={:.6}\nstderr_ltv={:.6}\nmean_lt={:.6}\nstderr_lt={:.6}\ntruncated_fraction={:.6}\n",
        run.n_episodes, run.mean_ltv, run.stderr_ltv, run.mean_lt, run.stderr_lt,
        run.truncated_fraction
    ))
}

// ── compare ─────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Text,
}

pub struct CompareOpts {
    pub epsilon: f64,
    pub format: OutputFormat,
    pub greedy_mode: GreedyMode,
    pub out: Option<PathBuf>,
}

pub fn cmd_compare(
    model_paths: &[PathBuf],
    sweep_path: Option<&Path>,
    opts: &CompareOpts,
) -> Result<String, CliError> {
    if !(opts.epsilon > 0.0) {
        return Err(CliError::Input(format!("epsilon must be positive, got {}", opts.epsilon)));
    }
    let (models, sweep): (Vec<(String, ltv_core::DagModel)>, Option<SweepFile>) = match sweep_path
    {
        Some(path) => {
            let sweep: SweepFile = read_json(path)?;
            (sweep_models(&sweep)?, Some(sweep))
        }
        None => {
            if model_paths.is_empty() {
                return Err(CliError::Input(
                    "give at least one --model file or a --sweep file".into(),
                ));
            }
            let mut models = Vec::new();
            for path in model_paths {
                models.push((model_id_of(path), load_model(path)?));
            }
            (models, None)
        }
    };

    let rows = compare(&models, opts.epsilon, opts.greedy_mode)?;
    let text = match (opts.format, &sweep) {
        (OutputFormat::Csv, _) => render_csv(&rows),
        (OutputFormat::Text, Some(sweep)) => {
            render_sweep_text(&rows, &sweep.lambda, &sweep.m, &sweep.seeds)
        }
        (OutputFormat::Text, None) => render_text(&rows),
    };
    if let Some(path) = &opts.out {
        fs::write(path, &text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn model_id_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

// ── certify ─────────────────────────────────────────────────────────────

pub struct CertifyOpts {
    pub instances: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub out: Option<PathBuf>,
}

/// Exercise the exact solver against brute-force enumeration on seeded
/// random instances. Checks, per instance, with tolerance 10 * epsilon:
/// the solver's value and its adopted policy's exact value match the
/// enumeration optimum, both baselines stay dominated, and the pass value
/// at the solution is a fixed point. Any failing instance is written out
/// for replay and the command exits nonzero.
pub fn cmd_certify(opts: &CertifyOpts) -> Result<String, CliError> {
    if opts.instances == 0 {
        return Err(CliError::Input("--instances must be at least 1".into()));
    }
    if opts.max_states == 0 || opts.max_actions == 0 {
        return Err(CliError::Input("--max-states and --max-actions must be at least 1".into()));
    }
    if !(opts.epsilon > 0.0) {
        return Err(CliError::Input(format!("epsilon must be positive, got {}", opts.epsilon)));
    }
    // Refuse configurations whose enumeration cannot finish.
    match (opts.max_actions as u128).checked_pow(opts.max_states as u32) {
        Some(bound) if bound <= POLICY_CAP => {}
        bound => {
            return Err(EvalError::TooManyPolicies { count: bound.unwrap_or(u128::MAX) }.into())
        }
    }

    let cfg = InstanceConfig {
        max_decision_states: opts.max_states,
        max_actions: opts.max_actions,
        ..InstanceConfig::default()
    };
    let tolerance = 10.0 * opts.epsilon;
    let mut report = String::new();
    let _ = writeln!(
        report,
        "certifying {} instances (max_states={}, max_actions={}, seed={}, epsilon={:e}, tolerance={:e})",
        opts.instances, opts.max_states, opts.max_actions, opts.seed, opts.epsilon, tolerance
    );

    let mut failures = 0usize;
    for i in 0..opts.instances {
        let instance_seed = substream(opts.seed, "certify", i as u64);
        let model = random_instance(&cfg, instance_seed);
        let oracle = enumerate_oracle(&model)?;
        let res = solve_mreopt(&model, opts.epsilon)?;
        let adopted = metrics(evaluate_policy(&model, &res.policy)?)?.ltv;
        let greedy_policy = solve_greedy(&model, GreedyMode::ConditionalOnSurvival);
        let greedy = metrics(evaluate_policy(&model, &greedy_policy)?)?.ltv;
        let (_, bf_policy) = solve_bf_one_round(&model);
        let bf = metrics(evaluate_policy(&model, &bf_policy)?)?.ltv;
        let pass = dp_pass(&model, res.ltv);
        let residual = (pass.init.scalarize(res.ltv) - res.ltv).abs();

        let mut problems = Vec::new();
        if (res.ltv - oracle.best_ltv).abs() > tolerance {
            problems.push(format!("solver {:.9} vs oracle {:.9}", res.ltv, oracle.best_ltv));
        }
        if (adopted - oracle.best_ltv).abs() > tolerance {
            problems.push(format!(
                "adopted policy evaluates to {adopted:.9} vs oracle {:.9}",
                oracle.best_ltv
            ));
        }
        if greedy > adopted + tolerance {
            problems.push(format!("greedy {greedy:.9} beats the optimum {adopted:.9}"));
        }
        if bf > adopted + tolerance {
            problems.push(format!("one-round {bf:.9} beats the optimum {adopted:.9}"));
        }
        if residual > tolerance {
            problems.push(format!("fixed-point residual {residual:.3e}"));
        }

        if problems.is_empty() {
            let _ = writeln!(
                report,
                "instance {i:04} seed={instance_seed} states={} ltv={:.6} ok",
                model.n_states(),
                oracle.best_ltv
            );
        } else {
            failures += 1;
            let dump = PathBuf::from(format!("certify_failure_{i:04}.json"));
            save_json(&dump, &model)?;
            let _ = writeln!(
                report,
                "instance {i:04} seed={instance_seed} states={} FAILED: {} (model written to {})",
                model.n_states(),
                problems.join("; "),
                dump.display()
            );
        }
    }
    let _ = writeln!(report, "certified {}/{} instances", opts.instances - failures, opts.instances);

    if let Some(path) = &opts.out {
        fs::write(path, &report)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    if failures > 0 {
        Err(CliError::Certification(report))
    } else {
        Ok(report)
    }
}
