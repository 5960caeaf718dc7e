//! Push-notification day grids.
//!
//! A day has `lambda` decision slots and a send budget of `m_max`
//! notifications. Grid state `(t, m)` means `t` slots have elapsed and `m`
//! sends are spent; sending risks an immediate close (churn) and otherwise
//! earns the slot's expected click, skipping is free, and surviving slot
//! `lambda` ends the day. Per-slot click and close probabilities come from
//! a [`ProbModel`] table, either supplied directly or synthesized from a
//! named parametric family.

use crate::model::{ActionSpec, DagModel, StateId, StateNode, Transition};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario dimensions: {0}")]
    InvalidConfig(String),
    #[error("unknown probability family `{0}`")]
    UnknownFamily(String),
    #[error("invalid probability parameters: {0}")]
    InvalidParameters(String),
}

/// Per-slot click and close probabilities on a `lambda x m_max` grid,
/// indexed by elapsed slots `t` and sends already spent `m`.
///
/// Invariants: `click` in [0, 1], `close` in (0, 1], and `click == 0`
/// wherever `close == 1`: a send that certainly closes the app delivers no
/// click, so constructors zero the click there rather than storing a
/// probability no trajectory can realize.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbModel {
    lambda: usize,
    m_max: usize,
    click: Vec<f64>,
    close: Vec<f64>,
}

impl ProbModel {
    /// Build from explicit tables shaped `lambda x m_max` (slots by sends).
    pub fn from_tables(click: Vec<Vec<f64>>, close: Vec<Vec<f64>>) -> Result<Self, ScenarioError> {
        let lambda = click.len();
        if lambda == 0 || close.len() != lambda {
            return Err(ScenarioError::InvalidConfig(format!(
                "click has {lambda} row(s), close has {}; need one matching row per slot",
                close.len()
            )));
        }
        let m_max = click[0].len();
        if m_max == 0 {
            return Err(ScenarioError::InvalidConfig("tables need at least one column".into()));
        }
        if m_max > lambda {
            return Err(ScenarioError::InvalidConfig(format!(
                "send budget {m_max} exceeds the {lambda} slot(s) in a day"
            )));
        }
        let mut flat_click = Vec::with_capacity(lambda * m_max);
        let mut flat_close = Vec::with_capacity(lambda * m_max);
        for t in 0..lambda {
            if click[t].len() != m_max || close[t].len() != m_max {
                return Err(ScenarioError::InvalidConfig(format!(
                    "row {t} is ragged; every row must have {m_max} columns"
                )));
            }
            for m in 0..m_max {
                let q = click[t][m];
                let c = close[t][m];
                if !(0.0..=1.0).contains(&q) || !q.is_finite() {
                    return Err(ScenarioError::InvalidParameters(format!(
                        "click[{t}][{m}] = {q}, must lie in [0, 1]"
                    )));
                }
                if !(c > 0.0 && c <= 1.0) {
                    return Err(ScenarioError::InvalidParameters(format!(
                        "close[{t}][{m}] = {c}, must lie in (0, 1]"
                    )));
                }
                flat_click.push(if c == 1.0 { 0.0 } else { q });
                flat_close.push(c);
            }
        }
        Ok(ProbModel { lambda, m_max, click: flat_click, close: flat_close })
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Click probability when sending at slot `t` with `m` sends spent.
    pub fn click(&self, t: usize, m: usize) -> f64 {
        self.click[t * self.m_max + m]
    }

    /// Close probability when sending at slot `t` with `m` sends spent.
    pub fn close(&self, t: usize, m: usize) -> f64 {
        self.close[t * self.m_max + m]
    }
}

// ── Synthetic families ──────────────────────────────────────────────────

/// Two-peaked daily activity profile, normalized so its grid maximum is 1.
fn daypart_weights(lambda: usize) -> Vec<f64> {
    let bump = |x: f64, center: f64| (-((x - center) / 0.12).powi(2) / 2.0).exp();
    let raw: Vec<f64> = (0..lambda)
        .map(|t| {
            let x = t as f64 / lambda as f64;
            bump(x, 0.30) + bump(x, 0.75)
        })
        .collect();
    let peak = raw.iter().cloned().fold(f64::MIN, f64::max);
    raw.into_iter().map(|w| w / peak).collect()
}

/// Synthesize a probability table from a named family.
///
/// Families: `constant` (q0, c0) holds both probabilities flat; `fatigue`
/// (q0, c0, beta, gamma) decays clicks geometrically in sends spent,
/// escalates closes geometrically (capped at 1), and shapes clicks over the
/// day with a two-peak activity profile; `random-table` (q_hi, c_lo, c_hi)
/// fills both tables with seeded uniform draws.
pub fn synth_prob_model(
    family: &str,
    params: &BTreeMap<String, f64>,
    lambda: usize,
    m_max: usize,
    seed: u64,
) -> Result<ProbModel, ScenarioError> {
    let need = |key: &str| {
        params.get(key).copied().ok_or_else(|| {
            ScenarioError::InvalidParameters(format!("{family}: missing parameter `{key}`"))
        })
    };
    let check = |ok: bool, what: String| {
        if ok {
            Ok(())
        } else {
            Err(ScenarioError::InvalidParameters(format!("{family}: {what}")))
        }
    };

    let fill = |f: &mut dyn FnMut(usize, usize) -> f64| -> Vec<Vec<f64>> {
        (0..lambda).map(|t| (0..m_max).map(|m| f(t, m)).collect()).collect()
    };

    match family {
        "constant" => {
            let q0 = need("q0")?;
            let c0 = need("c0")?;
            check((0.0..=1.0).contains(&q0), format!("q0 = {q0} must lie in [0, 1]"))?;
            check(c0 > 0.0 && c0 <= 1.0, format!("c0 = {c0} must lie in (0, 1]"))?;
            ProbModel::from_tables(fill(&mut |_, _| q0), fill(&mut |_, _| c0))
        }
        "fatigue" => {
            let q0 = need("q0")?;
            let c0 = need("c0")?;
            let beta = need("beta")?;
            let gamma = need("gamma")?;
            check((0.0..=1.0).contains(&q0), format!("q0 = {q0} must lie in [0, 1]"))?;
            check(c0 > 0.0 && c0 <= 1.0, format!("c0 = {c0} must lie in (0, 1]"))?;
            check(beta > 0.0 && beta <= 1.0, format!("beta = {beta} must lie in (0, 1]"))?;
            check(gamma >= 1.0, format!("gamma = {gamma} must be at least 1"))?;
            let daypart = daypart_weights(lambda);
            ProbModel::from_tables(
                fill(&mut |t, m| q0 * beta.powi(m as i32) * daypart[t]),
                fill(&mut |_, m| (c0 * gamma.powi(m as i32)).min(1.0)),
            )
        }
        "random-table" => {
            let q_hi = need("q_hi")?;
            let c_lo = need("c_lo")?;
            let c_hi = need("c_hi")?;
            check(q_hi > 0.0 && q_hi <= 1.0, format!("q_hi = {q_hi} must lie in (0, 1]"))?;
            check(
                c_lo > 0.0 && c_lo <= c_hi && c_hi <= 1.0,
                format!("need 0 < c_lo <= c_hi <= 1, got c_lo = {c_lo}, c_hi = {c_hi}"),
            )?;
            // Click table first, then close, both row-major; the draw order
            // is part of the reproducibility contract for a given seed.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let click = fill(&mut |_, _| rng.random_range(0.0..q_hi));
            let close = fill(&mut |_, _| {
                if c_lo == c_hi {
                    c_lo
                } else {
                    rng.random_range(c_lo..c_hi)
                }
            });
            ProbModel::from_tables(click, close)
        }
        other => Err(ScenarioError::UnknownFamily(other.to_string())),
    }
}

// ── Grid construction ───────────────────────────────────────────────────

/// Build the day DAG over states `(t, m)` with `0 <= t <= lambda` and
/// `0 <= m <= min(t, m_max)`.
///
/// At `t < lambda` a state offers `send` (when budget remains) and `skip`;
/// at `t = lambda` the single `end-day` action moves to `survive`. A send
/// at `(t, m)` closes with probability `close(t, m)`, and the surviving
/// edge carries reward `click(t, m) / (1 - close(t, m))` so the expected
/// reward of the send equals its unconditional click probability exactly.
/// When `close == 1` the surviving edge is omitted entirely; states made
/// unreachable that way are pruned and ids recompacted.
pub fn build_push_dag(prob: &ProbModel) -> DagModel {
    let lambda = prob.lambda();
    let m_cap = prob.m_max();

    // id(t, m) = offset[t] + m, grid first, then loss, then survive.
    let mut offset = Vec::with_capacity(lambda + 2);
    let mut n_grid = 0usize;
    for t in 0..=lambda {
        offset.push(n_grid);
        n_grid += t.min(m_cap) + 1;
    }
    let id = |t: usize, m: usize| StateId(offset[t] + m);
    let loss = StateId(n_grid);
    let survive = StateId(n_grid + 1);

    let mut states = Vec::with_capacity(n_grid + 2);
    let mut r_max = 0.0f64;
    for t in 0..=lambda {
        for m in 0..=t.min(m_cap) {
            let mut actions = Vec::new();
            if t < lambda {
                if m < m_cap {
                    let close = prob.close(t, m);
                    let mut transitions =
                        vec![Transition { target: loss, probability: close, reward: 0.0 }];
                    if close < 1.0 {
                        let reward = prob.click(t, m) / (1.0 - close);
                        r_max = r_max.max(reward);
                        transitions.push(Transition {
                            target: id(t + 1, m + 1),
                            probability: 1.0 - close,
                            reward,
                        });
                    }
                    actions.push(ActionSpec { label: "send".into(), transitions });
                }
                actions.push(ActionSpec {
                    label: "skip".into(),
                    transitions: vec![Transition {
                        target: id(t + 1, m),
                        probability: 1.0,
                        reward: 0.0,
                    }],
                });
            } else {
                actions.push(ActionSpec {
                    label: "end-day".into(),
                    transitions: vec![Transition {
                        target: survive,
                        probability: 1.0,
                        reward: 0.0,
                    }],
                });
            }
            states.push(StateNode { id: id(t, m), label: format!("({t},{m})"), actions });
        }
    }
    states.push(StateNode { id: loss, label: "loss".into(), actions: vec![] });
    states.push(StateNode { id: survive, label: "surv".into(), actions: vec![] });

    prune_unreachable(DagModel { states, init: StateId(0), loss, survive, r_max })
}

/// Drop grid states no path from init can visit (possible when a certain
/// close removes a surviving edge), keeping both terminals and recompacting
/// ids in their original order. `r_max` is tightened to the edges kept.
fn prune_unreachable(model: DagModel) -> DagModel {
    let n = model.states.len();
    let mut keep = vec![false; n];
    keep[model.loss.index()] = true;
    keep[model.survive.index()] = true;
    let mut stack = vec![model.init];
    keep[model.init.index()] = true;
    while let Some(sid) = stack.pop() {
        if model.is_terminal(sid) {
            continue;
        }
        for a in &model.state(sid).actions {
            for t in &a.transitions {
                if !keep[t.target.index()] {
                    keep[t.target.index()] = true;
                    stack.push(t.target);
                }
            }
        }
    }
    if keep.iter().all(|&k| k) {
        return model;
    }

    let mut remap = vec![usize::MAX; n];
    let mut next = 0usize;
    for i in 0..n {
        if keep[i] {
            remap[i] = next;
            next += 1;
        }
    }
    let mut r_max = 0.0f64;
    let states = model
        .states
        .into_iter()
        .filter(|s| keep[s.id.index()])
        .map(|s| {
            let actions = s
                .actions
                .into_iter()
                .map(|a| ActionSpec {
                    label: a.label,
                    transitions: a
                        .transitions
                        .into_iter()
                        .map(|t| {
                            r_max = r_max.max(t.reward);
                            Transition { target: StateId(remap[t.target.index()]), ..t }
                        })
                        .collect(),
                })
                .collect();
            StateNode { id: StateId(remap[s.id.index()]), label: s.label, actions }
        })
        .collect();
    DagModel {
        states,
        init: StateId(remap[model.init.index()]),
        loss: StateId(remap[model.loss.index()]),
        survive: StateId(remap[model.survive.index()]),
        r_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        kv.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    fn constant(q0: f64, c0: f64, lambda: usize, m_max: usize) -> ProbModel {
        synth_prob_model("constant", &params(&[("q0", q0), ("c0", c0)]), lambda, m_max, 0).unwrap()
    }

    #[test]
    fn constant_family_holds_values_flat() {
        let p = constant(0.5, 0.2, 4, 2);
        for t in 0..4 {
            for m in 0..2 {
                assert_eq!(p.click(t, m), 0.5);
                assert_eq!(p.close(t, m), 0.2);
            }
        }
    }

    #[test]
    fn fatigue_family_decays_and_escalates_geometrically() {
        let p = synth_prob_model(
            "fatigue",
            &params(&[("q0", 0.3), ("c0", 0.05), ("beta", 0.8), ("gamma", 1.5)]),
            16,
            6,
            0,
        )
        .unwrap();
        for t in 0..16 {
            for m in 1..6 {
                if p.close(t, m) < 1.0 {
                    let click_ratio = p.click(t, m) / p.click(t, m - 1);
                    assert!((click_ratio - 0.8).abs() < 1e-12, "got {click_ratio}");
                }
                if p.close(t, m - 1) < 1.0 / 1.5 {
                    let close_ratio = p.close(t, m) / p.close(t, m - 1);
                    assert!((close_ratio - 1.5).abs() < 1e-12, "got {close_ratio}");
                }
                assert!(p.close(t, m) <= 1.0);
            }
        }
        // The day profile peaks at exactly 1 somewhere on the grid.
        let weights = daypart_weights(16);
        let peak = weights.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(peak, 1.0);
        assert!(weights.iter().all(|&w| w > 0.0 && w <= 1.0));
        // Two-peak shape: the morning peak beats the midday trough.
        let morning = weights[5]; // t/lambda ~ 0.31
        let midday = weights[8]; // t/lambda = 0.5
        assert!(morning > midday);
    }

    #[test]
    fn fatigue_zeroes_click_once_close_saturates() {
        let p = synth_prob_model(
            "fatigue",
            &params(&[("q0", 0.3), ("c0", 0.5), ("beta", 0.9), ("gamma", 2.0)]),
            8,
            4,
            0,
        )
        .unwrap();
        // c0 * gamma^m reaches 1 at m = 1 already.
        for t in 0..8 {
            assert_eq!(p.close(t, 1), 1.0);
            assert_eq!(p.click(t, 1), 0.0);
        }
    }

    #[test]
    fn random_table_is_seed_deterministic_and_in_range() {
        let args = params(&[("q_hi", 0.4), ("c_lo", 0.02), ("c_hi", 0.3)]);
        let a = synth_prob_model("random-table", &args, 6, 3, 42).unwrap();
        let b = synth_prob_model("random-table", &args, 6, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = synth_prob_model("random-table", &args, 6, 3, 43).unwrap();
        assert_ne!(a, c);
        for t in 0..6 {
            for m in 0..3 {
                assert!(a.click(t, m) >= 0.0 && a.click(t, m) < 0.4);
                assert!(a.close(t, m) >= 0.02 && a.close(t, m) < 0.3);
            }
        }
    }

    #[test]
    fn family_errors_are_specific() {
        let e = synth_prob_model("exotic", &params(&[]), 2, 1, 0).unwrap_err();
        assert_eq!(e, ScenarioError::UnknownFamily("exotic".into()));

        let e = synth_prob_model("constant", &params(&[("q0", 0.5)]), 2, 1, 0).unwrap_err();
        assert!(matches!(e, ScenarioError::InvalidParameters(ref m) if m.contains("c0")));

        let e = synth_prob_model("constant", &params(&[("q0", 0.5), ("c0", 0.0)]), 2, 1, 0)
            .unwrap_err();
        assert!(matches!(e, ScenarioError::InvalidParameters(_)));

        let e = synth_prob_model(
            "random-table",
            &params(&[("q_hi", 0.4), ("c_lo", 0.5), ("c_hi", 0.3)]),
            2,
            1,
            0,
        )
        .unwrap_err();
        assert!(matches!(e, ScenarioError::InvalidParameters(_)));
    }

    #[test]
    fn table_dimension_errors() {
        let e = ProbModel::from_tables(vec![vec![0.1], vec![0.1, 0.2]], vec![vec![0.5]; 2])
            .unwrap_err();
        assert!(matches!(e, ScenarioError::InvalidConfig(_)));

        // Budget larger than the day.
        let e = synth_prob_model("constant", &params(&[("q0", 0.5), ("c0", 0.2)]), 1, 2, 0)
            .unwrap_err();
        assert!(matches!(e, ScenarioError::InvalidConfig(_)));

        let e = ProbModel::from_tables(vec![], vec![]).unwrap_err();
        assert!(matches!(e, ScenarioError::InvalidConfig(_)));
    }

    #[test]
    fn two_slot_one_send_grid_is_pinned() {
        // lambda = 2, m_max = 1, click 0.5, close 0.2. Grid states in id
        // order: (0,0) (1,0) (1,1) (2,0) (2,1), then loss, then survive.
        let model = build_push_dag(&constant(0.5, 0.2, 2, 1));
        assert!(model.validate().ok(), "{}", model.validate());
        assert_eq!(model.n_states(), 7);
        let labels: Vec<&str> = model.states.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, vec!["(0,0)", "(1,0)", "(1,1)", "(2,0)", "(2,1)", "loss", "surv"]);
        assert_eq!(model.init, StateId(0));
        assert_eq!(model.loss, StateId(5));
        assert_eq!(model.survive, StateId(6));

        let send = &model.states[0].actions[0];
        assert_eq!(send.label, "send");
        assert_eq!(send.transitions[0].target, model.loss);
        assert_eq!(send.transitions[0].probability, 0.2);
        assert_eq!(send.transitions[0].reward, 0.0);
        assert_eq!(send.transitions[1].target, StateId(2));
        assert!((send.transitions[1].probability - 0.8).abs() < 1e-15);
        assert!((send.transitions[1].reward - 0.625).abs() < 1e-15);
        assert!((model.r_max - 0.625).abs() < 1e-15);

        let skip = &model.states[0].actions[1];
        assert_eq!(skip.label, "skip");
        assert_eq!(skip.transitions.len(), 1);
        assert_eq!(skip.transitions[0].target, StateId(1));

        // Slot lambda always ends the day.
        assert_eq!(model.states[3].actions.len(), 1);
        assert_eq!(model.states[3].actions[0].label, "end-day");
        assert_eq!(model.states[3].actions[0].transitions[0].target, model.survive);

        // Budget exhausted at (1,1): skip only.
        assert_eq!(model.states[2].actions.len(), 1);
        assert_eq!(model.states[2].actions[0].label, "skip");

        let order = model.topological_order().unwrap();
        assert_eq!(
            order,
            vec![StateId(6), StateId(5), StateId(3), StateId(4), StateId(1), StateId(2), StateId(0)]
        );
    }

    #[test]
    fn state_count_matches_closed_form_when_nothing_is_pruned() {
        // sum over t of (min(t, m_max) + 1), plus the two terminals.
        let model = build_push_dag(&constant(0.2, 0.1, 5, 3));
        let expected: usize = (0..=5).map(|t| t.min(3) + 1).sum::<usize>() + 2;
        assert_eq!(model.n_states(), expected);
        assert_eq!(model.n_states(), 20);
    }

    #[test]
    fn expected_reward_of_send_equals_click_exactly() {
        let p = synth_prob_model(
            "fatigue",
            &params(&[("q0", 0.25), ("c0", 0.04), ("beta", 0.95), ("gamma", 1.25)]),
            20,
            8,
            0,
        )
        .unwrap();
        let model = build_push_dag(&p);
        assert!(model.validate().ok());
        let mut sends = 0usize;
        for s in &model.states {
            for a in &s.actions {
                if a.label != "send" {
                    continue;
                }
                sends += 1;
                // label is "(t,m)"
                let inner = &s.label[1..s.label.len() - 1];
                let (t, m) = inner.split_once(',').unwrap();
                let (t, m): (usize, usize) = (t.parse().unwrap(), m.parse().unwrap());
                let expected_click: f64 =
                    a.transitions.iter().map(|tr| tr.probability * tr.reward).sum();
                assert!(
                    (expected_click - p.click(t, m)).abs() <= 1e-12,
                    "send at ({t},{m}): expected reward {expected_click} vs click {}",
                    p.click(t, m)
                );
            }
        }
        assert!(sends > 0);
    }

    #[test]
    fn certain_close_prunes_the_orphaned_branch() {
        // One slot, one send, close = 1 everywhere: sending is pure churn
        // and (1,1) is unreachable, leaving 4 states.
        let p = ProbModel::from_tables(vec![vec![0.0]], vec![vec![1.0]]).unwrap();
        let model = build_push_dag(&p);
        assert!(model.validate().ok(), "{}", model.validate());
        assert_eq!(model.n_states(), 4);
        let labels: Vec<&str> = model.states.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, vec!["(0,0)", "(1,0)", "loss", "surv"]);
        let send = &model.states[0].actions[0];
        assert_eq!(send.transitions.len(), 1);
        assert_eq!(send.transitions[0].target, model.loss);
        assert_eq!(model.r_max, 0.0);
    }

    #[test]
    fn transitions_only_cross_into_the_next_slot_or_a_terminal() {
        let model = build_push_dag(&constant(0.3, 0.15, 6, 2));
        let slot_of = |label: &str| -> usize {
            label[1..label.len() - 1].split_once(',').unwrap().0.parse().unwrap()
        };
        for s in &model.states {
            if model.is_terminal(s.id) {
                continue;
            }
            let t = slot_of(&s.label);
            for a in &s.actions {
                for tr in &a.transitions {
                    if model.is_terminal(tr.target) {
                        continue;
                    }
                    assert_eq!(slot_of(&model.state(tr.target).label), t + 1);
                }
            }
        }
    }
}
