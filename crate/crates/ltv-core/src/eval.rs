//! Policy evaluation, lifetime metrics, an exhaustive oracle, and a
//! seeded Monte Carlo simulator.
//!
//! Evaluation is exact: one backward pass per policy propagates the
//! triple (survival probability, expected reward, expected sends) through
//! the DAG. Metrics turn one-round triples into per-customer quantities
//! via the geometric restart identity: a customer who survives each round
//! with probability p lives 1 / (1 - p) rounds in expectation, so
//! lifetime value is r / (1 - p) and the identity ctr * lt = ltv holds
//! whenever sends are counted.

use crate::model::{DagModel, StateId};
use crate::solver::{
    solve_bf_one_round, solve_greedy, solve_mreopt, GreedyMode, Policy, SolverError,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Enumeration refuses models with more deterministic policies than this.
pub const POLICY_CAP: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("policy selects action {index} at state `{state}`, which has {available} action(s)")]
    InvalidPolicy { state: String, index: usize, available: usize },
    #[error(
        "UnboundedLtv: the policy survives every round with positive reward, \
         so lifetime value diverges"
    )]
    UnboundedLtv,
    #[error("{count} deterministic policies exceed the enumeration cap of {POLICY_CAP}")]
    TooManyPolicies { count: u128 },
    #[error(
        "click simulation draws one click per send, so it needs rewards within \
         [0, 1]; the model declares r_max = {r_max}"
    )]
    ModeMismatch { r_max: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// One-round outcome of a fixed policy: survival probability, expected
/// reward, and expected sends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundStats {
    pub p: f64,
    pub r: f64,
    pub l: f64,
}

/// Per-customer metrics induced by a one-round outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Expected reward over the customer's whole life, r / (1 - p).
    pub ltv: f64,
    /// Expected sends over the customer's whole life, l / (1 - p).
    pub lt: f64,
    /// Reward per send, r / l (0 when the policy never sends).
    pub ctr: f64,
    /// True when the policy survives with probability exactly 1 and
    /// collects nothing; ltv is then 0 by definition and lt is infinite.
    pub immortal: bool,
}

/// An action counts as a send when it is labeled `send`; on models that
/// label nothing `send`, any action that can pay a reward counts instead,
/// so lt and ctr stay meaningful on hand-written graphs.
fn send_counting(model: &DagModel) -> impl Fn(&crate::model::ActionSpec) -> bool + '_ {
    let labeled = model.states.iter().any(|s| s.actions.iter().any(|a| a.label == "send"));
    move |a: &crate::model::ActionSpec| {
        if labeled {
            a.label == "send"
        } else {
            a.transitions.iter().any(|t| t.reward > 0.0)
        }
    }
}

/// Exact one-round triple of `policy` on a validated model.
pub fn evaluate_policy(model: &DagModel, policy: &Policy) -> Result<RoundStats, EvalError> {
    let order = model.topological_order().expect("validated model is acyclic");
    let is_send = send_counting(model);
    let n = model.n_states();
    let mut p = vec![0.0f64; n];
    let mut r = vec![0.0f64; n];
    let mut l = vec![0.0f64; n];
    p[model.survive.index()] = 1.0;

    for &sid in order.iter().skip(2) {
        let state = model.state(sid);
        let idx = policy.action_index(sid).unwrap_or(usize::MAX);
        let action = state.actions.get(idx).ok_or_else(|| EvalError::InvalidPolicy {
            state: state.label.clone(),
            index: idx,
            available: state.actions.len(),
        })?;
        let mut ps = 0.0;
        let mut rs = 0.0;
        let mut ls = if is_send(action) { 1.0 } else { 0.0 };
        for t in &action.transitions {
            ps += t.probability * p[t.target.index()];
            rs += t.probability * (t.reward + r[t.target.index()]);
            ls += t.probability * l[t.target.index()];
        }
        p[sid.index()] = ps;
        r[sid.index()] = rs;
        l[sid.index()] = ls;
    }

    Ok(RoundStats {
        p: p[model.init.index()],
        r: r[model.init.index()],
        l: l[model.init.index()],
    })
}

/// Lifetime metrics of a one-round triple.
///
/// Survival probability exactly 1 means the customer never churns: with
/// zero reward that is the immortal-at-zero-value convention, with
/// positive reward the lifetime value diverges and evaluation fails.
pub fn metrics(stats: RoundStats) -> Result<MetricsReport, EvalError> {
    if stats.p >= 1.0 {
        if stats.r > 0.0 {
            return Err(EvalError::UnboundedLtv);
        }
        return Ok(MetricsReport { ltv: 0.0, lt: f64::INFINITY, ctr: 0.0, immortal: true });
    }
    let lifetime = 1.0 / (1.0 - stats.p);
    Ok(MetricsReport {
        ltv: stats.r * lifetime,
        lt: stats.l * lifetime,
        ctr: if stats.l == 0.0 { 0.0 } else { stats.r / stats.l },
        immortal: false,
    })
}

// ── Exhaustive oracle ───────────────────────────────────────────────────

/// Every deterministic policy with its metrics, plus the best one.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_ltv: f64,
    pub best_policy: Policy,
    pub table: Vec<(Policy, MetricsReport)>,
}

/// Evaluate every deterministic policy by brute force.
///
/// Policies enumerate in lexicographic order over decision states taken
/// by ascending id, and a later policy replaces the incumbent only when
/// strictly better, so `best_policy` is the lexicographically smallest
/// maximizer. Immortal zero-reward policies participate at value 0;
/// immortal rewarding policies make the whole model unbounded and error.
pub fn enumerate_oracle(model: &DagModel) -> Result<OracleResult, EvalError> {
    let decisions: Vec<StateId> = model.decision_state_ids().collect();
    let mut count: u128 = 1;
    for &sid in &decisions {
        count = count.saturating_mul(model.state(sid).actions.len() as u128);
    }
    if count > POLICY_CAP {
        return Err(EvalError::TooManyPolicies { count });
    }

    let mut choice = vec![0usize; model.n_states()];
    let mut best: Option<(f64, Policy)> = None;
    let mut table = Vec::with_capacity(count as usize);
    'sweep: loop {
        let policy = Policy { choice: choice.clone() };
        let report = metrics(evaluate_policy(model, &policy)?)?;
        if best.as_ref().is_none_or(|(b, _)| report.ltv > *b) {
            best = Some((report.ltv, policy.clone()));
        }
        table.push((policy, report));

        // Odometer over decision states; the largest id is the least
        // significant digit.
        for pos in (0..decisions.len()).rev() {
            let sid = decisions[pos];
            choice[sid.index()] += 1;
            if choice[sid.index()] < model.state(sid).actions.len() {
                continue 'sweep;
            }
            choice[sid.index()] = 0;
        }
        break;
    }

    let (best_ltv, best_policy) = best.expect("at least one policy exists");
    Ok(OracleResult { best_ltv, best_policy, table })
}

// ── Monte Carlo ─────────────────────────────────────────────────────────

/// What a simulated customer earns per rewarding transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Draw a unit click with probability equal to the edge reward.
    /// Requires rewards within [0, 1].
    Click,
    /// Credit the edge reward deterministically.
    ExpectedReward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimReport {
    pub n_episodes: usize,
    pub mean_ltv: f64,
    pub stderr_ltv: f64,
    pub mean_lt: f64,
    pub stderr_lt: f64,
    /// Share of episodes cut off at `max_rounds` before churning.
    pub truncated_fraction: f64,
}

/// Sample mean and standard error, accumulated stably.
#[derive(Debug, Clone, Copy, Default)]
struct RunningMoments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Simulate whole customer lives under `policy`.
///
/// Episode `i` runs on its own ChaCha8 stream `i` of `seed`, so results
/// are reproducible and independent of episode order. A life is rounds
/// restarted from init until the walk absorbs in loss, cut off after
/// `max_rounds` surviving rounds.
pub fn simulate_online(
    model: &DagModel,
    policy: &Policy,
    n_episodes: usize,
    seed: u64,
    max_rounds: usize,
    mode: SimMode,
) -> Result<SimReport, EvalError> {
    assert!(n_episodes >= 1, "need at least one episode");
    assert!(max_rounds >= 1, "need at least one round");
    if mode == SimMode::Click && model.r_max > 1.0 {
        return Err(EvalError::ModeMismatch { r_max: model.r_max });
    }
    // Surface bad indices before sampling anything.
    for sid in model.decision_state_ids() {
        let state = model.state(sid);
        let idx = policy.action_index(sid).unwrap_or(usize::MAX);
        if idx >= state.actions.len() {
            return Err(EvalError::InvalidPolicy {
                state: state.label.clone(),
                index: idx,
                available: state.actions.len(),
            });
        }
    }
    let is_send = send_counting(model);

    let mut value = RunningMoments::default();
    let mut sends = RunningMoments::default();
    let mut truncated = 0usize;
    for episode in 0..n_episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(episode as u64);

        let mut v = 0.0f64;
        let mut l = 0.0f64;
        let mut rounds = 0usize;
        'life: loop {
            let mut sid = model.init;
            while !model.is_terminal(sid) {
                let state = model.state(sid);
                let action = &state.actions[policy.action_index(sid).unwrap()];
                if is_send(action) {
                    l += 1.0;
                }
                // Categorical draw by cumulative walk over one uniform.
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut picked = action.transitions.last().expect("action has transitions");
                for t in &action.transitions {
                    acc += t.probability;
                    if u < acc {
                        picked = t;
                        break;
                    }
                }
                match mode {
                    SimMode::ExpectedReward => v += picked.reward,
                    SimMode::Click => {
                        if picked.reward > 0.0 && rng.random::<f64>() < picked.reward.min(1.0) {
                            v += 1.0;
                        }
                    }
                }
                sid = picked.target;
            }
            if sid == model.loss {
                break 'life;
            }
            rounds += 1;
            if rounds >= max_rounds {
                truncated += 1;
                break 'life;
            }
        }
        value.push(v);
        sends.push(l);
    }

    Ok(SimReport {
        n_episodes,
        mean_ltv: value.mean,
        stderr_ltv: value.stderr(),
        mean_lt: sends.mean,
        stderr_lt: sends.stderr(),
        truncated_fraction: truncated as f64 / n_episodes as f64,
    })
}

// ── Method comparison ───────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Greedy,
    Bf,
    Mreopt,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Greedy => "Greedy",
            Method::Bf => "BF",
            Method::Mreopt => "MREOpt",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub model_id: String,
    pub method: Method,
    pub ltv: f64,
    pub lt: f64,
    pub ctr: f64,
    pub immortal: bool,
}

/// Solve every model with all three methods and evaluate each resulting
/// policy exactly. Rows come out in input order, methods in
/// Greedy, BF, MREOpt order.
pub fn compare(
    models: &[(String, DagModel)],
    epsilon: f64,
    greedy_mode: GreedyMode,
) -> Result<Vec<CompareRow>, EvalError> {
    let mut rows = Vec::with_capacity(models.len() * 3);
    for (model_id, model) in models {
        let greedy = solve_greedy(model, greedy_mode);
        let (_, bf) = solve_bf_one_round(model);
        let opt = solve_mreopt(model, epsilon)?;
        for (method, policy) in
            [(Method::Greedy, &greedy), (Method::Bf, &bf), (Method::Mreopt, &opt.policy)]
        {
            let report = metrics(evaluate_policy(model, policy)?)?;
            rows.push(CompareRow {
                model_id: model_id.clone(),
                method,
                ltv: report.ltv,
                lt: report.lt,
                ctr: report.ctr,
                immortal: report.immortal,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActionSpec, StateNode, Transition};
    use crate::scenario::{build_push_dag, synth_prob_model};
    use std::collections::BTreeMap;

    fn two_action_model(b_p: f64, b_r: f64) -> DagModel {
        let action = |label: &str, p_surv: f64, reward: f64| ActionSpec {
            label: label.into(),
            transitions: vec![
                Transition { target: StateId(2), probability: p_surv, reward },
                Transition { target: StateId(1), probability: 1.0 - p_surv, reward: 0.0 },
            ],
        };
        DagModel {
            states: vec![
                StateNode {
                    id: StateId(0),
                    label: "s_init".into(),
                    actions: vec![action("A", 0.5, 1.0), action("B", b_p, b_r)],
                },
                StateNode { id: StateId(1), label: "s_loss".into(), actions: vec![] },
                StateNode { id: StateId(2), label: "s_surv".into(), actions: vec![] },
            ],
            init: StateId(0),
            loss: StateId(1),
            survive: StateId(2),
            r_max: 1.0,
        }
    }

    fn t2() -> DagModel {
        two_action_model(0.95, 0.4)
    }

    fn policy(choice: &[usize]) -> Policy {
        Policy { choice: choice.to_vec() }
    }

    /// Independent route to r / (1 - p): partial geometric sum over
    /// surviving k rounds and collecting once more.
    fn geometric_partial(per_round: f64, p: f64, terms: usize) -> f64 {
        let mut total = 0.0;
        let mut weight = 1.0;
        for _ in 0..terms {
            total += weight * per_round;
            weight *= p;
        }
        total
    }

    #[test]
    fn one_round_triples_are_exact() {
        let model = t2();
        let a = evaluate_policy(&model, &policy(&[0, 0, 0])).unwrap();
        assert_eq!(a, RoundStats { p: 0.5, r: 0.5, l: 1.0 });
        let b = evaluate_policy(&model, &policy(&[1, 0, 0])).unwrap();
        assert!((b.p - 0.95).abs() < 1e-15);
        assert!((b.r - 0.38).abs() < 1e-15);
        assert_eq!(b.l, 1.0);
    }

    #[test]
    fn metrics_match_the_geometric_sum() {
        let model = t2();
        let stats = evaluate_policy(&model, &policy(&[1, 0, 0])).unwrap();
        let report = metrics(stats).unwrap();
        assert!((report.ltv - 7.6).abs() < 1e-9);
        assert!((report.lt - 20.0).abs() < 1e-9);
        assert!((report.ctr - 0.38).abs() < 1e-12);
        assert!(!report.immortal);
        // 10_000 terms of 0.95^k leave a tail below 1e-200.
        assert!((report.ltv - geometric_partial(stats.r, stats.p, 10_000)).abs() < 1e-9);
        assert!((report.lt - geometric_partial(stats.l, stats.p, 10_000)).abs() < 1e-9);

        let a = metrics(evaluate_policy(&model, &policy(&[0, 0, 0])).unwrap()).unwrap();
        assert!((a.ltv - 1.0).abs() < 1e-12);
        assert!((a.lt - 2.0).abs() < 1e-12);
        assert!((a.ctr - 0.5).abs() < 1e-12);
    }

    #[test]
    fn metrics_identity_holds() {
        let report = metrics(RoundStats { p: 0.3, r: 0.2, l: 1.7 }).unwrap();
        assert!((report.ctr * report.lt - report.ltv).abs() <= 1e-9);
    }

    #[test]
    fn immortal_and_unbounded_triples() {
        let immortal = metrics(RoundStats { p: 1.0, r: 0.0, l: 3.0 }).unwrap();
        assert_eq!(immortal.ltv, 0.0);
        assert!(immortal.lt.is_infinite());
        assert_eq!(immortal.ctr, 0.0);
        assert!(immortal.immortal);

        assert_eq!(
            metrics(RoundStats { p: 1.0, r: 0.1, l: 1.0 }),
            Err(EvalError::UnboundedLtv)
        );
    }

    #[test]
    fn invalid_policy_is_rejected_with_context() {
        let model = t2();
        let err = evaluate_policy(&model, &policy(&[7, 0, 0])).unwrap_err();
        assert_eq!(
            err,
            EvalError::InvalidPolicy { state: "s_init".into(), index: 7, available: 2 }
        );
        // Too-short choice vectors are invalid, not out-of-bounds panics.
        let err = evaluate_policy(&model, &Policy { choice: vec![] }).unwrap_err();
        assert!(matches!(err, EvalError::InvalidPolicy { .. }));
    }

    #[test]
    fn send_counting_follows_labels_when_present() {
        // Push grids label sends; skip and end-day rounds count zero.
        let params: BTreeMap<String, f64> =
            [("q0".to_string(), 0.5), ("c0".to_string(), 0.2)].into();
        let model = build_push_dag(&synth_prob_model("constant", &params, 2, 1, 0).unwrap());
        // Never send: immortal at zero value, zero sends. Only (0,0) and
        // (1,0) offer a choice; skip is action 1 there, forced elsewhere.
        let all_skip = Policy { choice: vec![1, 1, 0, 0, 0, 0, 0] };
        let stats = evaluate_policy(&model, &all_skip).unwrap();
        assert_eq!(stats, RoundStats { p: 1.0, r: 0.0, l: 0.0 });
        let report = metrics(stats).unwrap();
        assert!(report.immortal);

        // Send at the first slot: one send per round.
        let send_first = Policy { choice: vec![0, 0, 0, 0, 0, 0, 0] };
        let stats = evaluate_policy(&model, &send_first).unwrap();
        assert!((stats.p - 0.8).abs() < 1e-15);
        assert!((stats.r - 0.5).abs() < 1e-15);
        assert_eq!(stats.l, 1.0);
        let report = metrics(stats).unwrap();
        assert!((report.ltv - 2.5).abs() < 1e-12);
        assert!((report.lt - 5.0).abs() < 1e-12);
        assert!((report.ctr - 0.5).abs() < 1e-12, "reward per send equals the click rate");
    }

    #[test]
    fn oracle_enumerates_the_push_grid() {
        let params: BTreeMap<String, f64> =
            [("q0".to_string(), 0.5), ("c0".to_string(), 0.2)].into();
        let model = build_push_dag(&synth_prob_model("constant", &params, 2, 1, 0).unwrap());
        let oracle = enumerate_oracle(&model).unwrap();
        // Decision states (0,0) and (1,0) have two actions each; (1,1),
        // (2,0), (2,1) are forced. 4 policies: send now (x2), send at slot
        // 1, never send.
        assert_eq!(oracle.table.len(), 4);
        assert!((oracle.best_ltv - 2.5).abs() < 1e-12);
        // Lexicographically smallest maximizer sends immediately.
        assert_eq!(oracle.best_policy.choice[0], 0);
        let values: Vec<f64> = oracle.table.iter().map(|(_, m)| m.ltv).collect();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[3] - 2.5).abs() < 1e-12 && (sorted[2] - 2.5).abs() < 1e-12);
        assert_eq!(sorted[0], 0.0, "the never-send policy is immortal at zero");
    }

    #[test]
    fn oracle_agrees_with_closed_forms_on_two_actions() {
        let oracle = enumerate_oracle(&t2()).unwrap();
        assert_eq!(oracle.table.len(), 2);
        assert!((oracle.best_ltv - 7.6).abs() < 1e-9);
        assert_eq!(oracle.best_policy.choice[0], 1);
    }

    #[test]
    fn oracle_refuses_oversized_models() {
        // 21 decision states with 2 actions each: 2^21 > 1e6.
        let n = 21usize;
        let mut states = Vec::new();
        for i in 0..n {
            let next = if i + 1 < n { StateId(i + 1) } else { StateId(n + 1) };
            let go = |reward: f64| ActionSpec {
                label: format!("go{reward}"),
                transitions: vec![
                    Transition { target: next, probability: 0.9, reward },
                    Transition { target: StateId(n), probability: 0.1, reward: 0.0 },
                ],
            };
            states.push(StateNode {
                id: StateId(i),
                label: format!("s{i}"),
                actions: vec![go(0.0), go(1.0)],
            });
        }
        states.push(StateNode { id: StateId(n), label: "loss".into(), actions: vec![] });
        states.push(StateNode { id: StateId(n + 1), label: "surv".into(), actions: vec![] });
        let model = DagModel {
            states,
            init: StateId(0),
            loss: StateId(n),
            survive: StateId(n + 1),
            r_max: 1.0,
        };
        assert!(model.validate().ok());
        assert_eq!(
            enumerate_oracle(&model),
            Err(EvalError::TooManyPolicies { count: 1 << 21 })
        );
    }

    #[test]
    fn simulation_is_reproducible_and_close_to_exact() {
        let model = t2();
        let b = policy(&[1, 0, 0]);
        let run = simulate_online(&model, &b, 20_000, 7, 10_000, SimMode::ExpectedReward).unwrap();
        let rerun =
            simulate_online(&model, &b, 20_000, 7, 10_000, SimMode::ExpectedReward).unwrap();
        assert_eq!(run, rerun);
        assert!(run.stderr_ltv > 0.0);
        assert!(
            (run.mean_ltv - 7.6).abs() <= 4.0 * run.stderr_ltv,
            "mean {} stderr {}",
            run.mean_ltv,
            run.stderr_ltv
        );
        assert!(
            (run.mean_lt - 20.0).abs() <= 4.0 * run.stderr_lt,
            "mean {} stderr {}",
            run.mean_lt,
            run.stderr_lt
        );
        assert_eq!(run.truncated_fraction, 0.0, "0.95^10000 is astronomically unlikely");
    }

    #[test]
    fn click_mode_needs_unit_rewards() {
        let mut model = t2();
        model.r_max = 2.0;
        model.states[0].actions[0].transitions[0].reward = 2.0;
        let err =
            simulate_online(&model, &policy(&[0, 0, 0]), 10, 1, 10, SimMode::Click).unwrap_err();
        assert_eq!(err, EvalError::ModeMismatch { r_max: 2.0 });

        // Rewards within [0, 1] draw unit clicks.
        let run = simulate_online(&t2(), &policy(&[1, 0, 0]), 20_000, 11, 10_000, SimMode::Click)
            .unwrap();
        assert!(
            (run.mean_ltv - 7.6).abs() <= 4.0 * run.stderr_ltv,
            "mean {} stderr {}",
            run.mean_ltv,
            run.stderr_ltv
        );
    }

    #[test]
    fn truncation_is_counted() {
        // Immortal skip policy: every episode hits the round cap.
        let mut model = t2();
        model.states[0].actions = vec![ActionSpec {
            label: "idle".into(),
            transitions: vec![Transition { target: StateId(2), probability: 1.0, reward: 0.0 }],
        }];
        let run =
            simulate_online(&model, &policy(&[0, 0, 0]), 50, 3, 5, SimMode::ExpectedReward)
                .unwrap();
        assert_eq!(run.truncated_fraction, 1.0);
        assert_eq!(run.mean_ltv, 0.0);
        assert_eq!(run.stderr_ltv, 0.0);
    }

    #[test]
    fn simulation_validates_the_policy_up_front() {
        let err = simulate_online(&t2(), &policy(&[9, 0, 0]), 10, 1, 10, SimMode::ExpectedReward)
            .unwrap_err();
        assert!(matches!(err, EvalError::InvalidPolicy { .. }));
    }

    #[test]
    fn comparison_rows_are_pinned_on_the_patient_model() {
        let rows = compare(
            &[("t2".to_string(), t2())],
            1e-6,
            GreedyMode::ConditionalOnSurvival,
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(
            rows.iter().map(|r| r.method).collect::<Vec<_>>(),
            vec![Method::Greedy, Method::Bf, Method::Mreopt]
        );
        // Greedy conditions on survival: A pays 1.0 against B's 0.4, and
        // the one-round optimum agrees, so both evaluate to ltv 1.
        for row in &rows[..2] {
            assert!((row.ltv - 1.0).abs() < 1e-12);
            assert!((row.lt - 2.0).abs() < 1e-12);
            assert!((row.ctr - 0.5).abs() < 1e-12);
        }
        assert!((rows[2].ltv - 7.6).abs() < 1e-9);
        assert!((rows[2].lt - 20.0).abs() < 1e-9);
        assert!((rows[2].ctr - 0.38).abs() < 1e-12);
        assert_eq!(format!("{}", rows[2].method), "MREOpt");
    }

    #[test]
    fn unlabeled_models_count_rewarding_actions_as_sends() {
        // No action is labeled `send`, so the rewarding action counts.
        let stats = evaluate_policy(&t2(), &policy(&[0, 0, 0])).unwrap();
        assert_eq!(stats.l, 1.0);
    }
}
