//! Seeded random model instances.
//!
//! Certification and property tests need many small, always-valid models.
//! The generator keeps every instance honest by construction: states chain
//! forward so everything is reachable, every action's probabilities sum to
//! exactly 1 (the last transition takes the float remainder), and loss
//! probabilities stay inside a configured band so lifetime values remain
//! finite unless zero-loss actions are explicitly enabled.

use crate::model::{ActionSpec, DagModel, StateId, StateNode, Transition};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceConfig {
    /// Decision states per instance, drawn uniformly from 1..=this.
    pub max_decision_states: usize,
    /// Actions per decision state, drawn uniformly from 1..=this.
    pub max_actions: usize,
    /// Loss probability band for risky actions.
    pub min_loss_prob: f64,
    pub max_loss_prob: f64,
    /// Chance that an action carries no loss transition at all; zero keeps
    /// every model bounded.
    pub zero_loss_action_prob: f64,
    /// Upper bound for transition rewards (and the model's declared cap).
    pub r_max: f64,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig {
            max_decision_states: 8,
            max_actions: 3,
            min_loss_prob: 0.01,
            max_loss_prob: 0.5,
            zero_loss_action_prob: 0.0,
            r_max: 1.0,
        }
    }
}

/// Generate one valid model from `seed`.
///
/// Decision states are `0..n` with init 0, then loss, then survive. The
/// first action of state `i` always steps to state `i + 1` (or survive at
/// the end), so the whole chain is reachable from init and every state
/// reaches a terminal regardless of the other draws.
pub fn random_instance(cfg: &InstanceConfig, seed: u64) -> DagModel {
    assert!(cfg.max_decision_states >= 1 && cfg.max_actions >= 1);
    assert!(0.0 < cfg.min_loss_prob && cfg.min_loss_prob <= cfg.max_loss_prob);
    assert!(cfg.max_loss_prob < 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n = rng.random_range(1..=cfg.max_decision_states);
    let loss = StateId(n);
    let survive = StateId(n + 1);

    let mut states = Vec::with_capacity(n + 2);
    for i in 0..n {
        let spine = if i + 1 < n { StateId(i + 1) } else { survive };
        // Anything strictly ahead of the spine plus survive is fair game.
        let pool: Vec<StateId> =
            (i + 1..n).map(StateId).chain(std::iter::once(survive)).collect();

        let n_actions = rng.random_range(1..=cfg.max_actions);
        let mut actions = Vec::with_capacity(n_actions);
        for ai in 0..n_actions {
            let mut targets = vec![if ai == 0 { spine } else { pool[rng.random_range(0..pool.len())] }];
            if pool.len() > 1 && rng.random_bool(0.5) {
                let extra = pool[rng.random_range(0..pool.len())];
                if !targets.contains(&extra) {
                    targets.push(extra);
                }
            }

            let zero_loss =
                cfg.zero_loss_action_prob > 0.0 && rng.random_bool(cfg.zero_loss_action_prob);
            let p_loss = if zero_loss {
                0.0
            } else {
                rng.random_range(cfg.min_loss_prob..=cfg.max_loss_prob)
            };
            let weights: Vec<f64> =
                targets.iter().map(|_| rng.random_range(0.1..1.0)).collect();
            let weight_sum: f64 = weights.iter().sum();

            let mut transitions = Vec::with_capacity(targets.len() + 1);
            if p_loss > 0.0 {
                transitions.push(Transition { target: loss, probability: p_loss, reward: 0.0 });
            }
            // The last onward transition absorbs the float remainder so the
            // action's probabilities sum to exactly 1.0.
            let mut acc = p_loss;
            let last = targets.len() - 1;
            for (k, (&target, &w)) in targets.iter().zip(&weights).enumerate() {
                let probability =
                    if k == last { 1.0 - acc } else { w / weight_sum * (1.0 - p_loss) };
                acc += probability;
                transitions.push(Transition {
                    target,
                    probability,
                    reward: rng.random_range(0.0..cfg.r_max),
                });
            }
            actions.push(ActionSpec { label: format!("a{ai}"), transitions });
        }
        states.push(StateNode { id: StateId(i), label: format!("s{i}"), actions });
    }
    states.push(StateNode { id: loss, label: "loss".into(), actions: vec![] });
    states.push(StateNode { id: survive, label: "surv".into(), actions: vec![] });

    let model = DagModel { states, init: StateId(0), loss, survive, r_max: cfg.r_max };
    debug_assert!(model.validate().ok(), "generator broke its own rules: {}", model.validate());
    model
}
