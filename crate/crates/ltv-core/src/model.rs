//! DAG-structured Markov decision process with two absorbing outcomes.
//!
//! A model is a finite set of states, each carrying an ordered list of
//! actions; an action is a probability distribution over transitions, and
//! every transition carries a non-negative reward. Two designated states
//! absorb every trajectory: `loss` (the customer is gone for good) and
//! `survive` (the customer outlives the round and will restart it). The
//! subgraph spanned by the non-terminal states must be acyclic, so a round
//! is always a finite walk from `init` into one of the two terminals.
//!
//! This module owns the model representation, structural validation, the
//! deterministic topological ordering every backward pass consumes, and the
//! boundedness classification callers must consult before maximizing
//! lifetime value: a strategy that never risks `loss` while collecting
//! reward makes the objective diverge.

use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use thiserror::Error;

/// Probability sums may deviate from 1 by at most this much.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Dense index of a state within its model.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One probabilistic outcome of an action. `probability` must be positive:
/// impossible outcomes are omitted, never written with probability zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub target: StateId,
    #[serde(rename = "p")]
    pub probability: f64,
    #[serde(rename = "r")]
    pub reward: f64,
}

/// An action: a label plus a distribution over transitions summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub label: String,
    pub transitions: Vec<Transition>,
}

/// A state and its ordered action list. Terminal states carry no actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateNode {
    pub id: StateId,
    pub label: String,
    pub actions: Vec<ActionSpec>,
}

/// A one-round decision model. `states[i].id == i` for all `i`; `loss` and
/// `survive` are the only terminals; every reward lies in `[0, r_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagModel {
    pub states: Vec<StateNode>,
    pub init: StateId,
    pub loss: StateId,
    pub survive: StateId,
    pub r_max: f64,
}

/// How the round-restarting objective behaves on a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundedness {
    /// Every strategy risks `loss`; r/(1-p) is finite for all of them.
    Bounded,
    /// Some strategy reaches `survive` with probability 1 and positive
    /// one-round reward; the objective diverges.
    UnboundedLtv,
    /// Immortal strategies exist but collect nothing; their value is
    /// defined as 0 and the optimum is still finite.
    ZeroValueImmortal,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("the non-terminal subgraph contains a cycle")]
    CycleDetected,
}

// ── Validation ──────────────────────────────────────────────────────────

/// A single violated rule, with enough location detail to fix the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub rule: &'static str,
    pub location: String,
    pub message: String,
}

impl Violation {
    fn new(rule: &'static str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { rule, location: location.into(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.rule, self.location, self.message)
    }
}

/// Result of `DagModel::validate`. Violations are data, not failures: an
/// empty list means the model honors every structural rule.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

impl DagModel {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Panics if `id` is out of range; validate untrusted input first.
    pub fn state(&self, id: StateId) -> &StateNode {
        &self.states[id.index()]
    }

    pub fn is_terminal(&self, id: StateId) -> bool {
        id == self.loss || id == self.survive
    }

    /// Non-terminal state ids in ascending order.
    pub fn decision_state_ids(&self) -> impl Iterator<Item = StateId> + '_ {
        self.states.iter().map(|s| s.id).filter(|&id| !self.is_terminal(id))
    }

    pub fn state_by_label(&self, label: &str) -> Option<&StateNode> {
        self.states.iter().find(|s| s.label == label)
    }

    /// Rescale any action distribution whose sum drifts from 1 by at most
    /// `PROB_TOLERANCE`. Larger drifts are left for `validate` to report.
    pub fn normalize_probabilities(&mut self) {
        for s in &mut self.states {
            for a in &mut s.actions {
                let sum: f64 = a.transitions.iter().map(|t| t.probability).sum();
                if sum != 1.0 && (sum - 1.0).abs() <= PROB_TOLERANCE {
                    for t in &mut a.transitions {
                        t.probability /= sum;
                    }
                }
            }
        }
    }

    /// Check every structural rule and report all violations found.
    ///
    /// Graph-level rules (acyclicity, reachability) are only meaningful once
    /// ids, role designations, and transition targets are indexable; when
    /// those prerequisites fail, the graph rules are skipped and the
    /// prerequisite violations tell the caller why.
    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let n = self.states.len();

        let mut dense = true;
        for (i, s) in self.states.iter().enumerate() {
            if s.id.index() != i {
                dense = false;
                out.push(Violation::new(
                    "dense-ids",
                    format!("state position {i}"),
                    format!("found id {} at position {i}; ids must be 0..{n} in order", s.id),
                ));
            }
        }

        let mut roles_ok = true;
        for (role, id) in [("init", self.init), ("loss", self.loss), ("survive", self.survive)] {
            if id.index() >= n {
                roles_ok = false;
                out.push(Violation::new(
                    "role-range",
                    role,
                    format!("designated {role} state {id} is out of range (model has {n} states)"),
                ));
            }
        }
        if self.init == self.loss || self.init == self.survive || self.loss == self.survive {
            roles_ok = false;
            out.push(Violation::new(
                "distinct-roles",
                "model",
                format!(
                    "init {}, loss {} and survive {} must be three distinct states",
                    self.init, self.loss, self.survive
                ),
            ));
        }

        if !self.r_max.is_finite() || self.r_max < 0.0 {
            out.push(Violation::new(
                "reward-range",
                "model",
                format!("r_max must be finite and non-negative, got {}", self.r_max),
            ));
        }

        let mut targets_ok = true;
        for s in &self.states {
            let terminal = s.id == self.loss || s.id == self.survive;
            if terminal && !s.actions.is_empty() {
                out.push(Violation::new(
                    "terminal-has-actions",
                    format!("state {}", s.label),
                    format!("terminal state carries {} action(s); it must have none", s.actions.len()),
                ));
            }
            if !terminal && s.actions.is_empty() {
                out.push(Violation::new(
                    "missing-actions",
                    format!("state {}", s.label),
                    "non-terminal state has no actions".to_string(),
                ));
            }
            for a in &s.actions {
                let loc = format!("({}, {})", s.label, a.label);
                let mut sum = 0.0;
                for t in &a.transitions {
                    if t.target.index() >= n {
                        targets_ok = false;
                        out.push(Violation::new(
                            "bad-target",
                            loc.clone(),
                            format!("transition targets unknown state {}", t.target),
                        ));
                    }
                    if t.probability == 0.0 {
                        out.push(Violation::new(
                            "zero-probability",
                            loc.clone(),
                            "impossible transitions must be omitted, not written with p = 0".to_string(),
                        ));
                    } else if !(t.probability > 0.0 && t.probability <= 1.0) {
                        out.push(Violation::new(
                            "probability-range",
                            loc.clone(),
                            format!("transition probability must lie in (0, 1], got {}", t.probability),
                        ));
                    }
                    if !t.reward.is_finite()
                        || t.reward < 0.0
                        || (self.r_max.is_finite() && t.reward > self.r_max)
                    {
                        out.push(Violation::new(
                            "reward-range",
                            loc.clone(),
                            format!("reward must lie in [0, {}], got {}", self.r_max, t.reward),
                        ));
                    }
                    sum += t.probability;
                }
                if !((sum - 1.0).abs() <= PROB_TOLERANCE) {
                    out.push(Violation::new(
                        "probability-sum",
                        loc.clone(),
                        format!("transition probabilities sum to {sum}, expected 1 within {PROB_TOLERANCE}"),
                    ));
                }
            }
        }

        if dense && roles_ok && targets_ok {
            if self.topological_order().is_err() {
                out.push(Violation::new(
                    "acyclic",
                    "model",
                    "the non-terminal subgraph contains a cycle".to_string(),
                ));
            }

            // Forward reachability from init over every action.
            let mut seen = vec![false; n];
            let mut stack = vec![self.init];
            seen[self.init.index()] = true;
            while let Some(sid) = stack.pop() {
                if self.is_terminal(sid) {
                    continue;
                }
                for a in &self.state(sid).actions {
                    for t in &a.transitions {
                        if !seen[t.target.index()] {
                            seen[t.target.index()] = true;
                            stack.push(t.target);
                        }
                    }
                }
            }
            for s in &self.states {
                if !self.is_terminal(s.id) && !seen[s.id.index()] {
                    out.push(Violation::new(
                        "unreachable",
                        format!("state {}", s.label),
                        "not reachable from init".to_string(),
                    ));
                }
            }

            // Backward reachability from the terminals.
            let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
            for s in &self.states {
                if self.is_terminal(s.id) {
                    continue;
                }
                for a in &s.actions {
                    for t in &a.transitions {
                        preds[t.target.index()].push(s.id.index());
                    }
                }
            }
            let mut escapes = vec![false; n];
            let mut stack = vec![self.loss.index(), self.survive.index()];
            escapes[self.loss.index()] = true;
            escapes[self.survive.index()] = true;
            while let Some(v) = stack.pop() {
                for &u in &preds[v] {
                    if !escapes[u] {
                        escapes[u] = true;
                        stack.push(u);
                    }
                }
            }
            for s in &self.states {
                if !self.is_terminal(s.id) && !escapes[s.id.index()] {
                    out.push(Violation::new(
                        "dead-end",
                        format!("state {}", s.label),
                        "neither loss nor survive is reachable from here".to_string(),
                    ));
                }
            }
        }

        ValidationReport { violations: out }
    }

    /// Deterministic reverse topological order: `survive` first, `loss`
    /// second, `init` last, and every transition points from a later
    /// position to an earlier one. Ties resolve to the smallest id.
    ///
    /// Call on validated models; dense ids and in-range targets are assumed.
    pub fn topological_order(&self) -> Result<Vec<StateId>, ModelError> {
        let n = self.states.len();
        let mut order = Vec::with_capacity(n);
        order.push(self.survive);
        order.push(self.loss);

        // Count per-state edges into non-terminal targets; a state becomes
        // ready once all of them point at already-placed states.
        let mut out_remaining = vec![0usize; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for s in &self.states {
            if self.is_terminal(s.id) {
                continue;
            }
            for a in &s.actions {
                for t in &a.transitions {
                    if !self.is_terminal(t.target) {
                        out_remaining[s.id.index()] += 1;
                        preds[t.target.index()].push(s.id.index());
                    }
                }
            }
        }

        let mut ready = BinaryHeap::new();
        for s in &self.states {
            if !self.is_terminal(s.id) && out_remaining[s.id.index()] == 0 {
                ready.push(Reverse(s.id.index()));
            }
        }
        while let Some(Reverse(u)) = ready.pop() {
            order.push(StateId(u));
            for &p in &preds[u] {
                out_remaining[p] -= 1;
                if out_remaining[p] == 0 {
                    ready.push(Reverse(p));
                }
            }
        }

        if order.len() != n {
            return Err(ModelError::CycleDetected);
        }
        Ok(order)
    }

    /// Classify whether maximizing r/(1-p) over strategies is well-posed.
    ///
    /// A strategy reaches `survive` with probability 1 exactly when every
    /// state it can visit uses an action none of whose transitions can fall
    /// into `loss` (impossible transitions are omitted from models, so edge
    /// presence is exact). The best reward such strategies can collect
    /// decides between the three outcomes. Call on validated models.
    pub fn check_boundedness(&self) -> Boundedness {
        let order = match self.topological_order() {
            Ok(o) => o,
            Err(_) => return Boundedness::Bounded,
        };
        let n = self.states.len();
        let mut safe = vec![false; n];
        let mut best = vec![0.0f64; n];
        safe[self.survive.index()] = true;

        // Terminals occupy positions 0 and 1; the rest see their successors
        // already classified.
        for &sid in order.iter().skip(2) {
            let mut state_best: Option<f64> = None;
            for a in &self.state(sid).actions {
                if a.transitions.iter().any(|t| !safe[t.target.index()]) {
                    continue;
                }
                let v: f64 = a
                    .transitions
                    .iter()
                    .map(|t| t.probability * (t.reward + best[t.target.index()]))
                    .sum();
                state_best = Some(state_best.map_or(v, |b: f64| b.max(v)));
            }
            if let Some(v) = state_best {
                safe[sid.index()] = true;
                best[sid.index()] = v;
            }
        }

        if !safe[self.init.index()] {
            Boundedness::Bounded
        } else if best[self.init.index()] > 0.0 {
            Boundedness::UnboundedLtv
        } else {
            Boundedness::ZeroValueImmortal
        }
    }
}
