//! File formats: models, scenarios, policies, and sweep definitions, all
//! JSON. Models renormalize tolerable probability drift on load and must
//! validate; policies are label-keyed maps over decision states, which
//! requires labels to be unambiguous.

use crate::error::CliError;
use ltv_core::scenario::{build_push_dag, synth_prob_model, ProbModel};
use ltv_core::{DagModel, Policy};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Pretty JSON plus a trailing newline; byte-identical for equal values.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Load, renormalize, and validate a model file.
pub fn load_model(path: &Path) -> Result<DagModel, CliError> {
    let mut model: DagModel = read_json(path)?;
    model.normalize_probabilities();
    let report = model.validate();
    if !report.ok() {
        return Err(CliError::Semantic(format!(
            "{} is not a valid model:\n{report}",
            path.display()
        )));
    }
    Ok(model)
}

// ── Scenario files ──────────────────────────────────────────────────────

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub lambda: usize,
    pub m_max: usize,
    pub prob_model: ProbModelSpec,
}

/// Either a named family with parameters or explicit tables.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbModelSpec {
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub params: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tables: Option<TablesSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablesSpec {
    pub click: Vec<Vec<f64>>,
    pub close: Vec<Vec<f64>>,
}

impl ScenarioFile {
    /// Resolve to a probability table; `seed_override` (the --seed flag)
    /// beats the seed stored in the file.
    pub fn resolve(&self, seed_override: Option<u64>) -> Result<ProbModel, CliError> {
        let spec = &self.prob_model;
        match (&spec.family, &spec.tables) {
            (Some(_), Some(_)) => Err(CliError::Input(
                "prob_model gives both a family and explicit tables; pick one".into(),
            )),
            (None, None) => Err(CliError::Input(
                "prob_model needs either a family or explicit tables".into(),
            )),
            (Some(family), None) => {
                let empty = BTreeMap::new();
                let params = spec.params.as_ref().unwrap_or(&empty);
                let seed = seed_override.or(spec.seed).unwrap_or(0);
                Ok(synth_prob_model(family, params, self.lambda, self.m_max, seed)?)
            }
            (None, Some(tables)) => {
                let prob = ProbModel::from_tables(tables.click.clone(), tables.close.clone())?;
                if prob.lambda() != self.lambda || prob.m_max() != self.m_max {
                    return Err(CliError::Input(format!(
                        "tables are {}x{} but the scenario declares lambda = {} and m_max = {}",
                        prob.lambda(),
                        prob.m_max(),
                        self.lambda,
                        self.m_max
                    )));
                }
                Ok(prob)
            }
        }
    }
}

// ── Policy files ────────────────────────────────────────────────────────

/// Label-keyed policies are only well-defined when state labels are unique
/// and action labels are unique within their state.
fn ensure_unambiguous_labels(model: &DagModel) -> Result<(), CliError> {
    let mut seen = HashSet::new();
    for s in &model.states {
        if !seen.insert(s.label.as_str()) {
            return Err(CliError::Semantic(format!(
                "model has duplicate state label `{}`; label-keyed policies are ambiguous",
                s.label
            )));
        }
        let mut actions = HashSet::new();
        for a in &s.actions {
            if !actions.insert(a.label.as_str()) {
                return Err(CliError::Semantic(format!(
                    "state `{}` has duplicate action label `{}`",
                    s.label, a.label
                )));
            }
        }
    }
    Ok(())
}

pub fn policy_to_labels(
    model: &DagModel,
    policy: &Policy,
) -> Result<BTreeMap<String, String>, CliError> {
    ensure_unambiguous_labels(model)?;
    let mut map = BTreeMap::new();
    for sid in model.decision_state_ids() {
        let state = model.state(sid);
        let idx = policy.action_index(sid).unwrap_or(usize::MAX);
        let action = state.actions.get(idx).ok_or_else(|| {
            CliError::Input(format!("policy has no valid action for state `{}`", state.label))
        })?;
        map.insert(state.label.clone(), action.label.clone());
    }
    Ok(map)
}

pub fn policy_from_labels(
    model: &DagModel,
    map: &BTreeMap<String, String>,
) -> Result<Policy, CliError> {
    ensure_unambiguous_labels(model)?;
    for key in map.keys() {
        let known = model
            .state_by_label(key)
            .is_some_and(|s| !model.is_terminal(s.id));
        if !known {
            return Err(CliError::Input(format!(
                "policy references `{key}`, which is not a decision state of this model"
            )));
        }
    }
    let mut choice = vec![0usize; model.n_states()];
    for sid in model.decision_state_ids() {
        let state = model.state(sid);
        let wanted = map.get(&state.label).ok_or_else(|| {
            CliError::Input(format!("policy is missing an entry for state `{}`", state.label))
        })?;
        let idx = state
            .actions
            .iter()
            .position(|a| &a.label == wanted)
            .ok_or_else(|| {
                CliError::Input(format!(
                    "state `{}` has no action labeled `{wanted}`",
                    state.label
                ))
            })?;
        choice[sid.index()] = idx;
    }
    Ok(Policy { choice })
}

pub fn load_policy(path: &Path, model: &DagModel) -> Result<Policy, CliError> {
    let map: BTreeMap<String, String> = read_json(path)?;
    policy_from_labels(model, &map)
}

// ── Sweep files ─────────────────────────────────────────────────────────

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub lambda: Vec<usize>,
    pub m: Vec<usize>,
    pub family: FamilySpec,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// Build one labeled model per (lambda, m, seed) combination, in the order
/// the file lists them.
pub fn sweep_models(sweep: &SweepFile) -> Result<Vec<(String, DagModel)>, CliError> {
    if sweep.lambda.is_empty() || sweep.m.is_empty() || sweep.seeds.is_empty() {
        return Err(CliError::Input("sweep needs at least one lambda, m, and seed".into()));
    }
    let mut out = Vec::new();
    for &lambda in &sweep.lambda {
        for &m in &sweep.m {
            for &seed in &sweep.seeds {
                let prob =
                    synth_prob_model(&sweep.family.family, &sweep.family.params, lambda, m, seed)?;
                out.push((format!("lambda{lambda}_m{m}_seed{seed}"), build_push_dag(&prob)));
            }
        }
    }
    Ok(out)
}
