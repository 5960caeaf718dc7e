//! Customer lifetime value on day-structured engagement models.
//!
//! A customer's day is a directed acyclic graph walked from an initial
//! state to one of two absorbing outcomes: `loss` (churn, the customer
//! never returns) or `survive` (the day ends and an identical day starts
//! tomorrow). Actions choose among reward-bearing probability
//! distributions over successor states, and a strategy's lifetime value is
//! its expected one-day reward divided by its churn probability,
//! r / (1 - p).
//!
//! The crate provides the model representation and validation
//! ([`model`]), builders for push-notification day grids ([`scenario`]),
//! exact and baseline optimizers ([`solver`]), policy evaluation, metrics,
//! an enumeration oracle and a Monte Carlo simulator ([`eval`]), plus
//! seeded random instances for certification ([`instances`], [`seeding`]).

pub mod eval;
pub mod instances;
pub mod model;
pub mod scenario;
pub mod seeding;
pub mod solver;

pub use eval::{
    compare, enumerate_oracle, evaluate_policy, metrics, simulate_online, CompareRow, EvalError,
    Method, MetricsReport, OracleResult, RoundStats, SimMode, SimReport, POLICY_CAP,
};
pub use instances::{random_instance, InstanceConfig};
pub use model::{
    ActionSpec, Boundedness, DagModel, ModelError, StateId, StateNode, Transition,
    ValidationReport, Violation, PROB_TOLERANCE,
};
pub use scenario::{build_push_dag, synth_prob_model, ProbModel, ScenarioError};
pub use seeding::substream;
pub use solver::{
    dp_pass, solve_bf_one_round, solve_bf_unrolled, solve_greedy, solve_mreopt,
    solve_mreopt_with_branch, BracketStep, BranchRule, BranchTaken, DpPass, GreedyMode,
    MreoptResult, Policy, SolverError, ValuePair, DEFAULT_EPSILON,
};
