use clap::{Parser, Subcommand, ValueEnum};
use ltv_cli::{
    cmd_certify, cmd_compare, cmd_eval, cmd_generate, cmd_simulate, cmd_solve, CertifyOpts,
    CliError, CompareOpts, OutputFormat, SimulateOpts, SolveOpts, SolverChoice,
};
use ltv_core::{GreedyMode, SimMode};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "ltv",
    about = "Optimize and evaluate customer lifetime value on day-structured engagement models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a push-notification day model from a scenario file
    Generate {
        /// Scenario JSON: day length, message budget, and a probability model
        #[arg(long)]
        scenario: PathBuf,
        /// Where to write the model JSON
        #[arg(long)]
        out: PathBuf,
        /// Override the seed stored in the scenario
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve a model and print the policy
    Solve {
        #[arg(long)]
        model: PathBuf,
        /// One of: greedy, bf, bf-unrolled[:K], mreopt
        #[arg(long, default_value = "mreopt")]
        solver: String,
        /// Bisection stops when the bracket is narrower than this
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Horizon for bf-unrolled when the solver name carries no :K
        #[arg(long, default_value_t = 100)]
        k_days: usize,
        /// How greedy scores an action
        #[arg(long, value_enum, default_value = "conditional")]
        greedy_mode: GreedyModeArg,
        /// Print every bisection step
        #[arg(long)]
        trace: bool,
        /// Also write the result (value, policy, optional trace) as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a policy file exactly
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Policy JSON mapping state labels to action labels
        #[arg(long)]
        policy: PathBuf,
    },
    /// Estimate a policy's value by Monte Carlo over whole customer lives
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// Policy JSON mapping state labels to action labels
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cut a customer off after this many surviving rounds
        #[arg(long, default_value_t = 10_000)]
        max_rounds: usize,
        /// Reward accounting: draw unit clicks or credit expected reward
        #[arg(long, value_enum, default_value = "expected")]
        sim_mode: SimModeArg,
    },
    /// Compare greedy, one-round, and exact solutions across models
    Compare {
        /// Model file; repeat the flag for several
        #[arg(long = "model", conflicts_with = "sweep")]
        models: Vec<PathBuf>,
        /// Sweep JSON: build models over (day length, budget, seed) grids
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long, value_enum, default_value = "conditional")]
        greedy_mode: GreedyModeArg,
        /// Also write the rendered table to a file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the exact solver against brute-force enumeration on seeded random instances
    Certify {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        /// Decision states per instance, at most
        #[arg(long, default_value_t = 8)]
        max_states: usize,
        /// Actions per decision state, at most
        #[arg(long, default_value_t = 3)]
        max_actions: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Also write the report to a file
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GreedyModeArg {
    /// Expected reward divided by churn odds of the single action
    Conditional,
    /// Expected reward discounted by survival probability
    Discounted,
}

impl From<GreedyModeArg> for GreedyMode {
    fn from(arg: GreedyModeArg) -> Self {
        match arg {
            GreedyModeArg::Conditional => GreedyMode::ConditionalOnSurvival,
            GreedyModeArg::Discounted => GreedyMode::LossDiscounted,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimModeArg {
    /// Draw unit clicks with probability equal to the edge reward
    Click,
    /// Credit the edge reward deterministically
    Expected,
}

impl From<SimModeArg> for SimMode {
    fn from(arg: SimModeArg) -> Self {
        match arg {
            SimModeArg::Click => SimMode::Click,
            SimModeArg::Expected => SimMode::ExpectedReward,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Text,
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Generate { scenario, out, seed } => cmd_generate(&scenario, &out, seed),
        Command::Solve { model, solver, epsilon, k_days, greedy_mode, trace, out } => {
            let solver = SolverChoice::from_str(&solver)?;
            let opts =
                SolveOpts { epsilon, k_days, greedy_mode: greedy_mode.into(), trace, out };
            cmd_solve(&model, solver, &opts)
        }
        Command::Eval { model, policy } => cmd_eval(&model, &policy),
        Command::Simulate { model, policy, episodes, seed, max_rounds, sim_mode } => {
            let opts =
                SimulateOpts { episodes, seed, max_rounds, mode: sim_mode.into() };
            cmd_simulate(&model, &policy, &opts)
        }
        Command::Compare { models, sweep, epsilon, format, greedy_mode, out } => {
            let format = match format {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Text => OutputFormat::Text,
            };
            let opts =
                CompareOpts { epsilon, format, greedy_mode: greedy_mode.into(), out };
            cmd_compare(&models, sweep.as_deref(), &opts)
        }
        Command::Certify { instances, max_states, max_actions, seed, epsilon, out } => {
            let opts = CertifyOpts { instances, max_states, max_actions, seed, epsilon, out };
            cmd_certify(&opts)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => print!("{text}"),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
