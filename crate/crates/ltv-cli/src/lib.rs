//! Library half of the `ltv` binary: file formats, command
//! implementations, and table rendering. Exposed so integration tests can
//! call commands in-process instead of scraping stdout.

pub mod commands;
pub mod error;
pub mod io;
pub mod render;

pub use commands::{
    cmd_certify, cmd_compare, cmd_eval, cmd_generate, cmd_simulate, cmd_solve, CertifyOpts,
    CompareOpts, OutputFormat, SimulateOpts, SolveOpts, SolverChoice,
};
pub use error::CliError;
