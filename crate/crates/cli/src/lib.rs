//! Configuration, mode dispatch and CSV/JSON output for the `bec1d` binary.

pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod run;
pub mod verify;

pub use config::{LambdaRange, Mode, ModelSpec, OutputFormat, Overrides, RunConfig};
pub use error::CliError;
pub use figures::{emit_figure_data, Figure};
pub use output::{emit, Artifact, Table};
pub use run::{run, Outcome};

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "BEC1D_THREADS";

/// Parses [`THREADS_ENV`]; `None` when unset.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}
