//! Scenario files, simulation and analysis drivers, and CSV/JSON output
//! for the `strata` command-line tool.

pub mod analyze;
pub mod error;
pub mod initial;
pub mod output;
pub mod sampling;
pub mod scenario;
pub mod simulate;
pub mod sweep;

pub use error::{CliError, CliResult};
pub use scenario::Setup;
