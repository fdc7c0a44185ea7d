//! Configuration, presets, parameter scans and file output behind the `rr`
//! command-line tool.

pub mod commands;
pub mod config;
mod error;
pub mod output;
pub mod presets;
pub mod scan;

pub use commands::execute;
pub use config::{Command, RunConfig};
pub use error::{HarnessError, Result};
pub use output::Manifest;
pub use presets::{preset, PRESETS};
