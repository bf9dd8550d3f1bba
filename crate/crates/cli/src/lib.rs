//! Configuration parsing, execution and output for the `atomlink` binary.

pub mod config;
pub mod error;
pub mod plot;
pub mod presets;
pub mod run;

pub use config::{parse, parse_file, RunConfig};
pub use error::CliError;
pub use run::{execute, write_artifacts, Artifact};

/// Parses a bundled preset by name.
pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let text = presets::get(name).ok_or_else(|| {
        CliError::config(format!(
            "unknown preset {name:?} (available: {})",
            presets::names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    parse(text)
}
