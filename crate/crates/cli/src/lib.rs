//! Scenario runner for the nested Mach–Zehnder simulation: parses scenario
//! files, drives the simulation and writes CSV tables.

pub mod bundled;
pub mod emit;
pub mod error;
pub mod report;
pub mod scenario;

use std::fs;
use std::path::Path;

pub use error::CliError;
pub use report::{run, RunReport};
pub use scenario::{parse_scenario, ParsedScenario, Scenario};

/// Reads a scenario from `source`, which is a file path or the name of a
/// bundled scenario (`fig1a`, `fig1b`, `fig1c`). Files win over bundled names.
pub fn load_scenario(source: &str) -> Result<ParsedScenario, CliError> {
    let path = Path::new(source);
    let text = if path.exists() {
        fs::read_to_string(path).map_err(|e| CliError::Read {
            path: path.to_path_buf(),
            source: e,
        })?
    } else if let Some(text) = bundled::lookup(source) {
        text.to_string()
    } else {
        return Err(CliError::Read {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled scenario"),
        });
    };
    parse_scenario(&text).map_err(|e| CliError::Scenario {
        path: source.to_string(),
        source: e,
    })
}
