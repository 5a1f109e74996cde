//! Scenario runner behind the `nv-wgm` binary: JSON configs, unit
//! conversion, CSV and metadata output.

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod output;
pub mod runner;
pub mod units;

pub use config::{ScenarioConfig, ScenarioKind, SolverSpec, SCHEMA_VERSION};
pub use output::{resolve_prefix, write_outputs};
pub use runner::{run, sweep, Meta, RunOutput};
pub use units::PhysicalParams;

/// Environment variable holding the default output directory.
pub const OUTPUT_DIR_ENV: &str = "NV_WGM_OUTPUT_DIR";

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] crate::Error),

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Model(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Model(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::from(Error::InvalidParameter("x".into())).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::from(Error::Integrity("trace".into())).exit_code(), EXIT_NUMERICAL);
        let io = CliError::Io { path: "p".into(), source: std::io::Error::other("disk") };
        assert_eq!(io.exit_code(), EXIT_IO);
        assert_eq!(EXIT_OK, 0);
    }
}
