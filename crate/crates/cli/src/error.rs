use altmin::bounds::BoundError;
use altmin::engine::EngineError;
use altmin::instances::InstanceError;
use std::path::PathBuf;
use thiserror::Error;

/// Process exit codes. Stable; documented in the README.
pub mod exit {
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const ANCHOR_MISMATCH: i32 = 4;
    pub const DOMINATION_FAILURE: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid problem data: {0}")]
    Instance(#[from] InstanceError),
    #[error("{0}")]
    Data(String),
    #[error("solver failed: {0}")]
    Solver(#[from] EngineError),
    #[error("figure anchors do not match")]
    AnchorMismatch,
    #[error("{0}")]
    DominationFailure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } | CliError::Instance(_) | CliError::Data(_) => exit::DATA,
            CliError::Solver(_) => exit::SOLVER,
            CliError::AnchorMismatch => exit::ANCHOR_MISMATCH,
            CliError::DominationFailure(_) => exit::DOMINATION_FAILURE,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::MissingReference => CliError::Data(
                "H* is unknown for this problem; rerun with --reference-solve to estimate it from a long run".into(),
            ),
            other => CliError::Data(format!("cannot bound this instance: {other}")),
        }
    }
}
