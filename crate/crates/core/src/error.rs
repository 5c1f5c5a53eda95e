use std::path::PathBuf;

/// Errors raised by the lab. Every variant corresponds to a rejected
/// precondition; the CLI maps all of them to exit status 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid disorder law: {0}")]
    InvalidLaw(String),

    #[error("invalid jump kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid rate function: {0}")]
    InvalidRate(String),

    #[error("fugacity {psi} outside admissible range [0, {limit})")]
    FugacityOutOfRange { psi: f64, limit: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("infeasible sector: {0}")]
    InfeasibleSector(String),

    #[error("invalid flux table: {0}")]
    InvalidFlux(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("solver precondition failed: {0}")]
    Solver(String),

    #[error("simulation window underflow: {0}")]
    WindowUnderflow(String),

    #[error("measurement: {0}")]
    Measurement(String),

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
