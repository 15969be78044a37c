use thiserror::Error;

/// Errors produced by the design, analysis and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("no feasible design on the sweep grid ({0} points tried)")]
    NoDesign(usize),

    #[error("numerical breakdown in LP solver: {0}")]
    Numerical(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("peeling decoder reached an inconsistent assignment on variable {var}")]
    InconsistentDecode { var: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
