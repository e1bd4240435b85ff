use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a formula (zero detuning, `g <= 0`, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("invalid detuning profile: {0}")]
    InvalidProfile(String),

    #[error("matrix is not unitary: defect {defect:e} exceeds {tol:e}")]
    NonUnitary { defect: f64, tol: f64 },

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("failed to converge: {0}")]
    NotConverged(String),

    /// A composite design constraint that cannot be met.
    #[error("design error: {0}")]
    Design(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
