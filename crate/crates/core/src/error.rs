use thiserror::Error;

/// Errors raised by the steering toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("Bloch vector has norm {0} > 1; not a physical state")]
    NonPhysical(f64),

    #[error("the two measurement settings are identical or antiparallel")]
    DegenerateSettings,

    #[error("assemblage violates {0}")]
    InvalidAssemblage(String),

    #[error("parameters (theta={theta}, eta={eta}) are outside the {region} region")]
    Region { theta: f64, eta: f64, region: &'static str },

    #[error("hidden-state construction is singular: {0}")]
    Singular(String),

    #[error("construction failed to reproduce the assemblage (error {0:e})")]
    Reconstruction(f64),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
