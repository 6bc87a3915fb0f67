use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VieError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("kernel evaluated at the source point (|x| = 0); use the cell quadrature for self terms")]
    Singularity,

    #[error("resonant denominator: |xi|^2 = k^2 in the Fourier-space Green tensor")]
    ResonantDenominator,

    #[error("empty scatterer: no cell centre satisfies the inside predicate")]
    EmptyScatterer,

    #[error("grid too coarse: no node has all eight adjacent cells inside the scatterer")]
    GridTooCoarse,

    #[error("singular system matrix (condition estimate {condition:.3e})")]
    SingularMatrix { condition: f64 },

    #[error("iterative solver did not converge in {iterations} iterations (best relative residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("field evaluation is not supported at this location: {0}")]
    UnsupportedLocation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for VieError {
    fn from(e: std::io::Error) -> Self {
        VieError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, VieError>;
