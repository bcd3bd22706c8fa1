use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch at degree {degree}: {detail}")]
    Dimension { degree: usize, detail: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no isotropically-split complement computed: {0}")]
    NotAcyclic(String),

    #[error("non-regular codifferential: {0}")]
    NonRegular(String),

    #[error("matrix is not invertible: {0}")]
    Singular(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported spectral tail: {0}")]
    UnsupportedTail(String),

    #[error("cutoff sequence did not converge at N = {n}: last iterates {previous} and {last}")]
    Convergence { n: u64, previous: String, last: String },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("character is not unitary: {0}")]
    Unitarity(String),

    #[error("invalid cell data: {0}")]
    Data(String),

    #[error("symbol term budget exceeded: {0}")]
    TermBudget(String),

    #[error("below the convergence abscissa: need Re(lambda) > {required}, got {got}")]
    Abscissa { required: f64, got: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("singular point: {0}")]
    Singularity(String),

    #[error("quadrature refinement failed: coarse {coarse}, fine {fine}")]
    Refinement { coarse: String, fine: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
