use thiserror::Error;

/// Errors raised by the qudit library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a precondition (index out of range, p = q, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not unitary: max |M^dag M - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not Hermitian: max |H - H^dag| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    /// Coefficient vector is not normalized within tolerance.
    #[error("state is not normalized: norm^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("insufficient ancilla space: need {needed}, have {available}")]
    Capacity { needed: usize, available: usize },

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    /// Population left outside the computational levels and trap ground state.
    #[error("leakage {population:e} out of the computational subspace")]
    Leakage { population: f64 },

    #[error("phonon truncation: population {population:e} at the cutoff level")]
    Truncation { population: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    /// A closed-form control solution divides by a vanishing amplitude.
    #[error("degenerate coefficients: {0}")]
    Degenerate(String),

    #[error("optimizer did not converge: best infidelity {infidelity:e}")]
    NonConvergence { infidelity: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
