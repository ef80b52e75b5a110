//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or sizes of inputs do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Bad user-facing configuration (flags, intervals, orders).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A generated or loaded model has eigenvalues off the open left half-plane.
    #[error("model is not Hurwitz: {0}")]
    NotHurwitz(String),

    /// A resolvent or pencil solve hit a (numerically) singular matrix.
    #[error("singular solve at frequency {freq} rad/s: {detail}")]
    SingularAtFrequency { freq: f64, detail: String },

    /// Hermite Loewner entry requested without derivative data.
    #[error("missing derivative at coincident frequency {0} rad/s")]
    MissingDerivative(f64),

    /// Data violates a variant precondition (passivity, bounded-realness, ...).
    #[error("data infeasible for {variant}: {detail}")]
    Infeasible { variant: String, detail: String },

    /// A matrix-equation solver could not produce a certified solution.
    #[error("matrix equation solve failed: {0}")]
    Solver(String),

    /// Requested reduction order exceeds the numerical rank.
    #[error("order {requested} exceeds numerical rank {max}")]
    Rank { requested: usize, max: usize },

    #[error("linear algebra backend: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that stem from invalid inputs rather than from
    /// numerics; the CLI maps these to exit code 2 and the rest to 3.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_) | Error::Config(_) | Error::Io(_) | Error::Json(_)
        )
    }
}
