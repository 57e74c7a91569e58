use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Validation(String),

    #[error("dense dimension guard exceeded: L = {l} (maximum {max})")]
    Size { l: usize, max: usize },

    #[error("eigendecomposition did not converge (worst residual {worst_residual:.3e})")]
    EigenConvergence { worst_residual: f64 },

    #[error("SVD failed at bond {bond}")]
    Svd { bond: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("state is not normalized (norm = {norm}); refusing to contract")]
    Unnormalized { norm: f64 },

    #[error("grid window does not bracket the kink (peak at gamma = {gamma})")]
    KinkNotBracketed { gamma: f64 },

    #[error("no kink detected: curve is flat (spread {spread:.3e})")]
    NoKink { spread: f64 },

    #[error("extrapolation exceeds data for L = {offending:?}")]
    ExtrapolationExceedsData { offending: Vec<usize> },

    #[error("schedule constraint violated: {0}")]
    Constraint(String),

    #[error("empty or degenerate series")]
    EmptySeries,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 validation, 3 numerical failure, 4 kink not bracketed.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Size { .. }
            | Error::Constraint(_)
            | Error::EmptySeries
            | Error::Json(_) => 2,
            Error::KinkNotBracketed { .. } => 4,
            Error::EigenConvergence { .. }
            | Error::Svd { .. }
            | Error::Numerical(_)
            | Error::Unnormalized { .. }
            | Error::NoKink { .. }
            | Error::ExtrapolationExceedsData { .. }
            | Error::Io(_) => 3,
        }
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be finite, got {value}")))
    }
}
