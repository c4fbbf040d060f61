use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the library.
///
/// Variants split into two families: input validation (bad shapes, bad
/// parameters, bad configuration) and numerical failure (non-convergence,
/// divergence, conditioning). [`Error::is_numerical`] tells them apart; the
/// command line maps them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("eigenvalue iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("characteristic polynomial is ill-conditioned: imaginary residue {residue:e} above threshold {threshold:e}")]
    IllConditioned { residue: f64, threshold: f64 },

    #[error("expansion coefficients diverged at step {step} (|phi| = {magnitude:e}); spectral radius is likely >= 1")]
    Divergence { step: usize, magnitude: f64 },

    #[error("reservoir state exploded at step {step} (norm = {norm:e}); spectral radius is likely >= 1")]
    Unstable { step: usize, norm: f64 },

    #[error("controllability matrix has full rank {rank}; there is no nullspace to move along")]
    FullRank { rank: usize },

    #[error("reservoir states are identically zero; nothing to regress on")]
    DegenerateStates,

    #[error("target is constant over the evaluation slice; NRMSE is undefined")]
    ConstantTarget,

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::IllConditioned { .. }
                | Error::Divergence { .. }
                | Error::Unstable { .. }
                | Error::DegenerateStates
                | Error::ConstantTarget
                | Error::Verification(_)
        )
    }
}
