use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("explosive spectral radius {radius} (must be <= 1 + {tol:e})")]
    ExplosiveSpectralRadius { radius: f64, tol: f64 },

    #[error("input matrix B is rank deficient: rank {rank} < {cols} columns")]
    RankDeficientInput { rank: usize, cols: usize },

    #[error("noise matrix H is rank deficient: rank {rank} < {cols} columns")]
    RankDeficientNoise { rank: usize, cols: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("rank-deficient regression: the unregularized Gram matrix is singular")]
    RankDeficientRegression,

    #[error("KL factorization inapplicable: {0}")]
    KlFactorizationInapplicable(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
