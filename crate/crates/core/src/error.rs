use std::path::PathBuf;

use thiserror::Error;

use crate::linalg::mtx::MtxError;
use crate::linalg::LinalgError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),

    #[error("zero regularization: ‖Aᵀb‖∞ = 0, so τ would vanish")]
    ZeroRegularization,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("curvature breakdown: sᵀl = {curvature:e} is not safely positive")]
    CurvatureBreakdown { curvature: f64 },

    #[error("metric not positive definite: sᵀBs = {value:e}")]
    MetricNotPositiveDefinite { value: f64 },

    #[error("spectral check unavailable at this scale (n = {n} exceeds cap {cap})")]
    SpectralCheckUnavailable { n: usize, cap: usize },

    #[error("subgradient recovery failed at component {index} (violation {violation:e})")]
    SubgradientRecovery { index: usize, violation: f64 },

    #[error("proximal term indefinite at step {step} (min eigenvalue {min_eig:e})")]
    IndefiniteMetric { step: usize, min_eig: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{path}: {source}")]
    Mtx {
        path: PathBuf,
        #[source]
        source: MtxError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Self::InvalidConfig(msg.into())
    }
}
