use std::path::PathBuf;

use thiserror::Error;

use crate::estimation::FitResult;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the simulator, the estimators and the CLI layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("delta pump not evaluable: a monochromatic pump is handled by the 1D reduction (assemble_jsa_mono)")]
    DeltaPump,

    #[error("no linewidth defined for reflectivity {0}")]
    NoLinewidth(f64),

    #[error("grid step {step:.6e} rad/s does not resolve the cavity linewidth (need <= {required:.6e} rad/s)")]
    Resolution { step: f64, required: f64 },

    #[error("degenerate state: joint spectral amplitude has zero norm")]
    DegenerateState,

    #[error("over-filtered: norm dropped from {before:.6e} to {after:.6e}")]
    OverFiltered { before: f64, after: f64 },

    #[error("grid is not symmetric about omega_minus = 0 (odd point count centred on zero required)")]
    AsymmetricGrid,

    #[error("input has no structure: {0}")]
    FlatInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("visibility undefined: baseline coincidence level is zero")]
    UndefinedVisibility,

    #[error("feature not resolved: only {samples} delay samples inside the FWHM (need >= 5)")]
    FeatureUnresolved { samples: usize },

    #[error("fit did not converge from any start (best residual {:.6e})", .best.residual)]
    NonConvergence { best: Box<FitResult> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing required configuration keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("{path}: line {line}: {message}")]
    DataFormat { path: PathBuf, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
