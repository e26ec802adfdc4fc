use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid misaligned: samples_per_unit {samples_per_unit} is not a multiple of breakpoint denominator {denominator}")]
    GridMisaligned { samples_per_unit: usize, denominator: i64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("index {index} out of range (0..{len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A theorem hypothesis does not hold for the given input.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("trivial space: all generators vanish on the grid")]
    TrivialSpace,

    #[error("config: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// True for errors caused by user input rather than by the computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::InvalidSpectrum(_)
            | Error::InvalidGrid(_)
            | Error::GridMismatch(_)
            | Error::GridMisaligned { .. }
            | Error::InvalidArgument(_)
            | Error::Json(_) => true,
            Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
