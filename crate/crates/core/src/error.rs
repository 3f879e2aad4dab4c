use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("duplicate nodes at indices {first} and {second}")]
    DuplicateNode { first: usize, second: usize },

    #[error("duplicate (u,v) rows at lines {first_line} and {second_line}")]
    DuplicateRow { first_line: usize, second_line: usize },

    #[error("sampling pattern would be empty")]
    EmptyPattern,

    #[error("kernel matrix is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("scaling values do not match targets: expected {expected}, got {got}")]
    ScalingMismatch { expected: usize, got: usize },

    #[error("no shape parameter candidate produced a factorizable kernel matrix")]
    SelectionFailed,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(
        "frequency window of half-width {required:.4e} arcsec^-1 exceeds the transform grid \
         extent {available:.4e} arcsec^-1; use a smaller back-projection pixel size"
    )]
    Window { required: f64, available: f64 },

    #[error("Landweber iteration produced non-finite values at k = {iteration}")]
    Divergence { iteration: usize },

    #[error("inconsistent grid sizes: {0}")]
    GridSize(String),

    #[error("no sources found in image")]
    NoPeaks,

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the
    /// caller's input or environment.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. }
                | Error::SelectionFailed
                | Error::Divergence { .. }
                | Error::Degenerate(_)
                | Error::NoPeaks
                | Error::Window { .. }
        )
    }

    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) | Error::ScalingMismatch { .. } | Error::GridSize(_) => "E_INPUT",
            Error::DuplicateNode { .. } | Error::DuplicateRow { .. } => "E_DUPLICATE",
            Error::EmptyPattern => "E_PATTERN",
            Error::IllConditioned { .. } => "E_ILL_CONDITIONED",
            Error::SelectionFailed => "E_SELECTION",
            Error::Degenerate(_) => "E_DEGENERATE",
            Error::Window { .. } => "E_WINDOW",
            Error::Divergence { .. } => "E_DIVERGENCE",
            Error::NoPeaks => "E_NO_PEAKS",
            Error::Parse { .. } => "E_PARSE",
            Error::Io { .. } => "E_IO",
            Error::Json(_) => "E_CONFIG",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
