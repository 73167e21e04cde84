use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: expected {expected}, got {actual}")]
    Shape {
        op: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown penalty `{0}` (registered: {1})")]
    UnknownPenalty(String, String),

    /// `||A_den z||^2` fell below the floor at the given iterate.
    #[error("degenerate denominator ||A_den z||^2 = {value:e} at iterate {iteration}")]
    DegenerateDenominator { iteration: usize, value: f64 },

    #[error("objective became non-finite at iterate {iteration}; try a smaller step size than alpha = {alpha:e}")]
    Divergence { iteration: usize, alpha: f64 },

    #[error("curve of length {0} is too short for elbow detection (need at least 3 points)")]
    CurveTooShort(usize),

    #[error("empty model: {0}")]
    EmptyModel(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{path}: row {row}, column `{column}`: {message}")]
    Cell {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("all {attempted} grid points failed; first failure: {first}")]
    ExhaustedGrid { attempted: usize, first: String },

    #[error("malformed model file at line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn shape(op: &'static str, expected: usize, actual: usize) -> Self {
        Error::Shape { op, expected, actual }
    }

    /// True for failures raised by the iterative solver itself.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::DegenerateDenominator { .. } | Error::Divergence { .. } | Error::EmptyModel(_)
        )
    }
}
