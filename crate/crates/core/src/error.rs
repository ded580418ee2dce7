use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    ShapeMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("action ({x}, {y}) is outside a {width}x{height} level")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("tile id {0} is not in the alphabet")]
    UnknownTile(u8),

    #[error("action #{index} is invalid: {source}")]
    InvalidAction {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid alphabet: {0}")]
    Alphabet(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("genetic algorithm failed: no acceptable level after {generations} generations (best fitness {best_fitness})")]
    GaFailed {
        generations: usize,
        best_fitness: f64,
    },

    #[error("policy failed: no acceptable level after {attempts} attempts (best fitness {best_fitness})")]
    PolicyExhausted { attempts: usize, best_fitness: f64 },

    #[error("validation failed: {0}")]
    Invalid(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("corrupt dataset: {0}")]
    CorruptDataset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for failures of the method itself (GA or policy could not produce
    /// an acceptable level), as opposed to usage, data, or I/O problems.
    pub fn is_method_failure(&self) -> bool {
        matches!(
            self,
            Error::GaFailed { .. } | Error::PolicyExhausted { .. } | Error::Empty(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
