use thiserror::Error;

/// Errors raised by geometric constructions and verification commands.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unbounded in direction {direction:?}")]
    Unbounded { direction: Vec<f64> },

    /// The affine hull of the input has dimension `dim` (-1 for the empty set).
    #[error("lower-dimensional input: affine hull has dimension {dim}")]
    LowerDimensional { dim: isize },

    #[error("origin is not an interior point ({0})")]
    OriginOutside(String),

    #[error("input is not origin-symmetric; symmetrize it first")]
    NonSymmetric,

    #[error("group too large or infinite: closure exceeded {cap} elements")]
    GroupTooLarge { cap: usize },

    #[error("non-reflection arrangement: chamber has {rays} rays and {walls} walls")]
    NonSimplicial { rays: usize, walls: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("tolerance exceeded in {what}: deviation {deviation:e} > {tolerance:e}")]
    Tolerance {
        what: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("grid too coarse: mesh {mesh:e}, need at most {required:e}")]
    GridTooCoarse { mesh: f64, required: f64 },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
