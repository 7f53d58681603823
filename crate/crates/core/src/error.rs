use thiserror::Error;

use crate::model::ActivityId;

/// Position-tagged error produced by the text parsers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, field {field}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub field: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    MissingField,
    MalformedHeader,
    ActivityCountMismatch,
    NonNumericToken,
    Unsupported,
}

impl ParseError {
    pub(crate) fn new(
        kind: ParseErrorKind,
        line: usize,
        field: usize,
        message: impl Into<String>,
    ) -> Self {
        Self {
            line,
            field,
            kind,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid instance: {0}")]
    Invalid(String),

    #[error("temporally infeasible: negative cycle through {cycle:?}")]
    TemporalInfeasible { cycle: Vec<ActivityId> },

    #[error("non-negative minimum lags form a cycle through {0:?}")]
    CyclicPrecedence(Vec<ActivityId>),

    #[error("partial order schedule contains a cycle")]
    CyclicPos,

    #[error("epsilon {0} out of (0,1]")]
    EpsilonOutOfRange(f64),

    #[error("negative mean {0} passed to a max bound that requires nonnegative means")]
    NegativeMean(f64),

    #[error("no segregated moments for activity {0}")]
    MissingMoments(ActivityId),

    #[error("max over an empty set of forms")]
    EmptyMax,

    #[error("unsupported distribution `{0}`")]
    UnsupportedDistribution(String),

    #[error("empty job {0}")]
    EmptyJob(usize),

    #[error("{0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
