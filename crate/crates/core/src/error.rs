use std::path::PathBuf;

use crate::algebra::Semiring;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid value {value} for the {semiring} domain")]
    InvalidValue { value: f64, semiring: Semiring },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unknown function identifier {0}")]
    NotFound(usize),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("state space of {states} labelings exceeds the cap of {cap}")]
    TooLarge { states: u128, cap: u128 },

    #[error(
        "{algorithm} does not support the {semiring} semi-ring \
         (oracle: all; bp: minsum, sumprod, maxprod; icm, lazyflipper, alphaexp, abswap: minsum; gibbs: sumprod)"
    )]
    UnsupportedCombination {
        algorithm: &'static str,
        semiring: Semiring,
    },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("move energy of factor {factor} is not submodular ({detail})")]
    SubmodularityViolation { factor: usize, detail: String },

    #[error("conditional distribution of variable {variable} has zero total weight")]
    DegenerateDistribution { variable: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A well-formed record the model rejected.
    #[error("line {line}: {source}")]
    Record { line: usize, source: Box<Error> },

    #[error("unsupported format version {found} (expected {expected})")]
    UnsupportedVersion { found: String, expected: u32 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),
}

impl Error {
    /// The error itself, or the error a `Record` wraps.
    pub fn root(&self) -> &Error {
        match self {
            Error::Record { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
