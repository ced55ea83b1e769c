use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error(
        "transmission-time grid exhausted: quantile {quantile} exceeds normalized CDF {reached} \
         at s_max = {s_max}; extend the grid"
    )]
    GridExhausted {
        quantile: f64,
        reached: f64,
        s_max: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cannot seed {seeds} nodes in community {community} of size {size}")]
    SeedsExceedCommunity {
        community: usize,
        seeds: usize,
        size: usize,
    },

    #[error("{0} rate undefined at t = {1}: zero denominator")]
    UndefinedRate(&'static str, usize),

    #[error("posterior chain is empty")]
    EmptyChain,

    #[error("no starting point with finite log-posterior after {0} prior draws")]
    Initialization(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }
}
