use thiserror::Error;

use crate::mvnn::MvnnParams;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("allocation is infeasible: item {item} is assigned to more than one bidder")]
    Infeasible { item: usize },
    #[error("degenerate instance: optimal welfare must be positive (got {0})")]
    Degenerate(f64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("value function violates {property}: {witness}")]
    Domain { property: &'static str, witness: String },
    #[error("invalid data: {0}")]
    Data(String),
    #[error("network parameters violate sign constraints: {0}")]
    Unprojected(String),
    #[error("training failed after {attempts} attempts (best correlation {correlation:.4})")]
    Training {
        attempts: usize,
        correlation: f64,
        best: Box<MvnnParams>,
    },
    #[error("instance too large: {0}")]
    Size(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure in LP solver after {iterations} iterations (max violation {violation:.3e})")]
    Numerical { iterations: usize, violation: f64 },
    #[error("LP parse error on line {line}: {message}")]
    LpParse { line: usize, message: String },
    #[error("bidder {bidder}: {source}")]
    Bidder {
        bidder: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn for_bidder(self, bidder: usize) -> Self {
        Error::Bidder {
            bidder,
            source: Box::new(self),
        }
    }
}
