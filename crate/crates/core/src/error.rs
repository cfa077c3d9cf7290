use thiserror::Error;

use crate::pabulib::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown project `{0}`")]
    UnknownProject(String),

    /// Every voter approves nothing fundable, so an optimum is zero.
    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("search aborted after exceeding the budget of {max_nodes} nodes")]
    SearchBudgetExceeded { max_nodes: u64 },

    #[error("integer overflow while scaling {0}")]
    Overflow(String),

    #[error("{0} EJR verdicts are unknown because the search was capped")]
    CappedSearch(usize),

    #[error(transparent)]
    Parse(#[from] ParseError),
}
