use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precision of {0} bits is below the 64-bit minimum")]
    InvalidPrecision(u32),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("value outside the representable range: {0}")]
    OutOfRange(String),

    #[error("mode search did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("non-positive curvature at the mode: -g''(x0) = {0}")]
    NegativeCurvature(String),

    #[error("adaptive quadrature exceeded the maximum depth of {0}")]
    MaxDepthExceeded(u32),

    #[error("evaluation grid is empty")]
    EmptyGrid,

    #[error("evaluation grid is not strictly increasing")]
    UnsortedGrid,

    #[error("rate estimate needs at least 4 rows with nonzero error, found {0}")]
    InsufficientRows(usize),

    #[error("Aitken transform hit zero second differences")]
    DegenerateDifferences,

    #[error("at n = {n}: {source}")]
    AtIndex { n: u64, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at(self, n: u64) -> Self {
        Error::AtIndex {
            n,
            source: Box::new(self),
        }
    }
}
