use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// An exhaustive routine was asked to enumerate beyond its budget.
    #[error("{what}: ground set of size {n} exceeds the enumeration limit {limit}")]
    Size {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    /// A fixed-point encoding would not fit the aggregation group.
    #[error("fixed-point overflow: |{value}| must be below 2^{bound_bits}")]
    Overflow { value: f64, bound_bits: u32 },

    /// An internal invariant failed, e.g. a matroid oracle that violates exchange.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Short machine-readable tag for the error family.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Size { .. } => "size",
            Error::Overflow { .. } => "overflow",
            Error::Invariant(_) => "invariant",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
