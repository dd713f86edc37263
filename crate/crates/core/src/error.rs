use thiserror::Error;

/// Errors raised by the prefix-sum structures and the simulated memory.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("lane geometry invalid: {0}")]
    Geometry(String),

    #[error("word budget exceeded: {lanes} lanes x {width} bits = {bits} > {budget}")]
    WordBudget {
        lanes: u32,
        width: u32,
        bits: u32,
        budget: u32,
    },

    #[error("sum table index of {width} bits exceeds cap of {cap} bits")]
    TableTooLarge { width: u32, cap: u32 },

    #[error("{what} {value} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("invalid range: k = {k} > j = {j}")]
    InvertedRange { k: u64, j: u64 },

    #[error("position {0} already present")]
    DuplicateIndex(u64),

    #[error("position {0} not present")]
    MissingIndex(u64),

    #[error("value {0} outside the operation's domain")]
    InvalidValue(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(what: &'static str, value: u64, limit: u64) -> Result<()> {
    if value < limit {
        Ok(())
    } else {
        Err(Error::OutOfRange { what, value, limit })
    }
}
