use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// Caller supplied a value outside the documented domain.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A structural precondition on an object failed.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("budget exceeded: {what} (limit {limit})")]
    Budget { what: String, limit: u64 },
    #[error("not an involution: {0}")]
    NotInvolution(String),
    #[error("generators do not generate the group: {0}")]
    NotGenerating(String),
    #[error("triple is orientable: <ab, bc> has index 2")]
    Orientable,
    #[error("parse error: {0}")]
    Parse(String),
    /// Two independent computations of the same quantity disagree.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn budget(what: impl Into<String>, limit: u64) -> Self {
        Error::Budget { what: what.into(), limit }
    }
}
