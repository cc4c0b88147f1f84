use alloc::string::String;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("{what} outside its domain: {detail}")]
    Domain { what: &'static str, detail: String },
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("positivity lost: {0}")]
    Positivity(String),
    #[error("solver fidelity violated: {0}")]
    Fidelity(String),
    #[error("t = {0} is not a stored snapshot")]
    NotASnapshot(f64),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain { what, detail: detail.into() }
}
