use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("quad {quad} is not positively oriented (jacobian {jacobian:e} at {xi}, {eta})")]
    Orientation { quad: usize, jacobian: f64, xi: f64, eta: f64 },
    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("mesh consistency error: {0}")]
    MeshConsistency(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("constraint error: {0}")]
    Constraint(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("outside the field's domain: {0}")]
    Domain(String),
    #[error("study error: {0}")]
    Study(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by bad input rather than a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Argument(_)
                | Error::Parse { .. }
                | Error::Orientation { .. }
                | Error::DuplicateVertex(..)
                | Error::MeshConsistency(_)
                | Error::Config(_)
                | Error::Construction(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
