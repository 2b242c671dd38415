use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid parameter: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at node {node} ({location:?})")]
    NonFinite {
        node: usize,
        location: Vec<f64>,
        value: f64,
    },

    #[error("stencil point {point:?} leaves the callback domain (radius {radius})")]
    OutsideDomain { point: Vec<f64>, radius: f64 },

    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },

    #[error("conformal factor is not positive at {point:?} (value {value})")]
    NonPositiveFactor { point: Vec<f64>, value: f64 },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown model: {0}")]
    UnknownModel(String),

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
}
