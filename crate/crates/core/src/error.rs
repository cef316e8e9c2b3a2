use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the domain of chart `{chart}`")]
    Domain { chart: String, point: Vec<f64> },

    #[error("division by near-zero value {value:e}")]
    Singular { value: f64 },

    #[error("function argument {value:e} outside the real domain of `{func}`")]
    FunctionDomain { func: &'static str, value: f64 },

    #[error("metric is not positive definite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("jet order {requested} exceeds the supported maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },

    #[error("degree error: {0}")]
    Degree(String),

    #[error("coefficient singular for degree p = {p} in dimension n = {n}: {what}")]
    DegenerateDegree {
        p: usize,
        n: usize,
        what: &'static str,
    },

    #[error("empty sample")]
    EmptySample,

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cone form is not r-homogeneous: relative deviation {deviation:e}")]
    NotHomogeneous { deviation: f64 },

    #[error("too few samples for a stable rank: {0}")]
    RankUnstable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
