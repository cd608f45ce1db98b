//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    /// A cosine weight `c_l / cos(l*theta)` hit a near-zero denominator.
    #[error("singular weight at degree {degree}: |cos({degree}*theta)| = {cos_value:e} is below the threshold")]
    SingularWeight { degree: u64, cos_value: f64 },

    /// A trigonometric-series weight `c_l / x^l` exceeded the growth bound.
    #[error("ill-conditioned transform at degree {degree}: |c/x^l| = {magnitude:e} exceeds the growth bound")]
    IllConditioned { degree: u64, magnitude: f64 },

    /// A product factor is non-positive at the evaluation point.
    #[error("domain error at factor index {k}: factor = {factor:e}")]
    Domain { k: u64, factor: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("unknown identity: {0}")]
    UnknownIdentity(String),

    #[error("policy refusal: {0}")]
    PolicyRefusal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
