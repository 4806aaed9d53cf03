//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug, Clone)]
pub enum Error {
    /// An argument fell outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An integrand evaluated to a non-finite value at a quadrature node.
    #[error("integrand evaluated to a non-finite value at x = {x}")]
    Evaluation { x: f64 },

    /// A weight family was evaluated outside its domain of validity.
    #[error("weight family {family} evaluated outside its domain at x = {x}")]
    Domain { family: String, x: f64 },

    /// A boundary term diverges (singularity too strong at an endpoint).
    #[error("boundary term diverges at x = {endpoint} (estimated strength {gamma})")]
    Divergence { endpoint: f64, gamma: f64 },

    /// No analytic inverse-antiderivative is available for the integrand's
    /// denominator, so the conventional transform cannot be built.
    #[error("no analytic weight available for the integrand denominator")]
    UnsupportedWeight,

    /// A transform left a residual that is still singular on the interval.
    #[error("residual integrand is singular near x = {x}")]
    SingularityLeak { x: f64 },

    /// The log-ratio correction sampled a non-positive weight ratio.
    #[error("log of non-positive weight ratio at x = {x}")]
    LogDomain { x: f64 },

    /// An implicit transform's self-coefficient makes the equation unsolvable.
    #[error("implicit relation unsolvable (self coefficient {coefficient})")]
    UnsolvableRelation { coefficient: f64 },

    /// The error estimate was requested outside its regime of validity.
    #[error("error estimate regime violated: {0}")]
    Regime(String),

    /// The dispatch recipe exhausted every variant.
    #[error("no transform variant produced a computable residual (tried: {trace:?})")]
    Unresolvable { trace: Vec<String> },
}

pub type Result<T> = std::result::Result<T, Error>;
