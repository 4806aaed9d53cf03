//! Regularization of singular and nearly singular 1-D integrals by
//! integration by parts.
//!
//! The core transform rewrites `I = ∫ f(x) dx` with an endpoint singularity
//! as a boundary term plus a non-singular residual integral, by pairing the
//! integrand with a surrogate weight `q̃(x)` whose inverse has an analytic
//! antiderivative `h̃(x) = ∫ dx/q̃(x)`. Several variants of the transform are
//! provided (conventional, surrogate-weight, log-ratio corrected, and three
//! direct-calculation routes), together with closed-form specializations for
//! common singular families and the two electromagnetics kernels built on
//! them.

pub mod em;
pub mod engine;
pub mod error;
pub mod families;
pub mod integrand;
pub mod quadrature;
pub mod weights;

pub use error::{Error, Result};
pub use integrand::{real_fn, IntegrandForm, RealFn, SingularIntegrand};
pub use quadrature::{
    differentiate, gauss_legendre_rule, integrate, integrate_with_layout, oracle_integrate,
    DerivativeSpec, Interval, PanelLayout, QuadratureRule,
};
