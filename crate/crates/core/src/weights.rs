//! Catalog of surrogate weight functions `q̃(x)` with analytic
//! antiderivative-of-inverse `h̃(x) = ∫ dx/q̃(x)`.
//!
//! The transforms never form `h̃(x) * q̃(x)` by multiplying the two raw
//! values: for every family the products `h̃·q̃` and `h̃·q̃′` have simpler
//! closed forms (`x/(1-γ̃)` and `γ̃/(1-γ̃)` for the power family, constants
//! for the exponential family, ...) which are used directly. This is what
//! keeps boundary terms and residuals stable right up to the singular
//! endpoint.

use crate::error::{Error, Result};
use crate::integrand::SingularIntegrand;
use crate::quadrature::Interval;

/// Exponent window around `γ̃ = 1` inside which the logarithmic branch of
/// the power antiderivative is used; below this, `x^(1-γ̃)/(1-γ̃)` has no
/// significant digits left.
pub const LOG_BRANCH_TOL: f64 = 1e-8;

/// Largest supported logarithmic power in the `h_β` recursion.
pub const MAX_BETA: i64 = 16;

/// A weight function `q̃(x)` with analytic `h̃(x) = ∫ dx/q̃`, derivative
/// `q̃′(x)` and singular-endpoint limit data.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFamily {
    /// `q̃ = x^γ̃`; `h̃ = x^(1-γ̃)/(1-γ̃)`, or `ln x` on the `γ̃ = 1` branch.
    Power { gamma_t: f64 },
    /// `q̃ = (x - center)^γ̃`, the power family shifted to a singular point
    /// away from the origin.
    ShiftedPower { gamma_t: f64, center: f64 },
    /// `q̃ = ln^{-β}(x)`; `h̃ = h_β(x)`, the iterated log antiderivative.
    LogPower { beta: i64 },
    /// `q̃ = sqrt(x² + R²)`; `h̃ = ln(sqrt(x²+R²) + x)`.
    SqrtShiftedPlus { r: f64 },
    /// `q̃ = sqrt(x² - R²)` for `|x| > R`; `h̃ = ln|sqrt(x²-R²) + x|`.
    SqrtShiftedMinus { r: f64 },
    /// `1/q̃ = exp(-λx)`; `h̃ = -exp(-λx)/λ`.
    Exponential { lambda: f64 },
    /// `q̃ = 1`; `h̃ = x`. Plain integration by parts.
    Unit,
}

/// Zero of the product `h̃·q̃` at a point, used for boundary-limit algebra.
#[derive(Debug, Clone, Copy)]
pub struct HqZero {
    /// `h̃·q̃ ~ C (x - x0)^exponent` near the zero.
    pub exponent: f64,
    /// An additional `ln(x - x0)` factor is present (still vanishes when
    /// `exponent - γ > 0`).
    pub with_log: bool,
}

impl WeightFamily {
    pub fn name(&self) -> &'static str {
        match self {
            WeightFamily::Power { .. } => "power",
            WeightFamily::ShiftedPower { .. } => "shifted_power",
            WeightFamily::LogPower { .. } => "log_power",
            WeightFamily::SqrtShiftedPlus { .. } => "sqrt_shifted_plus",
            WeightFamily::SqrtShiftedMinus { .. } => "sqrt_shifted_minus",
            WeightFamily::Exponential { .. } => "exponential",
            WeightFamily::Unit => "unit",
        }
    }

    fn log_branch(gamma_t: f64) -> bool {
        (gamma_t - 1.0).abs() < LOG_BRANCH_TOL
    }

    /// Checks `x` lies in the open domain of validity of the family.
    pub fn check_domain(&self, x: f64) -> Result<()> {
        let ok = match self {
            WeightFamily::Power { .. } | WeightFamily::LogPower { .. } => x > 0.0,
            WeightFamily::ShiftedPower { center, .. } => x > *center,
            WeightFamily::SqrtShiftedMinus { r } => x.abs() > *r,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                family: self.name().to_string(),
                x,
            })
        }
    }

    /// `q̃(x)`.
    pub fn q(&self, x: f64) -> f64 {
        match self {
            WeightFamily::Power { gamma_t } => x.powf(*gamma_t),
            WeightFamily::ShiftedPower { gamma_t, center } => (x - center).powf(*gamma_t),
            WeightFamily::LogPower { beta } => x.ln().powi(-(*beta as i32)),
            WeightFamily::SqrtShiftedPlus { r } => (x * x + r * r).sqrt(),
            WeightFamily::SqrtShiftedMinus { r } => (x * x - r * r).sqrt(),
            WeightFamily::Exponential { lambda } => (lambda * x).exp(),
            WeightFamily::Unit => 1.0,
        }
    }

    /// `q̃′(x)`.
    pub fn q_prime(&self, x: f64) -> f64 {
        match self {
            WeightFamily::Power { gamma_t } => gamma_t * x.powf(gamma_t - 1.0),
            WeightFamily::ShiftedPower { gamma_t, center } => {
                gamma_t * (x - center).powf(gamma_t - 1.0)
            }
            WeightFamily::LogPower { beta } => {
                let b = *beta as f64;
                -b * x.ln().powi(-(*beta as i32) - 1) / x
            }
            WeightFamily::SqrtShiftedPlus { r } => x / (x * x + r * r).sqrt(),
            WeightFamily::SqrtShiftedMinus { r } => x / (x * x - r * r).sqrt(),
            WeightFamily::Exponential { lambda } => lambda * (lambda * x).exp(),
            WeightFamily::Unit => 0.0,
        }
    }

    /// Analytic antiderivative `h̃(x) = ∫ dx/q̃(x)`.
    pub fn h(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match self {
            WeightFamily::Power { gamma_t } => {
                if Self::log_branch(*gamma_t) {
                    x.ln()
                } else {
                    x.powf(1.0 - gamma_t) / (1.0 - gamma_t)
                }
            }
            WeightFamily::ShiftedPower { gamma_t, center } => {
                let u = x - center;
                if Self::log_branch(*gamma_t) {
                    u.ln()
                } else {
                    u.powf(1.0 - gamma_t) / (1.0 - gamma_t)
                }
            }
            WeightFamily::LogPower { beta } => h_beta(*beta, x)?,
            WeightFamily::SqrtShiftedPlus { r } => ((x * x + r * r).sqrt() + x).ln(),
            WeightFamily::SqrtShiftedMinus { r } => ((x * x - r * r).sqrt() + x).abs().ln(),
            WeightFamily::Exponential { lambda } => -(-lambda * x).exp() / lambda,
            WeightFamily::Unit => x,
        })
    }

    /// The product `h̃(x)·q̃(x)` in its simplified closed form.
    pub fn hq(&self, x: f64) -> f64 {
        match self {
            WeightFamily::Power { gamma_t } => {
                if Self::log_branch(*gamma_t) {
                    // x ln x, with the x -> 0 limit built in
                    if x == 0.0 {
                        0.0
                    } else {
                        x * x.ln()
                    }
                } else {
                    x / (1.0 - gamma_t)
                }
            }
            WeightFamily::ShiftedPower { gamma_t, center } => {
                let u = x - center;
                if Self::log_branch(*gamma_t) {
                    if u == 0.0 {
                        0.0
                    } else {
                        u * u.ln()
                    }
                } else {
                    u / (1.0 - gamma_t)
                }
            }
            WeightFamily::LogPower { beta } => match h_beta(*beta, x) {
                Ok(h) => h * x.ln().powi(-(*beta as i32)),
                Err(_) => f64::NAN,
            },
            WeightFamily::SqrtShiftedPlus { r } => {
                ((x * x + r * r).sqrt() + x).ln() * (x * x + r * r).sqrt()
            }
            WeightFamily::SqrtShiftedMinus { r } => {
                ((x * x - r * r).sqrt() + x).abs().ln() * (x * x - r * r).sqrt()
            }
            WeightFamily::Exponential { lambda } => -1.0 / lambda,
            WeightFamily::Unit => x,
        }
    }

    /// The product `h̃(x)·q̃′(x)` in its simplified closed form.
    pub fn hq_prime(&self, x: f64) -> f64 {
        match self {
            WeightFamily::Power { gamma_t } => {
                if Self::log_branch(*gamma_t) {
                    x.ln()
                } else {
                    gamma_t / (1.0 - gamma_t)
                }
            }
            WeightFamily::ShiftedPower { gamma_t, center } => {
                if Self::log_branch(*gamma_t) {
                    (x - center).ln()
                } else {
                    gamma_t / (1.0 - gamma_t)
                }
            }
            WeightFamily::LogPower { beta } => {
                let b = *beta as f64;
                match h_beta(*beta, x) {
                    Ok(h) => -b * h * x.ln().powi(-(*beta as i32) - 1) / x,
                    Err(_) => f64::NAN,
                }
            }
            WeightFamily::SqrtShiftedPlus { r } => {
                let s = (x * x + r * r).sqrt();
                (s + x).ln() * x / s
            }
            WeightFamily::SqrtShiftedMinus { r } => {
                let s = (x * x - r * r).sqrt();
                (s + x).abs().ln() * x / s
            }
            WeightFamily::Exponential { .. } => -1.0,
            WeightFamily::Unit => 0.0,
        }
    }

    /// Describes the zero of `h̃·q̃` at `x`, if any. `None` means the product
    /// has no zero there and a diverging integrand cannot be absorbed.
    pub fn hq_zero_at(&self, x: f64) -> Option<HqZero> {
        let near = |a: f64, b: f64| (a - b).abs() < (1e-12 * a.abs().max(b.abs())).max(1e-300);
        match self {
            WeightFamily::Power { gamma_t } => (x == 0.0).then_some(HqZero {
                exponent: 1.0,
                with_log: Self::log_branch(*gamma_t),
            }),
            WeightFamily::ShiftedPower { gamma_t, center } => near(x, *center).then_some(HqZero {
                exponent: 1.0,
                with_log: Self::log_branch(*gamma_t),
            }),
            WeightFamily::Unit => (x == 0.0).then_some(HqZero {
                exponent: 1.0,
                with_log: false,
            }),
            // h_β(x) ~ x ln^β(x) as x -> 0, so h̃·q̃ ~ x.
            WeightFamily::LogPower { .. } => (x == 0.0).then_some(HqZero {
                exponent: 1.0,
                with_log: false,
            }),
            WeightFamily::SqrtShiftedPlus { r } => (*r == 0.0 && x == 0.0).then_some(HqZero {
                exponent: 1.0,
                with_log: true,
            }),
            WeightFamily::SqrtShiftedMinus { r } => near(x.abs(), *r).then_some(HqZero {
                exponent: 0.5,
                with_log: false,
            }),
            WeightFamily::Exponential { .. } => None,
        }
    }
}

/// Iterated antiderivative of `ln^β`: `h_β(x) = x ln^β(x) - β h_{β-1}(x)`
/// with `h_0(x) = x`, reduced downward until `β = 0`. Returns the
/// antiderivative normalized by the recursion (`h_1 = x ln x - x`).
pub fn h_beta(beta: i64, x: f64) -> Result<f64> {
    if beta < 0 {
        return Err(Error::InvalidArgument(
            "h_beta is only defined for beta >= 0 (1/ln^|beta| has no elementary antiderivative)"
                .into(),
        ));
    }
    if beta > MAX_BETA {
        return Err(Error::InvalidArgument(format!(
            "beta = {beta} exceeds the supported recursion depth {MAX_BETA}"
        )));
    }
    if x < 0.0 {
        return Err(Error::Domain {
            family: "log_power".into(),
            x,
        });
    }
    // x ln^β(x) -> 0 as x -> 0+ for every β >= 0.
    if x == 0.0 {
        return Ok(0.0);
    }
    let lnx = x.ln();
    let mut h = x;
    for b in 1..=beta {
        h = x * lnx.powi(b as i32) - b as f64 * h;
    }
    Ok(h)
}

/// One endpoint's contribution to the boundary term `h̃·q̃·f |_a^b`.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryLimit {
    pub endpoint: f64,
    pub value: f64,
    pub is_singular_endpoint: bool,
}

/// Evaluates `h̃(x)·q̃(x)·f(x)` at an interval endpoint, substituting the
/// analytic limit when the direct product is indeterminate (never naive
/// `0·∞` arithmetic).
pub fn boundary_limit(
    w: &WeightFamily,
    f: &SingularIntegrand,
    iv: Interval,
    endpoint: f64,
) -> Result<BoundaryLimit> {
    let fv = f.eval(endpoint);
    let direct = w.hq(endpoint) * fv;
    if direct.is_finite() {
        return Ok(BoundaryLimit {
            endpoint,
            value: direct,
            is_singular_endpoint: !fv.is_finite(),
        });
    }
    // Indeterminate or infinite: compare the weight's zero order against the
    // integrand's divergence strength.
    let gamma = f.gamma_near(endpoint, iv);
    match w.hq_zero_at(endpoint) {
        Some(zero) => {
            let sigma = zero.exponent - gamma;
            if sigma > 1e-9 {
                Ok(BoundaryLimit {
                    endpoint,
                    value: 0.0,
                    is_singular_endpoint: true,
                })
            } else {
                Err(Error::Divergence { endpoint, gamma })
            }
        }
        None => Err(Error::Divergence { endpoint, gamma }),
    }
}

/// The boundary term `h̃(x)·q̃(x)·f(x) |_a^b` with limit-form evaluation at
/// singular endpoints.
pub fn boundary_term(w: &WeightFamily, f: &SingularIntegrand, iv: Interval) -> Result<f64> {
    let upper = boundary_limit(w, f, iv, iv.b)?;
    let lower = boundary_limit(w, f, iv, iv.a)?;
    Ok(upper.value - lower.value)
}
