//! Integrand representation for the transform engine.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{central_difference, Interval};
use crate::weights::WeightFamily;

/// Shared real-valued function handle.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Wraps a closure into a [`RealFn`].
pub fn real_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> RealFn {
    Arc::new(f)
}

/// Structural knowledge about the integrand.
#[derive(Clone)]
pub enum IntegrandForm {
    /// `f(x) = p(x) / q(x)` with a smooth numerator and a denominator that
    /// vanishes at the singular points. `weight` links `q` to a catalog
    /// family carrying the analytic antiderivative of `1/q`.
    Rational {
        p: RealFn,
        p_prime: RealFn,
        q: RealFn,
        q_prime: Option<RealFn>,
        weight: Option<WeightFamily>,
    },
    /// Only point values of `f` are available (optionally with an analytic
    /// derivative supplied by the caller).
    Blackbox { f: RealFn, f_prime: Option<RealFn> },
}

/// A singular or nearly singular integrand together with the hints the
/// dispatch recipe can use.
#[derive(Clone)]
pub struct SingularIntegrand {
    pub form: IntegrandForm,
    /// Locations where the integrand diverges; expected on the boundary of
    /// the interval being integrated (interior points must be split first).
    pub singular_points: Vec<f64>,
    /// Known or estimated power-law strength of the singularity.
    pub gamma_hint: Option<f64>,
    /// Known logarithmic power of the singularity.
    pub beta_hint: Option<i64>,
}

impl SingularIntegrand {
    pub fn blackbox(f: RealFn) -> Self {
        SingularIntegrand {
            form: IntegrandForm::Blackbox { f, f_prime: None },
            singular_points: Vec::new(),
            gamma_hint: None,
            beta_hint: None,
        }
    }

    pub fn rational(p: RealFn, p_prime: RealFn, q: RealFn, q_prime: Option<RealFn>) -> Self {
        SingularIntegrand {
            form: IntegrandForm::Rational {
                p,
                p_prime,
                q,
                q_prime,
                weight: None,
            },
            singular_points: Vec::new(),
            gamma_hint: None,
            beta_hint: None,
        }
    }

    /// Rational integrand whose denominator is a catalog weight family, so
    /// the analytic antiderivative of `1/q` is known.
    pub fn rational_with_weight(p: RealFn, p_prime: RealFn, w: WeightFamily) -> Self {
        let qw = w.clone();
        let qd = w.clone();
        SingularIntegrand {
            form: IntegrandForm::Rational {
                p,
                p_prime,
                q: Arc::new(move |x| qw.q(x)),
                q_prime: Some(Arc::new(move |x| qd.q_prime(x))),
                weight: Some(w),
            },
            singular_points: Vec::new(),
            gamma_hint: None,
            beta_hint: None,
        }
    }

    pub fn with_derivative(mut self, df: RealFn) -> Self {
        if let IntegrandForm::Blackbox { f_prime, .. } = &mut self.form {
            *f_prime = Some(df);
        }
        self
    }

    pub fn with_singular_points(mut self, points: Vec<f64>) -> Self {
        self.singular_points = points;
        self
    }

    pub fn with_gamma_hint(mut self, gamma: f64) -> Self {
        self.gamma_hint = Some(gamma);
        self
    }

    pub fn with_beta_hint(mut self, beta: i64) -> Self {
        self.beta_hint = Some(beta);
        self
    }

    /// Raw point value; may be non-finite at singular points.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.form {
            IntegrandForm::Rational { p, q, .. } => p(x) / q(x),
            IntegrandForm::Blackbox { f, .. } => f(x),
        }
    }

    /// Derivative of `f` at `x`: analytic when the structure provides one,
    /// central difference otherwise.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        match &self.form {
            IntegrandForm::Rational {
                p,
                p_prime,
                q,
                q_prime,
                weight,
            } => {
                let qv = q(x);
                if qv == 0.0 || !qv.is_finite() {
                    return Err(Error::Evaluation { x });
                }
                let dq = if let Some(qp) = q_prime {
                    qp(x)
                } else if let Some(w) = weight {
                    w.q_prime(x)
                } else {
                    central_difference(q.as_ref(), x)?
                };
                Ok(p_prime(x) / qv - p(x) * dq / (qv * qv))
            }
            IntegrandForm::Blackbox { f, f_prime } => match f_prime {
                Some(df) => Ok(df(x)),
                None => central_difference(f.as_ref(), x),
            },
        }
    }

    /// True when an analytic derivative path exists (no central differences).
    pub fn has_analytic_derivative(&self) -> bool {
        match &self.form {
            IntegrandForm::Rational {
                q_prime, weight, ..
            } => q_prime.is_some() || weight.is_some(),
            IntegrandForm::Blackbox { f_prime, .. } => f_prime.is_some(),
        }
    }

    /// Numerator value and derivative when the rational structure is known.
    pub fn rational_parts(&self) -> Option<(&RealFn, &RealFn, &RealFn, Option<&RealFn>)> {
        match &self.form {
            IntegrandForm::Rational {
                p,
                p_prime,
                q,
                q_prime,
                ..
            } => Some((p, p_prime, q, q_prime.as_ref())),
            IntegrandForm::Blackbox { .. } => None,
        }
    }

    pub fn known_weight(&self) -> Option<&WeightFamily> {
        match &self.form {
            IntegrandForm::Rational { weight, .. } => weight.as_ref(),
            IntegrandForm::Blackbox { .. } => None,
        }
    }

    /// Power-law strength of the divergence at `x` (an interval endpoint):
    /// the hint when present, otherwise a log-ratio estimate from two
    /// samples just inside the interval.
    pub fn gamma_near(&self, x: f64, iv: Interval) -> f64 {
        if let Some(g) = self.gamma_hint {
            return g;
        }
        self.estimate_gamma(x, iv).unwrap_or(0.0)
    }

    /// Log-ratio slope estimate of the singularity strength at endpoint `x`.
    pub fn estimate_gamma(&self, x: f64, iv: Interval) -> Option<f64> {
        let s = 1e-6 * iv.width();
        let inward = if (x - iv.a).abs() < (x - iv.b).abs() {
            1.0
        } else {
            -1.0
        };
        let f1 = self.eval(x + inward * s).abs();
        let f2 = self.eval(x + inward * 2.0 * s).abs();
        if !f1.is_finite() || !f2.is_finite() || f1 == 0.0 || f2 == 0.0 {
            return None;
        }
        Some((f1 / f2).ln() / std::f64::consts::LN_2)
    }

    /// Checks `f(x) == p(x)/q(x)` against the linked weight family at `n`
    /// evenly spread interior points (meaningful for rational forms with a
    /// catalog weight attached).
    pub fn weight_consistency_ok(&self, iv: Interval, n: usize) -> bool {
        let IntegrandForm::Rational { q, weight, .. } = &self.form else {
            return true;
        };
        let Some(w) = weight else { return true };
        for k in 1..=n {
            let x = iv.a + iv.width() * k as f64 / (n as f64 + 1.0);
            let (a, b) = (q(x), w.q(x));
            if !a.is_finite() || !b.is_finite() {
                continue;
            }
            let scale = a.abs().max(b.abs()).max(1e-300);
            if (a - b).abs() / scale > 1e-12 {
                return false;
            }
        }
        true
    }
}
