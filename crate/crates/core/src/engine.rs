//! The integration-by-parts transforms and the dispatch recipe.
//!
//! Every variant turns `(integrand, weight, interval)` into a
//! [`TransformResult`]: a boundary value, residual integrands that are
//! non-singular on the open interval, optional pre-solved correction values,
//! and a self-coefficient for implicit forms where the unknown integral
//! reappears on the right-hand side.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrand::{IntegrandForm, RealFn, SingularIntegrand};
use crate::quadrature::{
    integrate_with_layout, DerivativeSpec, Interval, PanelLayout, QuadratureRule,
};
use crate::weights::{boundary_limit, boundary_term, WeightFamily};

/// Outcome of one transform variant, to be evaluated against a quadrature
/// rule. The represented equation is
///
/// `I0 = boundary + Σ cᵢ·∫ rᵢ + Σ dⱼ·vⱼ + self_coefficient·I0`
///
/// which `evaluate` solves for `I0`.
#[derive(Clone)]
pub struct TransformResult {
    pub boundary_value: f64,
    residual_terms: Vec<(f64, RealFn)>,
    correction_values: Vec<(f64, f64)>,
    self_coefficient: f64,
}

impl TransformResult {
    pub fn new(boundary_value: f64) -> Self {
        TransformResult {
            boundary_value,
            residual_terms: Vec::new(),
            correction_values: Vec::new(),
            self_coefficient: 0.0,
        }
    }

    pub fn with_residual(mut self, coefficient: f64, term: RealFn) -> Self {
        self.residual_terms.push((coefficient, term));
        self
    }

    pub fn with_correction(mut self, coefficient: f64, value: f64) -> Self {
        self.correction_values.push((coefficient, value));
        self
    }

    /// Sets the coefficient of `I0` on the right-hand side. Coefficients at
    /// 1 make `I0 = I0 + ...` unsolvable and are rejected.
    pub fn with_self_coefficient(mut self, coefficient: f64) -> Result<Self> {
        if (1.0 - coefficient).abs() < 1e-12 {
            return Err(Error::UnsolvableRelation { coefficient });
        }
        self.self_coefficient = coefficient;
        Ok(self)
    }

    pub fn self_coefficient(&self) -> f64 {
        self.self_coefficient
    }

    /// Combined residual integrand (sum of coefficient-weighted terms).
    pub fn residual_integrand(&self, x: f64) -> f64 {
        self.residual_terms.iter().map(|(c, f)| c * f(x)).sum()
    }

    pub fn has_residual(&self) -> bool {
        !self.residual_terms.is_empty()
    }

    /// Quadrature of the residual terms and the implicit solve for `I0`.
    pub fn evaluate(
        &self,
        iv: Interval,
        rule: &QuadratureRule,
        layout: PanelLayout,
    ) -> Result<f64> {
        let mut rhs = self.boundary_value;
        for (c, f) in &self.residual_terms {
            rhs += c * integrate_with_layout(f.as_ref(), iv, rule, layout)?;
        }
        for (c, v) in &self.correction_values {
            rhs += c * v;
        }
        Ok(rhs / (1.0 - self.self_coefficient))
    }

    /// Checks the residual at the quadrature nodes nearest each endpoint:
    /// all must be finite and the nearest node must stay bounded. This is
    /// the computable surrogate for the limit condition that the
    /// transformed integrand stays finite at the singularity.
    pub fn residual_bounded_near_endpoints(&self, iv: Interval, rule: &QuadratureRule) -> bool {
        if self.residual_terms.is_empty() {
            return true;
        }
        let nodes = rule.mapped_nodes(iv);
        if nodes.is_empty() {
            return true;
        }
        let probe = 5.min(nodes.len());
        let mut ok = true;
        let mut check = |xs: &[f64]| {
            for (i, &x) in xs.iter().enumerate() {
                let v = self.residual_integrand(x);
                if !v.is_finite() || (i == 0 && v.abs() > 1e6) {
                    ok = false;
                }
            }
        };
        check(&nodes[..probe]);
        let tail: Vec<f64> = nodes[nodes.len() - probe..].iter().rev().copied().collect();
        check(&tail);
        ok
    }
}

/// Relative-error bound for a surrogate exponent mismatch `δγ = γ̃ - γ`.
#[derive(Debug, Clone, Copy)]
pub struct ErrorEstimate {
    pub delta_gamma: f64,
    pub epsilon_bound: f64,
}

/// Conventional integration by parts: `I0 = p·h|_a^b - ∫ h·p′ dx`, valid
/// when the denominator's analytic inverse-antiderivative `h` is known.
pub fn ibp_conventional(f: &SingularIntegrand, iv: Interval) -> Result<TransformResult> {
    let w = f.known_weight().ok_or(Error::UnsupportedWeight)?.clone();
    let Some((p, p_prime, _, _)) = f.rational_parts() else {
        return Err(Error::UnsupportedWeight);
    };
    let p = p.clone();
    let p_prime = p_prime.clone();
    let boundary = conventional_boundary(&p, &w, iv)?;
    let wh = w.clone();
    let residual: RealFn = Arc::new(move |x| wh.h(x).unwrap_or(f64::NAN) * p_prime(x));
    Ok(TransformResult::new(boundary).with_residual(-1.0, residual))
}

/// `p(x)·h(x)` at both endpoints with limit handling for `0·∞` products.
fn conventional_boundary(p: &RealFn, w: &WeightFamily, iv: Interval) -> Result<f64> {
    let eval = |x: f64| -> Result<f64> {
        let direct = p(x) * w.h(x).unwrap_or(f64::NAN);
        if direct.is_finite() {
            return Ok(direct);
        }
        product_limit(|t| p(t) * w.h(t).unwrap_or(f64::NAN), x, iv)
    };
    Ok(eval(iv.b)? - eval(iv.a)?)
}

/// Limit of a product at an interval endpoint by inward sampling: returns 0
/// for a shrinking trend, the near value for a flat trend, and a divergence
/// error otherwise.
fn product_limit<G: Fn(f64) -> f64>(g: G, x: f64, iv: Interval) -> Result<f64> {
    let s = 1e-6 * iv.width();
    let inward = if (x - iv.a).abs() < (x - iv.b).abs() {
        1.0
    } else {
        -1.0
    };
    let near = g(x + inward * s);
    let far = g(x + inward * 2.0 * s);
    if !near.is_finite() || !far.is_finite() {
        return Err(Error::Divergence {
            endpoint: x,
            gamma: f64::NAN,
        });
    }
    if near.abs() <= 0.9 * far.abs() {
        Ok(0.0)
    } else if (near - far).abs() <= 1e-3 * near.abs().max(far.abs()) {
        Ok(near)
    } else {
        Err(Error::Divergence {
            endpoint: x,
            gamma: f64::NAN,
        })
    }
}

/// Central-difference step for residual closures: the default policy,
/// shrunk when a singular endpoint is within stencil reach.
fn cd_step(x: f64, singular_distance: Option<f64>) -> f64 {
    let base = DerivativeSpec::default_step(x);
    match singular_distance {
        Some(d) if d.is_finite() => base.min((1e-4 * d).max(1e-12)),
        _ => base,
    }
}

fn nearest_singular_distance(f: &SingularIntegrand, iv: Interval, x: f64) -> Option<f64> {
    f.singular_points
        .iter()
        .chain([iv.a, iv.b].iter())
        .map(|s| (x - s).abs())
        .fold(None, |acc: Option<f64>, d| {
            Some(acc.map_or(d, |m| m.min(d)))
        })
}

/// Derivative of `f` for use inside residual integrands, with a
/// singularity-aware central-difference step for sampled integrands.
fn residual_deriv(f: &SingularIntegrand, iv: Interval, x: f64) -> f64 {
    if f.has_analytic_derivative() {
        return f.deriv(x).unwrap_or(f64::NAN);
    }
    let h = cd_step(x, nearest_singular_distance(f, iv, x));
    let (fp, fm) = (f.eval(x + h), f.eval(x - h));
    if fp.is_finite() && fm.is_finite() {
        (fp - fm) / (2.0 * h)
    } else {
        f64::NAN
    }
}

/// Surrogate-weight transform for integrands with unknown denominator:
///
/// `I0 = h̃·q̃·f|_a^b - ∫ [h̃·q̃′·f + h̃·q̃·f′] dx`
///
/// using the analytic product forms of the weight family. The boundary term
/// is evaluated in limit form at singular endpoints.
pub fn ibp_general_unknown_q(
    f: &SingularIntegrand,
    iv: Interval,
    w: &WeightFamily,
) -> Result<TransformResult> {
    let boundary = boundary_term(w, f, iv)?;
    let wf = w.clone();
    let fi = f.clone();
    let residual: RealFn =
        Arc::new(move |x| wf.hq_prime(x) * fi.eval(x) + wf.hq(x) * residual_deriv(&fi, iv, x));
    Ok(TransformResult::new(boundary).with_residual(-1.0, residual))
}

/// Log-ratio corrected transform for a known denominator `q` approached
/// with a surrogate `q̃`:
///
/// `I0 = h̃q̃f|_a^b - ln(q̃/q)·h̃q̃f|_a^b - ∫ h̃·(q̃/q)·p′ dx
///       + ∫ ln(q̃/q)·[h̃q̃f]′ dx`
///
/// Reduces exactly to the conventional transform when `q̃ = q`.
pub fn ibp_known_q_correction(
    f: &SingularIntegrand,
    iv: Interval,
    w: &WeightFamily,
) -> Result<TransformResult> {
    let Some((p, p_prime, q, _)) = f.rational_parts() else {
        return Err(Error::UnsupportedWeight);
    };
    if f.known_weight() == Some(w) {
        // ln(q̃/q) vanishes identically; this is conventional IBP.
        return ibp_conventional(f, iv);
    }
    let (p, p_prime, q) = (p.clone(), p_prime.clone(), q.clone());

    // The correction needs ln(q̃/q) real on the open interval.
    for k in 1..=17 {
        let x = iv.a + iv.width() * k as f64 / 18.0;
        let ratio = w.q(x) / q(x);
        if ratio <= 0.0 || ratio.is_nan() {
            return Err(Error::LogDomain { x });
        }
    }

    let boundary_main = boundary_term(w, f, iv)?;
    let boundary_log = {
        let term = |x: f64| -> Result<f64> {
            let direct = (w.q(x) / q(x)).ln() * w.hq(x) * f.eval(x);
            if direct.is_finite() {
                return Ok(direct);
            }
            // h̃q̃f already has a finite (possibly zero) limit here; the extra
            // log factor cannot push a strictly vanishing limit away from 0.
            let base = boundary_limit(w, f, iv, x)?;
            if base.value == 0.0 {
                Ok(0.0)
            } else {
                product_limit(|t| (w.q(t) / q(t)).ln() * w.hq(t) * f.eval(t), x, iv)
            }
        };
        term(iv.b)? - term(iv.a)?
    };

    let (wa, qa, pp) = (w.clone(), q.clone(), p_prime.clone());
    let direct_term: RealFn =
        Arc::new(move |x| wa.h(x).unwrap_or(f64::NAN) * (wa.q(x) / qa(x)) * pp(x));

    let (wb, qb, fb) = (w.clone(), q.clone(), f.clone());
    let _ = p; // numerator enters through f = p/q
    let log_term: RealFn = Arc::new(move |x| {
        let fv = fb.eval(x);
        // [h̃q̃f]′ = f + h̃q̃′·f + h̃q̃·f′
        let dprod = fv + wb.hq_prime(x) * fv + wb.hq(x) * residual_deriv(&fb, iv, x);
        (wb.q(x) / qb(x)).ln() * dprod
    });

    Ok(TransformResult::new(boundary_main - boundary_log)
        .with_residual(-1.0, direct_term)
        .with_residual(1.0, log_term))
}

/// Direct route under the constraint `h·q̃ = x`:
///
/// `I0 = x·f|_a^b - ∫ (x/q)·p′ dx + ∫ (x·q′/q²)·p dx`
///
/// independent of the surrogate choice.
pub fn direct_method_hx_equals_x(f: &SingularIntegrand, iv: Interval) -> Result<TransformResult> {
    let Some((p, p_prime, q, q_prime)) = f.rational_parts() else {
        return Err(Error::UnsupportedWeight);
    };
    let q_prime: RealFn = match (q_prime, f.known_weight()) {
        (Some(qp), _) => qp.clone(),
        (None, Some(w)) => {
            let w = w.clone();
            Arc::new(move |x| w.q_prime(x))
        }
        (None, None) => {
            return Err(Error::InvalidArgument(
                "direct method requires q′ (analytic or via a weight family)".into(),
            ))
        }
    };
    let boundary = boundary_term(&WeightFamily::Unit, f, iv)?;
    let (qa, pp) = (q.clone(), p_prime.clone());
    let first: RealFn = Arc::new(move |x| x / qa(x) * pp(x));
    let (qb, pv) = (q.clone(), p.clone());
    let second: RealFn = Arc::new(move |x| {
        let qv = qb(x);
        x * q_prime(x) / (qv * qv) * pv(x)
    });
    Ok(TransformResult::new(boundary)
        .with_residual(-1.0, first)
        .with_residual(1.0, second))
}

/// Denominator classes satisfying `q′ = c·q^{-β}`, for the direct route
/// under the constraint `h·q̃·q′/q = -1`.
#[derive(Debug, Clone, Copy)]
pub enum BetaFamily {
    /// `1/q = x^{-γ}`: `β = (1-γ)/γ`, `c = γ`.
    PowerLaw { gamma: f64 },
    /// `1/q = exp(-λx)`: `β = -1`, `c = λ`.
    Exponential { lambda: f64 },
}

/// The `(β, c)` pair of the constraint solution for a denominator class.
pub fn beta_relation_params(family: BetaFamily) -> (f64, f64) {
    match family {
        BetaFamily::PowerLaw { gamma } => ((1.0 - gamma) / gamma, gamma),
        BetaFamily::Exponential { lambda } => (-1.0, lambda),
    }
}

/// Direct route via the proportionality `I₊ = -β·I0` of the constrained
/// auxiliary integral, solved for `I0`:
///
/// `I0 = [∫ (u/q)·p′ dx - u·f|_a^b] / β`, with `u = -q/q′`.
pub fn direct_method_beta_relation(
    f: &SingularIntegrand,
    iv: Interval,
    family: BetaFamily,
) -> Result<TransformResult> {
    let Some((_, p_prime, _, _)) = f.rational_parts() else {
        return Err(Error::UnsupportedWeight);
    };
    let p_prime = p_prime.clone();
    let (beta, _c) = beta_relation_params(family);
    if beta.abs() < 1e-12 {
        return Err(Error::UnsolvableRelation { coefficient: beta });
    }

    // u = -q/q′ and u/q = -1/q′ in closed form per class.
    let (u, u_over_q): (RealFn, RealFn) = match family {
        BetaFamily::PowerLaw { gamma } => (
            Arc::new(move |x| -x / gamma),
            Arc::new(move |x: f64| -x.powf(1.0 - gamma) / gamma),
        ),
        BetaFamily::Exponential { lambda } => (
            Arc::new(move |_| -1.0 / lambda),
            Arc::new(move |x: f64| -(-lambda * x).exp() / lambda),
        ),
    };

    // boundary u·f|_a^b, limit-aware at singular endpoints
    let uf_at = |x: f64| -> Result<f64> {
        let direct = u(x) * f.eval(x);
        if direct.is_finite() {
            Ok(direct)
        } else {
            product_limit(|t| u(t) * f.eval(t), x, iv)
        }
    };
    let boundary = uf_at(iv.b)? - uf_at(iv.a)?;

    let residual: RealFn = Arc::new(move |x| u_over_q(x) * p_prime(x));
    // β·I0 = ∫(u/q)p′ - u·f|  =>  I0 = (1/β)∫(u/q)p′ - boundary/β
    Ok(TransformResult::new(-boundary / beta).with_residual(1.0 / beta, residual))
}

/// Direct route by solving the first-order condition `u′ - u·q′/q = 1`:
/// the solution `u = h·q` reproduces the conventional transform,
/// `I0 = h·p|_a^b - ∫ h·p′ dx`, evaluated here through `u·f` and `(u/q)·p′`.
pub fn direct_method_ode(f: &SingularIntegrand, iv: Interval) -> Result<TransformResult> {
    let w = f.known_weight().ok_or(Error::UnsupportedWeight)?.clone();
    let Some((_, p_prime, _, _)) = f.rational_parts() else {
        return Err(Error::UnsupportedWeight);
    };
    let p_prime = p_prime.clone();
    // u·f with u = h·q, via the stable product form and boundary limits
    let boundary = boundary_term(&w, f, iv)?;
    let residual: RealFn = Arc::new(move |x| w.h(x).unwrap_or(f64::NAN) * p_prime(x));
    Ok(TransformResult::new(boundary).with_residual(-1.0, residual))
}

/// The integrating-factor solution `u(x) = h(x)·q(x)` of the first-order
/// condition, exposed for verification.
pub fn ode_solution_u(w: &WeightFamily, x: f64) -> f64 {
    w.hq(x)
}

/// Relative-error bound `ε ≤ |δγ|/(1-γ̃) · 1/(b^{1-γ} - a^{1-γ})` for the
/// exponent-mismatch regime `γ < 1`, `γ̃ < 1`, `0 ≤ a < b ≤ 1`.
pub fn estimate_relative_error(
    gamma: f64,
    gamma_tilde: f64,
    iv: Interval,
) -> Result<ErrorEstimate> {
    if gamma >= 1.0 || gamma_tilde >= 1.0 {
        return Err(Error::Regime(format!(
            "bound requires gamma < 1 and gamma_tilde < 1 (got {gamma}, {gamma_tilde})"
        )));
    }
    if iv.a < 0.0 || iv.b > 1.0 {
        return Err(Error::Regime(format!(
            "bound requires 0 <= a < b <= 1 (got [{}, {}])",
            iv.a, iv.b
        )));
    }
    let delta_gamma = gamma_tilde - gamma;
    let denom = iv.b.powf(1.0 - gamma) - iv.a.powf(1.0 - gamma);
    Ok(ErrorEstimate {
        delta_gamma,
        epsilon_bound: delta_gamma.abs() / (1.0 - gamma_tilde) / denom,
    })
}

/// Splits an interval at interior singular points so every piece carries
/// singularities only on its boundary. Duplicates are dropped silently.
pub fn split_at_singularities(
    f: &SingularIntegrand,
    iv: Interval,
) -> Vec<(SingularIntegrand, Interval)> {
    let mut cuts: Vec<f64> = f
        .singular_points
        .iter()
        .copied()
        .filter(|x| *x > iv.a && *x < iv.b)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut pieces = Vec::with_capacity(cuts.len() + 1);
    let mut lo = iv.a;
    for cut in cuts {
        pieces.push((f.clone(), Interval { a: lo, b: cut }));
        lo = cut;
    }
    pieces.push((f.clone(), Interval { a: lo, b: iv.b }));
    pieces
}

/// Options steering the dispatch recipe.
#[derive(Clone)]
pub struct RecipeOptions {
    pub rule: QuadratureRule,
    /// Curated surrogate candidates tried before the power-fit step.
    pub candidate_weights: Vec<WeightFamily>,
    /// Cap on repeated plain-IBP passes (step five of the recipe).
    pub max_plain_repeats: usize,
}

impl Default for RecipeOptions {
    fn default() -> Self {
        RecipeOptions {
            rule: QuadratureRule::default_composite(),
            candidate_weights: Vec::new(),
            max_plain_repeats: 3,
        }
    }
}

fn eval_variant(
    result: &TransformResult,
    iv: Interval,
    opts: &RecipeOptions,
    layout: PanelLayout,
) -> Result<f64> {
    if !result.residual_bounded_near_endpoints(iv, &opts.rule) {
        let nodes = opts.rule.mapped_nodes(iv);
        return Err(Error::SingularityLeak { x: nodes[0] });
    }
    result.evaluate(iv, &opts.rule, layout)
}

/// Picks the graded layout only when every residual sample comes from
/// analytic structure; central differences cannot reach into the
/// geometrically refined panels next to a singular endpoint.
fn preferred_layout(f: &SingularIntegrand) -> PanelLayout {
    if f.has_analytic_derivative() {
        PanelLayout::GradedBoth
    } else {
        PanelLayout::Uniform
    }
}

/// The dispatch recipe: tries the transform variants in order and returns
/// the first value whose residual passes the boundedness check, together
/// with the trace of variants tried.
///
/// 1. conventional IBP when the denominator's antiderivative is known;
/// 2. curated surrogate weights with known antiderivatives;
/// 3. a fitted power surrogate suppressing the endpoint singularity;
/// 4. the unit weight (plain integration by parts);
/// 5. repeated plain passes until the residual becomes computable.
pub fn recipe_solve(
    f: &SingularIntegrand,
    iv: Interval,
    opts: &RecipeOptions,
) -> Result<(f64, Vec<String>)> {
    for x in &f.singular_points {
        if *x > iv.a && *x < iv.b {
            return Err(Error::InvalidArgument(format!(
                "singular point {x} lies inside the interval; split first"
            )));
        }
    }
    let mut trace: Vec<String> = Vec::new();
    let layout = preferred_layout(f);

    // 1: conventional
    if f.known_weight().is_some() {
        trace.push("conventional".into());
        if let Ok(result) = ibp_conventional(f, iv) {
            if let Ok(v) = eval_variant(&result, iv, opts, layout) {
                return Ok((v, trace));
            }
        }
    }

    // 2: curated approximate weights
    for w in &opts.candidate_weights {
        trace.push(format!("approximate_weight({})", w.name()));
        if let Ok(result) = ibp_general_unknown_q(f, iv, w) {
            if let Ok(v) = eval_variant(&result, iv, opts, layout) {
                return Ok((v, trace));
            }
        }
    }

    // 3: power surrogate fitted to the endpoint behaviour
    let singular_end = [iv.a, iv.b]
        .into_iter()
        .find(|e| f.singular_points.contains(e) || !f.eval(*e).is_finite());
    if let Some(endpoint) = singular_end {
        let gamma = f.gamma_near(endpoint, iv);
        if gamma > 1e-3 && gamma < 1.0 - 1e-3 {
            trace.push(format!("power_suppression(gamma={gamma:.3})"));
            let w = if endpoint == 0.0 {
                WeightFamily::Power { gamma_t: gamma }
            } else {
                WeightFamily::ShiftedPower {
                    gamma_t: gamma,
                    center: endpoint,
                }
            };
            if let Ok(result) = ibp_general_unknown_q(f, iv, &w) {
                if let Ok(v) = eval_variant(&result, iv, opts, layout) {
                    return Ok((v, trace));
                }
            }
        }
    }

    // 4 & 5: plain integration by parts, repeated
    let mut boundary_sum = 0.0;
    let mut sign = 1.0;
    let mut current = f.clone();
    for depth in 0..=opts.max_plain_repeats {
        trace.push(if depth == 0 {
            "plain_ibp".into()
        } else {
            format!("plain_ibp_repeat({depth})")
        });
        match ibp_general_unknown_q(&current, iv, &WeightFamily::Unit) {
            Ok(result) => {
                if let Ok(v) = eval_variant(&result, iv, opts, PanelLayout::Uniform) {
                    return Ok((boundary_sum + sign * v, trace));
                }
                // Residual ∫ x·g′ is still not computable: peel one more
                // level, integrating x·g′ by parts again.
                match boundary_term(&WeightFamily::Unit, &current, iv) {
                    Ok(b) => {
                        boundary_sum += sign * b;
                        sign = -sign;
                        let prev = current.clone();
                        let next: RealFn = Arc::new(move |x| x * residual_deriv(&prev, iv, x));
                        current = SingularIntegrand {
                            form: IntegrandForm::Blackbox {
                                f: next,
                                f_prime: None,
                            },
                            singular_points: current.singular_points.clone(),
                            gamma_hint: None,
                            beta_hint: current.beta_hint,
                        };
                    }
                    Err(_) => break,
                }
            }
            Err(_) => break,
        }
    }

    Err(Error::Unresolvable { trace })
}
