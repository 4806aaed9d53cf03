//! The two kernel applications: the electrostatic potential integral
//! `∫ dx/sqrt(x²+R²)` and the Helmholtz-kernel convolution with a
//! Rao-Wilton-Glisson current on the unit right-triangle pair, reduced to
//! nested 1-D transforms.
//!
//! The convolution uses the reduced form with inner variable `x ∈ [0, 1-y]`
//! and separation `R0 = sqrt(y² + (z'-z)²)`; the shifted current is masked
//! to its triangle support, so the inner integration runs over the exact
//! support subinterval and the integrand stays smooth apart from the kernel
//! peak at `x = 0`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::families::{eval_near_singular_plus, Family, FamilyCase, Method, SmoothFn};
use crate::quadrature::{oracle_integrate2, Accumulator, Interval, QuadratureRule};

/// Observation location in units of the square edge (triangles lie in the
/// `z = 0` plane).
#[derive(Debug, Clone, Copy)]
pub struct ObservationPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ObservationPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidArgument(
                "observation point must be finite".into(),
            ));
        }
        Ok(ObservationPoint { x, y, z })
    }
}

/// Right-triangle pair forming the unit square, with the current basis
/// defined on the shared (diagonal) edge.
#[derive(Debug, Clone, Copy)]
pub struct RwgPair {
    pub v_plus: [f64; 2],
    pub v_minus: [f64; 2],
    pub edge_length: f64,
    pub area_plus: f64,
    pub area_minus: f64,
    pub wavenumber: f64,
}

impl RwgPair {
    /// The unit-square pair: positive triangle (0,0)-(1,0)-(0,1) with free
    /// vertex at the origin, negative triangle with free vertex (1,1); the
    /// shared edge is the diagonal of length sqrt(2), both areas 1/2.
    pub fn unit_square(wavenumber: f64) -> Result<Self> {
        if wavenumber < 0.0 || !wavenumber.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "wavenumber must be finite and non-negative, got {wavenumber}"
            )));
        }
        let pair = RwgPair {
            v_plus: [0.0, 0.0],
            v_minus: [1.0, 1.0],
            edge_length: std::f64::consts::SQRT_2,
            area_plus: 0.5,
            area_minus: 0.5,
            wavenumber,
        };
        debug_assert!((pair.area_plus - 0.5).abs() < 1e-15);
        debug_assert!((pair.edge_length * pair.edge_length - 2.0).abs() < 1e-14);
        Ok(pair)
    }
}

/// Which triangle a point or current lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    Plus,
    Minus,
}

/// Vector component of the current under the convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    X,
    Y,
}

/// Numerator selection for the kernel convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurrentKind {
    /// The RWG basis current on the chosen triangle.
    Rwg {
        triangle: Triangle,
        component: Component,
    },
    /// Constant unit numerator over the full reduced domain (used by the
    /// reduction checks against the electrostatic integral).
    Unit,
}

const TRI_TOL: f64 = 1e-12;

fn in_plus_triangle(x: f64, y: f64) -> bool {
    x >= -TRI_TOL && y >= -TRI_TOL && x + y <= 1.0 + TRI_TOL
}

fn in_minus_triangle(x: f64, y: f64) -> bool {
    x <= 1.0 + TRI_TOL && y <= 1.0 + TRI_TOL && x + y >= 1.0 - TRI_TOL
}

/// RWG current at a point inside the named triangle:
/// `(ℓ/2A₊)(r - v₊)` on the positive triangle, `(ℓ/2A₋)(v₋ - r)` on the
/// negative one.
pub fn rwg_current(pair: &RwgPair, x: f64, y: f64, triangle: Triangle) -> Result<[f64; 2]> {
    match triangle {
        Triangle::Plus => {
            if !in_plus_triangle(x, y) {
                return Err(Error::Domain {
                    family: "rwg_plus_triangle".into(),
                    x,
                });
            }
            let s = pair.edge_length / (2.0 * pair.area_plus);
            Ok([s * (x - pair.v_plus[0]), s * (y - pair.v_plus[1])])
        }
        Triangle::Minus => {
            if !in_minus_triangle(x, y) {
                return Err(Error::Domain {
                    family: "rwg_minus_triangle".into(),
                    x,
                });
            }
            let s = pair.edge_length / (2.0 * pair.area_minus);
            Ok([s * (pair.v_minus[0] - x), s * (pair.v_minus[1] - y)])
        }
    }
}

/// One inner 1-D integral of the reduced convolution: the separation, the
/// outer variable and the reduced inner interval `[0, 1-y]`.
#[derive(Debug, Clone, Copy)]
pub struct KernelCase {
    pub r0: f64,
    pub y: f64,
    pub inner_interval: (f64, f64),
}

impl KernelCase {
    pub fn new(obs: &ObservationPoint, y: f64) -> Self {
        KernelCase {
            r0: (y * y + obs.z * obs.z).sqrt(),
            y,
            inner_interval: (0.0, 1.0 - y),
        }
    }
}

/// Electrostatic potential integral `∫_a^b dx/sqrt(x²+d²)` through the
/// log-branch surrogate (`q̃ = x`, `h̃ = ln x`).
pub fn electrostatic_integral(d: f64, a: f64, b: f64, gamma_tilde: f64) -> Result<f64> {
    electrostatic_integral_with_offset(d, a, b, gamma_tilde, 0.0)
}

/// Same integral with the surrogate weight shifted to `q̃ = (x + o)^γ̃`,
/// the knob the accuracy sweeps explore.
pub fn electrostatic_integral_with_offset(
    d: f64,
    a: f64,
    b: f64,
    gamma_tilde: f64,
    offset: f64,
) -> Result<f64> {
    if d <= 0.0 || d.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "separation must be positive, got {d}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let case = FamilyCase::new(
        Family::NearSingularPlus { gamma: 0.5, r: d },
        Interval::new(a, b)?,
        SmoothFn::one(),
    )?;
    let rule = QuadratureRule::default_composite();
    eval_near_singular_plus(
        &case,
        Method::Approximate {
            gamma_tilde,
            weight_center: -offset,
        },
        &rule,
    )
}

/// The current factor of the reduced inner integrand as a function of the
/// inner variable, linear by construction: `value(x) = c0 + c1·x`.
struct CurrentFactor {
    c0: f64,
    c1: f64,
}

impl CurrentFactor {
    fn build(kind: CurrentKind, pair: &RwgPair, obs: &ObservationPoint, y: f64) -> Self {
        match kind {
            CurrentKind::Unit => CurrentFactor { c0: 1.0, c1: 0.0 },
            CurrentKind::Rwg {
                triangle,
                component,
            } => {
                let (s, v) = match triangle {
                    Triangle::Plus => (pair.edge_length / (2.0 * pair.area_plus), pair.v_plus),
                    Triangle::Minus => (-pair.edge_length / (2.0 * pair.area_minus), pair.v_minus),
                };
                // source point is (x' - x, y' - y)
                match component {
                    Component::X => CurrentFactor {
                        c0: s * (obs.x - v[0]),
                        c1: -s,
                    },
                    Component::Y => CurrentFactor {
                        c0: s * (obs.y - y - v[1]),
                        c1: 0.0,
                    },
                }
            }
        }
    }
}

/// Support of the shifted current in the inner variable, intersected with
/// the reduced domain `[0, 1-y]`. `None` when empty.
fn inner_support(kind: CurrentKind, obs: &ObservationPoint, y: f64) -> Option<(f64, f64)> {
    let hi_domain = 1.0 - y;
    if hi_domain <= 0.0 || y < 0.0 {
        return None;
    }
    let (lo, hi) = match kind {
        CurrentKind::Unit => (0.0, hi_domain),
        CurrentKind::Rwg {
            triangle: Triangle::Plus,
            ..
        } => {
            if obs.y - y < 0.0 {
                return None;
            }
            ((obs.x + obs.y - y - 1.0).max(0.0), hi_domain.min(obs.x))
        }
        CurrentKind::Rwg {
            triangle: Triangle::Minus,
            ..
        } => {
            if obs.y - y > 1.0 {
                return None;
            }
            (
                (obs.x - 1.0).max(0.0),
                hi_domain.min(obs.x + obs.y - y - 1.0),
            )
        }
    };
    (hi > lo).then_some((lo, hi))
}

fn masked(kind: CurrentKind, obs: &ObservationPoint, x: f64, y: f64) -> bool {
    match kind {
        CurrentKind::Unit => true,
        CurrentKind::Rwg {
            triangle: Triangle::Plus,
            ..
        } => in_plus_triangle(obs.x - x, obs.y - y),
        CurrentKind::Rwg {
            triangle: Triangle::Minus,
            ..
        } => in_minus_triangle(obs.x - x, obs.y - y),
    }
}

/// Inner 1-D integral `∫ p̄0(x)/sqrt(x²+R0²) dx` over the current support,
/// with `p̄0 = e^{-jk·sqrt(x²+R0²)}/(4π) · J(x'-x, y'-y)`, evaluated through
/// the fully regularized transform (real and imaginary parts as two real
/// integrals).
pub fn green_kernel_inner(
    obs: &ObservationPoint,
    pair: &RwgPair,
    y: f64,
    kind: CurrentKind,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    let case = KernelCase::new(obs, y);
    let Some((lo, hi)) = inner_support(kind, obs, y) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let r0 = case.r0;
    let k = pair.wavenumber;
    let cf = CurrentFactor::build(kind, pair, obs, y);
    let obs_c = *obs;
    let inv4pi = 0.25 / std::f64::consts::PI;

    let part = |imaginary: bool| -> SmoothFn {
        let (c0, c1) = (cf.c0, cf.c1);
        let f = move |x: f64| {
            if !masked(kind, &obs_c, x, y) {
                return 0.0;
            }
            let r = (x * x + r0 * r0).sqrt();
            let phase = if imaginary {
                -(k * r).sin()
            } else {
                (k * r).cos()
            };
            inv4pi * phase * (c0 + c1 * x)
        };
        let df = move |x: f64| {
            if !masked(kind, &obs_c, x, y) {
                return 0.0;
            }
            let r = (x * x + r0 * r0).sqrt();
            let dr = x / r;
            let (phase, dphase) = if imaginary {
                (-(k * r).sin(), -k * (k * r).cos() * dr)
            } else {
                ((k * r).cos(), -k * (k * r).sin() * dr)
            };
            inv4pi * (dphase * (c0 + c1 * x) + phase * c1)
        };
        SmoothFn::new(Arc::new(f), Arc::new(df))
    };

    let mut value = [0.0; 2];
    for (slot, imaginary) in [(0usize, false), (1usize, true)] {
        let fam = FamilyCase::new(
            Family::NearSingularPlus { gamma: 0.5, r: r0 },
            Interval::new(lo, hi)?,
            part(imaginary),
        )?;
        value[slot] = eval_near_singular_plus(&fam, Method::Conventional, rule)?;
    }
    Ok(Complex64::new(value[0], value[1]))
}

/// Direct brute-force evaluation of the same inner integral with
/// `n_points` samples (test reference path).
pub fn green_kernel_inner_oracle(
    obs: &ObservationPoint,
    pair: &RwgPair,
    y: f64,
    kind: CurrentKind,
    n_points: usize,
) -> Result<Complex64> {
    let case = KernelCase::new(obs, y);
    let Some((lo, hi)) = inner_support(kind, obs, y) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let r0 = case.r0;
    let k = pair.wavenumber;
    let cf = CurrentFactor::build(kind, pair, obs, y);
    let obs_c = *obs;
    let inv4pi = 0.25 / std::f64::consts::PI;
    let iv = Interval::new(lo, hi)?;
    let f = |x: f64| {
        if !masked(kind, &obs_c, x, y) {
            return (0.0, 0.0);
        }
        let r = (x * x + r0 * r0).sqrt();
        let (s, c) = (k * r).sin_cos();
        let amp = inv4pi * (cf.c0 + cf.c1 * x) / r;
        (amp * c, -amp * s)
    };
    let (re, im) = oracle_integrate2(&f, iv, n_points, 0.0)?;
    Ok(Complex64::new(re, im))
}

/// How the inner integrals of the convolution are evaluated.
#[derive(Debug, Clone, Copy)]
pub enum InnerEval {
    /// The regularized transform (production path).
    Transform,
    /// Brute-force sampling with the given point count (reference path).
    DirectOracle { n_points: usize },
}

/// Outer panel arrangement.
///
/// The outer integrand grows like `ln(y)` toward `y = 0` for coplanar
/// observation points. The graded layout resolves that tail to full
/// precision; the uniform layout keeps every node above the resolution
/// floor of a fixed-sample brute-force inner reference, which is what an
/// apples-to-apples accuracy comparison between the two inner paths needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterLayout {
    Uniform,
    GradedAtOrigin,
}

/// Outer integration range and kink locations of the reduced convolution
/// for the given current.
fn outer_segments(kind: CurrentKind, obs: &ObservationPoint) -> Vec<(f64, f64)> {
    let (y_lo, y_hi) = match kind {
        CurrentKind::Unit => (0.0, 1.0),
        CurrentKind::Rwg {
            triangle: Triangle::Plus,
            ..
        } => (0.0, obs.y.min(1.0)),
        CurrentKind::Rwg {
            triangle: Triangle::Minus,
            ..
        } => ((obs.y - 1.0).max(0.0), (obs.x + obs.y - 1.0).min(1.0)),
    };
    if y_hi <= y_lo {
        return Vec::new();
    }
    // kinks where the support limit formulas switch
    let mut breaks = vec![y_lo, y_hi];
    for c in [obs.y, 1.0 - obs.x, obs.x + obs.y - 1.0] {
        if c > y_lo && c < y_hi {
            breaks.push(c);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    breaks.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Geometric refinement depth for the outer panel touching `y = 0`, where
/// the inner integral behaves like `ln(y)`.
const OUTER_GRADE_DEPTH: u32 = 32;

/// Outer panel list for one segment: uniform panels, with the panel touching
/// the kernel's `y = 0` singularity replaced by geometrically graded ones
/// when the graded layout is selected.
fn outer_panels(seg: Interval, rule: &QuadratureRule, refine_left: bool) -> Vec<(f64, f64)> {
    let n = rule.panels;
    let mut out = Vec::with_capacity(n + OUTER_GRADE_DEPTH as usize);
    for p in 0..n {
        let lo = seg.a + seg.width() * (p as f64 / n as f64);
        let hi = if p + 1 == n {
            seg.b
        } else {
            seg.a + seg.width() * ((p + 1) as f64 / n as f64)
        };
        if p == 0 && refine_left && seg.a == 0.0 {
            let edges = crate::quadrature::graded_edges_with_depth(lo, hi, OUTER_GRADE_DEPTH);
            for w in edges.windows(2) {
                if w[1] > w[0] {
                    out.push((w[0], w[1]));
                }
            }
        } else {
            out.push((lo, hi));
        }
    }
    out
}

/// Outer quadrature of the inner integral over `y`, split at support kinks;
/// the same outer discretization serves both the transform path and the
/// brute-force reference, so a comparison between them isolates the inner
/// evaluation.
pub fn rwg_convolution(
    obs: &ObservationPoint,
    pair: &RwgPair,
    kind: CurrentKind,
    outer_rule: &QuadratureRule,
    outer_layout: OuterLayout,
    inner: InnerEval,
) -> Result<Complex64> {
    let inner_rule = QuadratureRule::default_composite();
    let refine_left = outer_layout == OuterLayout::GradedAtOrigin && obs.z == 0.0;
    let mut re = Accumulator::default();
    let mut im = Accumulator::default();
    for (lo, hi) in outer_segments(kind, obs) {
        let seg = Interval::new(lo, hi)?;
        for (plo, phi) in outer_panels(seg, outer_rule, refine_left) {
            let mid = 0.5 * (plo + phi);
            let half = 0.5 * (phi - plo);
            for (&t, &w) in outer_rule.nodes.iter().zip(&outer_rule.weights) {
                let yj = mid + half * t;
                let v = match inner {
                    InnerEval::Transform => green_kernel_inner(obs, pair, yj, kind, &inner_rule)?,
                    InnerEval::DirectOracle { n_points } => {
                        green_kernel_inner_oracle(obs, pair, yj, kind, n_points)?
                    }
                };
                re.add(w * half * v.re);
                im.add(w * half * v.im);
            }
        }
    }
    Ok(Complex64::new(re.value(), im.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn obs(x: f64, y: f64) -> ObservationPoint {
        ObservationPoint::new(x, y, 0.0).unwrap()
    }

    fn outer_rule() -> QuadratureRule {
        crate::quadrature::gauss_legendre_rule(11)
            .unwrap()
            .with_panels(16)
            .unwrap()
    }

    #[test]
    fn rwg_current_examples() {
        let pair = RwgPair::unit_square(1.0).unwrap();
        // free vertex of the positive triangle carries zero current
        let j = rwg_current(&pair, 0.0, 0.0, Triangle::Plus).unwrap();
        assert_eq!(j, [0.0, 0.0]);
        // interior point: sqrt(2)·r
        let j = rwg_current(&pair, 0.5, 0.25, Triangle::Plus).unwrap();
        assert_abs_diff_eq!(j[0], std::f64::consts::SQRT_2 * 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(j[1], std::f64::consts::SQRT_2 * 0.25, epsilon = 1e-15);
        // free vertex of the negative triangle
        let j = rwg_current(&pair, 1.0, 1.0, Triangle::Minus).unwrap();
        assert_eq!(j, [0.0, 0.0]);
        // outside the triangle
        assert!(rwg_current(&pair, 0.9, 0.9, Triangle::Plus).is_err());
        assert!(rwg_current(&pair, 0.1, 0.1, Triangle::Minus).is_err());
    }

    #[test]
    fn electrostatic_value() {
        // ∫_0^d dx/sqrt(x²+d²) = ln(1+sqrt 2) for every d
        let want = (1.0 + std::f64::consts::SQRT_2).ln();
        for d in [0.1, 0.15, 0.2] {
            let v = electrostatic_integral(d, 0.0, d, 1.0).unwrap();
            assert_abs_diff_eq!(v, want, epsilon = 1e-11);
        }
        // empty interval
        assert_eq!(electrostatic_integral(0.1, 0.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn electrostatic_offset_sweep_stays_accurate() {
        let d = 0.1;
        let want = (1.0 + std::f64::consts::SQRT_2).ln();
        for o in [0.0, 0.5 * d, 5.0 * d, 50.0 * d] {
            let v = electrostatic_integral_with_offset(d, 0.0, d, 1.0, o).unwrap();
            let eps = ((v - want) / want).abs();
            assert!(eps < 1e-4, "o={o}: eps {eps:.3e}");
        }
    }

    #[test]
    fn reduction_to_electrostatic_kernel() {
        // k = 0, unit numerator: inner value = electrostatic integral /(4π)
        let pair = RwgPair::unit_square(0.0).unwrap();
        let rule = QuadratureRule::default_composite();
        for (y, z) in [(0.3, 0.0), (0.6, 0.0), (0.0, 0.1)] {
            let o = ObservationPoint::new(0.5, 0.5, z).unwrap();
            let r0 = (y * y + z * z).sqrt();
            let inner = green_kernel_inner(&o, &pair, y, CurrentKind::Unit, &rule).unwrap();
            let direct = electrostatic_integral(r0, 0.0, 1.0 - y, 1.0).unwrap()
                / (4.0 * std::f64::consts::PI);
            assert_abs_diff_eq!(inner.re, direct, epsilon = 1e-12);
            assert!(inner.im.abs() < 1e-14);
        }
    }

    #[test]
    fn inner_empty_at_top_edge() {
        let pair = RwgPair::unit_square(1.0).unwrap();
        let rule = QuadratureRule::default_composite();
        let v = green_kernel_inner(&obs(0.5, 0.5), &pair, 1.0, CurrentKind::Unit, &rule).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn support_masking_is_exact() {
        let pair = RwgPair::unit_square(1.0).unwrap();
        let rule = QuadratureRule::default_composite();
        let kind = CurrentKind::Rwg {
            triangle: Triangle::Plus,
            component: Component::X,
        };
        // y beyond the observation row: shifted current leaves the triangle
        let v = green_kernel_inner(&obs(0.5, 0.25), &pair, 0.5, kind, &rule).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
        // observation far outside the square
        let v = green_kernel_inner(&obs(10.0, 0.5), &pair, 0.25, kind, &rule).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn inner_matches_brute_force_reference() {
        let pair = RwgPair::unit_square(1.0).unwrap();
        let rule = QuadratureRule::default_composite();
        let kind = CurrentKind::Rwg {
            triangle: Triangle::Plus,
            component: Component::X,
        };
        for (o, y) in [
            (obs(0.45, 0.55), 0.21),
            (obs(0.85, 0.35), 0.07),
            (obs(0.15, 0.95), 0.5),
        ] {
            let a = green_kernel_inner(&o, &pair, y, kind, &rule).unwrap();
            let b = green_kernel_inner_oracle(&o, &pair, y, kind, 100_000).unwrap();
            let eps = (a - b).norm() / b.norm();
            assert!(eps < 1e-6, "obs ({}, {}) y {y}: eps {eps:.3e}", o.x, o.y);
        }
    }

    #[test]
    fn smooth_kernel_far_from_plane() {
        // large z-offset: the kernel is smooth; the transform agrees with
        // plain brute-force quadrature to full precision
        let pair = RwgPair::unit_square(1.0).unwrap();
        let rule = QuadratureRule::default_composite();
        let o = ObservationPoint::new(0.5, 0.5, 10.0).unwrap();
        let a = green_kernel_inner(&o, &pair, 0.4, CurrentKind::Unit, &rule).unwrap();
        let b = green_kernel_inner_oracle(&o, &pair, 0.4, CurrentKind::Unit, 100_000).unwrap();
        assert!((a - b).norm() / b.norm() < 1e-10);
    }

    #[test]
    fn convolution_real_for_zero_wavenumber() {
        let pair = RwgPair::unit_square(0.0).unwrap();
        let v = rwg_convolution(
            &obs(0.35, 0.45),
            &pair,
            CurrentKind::Unit,
            &outer_rule(),
            OuterLayout::GradedAtOrigin,
            InnerEval::Transform,
        )
        .unwrap();
        assert!(v.re > 0.0);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn convolution_component_swap_symmetry() {
        // the reduced domain, kernel and plus-triangle support are all
        // symmetric under (x,y) -> (y,x); swapping the observation point
        // exchanges the two current components
        let pair = RwgPair::unit_square(1.0).unwrap();
        let rule = outer_rule();
        for (x, y) in [(0.25, 0.65), (0.15, 0.35)] {
            let a = rwg_convolution(
                &obs(x, y),
                &pair,
                CurrentKind::Rwg {
                    triangle: Triangle::Plus,
                    component: Component::X,
                },
                &rule,
                OuterLayout::GradedAtOrigin,
                InnerEval::Transform,
            )
            .unwrap();
            let b = rwg_convolution(
                &obs(y, x),
                &pair,
                CurrentKind::Rwg {
                    triangle: Triangle::Plus,
                    component: Component::Y,
                },
                &rule,
                OuterLayout::GradedAtOrigin,
                InnerEval::Transform,
            )
            .unwrap();
            assert!((a - b).norm() < 1e-8, "({x},{y}): {a} vs {b}");
        }
    }

    #[test]
    fn convolution_minus_triangle_symmetry() {
        let pair = RwgPair::unit_square(1.0).unwrap();
        let rule = outer_rule();
        let a = rwg_convolution(
            &obs(0.85, 0.45),
            &pair,
            CurrentKind::Rwg {
                triangle: Triangle::Minus,
                component: Component::X,
            },
            &rule,
            OuterLayout::GradedAtOrigin,
            InnerEval::Transform,
        )
        .unwrap();
        let b = rwg_convolution(
            &obs(0.45, 0.85),
            &pair,
            CurrentKind::Rwg {
                triangle: Triangle::Minus,
                component: Component::Y,
            },
            &rule,
            OuterLayout::GradedAtOrigin,
            InnerEval::Transform,
        )
        .unwrap();
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn convolution_cell_matches_oracle() {
        // one grid cell of the accuracy experiment at full tolerance
        let pair = RwgPair::unit_square(1.0).unwrap();
        let rule = outer_rule();
        let kind = CurrentKind::Rwg {
            triangle: Triangle::Plus,
            component: Component::X,
        };
        let o = obs(0.45, 0.35);
        let a = rwg_convolution(
            &o,
            &pair,
            kind,
            &rule,
            OuterLayout::Uniform,
            InnerEval::Transform,
        )
        .unwrap();
        let b = rwg_convolution(
            &o,
            &pair,
            kind,
            &rule,
            OuterLayout::Uniform,
            InnerEval::DirectOracle { n_points: 100_000 },
        )
        .unwrap();
        let eps = (a - b).norm() / b.norm();
        assert!(eps < 1e-6, "eps {eps:.3e}");
    }
}
