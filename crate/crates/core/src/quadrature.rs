//! Non-singular numerical integration, numerical differentiation and a
//! brute-force reference oracle.
//!
//! The production path is composite Gauss-Legendre: an n-point base rule on
//! [-1, 1] mapped onto a panel layout. Panels are uniform by default; a
//! geometrically graded layout is available for residuals whose derivatives
//! concentrate at an interval endpoint. Nodes are always interior, so
//! endpoint singularities are never sampled.

use crate::error::{Error, Result};

/// A finite integration interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "interval limits must be finite, got [{a}, {b}]"
            )));
        }
        if a >= b {
            return Err(Error::InvalidArgument(format!(
                "interval requires a < b, got [{a}, {b}]"
            )));
        }
        Ok(Interval { a, b })
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// How to obtain derivatives of a sampled integrand.
#[derive(Clone)]
pub enum DerivativeSpec {
    /// The caller supplies the derivative analytically.
    Analytic,
    /// Central difference `(f(x+h) - f(x-h)) / (2h)` with the given step.
    CentralDifference { step: f64 },
}

impl DerivativeSpec {
    /// Default central-difference step at position `x`, balancing truncation
    /// against round-off.
    pub fn default_step(x: f64) -> f64 {
        (1e-7 * x.abs()).max(1e-6)
    }

    pub fn central(step: f64) -> Result<Self> {
        if step <= 0.0 || step.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "central-difference step must be positive, got {step}"
            )));
        }
        Ok(DerivativeSpec::CentralDifference { step })
    }
}

/// Gauss-Legendre nodes/weights plus a composite panel count.
///
/// The base rule lives on [-1, 1]; `integrate` maps it onto each panel of
/// the target interval. Nodes are strictly inside (-1, 1) so the mapped
/// rule never samples panel edges (open rule).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points_per_panel: usize,
    pub panels: usize,
    /// Base-rule abscissae on (-1, 1), strictly increasing.
    pub nodes: Vec<f64>,
    /// Base-rule weights, all positive, summing to 2.
    pub weights: Vec<f64>,
}

/// Maximum supported base-rule size.
pub const MAX_RULE_POINTS: usize = 64;

/// Builds the n-point Gauss-Legendre rule on [-1, 1] as a single panel.
///
/// Nodes are found by Newton iteration on the Legendre recurrence; the rule
/// integrates polynomials of degree <= 2n-1 exactly.
pub fn gauss_legendre_rule(n: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_RULE_POINTS).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "rule size must be in 1..={MAX_RULE_POINTS}, got {n}"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (_, d) = legendre_and_derivative(n, x);
                dp = d;
                break;
            }
        }
        // x from the cosine guess decreases with i; store in increasing order
        // and mirror to enforce exact symmetry.
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule {
        points_per_panel: n,
        panels: 1,
        nodes,
        weights,
    })
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    if n == 1 {
        return (x, 1.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

impl QuadratureRule {
    /// Same base rule spread over `panels` uniform panels.
    pub fn with_panels(mut self, panels: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::InvalidArgument(
                "panel count must be positive".into(),
            ));
        }
        self.panels = panels;
        Ok(self)
    }

    /// The default composite rule: 11 Gauss points per panel, 91 panels
    /// (1001 nodes in total).
    pub fn default_composite() -> Self {
        gauss_legendre_rule(11)
            .and_then(|r| r.with_panels(91))
            .expect("default rule parameters are valid")
    }

    pub fn total_points(&self) -> usize {
        self.points_per_panel * self.panels
    }

    /// All mapped abscissae for a uniform composite layout on `iv`.
    pub fn mapped_nodes(&self, iv: Interval) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_points());
        for p in 0..self.panels {
            let (lo, hi) = uniform_panel(iv, p, self.panels);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            for &t in &self.nodes {
                out.push(mid + half * t);
            }
        }
        out
    }
}

/// Panel layout used when evaluating a residual integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelLayout {
    /// Uniform panels, `rule.panels` of them.
    Uniform,
    /// Panels geometrically refined toward the left endpoint.
    GradedLeft,
    /// Panels geometrically refined toward the right endpoint.
    GradedRight,
    /// Panels geometrically refined toward both endpoints.
    GradedBoth,
}

/// Neumaier compensated summation.
#[derive(Default, Clone, Copy)]
pub(crate) struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn gauss_on_panel<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    lo: f64,
    hi: f64,
    rule: &QuadratureRule,
    acc: &mut Accumulator,
) -> Result<()> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let x = mid + half * t;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Evaluation { x });
        }
        acc.add(w * half * v);
    }
    Ok(())
}

/// Edges of uniform panel `p` of `n`, computed from the interval ends so
/// that consecutive panels share an edge exactly.
fn uniform_panel(iv: Interval, p: usize, n: usize) -> (f64, f64) {
    let lo = if p == 0 {
        iv.a
    } else {
        iv.a + iv.width() * (p as f64 / n as f64)
    };
    let hi = if p + 1 == n {
        iv.b
    } else {
        iv.a + iv.width() * ((p + 1) as f64 / n as f64)
    };
    (lo, hi)
}

/// Composite Gauss approximation of the integral of `f` over `iv` with
/// uniform panels. Deterministic for a fixed rule; errors if `f` is
/// non-finite at any mapped node.
pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    iv: Interval,
    rule: &QuadratureRule,
) -> Result<f64> {
    integrate_with_layout(f, iv, rule, PanelLayout::Uniform)
}

/// Number of geometric halvings used by the graded layouts. The innermost
/// panel has width ~ 2^-100 of the (half-)interval, so the unresolved tail
/// of an integrable endpoint singularity is negligible.
const GRADE_DEPTH: u32 = 100;

/// Panel edges for graded-left refinement of `[lo, hi]` with a given number
/// of geometric halvings.
pub fn graded_edges_with_depth(lo: f64, hi: f64, depth: u32) -> Vec<f64> {
    let w = hi - lo;
    let mut edges = Vec::with_capacity(depth as usize + 2);
    edges.push(lo);
    for j in (0..=depth).rev() {
        edges.push(lo + w * 0.5f64.powi(j as i32));
    }
    edges
}

fn graded_edges(lo: f64, hi: f64) -> Vec<f64> {
    graded_edges_with_depth(lo, hi, GRADE_DEPTH)
}

/// Composite Gauss with an explicit panel layout.
pub fn integrate_with_layout<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    iv: Interval,
    rule: &QuadratureRule,
    layout: PanelLayout,
) -> Result<f64> {
    let mut acc = Accumulator::default();
    match layout {
        PanelLayout::Uniform => {
            for p in 0..rule.panels {
                let (lo, hi) = uniform_panel(iv, p, rule.panels);
                gauss_on_panel(f, lo, hi, rule, &mut acc)?;
            }
        }
        PanelLayout::GradedLeft => {
            let edges = graded_edges(iv.a, iv.b);
            for pair in edges.windows(2) {
                if pair[1] > pair[0] {
                    gauss_on_panel(f, pair[0], pair[1], rule, &mut acc)?;
                }
            }
        }
        PanelLayout::GradedRight => {
            // Mirror of graded-left: refine toward b.
            let edges = graded_edges(iv.a, iv.b);
            for pair in edges.windows(2) {
                let lo = iv.a + iv.b - pair[1];
                let hi = iv.a + iv.b - pair[0];
                if hi > lo {
                    gauss_on_panel(f, lo, hi, rule, &mut acc)?;
                }
            }
        }
        PanelLayout::GradedBoth => {
            let mid = 0.5 * (iv.a + iv.b);
            integrate_with_layout(
                f,
                Interval { a: iv.a, b: mid },
                rule,
                PanelLayout::GradedLeft,
            )
            .and_then(|left| {
                integrate_with_layout(
                    f,
                    Interval { a: mid, b: iv.b },
                    rule,
                    PanelLayout::GradedRight,
                )
                .map(|right| left + right)
            })
            .map(|v| {
                acc.add(v);
            })?;
        }
    }
    Ok(acc.value())
}

/// Derivative of `f` at `x`.
///
/// In analytic mode the caller's derivative is used directly; in
/// central-difference mode the two-point stencil is evaluated and must stay
/// inside the integrand's domain of finiteness.
pub fn differentiate<F, G>(
    f: &F,
    x: f64,
    spec: &DerivativeSpec,
    analytic: Option<&G>,
) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
    G: Fn(f64) -> f64 + ?Sized,
{
    match spec {
        DerivativeSpec::Analytic => match analytic {
            Some(df) => Ok(df(x)),
            None => Err(Error::InvalidArgument(
                "analytic derivative requested but none supplied".into(),
            )),
        },
        DerivativeSpec::CentralDifference { step } => {
            let (fp, fm) = (f(x + step), f(x - step));
            if !fp.is_finite() || !fm.is_finite() {
                return Err(Error::Evaluation { x });
            }
            Ok((fp - fm) / (2.0 * step))
        }
    }
}

/// Central difference with the default step policy.
pub fn central_difference<F: Fn(f64) -> f64 + ?Sized>(f: &F, x: f64) -> Result<f64> {
    let h = DerivativeSpec::default_step(x);
    let (fp, fm) = (f(x + h), f(x - h));
    if !fp.is_finite() || !fm.is_finite() {
        return Err(Error::Evaluation { x });
    }
    Ok((fp - fm) / (2.0 * h))
}

/// Points per panel used by the brute-force oracle.
const ORACLE_PANEL_POINTS: usize = 20;

/// Brute-force reference integration: composite Gauss with ~`n_points`
/// samples spread uniformly over the interval, shrunk by `endpoint_inset`
/// at both ends. Test/reference use only; never part of the production
/// transform path.
pub fn oracle_integrate<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    iv: Interval,
    n_points: usize,
    endpoint_inset: f64,
) -> Result<f64> {
    oracle_integrate2(&|x| (f(x), 0.0), iv, n_points, endpoint_inset).map(|(v, _)| v)
}

/// Two-channel variant of [`oracle_integrate`]: integrates a pair of
/// integrands sharing one sweep over the sample points (used for the real
/// and imaginary parts of complex kernels).
pub fn oracle_integrate2<F: Fn(f64) -> (f64, f64) + ?Sized>(
    f: &F,
    iv: Interval,
    n_points: usize,
    endpoint_inset: f64,
) -> Result<(f64, f64)> {
    if n_points == 0 {
        return Err(Error::InvalidArgument(
            "oracle needs at least one point".into(),
        ));
    }
    if endpoint_inset < 0.0 || 2.0 * endpoint_inset >= iv.width() {
        return Err(Error::InvalidArgument(format!(
            "endpoint inset {endpoint_inset} does not fit inside the interval"
        )));
    }
    let inner = Interval {
        a: iv.a + endpoint_inset,
        b: iv.b - endpoint_inset,
    };
    let rule = gauss_legendre_rule(ORACLE_PANEL_POINTS)?
        .with_panels(n_points.div_ceil(ORACLE_PANEL_POINTS))?;
    let mut first = Accumulator::default();
    let mut second = Accumulator::default();
    for p in 0..rule.panels {
        let (lo, hi) = uniform_panel(inner, p, rule.panels);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let x = mid + half * t;
            let (u, v) = f(x);
            if !u.is_finite() || !v.is_finite() {
                return Err(Error::Evaluation { x });
            }
            first.add(w * half * u);
            second.add(w * half * v);
        }
    }
    Ok((first.value(), second.value()))
}

/// Default oracle inset for an interval, avoiding exact singular endpoints.
pub fn default_oracle_inset(iv: Interval) -> f64 {
    1e-12 * iv.width()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn interval_rejects_bad_limits() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn one_point_rule_is_midpoint() {
        let r = gauss_legendre_rule(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_eq!(r.weights, vec![2.0]);
    }

    #[test]
    fn two_point_rule_classical_values() {
        let r = gauss_legendre_rule(2).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r.nodes[0], -x, epsilon = 1e-15);
        assert_abs_diff_eq!(r.nodes[1], x, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rule_size_bounds() {
        assert!(gauss_legendre_rule(0).is_err());
        assert!(gauss_legendre_rule(65).is_err());
        assert!(gauss_legendre_rule(64).is_ok());
    }

    #[test]
    fn weights_sum_to_two_nodes_increasing_and_interior() {
        for n in [1, 2, 3, 5, 8, 11, 16, 23, 32, 47, 64] {
            let r = gauss_legendre_rule(n).unwrap();
            let sum: f64 = r.weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "n={n}: weight sum {sum}");
            for w in &r.weights {
                assert!(*w > 0.0);
            }
            for pair in r.nodes.windows(2) {
                assert!(pair[0] < pair[1], "n={n}: nodes not increasing");
            }
            assert!(r.nodes[0] > -1.0 && r.nodes[n - 1] < 1.0);
        }
    }

    #[test]
    fn exactness_up_to_degree_2n_minus_1() {
        // Monomial x^k on [-1,1] integrates to 0 (odd) or 2/(k+1) (even).
        for n in [2, 5, 11, 20, 40, 64] {
            let r = gauss_legendre_rule(n).unwrap();
            for k in 0..(2 * n) {
                let got = integrate(&|x: f64| x.powi(k as i32), iv(-1.0, 1.0), &r).unwrap();
                let want = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                };
                assert!(
                    (got - want).abs() < 1e-13,
                    "n={n} k={k}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn eleven_point_rule_kills_x21() {
        let r = gauss_legendre_rule(11).unwrap();
        let got = integrate(&|x: f64| x.powi(21), iv(-1.0, 1.0), &r).unwrap();
        assert!(got.abs() < 1e-14);
    }

    #[test]
    fn integrate_constant_and_square() {
        let r = QuadratureRule::default_composite();
        assert_abs_diff_eq!(
            integrate(&|_| 1.0, iv(0.0, 1.0), &r).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            integrate(&|x: f64| x * x, iv(0.0, 1.0), &r).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn integrate_exponential_matches_antiderivative() {
        let r = QuadratureRule::default_composite();
        let got = integrate(&|x: f64| x.exp(), iv(0.0, 1.0), &r).unwrap();
        assert_abs_diff_eq!(got, std::f64::consts::E - 1.0, epsilon = 1e-13);
    }

    #[test]
    fn integrate_rejects_non_finite_values() {
        let r = gauss_legendre_rule(3).unwrap();
        let err = integrate(&|x: f64| 1.0 / (x - 0.5), iv(0.0, 1.0), &r).unwrap_err();
        match err {
            Error::Evaluation { x } => assert!((x - 0.5).abs() < 1e-12),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn open_rule_never_samples_endpoints() {
        // 1/x is infinite at 0 but no node lands there.
        let r = QuadratureRule::default_composite();
        let got = integrate(&|x: f64| 1.0 / x, iv(0.0, 1.0), &r).unwrap();
        assert!(got.is_finite());
    }

    #[test]
    fn composite_refinement_does_not_degrade() {
        // Doubling panels never worsens |error| by more than 2x for smooth f.
        let exact = (3f64.exp() - 1.0) / 3.0;
        let mut prev = f64::INFINITY;
        for panels in [2, 4, 8] {
            let r = gauss_legendre_rule(4).unwrap().with_panels(panels).unwrap();
            let got = integrate(&|x: f64| (3.0 * x).exp(), iv(0.0, 1.0), &r).unwrap();
            let err = (got - exact).abs();
            assert!(err <= 2.0 * prev, "panels={panels}: {err} vs prev {prev}");
            prev = err;
        }
    }

    #[test]
    fn graded_layout_handles_endpoint_singular_derivatives() {
        // sqrt(x) has unbounded derivatives at 0; graded-left recovers
        // near-machine accuracy where uniform panels plateau.
        let r = gauss_legendre_rule(11).unwrap().with_panels(16).unwrap();
        let got = integrate_with_layout(
            &|x: f64| x.sqrt(),
            iv(0.0, 1.0),
            &r,
            PanelLayout::GradedLeft,
        )
        .unwrap();
        assert_abs_diff_eq!(got, 2.0 / 3.0, epsilon = 1e-13);
        // x^{-1/2} * ln(x): integrable endpoint singularity.
        let got = integrate_with_layout(
            &|x: f64| x.ln() / x.sqrt(),
            iv(0.0, 1.0),
            &r,
            PanelLayout::GradedLeft,
        )
        .unwrap();
        assert_abs_diff_eq!(got, -4.0, epsilon = 1e-10);
    }

    #[test]
    fn graded_both_matches_uniform_on_smooth() {
        let r = gauss_legendre_rule(11).unwrap().with_panels(8).unwrap();
        let a = integrate(&|x: f64| x.sin(), iv(0.0, 2.0), &r).unwrap();
        let b = integrate_with_layout(&|x: f64| x.sin(), iv(0.0, 2.0), &r, PanelLayout::GradedBoth)
            .unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-13);
    }

    #[test]
    fn differentiate_examples() {
        type NoDf = fn(f64) -> f64;
        let spec = DerivativeSpec::central(1e-5).unwrap();
        let d = differentiate::<_, NoDf>(&|x: f64| x * x, 3.0, &spec, None).unwrap();
        assert_abs_diff_eq!(d, 6.0, epsilon = 1e-8);

        let d = differentiate::<_, NoDf>(&|_| 4.0, 10.0, &spec, None).unwrap();
        assert_eq!(d, 0.0);

        let d = differentiate::<_, NoDf>(&|x: f64| x.sin(), 0.7, &spec, None).unwrap();
        assert_abs_diff_eq!(d, 0.7f64.cos(), epsilon = 1e-9);
    }

    #[test]
    fn differentiate_analytic_mode_uses_supplied_derivative() {
        let df = |x: f64| x.cos();
        let d =
            differentiate(&|x: f64| x.sin(), 0.3, &DerivativeSpec::Analytic, Some(&df)).unwrap();
        assert_eq!(d, 0.3f64.cos());
        assert!(differentiate::<_, fn(f64) -> f64>(
            &|x: f64| x.sin(),
            0.3,
            &DerivativeSpec::Analytic,
            None
        )
        .is_err());
    }

    #[test]
    fn central_difference_error_is_second_order() {
        // |CD - f'| < 10 h^2 max|f'''| on a polynomial test set.
        type Case = (fn(f64) -> f64, fn(f64) -> f64, f64, f64);
        let cases: [Case; 3] = [
            (|x| x.powi(3), |x| 3.0 * x * x, 6.0, 0.4),
            (|x| x.powi(4), |x| 4.0 * x * x * x, 24.0 * 1.3, 1.3),
            (|x| 2.0 * x.powi(3) - x, |x| 6.0 * x * x - 1.0, 12.0, -0.8),
        ];
        for (f, df, df3, x) in cases {
            let h = 1e-5;
            let spec = DerivativeSpec::central(h).unwrap();
            let got = differentiate::<_, fn(f64) -> f64>(&f, x, &spec, None).unwrap();
            assert!((got - df(x)).abs() < 10.0 * h * h * df3.max(1.0));
        }
    }

    #[test]
    fn oracle_examples() {
        // constant with zero inset is exact
        let got = oracle_integrate(&|_| 1.0, iv(0.0, 1.0), 100, 0.0).unwrap();
        assert_abs_diff_eq!(got, 1.0, epsilon = 1e-15);

        // 1/sqrt(x) on [1e-12, 1]: analytic 2(1 - 1e-6)
        let got =
            oracle_integrate(&|x: f64| 1.0 / x.sqrt(), iv(1e-12, 1.0), 1_000_000, 0.0).unwrap();
        let want = 2.0 * (1.0 - 1e-6);
        assert!((got - want).abs() / want < 1e-4, "got {got}");
    }

    #[test]
    fn oracle_rejects_bad_inset() {
        assert!(oracle_integrate(&|_| 1.0, iv(0.0, 1.0), 10, 0.6).is_err());
        assert!(oracle_integrate(&|_| 1.0, iv(0.0, 1.0), 0, 0.0).is_err());
    }
}
