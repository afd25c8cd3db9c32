//! The standardized problem for conjugate normal priors and its maps back to the
//! posterior-mean, sum and p-value scales.
//!
//! With `s = −(r0 + 1)/(r0 + r)` and `W_s = √(r0 + 1)·M_r` (`M` the posterior mean), the
//! problem becomes `sup E[(1 + 1/s)(|W| + 2q W⁺)]` for a standard Brownian motion on
//! `s ≤ −1`. Its boundary `c(s)` does not depend on `(m0, r0)`; one solve serves every
//! prior through [`StandardBoundary::for_prior`].

use alloc::format;
use alloc::vec::Vec;

use crate::backward::{Engine, Lower, StepKernel, TailWeights};
use crate::error::{Error, Result};
use crate::math::{abs, exp, ln, sqrt, FRAC_1_SQRT_2PI};
use crate::numerics::{std_normal_cdf, std_normal_quantile, std_normal_sf};
use crate::volterra::{lerp, locate, AsymmetricSpec, Boundary, GridShape, LowerBoundary, SolverConfig};

/// Boundary of the standardized problem on `−1 = s_1 > s_2 > … > s_k = s_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardBoundary {
    pub grid: Vec<f64>,
    /// `c⁺(s) ≥ 0`.
    pub upper: Vec<f64>,
    /// `Mirror` means `c⁻ = −c⁺`.
    pub lower: LowerBoundary,
}

impl StandardBoundary {
    pub fn new(grid: Vec<f64>, upper: Vec<f64>, lower: LowerBoundary) -> Result<Self> {
        let b = Boundary::new(grid, upper, lower)?;
        if b.grid[0] != -1.0 {
            return Err(Error::invalid("standard boundary", format!("grid must start at s = -1, got {}", b.grid[0])));
        }
        Ok(Self { grid: b.grid, upper: b.upper, lower: b.lower })
    }

    pub fn s_min(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    fn out_of_range(&self, s: f64) -> Error {
        Error::OutOfRange { requested: s, available: self.s_min(), hint: "solve c with a smaller s_min" }
    }

    /// `c⁺(s)`, linear in `s` between nodes.
    pub fn upper_at(&self, s: f64) -> Result<f64> {
        let (j, th) = locate(&self.grid, s).ok_or_else(|| self.out_of_range(s))?;
        Ok(lerp(self.upper[j], self.upper[(j + 1).min(self.upper.len() - 1)], th))
    }

    /// `c⁻(s)`; `−∞` for `q = ∞`.
    pub fn lower_at(&self, s: f64) -> Result<f64> {
        match &self.lower {
            LowerBoundary::Mirror => Ok(-self.upper_at(s)?),
            LowerBoundary::Unbounded => Ok(f64::NEG_INFINITY),
            LowerBoundary::Curve(l) => {
                let (j, th) = locate(&self.grid, s).ok_or_else(|| self.out_of_range(s))?;
                Ok(lerp(l[j], l[(j + 1).min(l.len() - 1)], th))
            }
        }
    }

    /// Borrowing view that maps this boundary to a particular `(m0, r0)`.
    pub fn for_prior(&self, m0: f64, r0: f64) -> Result<PriorView<'_>> {
        if !m0.is_finite() || !(r0.is_finite() && r0 >= 0.0) {
            return Err(Error::invalid("prior", format!("m0 = {m0}, r0 = {r0}")));
        }
        Ok(PriorView { c: self, m0, r0 })
    }
}

/// A solved `c` seen through the transforms for one `(m0, r0)`.
#[derive(Debug, Clone, Copy)]
pub struct PriorView<'a> {
    c: &'a StandardBoundary,
    m0: f64,
    r0: f64,
}

impl<'a> PriorView<'a> {
    /// The shared standardized boundary.
    pub fn standard(&self) -> &'a StandardBoundary {
        self.c
    }

    fn s_checked(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0 && r <= 1.0) {
            return Err(Error::domain("boundary transform", format!("r = {r} not in [0, 1]")));
        }
        if self.r0 + r == 0.0 {
            return Err(Error::OutOfRange {
                requested: f64::NEG_INFINITY,
                available: self.c.s_min(),
                hint: "r = 0 with r0 = 0 maps to s = -inf",
            });
        }
        Ok(s_of_r(self.r0, r))
    }

    /// `b_M(r) = c(s(r))/√(r0 + 1)`.
    pub fn posterior_mean(&self, r: f64) -> Result<f64> {
        if self.r0 <= 0.0 {
            return Err(Error::domain("posterior_mean", "needs r0 > 0"));
        }
        Ok(self.c.upper_at(self.s_checked(r)?)? / sqrt(self.r0 + 1.0))
    }

    /// `(b_S⁺, b_S⁻) = −m0 r0 + (r0 + r) c^±(s(r))/√(r0 + 1)`.
    pub fn sum(&self, r: f64) -> Result<(f64, f64)> {
        let s = self.s_checked(r)?;
        let scale = (self.r0 + r) / sqrt(self.r0 + 1.0);
        let shift = -self.m0 * self.r0;
        Ok((shift + scale * self.c.upper_at(s)?, shift + scale * self.c.lower_at(s)?))
    }

    /// `b_p(r) = 1 − Φ(b_S⁺(r)/√r)`; stop when the one-sided p-value is at or below it.
    pub fn pvalue(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::domain("pvalue boundary", format!("r = {r} must be positive")));
        }
        Ok(std_normal_sf(self.sum(r)?.0 / sqrt(r)))
    }

    /// The sum-scale boundary sampled on a decreasing `r` grid.
    pub fn sum_boundary(&self, grid: &[f64]) -> Result<Boundary> {
        let mut upper = Vec::with_capacity(grid.len());
        let mut lower = Vec::with_capacity(grid.len());
        for &r in grid {
            let (u, l) = self.sum(r)?;
            upper.push(u);
            lower.push(l);
        }
        let lower = match self.c.lower {
            LowerBoundary::Unbounded => LowerBoundary::Unbounded,
            LowerBoundary::Mirror if self.m0 == 0.0 || self.r0 == 0.0 => LowerBoundary::Mirror,
            _ => LowerBoundary::Curve(lower),
        };
        Boundary::new(grid.to_vec(), upper, lower)
    }
}

/// `s(r) = −(r0 + 1)/(r0 + r)`.
pub fn s_of_r(r0: f64, r: f64) -> f64 {
    -(r0 + 1.0) / (r0 + r)
}

/// Inverse of [`s_of_r`].
pub fn r_of_s(r0: f64, s: f64) -> f64 {
    -(r0 + 1.0) / s - r0
}

pub fn c_to_posterior_mean_boundary(c: &StandardBoundary, r0: f64, r: f64) -> Result<f64> {
    c.for_prior(0.0, r0)?.posterior_mean(r)
}

pub fn c_to_sum_boundaries(c: &StandardBoundary, m0: f64, r0: f64, r: f64) -> Result<(f64, f64)> {
    c.for_prior(m0, r0)?.sum(r)
}

pub fn c_to_pvalue_boundary(c: &StandardBoundary, m0: f64, r0: f64, r: f64) -> Result<f64> {
    c.for_prior(m0, r0)?.pvalue(r)
}

// Driftless Brownian motion in (s, W) with h(y) = y and measure u⁻² du.
struct NormalKernel;

#[derive(Clone, Copy)]
struct NormalPoint {
    s: f64,
    y: f64,
}

impl StepKernel for NormalKernel {
    type Point = NormalPoint;

    fn new_point(&self) -> NormalPoint {
        NormalPoint { s: 0.0, y: 0.0 }
    }

    fn set_point(&self, p: &mut NormalPoint, t: f64, y: f64) {
        *p = NormalPoint { s: t, y };
    }

    fn log_scale(&self, _p: &NormalPoint) -> f64 {
        0.0
    }

    fn h(&self, p: &NormalPoint) -> f64 {
        p.y
    }

    fn upper_tail(&self, p: &NormalPoint, u: f64, z: f64) -> f64 {
        let st = sqrt(u - p.s);
        let a = (z - p.y) / st;
        p.y * std_normal_sf(a) + st * FRAC_1_SQRT_2PI * exp(-0.5 * a * a)
    }

    fn lower_tail(&self, p: &NormalPoint, u: f64, z: f64) -> f64 {
        let st = sqrt(u - p.s);
        let a = (z - p.y) / st;
        p.y * std_normal_cdf(a) - st * FRAC_1_SQRT_2PI * exp(-0.5 * a * a)
    }

    fn reward_factor(&self, t: f64) -> f64 {
        1.0 + 1.0 / t
    }

    fn weight(&self, u: f64) -> f64 {
        1.0 / (u * u)
    }

    fn bracket_width(&self, t: f64) -> f64 {
        5.0 * sqrt(-t)
    }
}

/// Decreasing grid from `−1` to `s_min`, uniform (or square-clustered) in `ln(−s)`.
pub fn s_grid(cfg: &SolverConfig, s_min: f64) -> Result<Vec<f64>> {
    cfg.validate()?;
    if !(s_min < -1.0 && s_min.is_finite()) {
        return Err(Error::invalid("s_min", format!("s_min = {s_min} must be < -1")));
    }
    let n = cfg.k;
    let span = ln(-s_min);
    Ok((0..n)
        .map(|i| {
            let x = i as f64 / (n - 1) as f64;
            let frac = match cfg.grid_shape {
                GridShape::Uniform => x,
                GridShape::SqrtClustered => x * x,
            };
            match i {
                0 => -1.0,
                _ if i == n - 1 => s_min,
                _ => -exp(frac * span),
            }
        })
        .collect())
}

/// Symmetric boundary `c(s)` on `[s_min, −1]`.
pub fn solve_c(cfg: &SolverConfig, s_min: f64) -> Result<StandardBoundary> {
    let grid = s_grid(cfg, s_min)?;
    let engine = Engine { kernel: &NormalKernel, grid: &grid, weights: TailWeights { upper: 1.0, lower: 1.0 } };
    let (upper, _) = engine.solve(Lower::Mirror, cfg.inner_tol)?;
    Ok(StandardBoundary { grid, upper, lower: LowerBoundary::Mirror })
}

/// Upper and lower boundaries for the reward `(1 + 1/s)(|y| + 2q y⁺)`.
pub fn solve_cq(spec: AsymmetricSpec, cfg: &SolverConfig, s_min: f64) -> Result<StandardBoundary> {
    spec.validate()?;
    let grid = s_grid(cfg, s_min)?;
    let (wu, wl) = spec.tail_weights();
    let engine = Engine { kernel: &NormalKernel, grid: &grid, weights: TailWeights { upper: wu, lower: wl } };
    let mode = match spec {
        AsymmetricSpec::Infinite => Lower::Unbounded,
        AsymmetricSpec::Finite(_) => Lower::Curve(&[]),
    };
    let (upper, lower) = engine.solve(mode, cfg.inner_tol)?;
    let lower = match lower {
        Some(l) => LowerBoundary::Curve(l),
        None => LowerBoundary::Unbounded,
    };
    Ok(StandardBoundary { grid, upper, lower })
}

/// Largest defect of the discretized equation over the interior nodes.
pub fn residual_c(c: &StandardBoundary, spec: AsymmetricSpec) -> Result<f64> {
    spec.validate()?;
    let (wu, wl) = spec.tail_weights();
    let engine = Engine { kernel: &NormalKernel, grid: &c.grid, weights: TailWeights { upper: wu, lower: wl } };
    let lower = match (&c.lower, spec) {
        (LowerBoundary::Mirror, _) => Lower::Mirror,
        (LowerBoundary::Curve(l), _) => Lower::Curve(l),
        (LowerBoundary::Unbounded, AsymmetricSpec::Infinite) => Lower::Unbounded,
        (LowerBoundary::Unbounded, _) => return Err(Error::invalid("boundary", "an unbounded lower part needs q = inf")),
    };
    Ok(engine.residual(&c.upper, lower))
}

/// `(1 + 2q)/(1 + q)`, equal to 2 at `q = ∞`.
pub fn kappa(spec: AsymmetricSpec) -> f64 {
    match spec {
        AsymmetricSpec::Finite(q) => (1.0 + 2.0 * q) / (1.0 + q),
        AsymmetricSpec::Infinite => 2.0,
    }
}

/// Large-`|s|` approximation `√(−s)·Φ⁻¹(1 + κ/s)` of `c⁺_q(s)`.
pub fn asymptotic_cq(s: f64, spec: AsymmetricSpec) -> Result<f64> {
    spec.validate()?;
    let k = kappa(spec);
    if !(s <= -1.0 && -s > k) {
        return Err(Error::domain("asymptotic_cq", format!("need -s > {k}, got s = {s}")));
    }
    // Φ⁻¹(1 − x) = −Φ⁻¹(x) keeps precision when κ/(−s) is tiny.
    Ok(-sqrt(-s) * std_normal_quantile(k / -s)?)
}

/// Small-`(r, r0)` approximation of the p-value boundary.
pub fn pvalue_approx(r: f64, r0: f64, m0: f64, spec: AsymmetricSpec) -> Result<f64> {
    spec.validate()?;
    if !(r > 0.0 && r0 >= 0.0 && m0.is_finite()) {
        return Err(Error::domain("pvalue_approx", format!("r = {r}, r0 = {r0}, m0 = {m0}")));
    }
    let x = kappa(spec) * (r0 + r) / (r0 + 1.0);
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain("pvalue_approx", format!("quantile argument {} outside (0, 1)", 1.0 - x)));
    }
    let z = (-m0 * r0 - sqrt(r0 + r) * std_normal_quantile(x)?) / sqrt(r);
    Ok(std_normal_sf(z))
}

/// Ordering of the classical two-trial threshold `α²` against the optimal threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalComparison {
    /// `α²` exceeds the optimal p-value boundary: the classical rule is less conservative.
    ClassicalAcceptsMore,
    OptimalAcceptsMore,
    Equal,
}

impl ClassicalComparison {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassicalComparison::ClassicalAcceptsMore => "classical_accepts_more",
            ClassicalComparison::OptimalAcceptsMore => "optimal_accepts_more",
            ClassicalComparison::Equal => "equal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalReport {
    pub ordering: ClassicalComparison,
    pub classical: f64,
    pub optimal: f64,
}

/// Compare `α²` with an optimal p-value threshold; equal within relative 1e-12.
pub fn compare_thresholds(alpha: f64, optimal: f64) -> Result<ClassicalReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("classical_rule_compare", format!("alpha = {alpha} not in (0, 1)")));
    }
    let classical = alpha * alpha;
    let ordering = if abs(classical - optimal) <= 1e-12 * classical.max(optimal) {
        ClassicalComparison::Equal
    } else if classical > optimal {
        ClassicalComparison::ClassicalAcceptsMore
    } else {
        ClassicalComparison::OptimalAcceptsMore
    };
    Ok(ClassicalReport { ordering, classical, optimal })
}

/// Compare `α²` with [`pvalue_approx`] at `r`.
pub fn classical_rule_compare(alpha: f64, r: f64, spec: AsymmetricSpec, r0: f64, m0: f64) -> Result<ClassicalReport> {
    compare_thresholds(alpha, pvalue_approx(r, r0, m0, spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const Q0: AsymmetricSpec = AsymmetricSpec::Finite(0.0);

    fn small_c() -> StandardBoundary {
        solve_c(&SolverConfig { k: 300, ..SolverConfig::default() }, -100.0).unwrap()
    }

    #[test]
    fn asymptotic_values() {
        let a = asymptotic_cq(-100.0, Q0).unwrap();
        assert!((a - 10.0 * std_normal_quantile(0.99).unwrap()).abs() < 1e-12);
        assert!((a - 23.263_478_740_408_41).abs() < 1e-10);
        let inf = asymptotic_cq(-100.0, AsymmetricSpec::Infinite).unwrap();
        assert!((inf - 10.0 * std_normal_quantile(0.98).unwrap()).abs() < 1e-12);
        assert!((inf - 20.537_489_106_318_23).abs() < 1e-10);
        assert!(asymptotic_cq(-1.5, AsymmetricSpec::Finite(1.0)).is_err());
        let big = asymptotic_cq(-100.0, AsymmetricSpec::Finite(1e9)).unwrap();
        assert!((big - inf).abs() < 1e-6);
    }

    #[test]
    fn pvalue_approx_values() {
        let p = pvalue_approx(0.001, 0.0, 0.0, Q0).unwrap();
        assert!((p - 0.001).abs() < 1e-15);
        let p = pvalue_approx(0.001, 0.0, 0.0, AsymmetricSpec::Finite(1.0)).unwrap();
        assert!((p - 0.0015).abs() < 1e-15);
        let p = pvalue_approx(0.001, 0.01, 0.0, Q0).unwrap();
        assert!(((p - 1.383_072_082_757_140_4e-14) / p).abs() < 1e-9, "{p}");
        assert!(pvalue_approx(0.0, 0.0, 0.0, Q0).is_err());
        assert!(pvalue_approx(0.8, 0.0, 0.0, AsymmetricSpec::Infinite).is_err());
    }

    #[test]
    fn classical_comparisons() {
        let a = classical_rule_compare(0.025, 1e-5, Q0, 0.0, 0.0).unwrap();
        assert_eq!(a.ordering, ClassicalComparison::ClassicalAcceptsMore);
        assert!((a.classical - 0.000625).abs() < 1e-18);
        let b = classical_rule_compare(0.025, 1e-3, Q0, 0.0, 0.0).unwrap();
        assert_eq!(b.ordering, ClassicalComparison::OptimalAcceptsMore);
        let r: f64 = 0.0004;
        let c = classical_rule_compare(r.sqrt(), r, Q0, 0.0, 0.0).unwrap();
        assert_eq!(c.ordering, ClassicalComparison::Equal);
    }

    #[test]
    fn time_map_examples() {
        assert_eq!(s_of_r(1.0, 0.0), -2.0);
        assert_eq!(s_of_r(0.3, 1.0), -1.0);
        assert!(s_grid(&SolverConfig::default(), -1.0).is_err());
    }

    #[test]
    fn solved_c_basics() {
        let c = small_c();
        assert_eq!(c.upper[0], 0.0);
        assert!(c.upper[1..].iter().all(|&v| v > 0.0));
        assert!(c.upper.windows(2).all(|w| w[1] >= w[0]));
        assert!(residual_c(&c, Q0).unwrap() <= 1e-8);
        assert_eq!(c.upper_at(-1.0).unwrap(), 0.0);
        assert!(matches!(c.upper_at(-200.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn transforms() {
        let c = small_c();
        let v = c.for_prior(0.0, 1.0).unwrap();
        assert_eq!(v.posterior_mean(1.0).unwrap(), 0.0);
        let expect = c.upper_at(-2.0).unwrap() / 2f64.sqrt();
        assert!((v.posterior_mean(0.0).unwrap() - expect).abs() < 1e-15);
        let (up, lo) = c_to_sum_boundaries(&c, 0.0, 0.1, 0.5).unwrap();
        assert_eq!(up, -lo);
        let (up, lo) = c_to_sum_boundaries(&c, 0.7, 0.3, 1.0).unwrap();
        assert_eq!(up, -0.7 * 0.3);
        assert_eq!(lo, -0.7 * 0.3);
        // A zero sum boundary maps to p = 1/2.
        let zero = StandardBoundary::new(vec![-1.0, -50.0], vec![0.0, 0.0], LowerBoundary::Mirror).unwrap();
        assert_eq!(c_to_pvalue_boundary(&zero, 0.0, 1.0, 0.5).unwrap(), 0.5);
        assert!(c_to_pvalue_boundary(&c, 0.0, 1.0, 0.0).is_err());
        // r0 = 0 and r = 0 maps to s = -inf.
        assert!(matches!(c_to_sum_boundaries(&c, 0.0, 0.0, 0.0), Err(Error::OutOfRange { .. })));
        // r0 = r = 0.001 maps below s = -100.
        assert!(matches!(c_to_pvalue_boundary(&c, 0.0, 0.001, 0.001), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn pvalue_composition() {
        let c = small_c();
        let s = s_of_r(1.0, 0.5);
        let bs = 1.5 * c.upper_at(s).unwrap() / 2f64.sqrt();
        let expect = 1.0 - std_normal_cdf(bs / 0.5f64.sqrt());
        assert!((c_to_pvalue_boundary(&c, 0.0, 1.0, 0.5).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn views_share_the_solved_array() {
        let c = small_c();
        let a = c.for_prior(0.0, 1.0).unwrap();
        let b = c.for_prior(-0.5, 0.2).unwrap();
        assert!(core::ptr::eq(a.standard().upper.as_ptr(), b.standard().upper.as_ptr()));
        assert!(core::ptr::eq(a.standard(), &c));
    }

    #[test]
    fn asymmetric_reduces_and_orders() {
        let cfg = SolverConfig { k: 300, ..SolverConfig::default() };
        let c = solve_c(&cfg, -100.0).unwrap();
        let c0 = solve_cq(Q0, &cfg, -100.0).unwrap();
        let lower = match &c0.lower {
            LowerBoundary::Curve(l) => l.clone(),
            _ => panic!("expected a lower curve"),
        };
        for i in 0..c.grid.len() {
            assert!((c0.upper[i] - c.upper[i]).abs() <= 1e-6);
            assert!((lower[i] + c.upper[i]).abs() <= 1e-6);
        }
        let c1 = solve_cq(AsymmetricSpec::Finite(1.0), &cfg, -100.0).unwrap();
        let c5 = solve_cq(AsymmetricSpec::Finite(5.0), &cfg, -100.0).unwrap();
        let ci = solve_cq(AsymmetricSpec::Infinite, &cfg, -100.0).unwrap();
        assert_eq!(ci.lower, LowerBoundary::Unbounded);
        for i in 0..c.grid.len() {
            assert!(c1.upper[i] <= c0.upper[i] + 1e-9);
            assert!(c5.upper[i] <= c1.upper[i] + 1e-9);
            assert!(ci.upper[i] <= c5.upper[i] + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn time_map_round_trip(r0 in 0.0f64..10.0, r in 1e-6f64..1.0) {
            let back = r_of_s(r0, s_of_r(r0, r));
            prop_assert!((back - r).abs() <= 1e-14 * (1.0 + r0));
        }

        #[test]
        fn sum_gap_identity(m0 in -2.0f64..2.0, r0 in 0.01f64..3.0, r in 0.0f64..1.0) {
            let c = StandardBoundary::new(vec![-1.0, -10.0, -500.0], vec![0.0, 2.0, 30.0], LowerBoundary::Mirror).unwrap();
            let (up, lo) = c_to_sum_boundaries(&c, m0, r0, r).unwrap();
            let gap = 2.0 * (r0 + r) * c.upper_at(s_of_r(r0, r)).unwrap() / (r0 + 1.0).sqrt();
            prop_assert!(((up - lo) - gap).abs() <= 1e-12 * gap.max(1.0));
            prop_assert!(up >= lo);
        }
    }
}
