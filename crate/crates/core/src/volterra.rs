//! Boundary solvers for the symmetric integral equation and its asymmetric extension.
//!
//! The stopping reward is `(1 − r)(|h| + 2q h⁺)`, with `q = 0` the symmetric problem.
//! At each boundary point `y*` the solved boundary satisfies
//!
//! ```text
//! (1 − r)(|h| + 2q h⁺)(r, y*) = ∫_r^1 E_(r,y*)[(1+2q) h(u,S_u) 1(S_u ≥ b⁺(u)) − h(u,S_u) 1(S_u ≤ b⁻(u))] du
//! ```
//!
//! and the upper and lower equations decouple node by node once the later nodes are
//! known. With `q = ∞` the reward is normalized to `(1 − r) h⁺`, the second tail drops
//! out and there is no lower boundary.

use alloc::format;
use alloc::vec::Vec;

use crate::backward::{Engine, Lower, StepKernel, TailWeights};
use crate::error::{Error, Result};
use crate::math::{abs, exp, max, sqrt};
use crate::numerics::std_normal_cdf;
use crate::priors::Prior;

/// Node placement for the time grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridShape {
    Uniform,
    /// `r_i = 1 − ((i−1)/(k−1))²(1 − r_min)`: nodes bunch up near the terminal time.
    SqrtClustered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub k: usize,
    pub grid_shape: GridShape,
    /// Smallest grid time of the `(r, y)` solvers.
    pub r_min: f64,
    /// Absolute tolerance on each boundary value.
    pub inner_tol: f64,
    pub fp_max_iter: usize,
    pub fp_tol: f64,
    /// Step length of the fixed-point sweep.
    pub fp_relaxation: f64,
    /// Divide each node's defect by its reward factor `1 − r` before stepping. The
    /// plain operator `Q` contracts at rate `1 − O(1 − r)` near the terminal time and
    /// needs thousands of sweeps; the scaled sweep has the same fixed points.
    pub fp_reward_scaled: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k: 2000,
            grid_shape: GridShape::SqrtClustered,
            r_min: 1e-4,
            inner_tol: 1e-10,
            fp_max_iter: 5000,
            fp_tol: 1e-8,
            fp_relaxation: 1.0,
            fp_reward_scaled: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 3 {
            return Err(Error::invalid("solver config", format!("k = {} < 3", self.k)));
        }
        if !(self.r_min > 0.0 && self.r_min < 1.0) {
            return Err(Error::invalid("solver config", format!("r_min = {} not in (0, 1)", self.r_min)));
        }
        if !(self.inner_tol > 0.0 && self.fp_tol > 0.0) {
            return Err(Error::invalid("solver config", "tolerances must be positive"));
        }
        if !(self.fp_relaxation > 0.0 && self.fp_relaxation.is_finite()) || self.fp_max_iter == 0 {
            return Err(Error::invalid("solver config", "fp_relaxation must be positive and fp_max_iter > 0"));
        }
        Ok(())
    }

    /// Decreasing grid from 1 down to `r_min`.
    pub fn r_grid(&self) -> Vec<f64> {
        let n = self.k;
        (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                let frac = match self.grid_shape {
                    GridShape::Uniform => x,
                    GridShape::SqrtClustered => x * x,
                };
                if i == n - 1 {
                    self.r_min
                } else {
                    1.0 - frac * (1.0 - self.r_min)
                }
            })
            .collect()
    }
}

/// Number `q` of patients outside the trial per trial patient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymmetricSpec {
    Finite(f64),
    Infinite,
}

impl AsymmetricSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            AsymmetricSpec::Finite(q) if !(q.is_finite() && *q >= 0.0) => {
                Err(Error::invalid("q", format!("q = {q} must be finite and nonnegative (or infinite)")))
            }
            _ => Ok(()),
        }
    }

    /// Payoff weights `(w⁺, w⁻)` so that the reward is `w⁺ h⁺ + w⁻ h⁻` with `h⁻ = max(−h, 0)`.
    pub fn tail_weights(&self) -> (f64, f64) {
        match self {
            AsymmetricSpec::Finite(q) => (1.0 + 2.0 * q, 1.0),
            AsymmetricSpec::Infinite => (1.0, 0.0),
        }
    }

    /// Payoff of a stop with `h` value `h`, excluding the time discount.
    pub fn payoff(&self, h: f64) -> f64 {
        let (wu, wl) = self.tail_weights();
        if h >= 0.0 {
            wu * h
        } else {
            -wl * h
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, AsymmetricSpec::Finite(q) if *q == 0.0)
    }
}

/// Lower part of a boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum LowerBoundary {
    /// Symmetric: `b⁻ = −b⁺`.
    Mirror,
    Curve(Vec<f64>),
    /// No stopping from below (`q = ∞`).
    Unbounded,
}

/// Stopping boundary on a decreasing time grid starting at the terminal time.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub grid: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: LowerBoundary,
}

impl Boundary {
    pub fn new(grid: Vec<f64>, upper: Vec<f64>, lower: LowerBoundary) -> Result<Self> {
        let b = Self { grid, upper, lower };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if n < 2 || self.upper.len() != n {
            return Err(Error::invalid("boundary", format!("{} grid points, {} upper values", n, self.upper.len())));
        }
        if self.grid.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::invalid("boundary", "grid must be strictly decreasing"));
        }
        if self.grid.iter().chain(&self.upper).any(|v| !v.is_finite()) {
            return Err(Error::invalid("boundary", "non-finite value"));
        }
        if let LowerBoundary::Curve(l) = &self.lower {
            if l.len() != n || l.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("boundary", "lower curve length or values"));
            }
            if l.iter().zip(&self.upper).any(|(lo, up)| lo > up) {
                return Err(Error::invalid("boundary", "lower curve above upper curve"));
            }
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self.lower, LowerBoundary::Mirror)
    }

    pub fn lower_values(&self) -> Option<Vec<f64>> {
        match &self.lower {
            LowerBoundary::Mirror => Some(self.upper.iter().map(|b| -b).collect()),
            LowerBoundary::Curve(l) => Some(l.clone()),
            LowerBoundary::Unbounded => None,
        }
    }

    /// Linearly interpolated upper value at time `t`.
    pub fn upper_at(&self, t: f64) -> Result<f64> {
        let (j, th) = locate(&self.grid, t).ok_or(Error::OutOfRange {
            requested: t,
            available: self.grid[self.grid.len() - 1],
            hint: "solve on a grid reaching further back",
        })?;
        Ok(lerp(self.upper[j], self.upper.get(j + 1).copied().unwrap_or(self.upper[j]), th))
    }

    /// Linearly interpolated lower value; `-∞` when unbounded.
    pub fn lower_at(&self, t: f64) -> Result<f64> {
        match &self.lower {
            LowerBoundary::Mirror => Ok(-self.upper_at(t)?),
            LowerBoundary::Unbounded => Ok(f64::NEG_INFINITY),
            LowerBoundary::Curve(l) => {
                let (j, th) = locate(&self.grid, t).ok_or(Error::OutOfRange {
                    requested: t,
                    available: self.grid[self.grid.len() - 1],
                    hint: "solve on a grid reaching further back",
                })?;
                Ok(lerp(l[j], l.get(j + 1).copied().unwrap_or(l[j]), th))
            }
        }
    }
}

/// Interpolation weights `(j, θ)` on a decreasing grid, with value `(1−θ) v[j] + θ v[j+1]`,
/// or `None` outside the grid.
pub(crate) fn locate(g: &[f64], t: f64) -> Option<(usize, f64)> {
    let n = g.len();
    if !(t <= g[0] && t >= g[n - 1]) {
        return None;
    }
    let j = g.partition_point(|&x| x > t);
    if j == 0 {
        return Some((0, 0.0));
    }
    let j = j - 1;
    if j >= n - 1 {
        return Some((n - 2, 1.0));
    }
    Some((j, (g[j] - t) / (g[j] - g[j + 1])))
}

pub(crate) fn lerp(a: f64, b: f64, th: f64) -> f64 {
    a + th * (b - a)
}

/// Output of [`solve_fixed_point`].
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    pub boundary: Boundary,
    pub iterations: usize,
    pub last_change: f64,
}

// Discrete prior in (r, y). Point coefficients are w δ exp(δy − δ²r/2 − scale).
pub(crate) struct AtomKernel {
    atoms: Vec<(f64, f64)>,
}

pub(crate) struct AtomPoint {
    t: f64,
    y: f64,
    scale: f64,
    coef: Vec<f64>,
}

impl AtomKernel {
    pub(crate) fn new(prior: &Prior) -> Result<Self> {
        let atoms = prior
            .atoms()
            .ok_or_else(|| Error::Unsupported("normal priors are handled by the normal_conjugate module".into()))?;
        Ok(Self { atoms })
    }
}

impl StepKernel for AtomKernel {
    type Point = AtomPoint;

    fn new_point(&self) -> AtomPoint {
        AtomPoint { t: 0.0, y: 0.0, scale: 0.0, coef: alloc::vec![0.0; self.atoms.len()] }
    }

    fn set_point(&self, p: &mut AtomPoint, t: f64, y: f64) {
        p.t = t;
        p.y = y;
        let mut scale = f64::NEG_INFINITY;
        for &(d, _) in &self.atoms {
            scale = max(scale, d * y - 0.5 * d * d * t);
        }
        p.scale = scale;
        for (c, &(d, w)) in p.coef.iter_mut().zip(&self.atoms) {
            *c = w * d * exp(d * y - 0.5 * d * d * t - scale);
        }
    }

    fn log_scale(&self, p: &AtomPoint) -> f64 {
        p.scale
    }

    fn h(&self, p: &AtomPoint) -> f64 {
        p.coef.iter().sum()
    }

    fn upper_tail(&self, p: &AtomPoint, u: f64, z: f64) -> f64 {
        let tau = u - p.t;
        let st = sqrt(tau);
        let mut acc = 0.0;
        for (c, &(d, _)) in p.coef.iter().zip(&self.atoms) {
            acc += c * std_normal_cdf((d * tau + p.y - z) / st);
        }
        acc
    }

    fn lower_tail(&self, p: &AtomPoint, u: f64, z: f64) -> f64 {
        let tau = u - p.t;
        let st = sqrt(tau);
        let mut acc = 0.0;
        for (c, &(d, _)) in p.coef.iter().zip(&self.atoms) {
            acc += c * std_normal_cdf((z - p.y - d * tau) / st);
        }
        acc
    }

    fn reward_factor(&self, t: f64) -> f64 {
        1.0 - t
    }

    fn weight(&self, _u: f64) -> f64 {
        1.0
    }

    fn bracket_width(&self, t: f64) -> f64 {
        5.0 / sqrt(t)
    }
}

/// `E_(r,y)[h(u, |S_u|) 1(|S_u| ≥ z)]` for a discrete prior, with `S` driftless.
pub fn kernel_k(prior: &Prior, u: f64, r: f64, z: f64, y: f64) -> Result<f64> {
    let atoms = AtomKernel::new(prior)?.atoms;
    if !(u > r && r >= 0.0) || !z.is_finite() || !y.is_finite() {
        return Err(Error::domain("kernel_k", format!("need u > r >= 0, got u = {u}, r = {r}")));
    }
    let tau = u - r;
    let st = sqrt(tau);
    let mut acc = 0.0;
    for (d, w) in atoms {
        let base = -0.5 * d * d * r;
        acc += w
            * d
            * (exp(d * y + base) * std_normal_cdf((d * tau + y - z) / st)
                + exp(-d * y + base) * std_normal_cdf((d * tau - y - z) / st));
    }
    Ok(acc)
}

/// The limit of the kernel as `u ↓ r` at `z = y = b`: `½ h(r, b)`.
pub fn kernel_diagonal(prior: &Prior, r: f64, b: f64) -> Result<f64> {
    Ok(0.5 * prior.h_xi(r, b)?)
}

fn symmetric_engine_inputs(prior: &Prior, cfg: &SolverConfig) -> Result<(AtomKernel, Vec<f64>)> {
    prior.validate()?;
    cfg.validate()?;
    if !prior.is_symmetric() {
        return Err(Error::Unsupported("boundaries for asymmetric priors".into()));
    }
    Ok((AtomKernel::new(prior)?, cfg.r_grid()))
}

const SYMMETRIC: TailWeights = TailWeights { upper: 1.0, lower: 1.0 };

/// Backward trapezoidal solution of the symmetric equation.
pub fn solve_symmetric(prior: &Prior, cfg: &SolverConfig) -> Result<Boundary> {
    let (kernel, grid) = symmetric_engine_inputs(prior, cfg)?;
    let engine = Engine { kernel: &kernel, grid: &grid, weights: SYMMETRIC };
    let (upper, _) = engine.solve(Lower::Mirror, cfg.inner_tol)?;
    Ok(Boundary { grid, upper, lower: LowerBoundary::Mirror })
}

/// Iterates the operator `Q` (relaxed and optionally reward-scaled, see [`SolverConfig`])
/// from the zero boundary on the solver grid.
///
/// Failure to converge returns [`Error::FixedPointNotConverged`] with the last iterate.
pub fn solve_fixed_point(prior: &Prior, cfg: &SolverConfig) -> Result<FixedPointResult> {
    let (kernel, grid) = symmetric_engine_inputs(prior, cfg)?;
    let engine = Engine { kernel: &kernel, grid: &grid, weights: SYMMETRIC };
    let mut b = alloc::vec![0.0; grid.len()];
    let mut change = f64::INFINITY;
    for it in 1..=cfg.fp_max_iter {
        let (next, _, c) = engine.apply_q(&b, None, Lower::Mirror, cfg.fp_relaxation, cfg.fp_reward_scaled);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { op: "solve_fixed_point", at: it as f64 });
        }
        b = next;
        change = c;
        if change <= cfg.fp_tol {
            return Ok(FixedPointResult {
                boundary: Boundary { grid, upper: b, lower: LowerBoundary::Mirror },
                iterations: it,
                last_change: change,
            });
        }
    }
    Err(Error::FixedPointNotConverged {
        iterations: cfg.fp_max_iter,
        last_change: change,
        last: alloc::boxed::Box::new(Boundary { grid, upper: b, lower: LowerBoundary::Mirror }),
    })
}

/// One application of `Q` to a symmetric boundary (unrelaxed).
pub fn apply_q(prior: &Prior, boundary: &Boundary) -> Result<Boundary> {
    let kernel = AtomKernel::new(prior)?;
    check_time_grid(boundary)?;
    if !boundary.is_symmetric() {
        return Err(Error::Unsupported("apply_q takes a symmetric boundary".into()));
    }
    let engine = Engine { kernel: &kernel, grid: &boundary.grid, weights: SYMMETRIC };
    let (upper, _, _) = engine.apply_q(&boundary.upper, None, Lower::Mirror, 1.0, false);
    Ok(Boundary { grid: boundary.grid.clone(), upper, lower: LowerBoundary::Mirror })
}

fn check_time_grid(b: &Boundary) -> Result<()> {
    b.validate()?;
    if b.grid[0] != 1.0 || b.grid[b.grid.len() - 1] <= 0.0 {
        return Err(Error::invalid("boundary", "grid must start at r = 1 and stay positive"));
    }
    Ok(())
}

/// Largest defect of the discretized symmetric equation over the interior nodes.
pub fn residual(prior: &Prior, boundary: &Boundary) -> Result<f64> {
    residual_q(prior, AsymmetricSpec::Finite(0.0), boundary)
}

/// Residual of the asymmetric system (`q = 0` with a mirrored lower part is the
/// symmetric residual).
pub fn residual_q(prior: &Prior, spec: AsymmetricSpec, boundary: &Boundary) -> Result<f64> {
    spec.validate()?;
    check_time_grid(boundary)?;
    let kernel = AtomKernel::new(prior)?;
    let (wu, wl) = spec.tail_weights();
    let engine = Engine { kernel: &kernel, grid: &boundary.grid, weights: TailWeights { upper: wu, lower: wl } };
    let lower = match (&boundary.lower, spec) {
        (LowerBoundary::Mirror, _) => Lower::Mirror,
        (LowerBoundary::Curve(l), _) => Lower::Curve(l),
        (LowerBoundary::Unbounded, AsymmetricSpec::Infinite) => Lower::Unbounded,
        (LowerBoundary::Unbounded, _) => {
            return Err(Error::invalid("boundary", "an unbounded lower part needs q = inf"))
        }
    };
    Ok(engine.residual(&boundary.upper, lower))
}

/// Upper and lower boundaries for the reward `(1 − r)(|h| + 2q h⁺)`.
pub fn solve_asymmetric(prior: &Prior, spec: AsymmetricSpec, cfg: &SolverConfig) -> Result<Boundary> {
    spec.validate()?;
    let (kernel, grid) = symmetric_engine_inputs(prior, cfg)?;
    let (wu, wl) = spec.tail_weights();
    let engine = Engine { kernel: &kernel, grid: &grid, weights: TailWeights { upper: wu, lower: wl } };
    let mode = match spec {
        AsymmetricSpec::Infinite => Lower::Unbounded,
        AsymmetricSpec::Finite(_) => Lower::Curve(&[]),
    };
    let (upper, lower) = engine.solve(mode, cfg.inner_tol)?;
    let lower = match lower {
        Some(l) => LowerBoundary::Curve(l),
        None => LowerBoundary::Unbounded,
    };
    Ok(Boundary { grid, upper, lower })
}

/// Sup-norm distance between two boundaries' upper parts on `[lo, hi]`, interpolating
/// `b` onto the nodes of `a` that fall in the window.
pub fn sup_difference(a: &Boundary, b: &Boundary, lo: f64, hi: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (&t, &v) in a.grid.iter().zip(&a.upper) {
        if t >= lo && t <= hi {
            worst = max(worst, abs(v - b.upper_at(t)?));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> Prior {
        Prior::two_point(1.0).unwrap()
    }

    #[test]
    fn kernel_values() {
        let p = two_point();
        let k = kernel_k(&p, 1.0, 0.5, 0.0, 0.0).unwrap();
        assert!((k - 0.405_365_712_429_371_2).abs() < 1e-14);
        let far = kernel_k(&p, 1.0, 0.5, 0.3 + 40.0 * 0.5f64.sqrt(), 0.3).unwrap();
        assert!(far.abs() < 1e-12);
        assert!(matches!(kernel_k(&p, 0.5, 0.5, 0.0, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(kernel_k(&Prior::normal(0.0, 1.0).unwrap(), 1.0, 0.5, 0.0, 0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn kernel_reflection() {
        let p = Prior::mixture(vec![-2.0, -0.5, 0.5, 2.0], vec![0.2, 0.3, 0.3, 0.2]).unwrap();
        for &(u, r, z, y) in &[(1.0, 0.2, 0.5, 0.3), (0.7, 0.1, 1.5, -0.9), (2.0, 0.0, 0.1, 2.0)] {
            let a = kernel_k(&p, u, r, z, y).unwrap();
            let b = kernel_k(&p, u, r, z, -y).unwrap();
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }

    #[test]
    fn diagonal_values_and_continuity() {
        let p = two_point();
        assert_eq!(kernel_diagonal(&p, 0.0, 0.0).unwrap(), 0.0);
        let d = kernel_diagonal(&p, 0.0, 1.0).unwrap();
        assert!((d - 0.587_600_596_821_900_7).abs() < 1e-15);
        let m = Prior::mixture(vec![-1.5, -0.2, 0.2, 1.5], vec![0.1, 0.4, 0.4, 0.1]).unwrap();
        for i in 0..10 {
            let r = 0.05 + 0.09 * i as f64;
            let b = 0.1 + 0.25 * i as f64;
            let lim = kernel_k(&m, r + 1e-10, r, b, b).unwrap();
            let diag = kernel_diagonal(&m, r, b).unwrap();
            assert!((lim - diag).abs() < 1e-4 * diag.abs(), "r = {r}: {lim} vs {diag}");
        }
    }

    #[test]
    fn grid_shapes() {
        let cfg = SolverConfig { k: 5, ..SolverConfig::default() };
        let g = cfg.r_grid();
        assert_eq!(g[0], 1.0);
        assert_eq!(g[4], 1e-4);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
        assert!(g[0] - g[1] < g[3] - g[4]);
        let u = SolverConfig { k: 5, grid_shape: GridShape::Uniform, ..cfg }.r_grid();
        assert!((u[1] - u[2] - (u[2] - u[3])).abs() < 1e-15);
        assert!(SolverConfig { k: 2, ..cfg }.validate().is_err());
    }

    #[test]
    fn boundary_interpolation() {
        let b = Boundary::new(vec![1.0, 0.5, 0.1], vec![0.0, 1.0, 2.0], LowerBoundary::Mirror).unwrap();
        assert_eq!(b.upper_at(1.0).unwrap(), 0.0);
        assert_eq!(b.upper_at(0.75).unwrap(), 0.5);
        assert_eq!(b.upper_at(0.1).unwrap(), 2.0);
        assert_eq!(b.lower_at(0.3).unwrap(), -1.5);
        assert!(matches!(b.upper_at(0.05), Err(Error::OutOfRange { .. })));
        assert!(Boundary::new(vec![1.0, 1.0], vec![0.0, 0.0], LowerBoundary::Mirror).is_err());
    }

    #[test]
    fn small_grid_solution_is_self_consistent() {
        let cfg = SolverConfig { k: 200, ..SolverConfig::default() };
        let b = solve_symmetric(&two_point(), &cfg).unwrap();
        assert_eq!(b.upper[0], 0.0);
        assert!(b.upper[1..].iter().all(|&v| v > 0.0));
        assert!(residual(&two_point(), &b).unwrap() <= 1e-8);
        let zero = Boundary { upper: vec![0.0; b.grid.len()], ..b.clone() };
        assert!(residual(&two_point(), &zero).unwrap() >= 0.1);
        let mut bumped = b.clone();
        for v in &mut bumped.upper[1..] {
            *v += 0.1;
        }
        assert!(residual(&two_point(), &bumped).unwrap() > residual(&two_point(), &b).unwrap());
    }

    #[test]
    fn asymmetric_rejects_asymmetric_priors() {
        let cfg = SolverConfig { k: 10, ..SolverConfig::default() };
        let p = Prior::mixture(vec![1.0, -0.5], vec![0.5, 0.5]).unwrap();
        assert!(matches!(solve_symmetric(&p, &cfg), Err(Error::Unsupported(_))));
        assert!(matches!(solve_asymmetric(&p, AsymmetricSpec::Finite(1.0), &cfg), Err(Error::Unsupported(_))));
        assert!(AsymmetricSpec::Finite(-1.0).validate().is_err());
    }
}
