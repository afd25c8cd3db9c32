//! Independent checks on solved boundaries.
//!
//! [`value_iteration`] runs a Bernoulli random-walk backward induction on a lattice with
//! space step `√Δt`. The Monte Carlo estimators simulate stopping rules path by path with
//! counter-based substreams keyed by `(seed, path)`, grouped in fixed chunks so that any
//! parallel schedule that merges chunks in index order reproduces the serial estimate.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::horizon::HorizonModel;
use crate::math::{abs, exp, expm1, sqrt};
use crate::priors::{Decision, Prior};
use crate::rng::PathRng;
use crate::volterra::{AsymmetricSpec, Boundary, LowerBoundary};

// ---------------------------------------------------------------------------------------
// Value iteration

#[derive(Debug, Clone, PartialEq)]
pub struct TreeConfig {
    /// Earliest time.
    pub t0: f64,
    /// Terminal time, where `V = G`.
    pub t1: f64,
    /// Requested time step; rounded so that it divides `t1 − t0`.
    pub dt: f64,
    /// Lattice half-height; nodes beyond it are not represented.
    pub y_max: f64,
    pub retain_full: bool,
    pub memory_budget_bytes: u64,
}

impl TreeConfig {
    pub fn new(t0: f64, t1: f64, dt: f64, y_max: f64) -> Self {
        Self { t0, t1, dt, y_max, retain_full: false, memory_budget_bytes: 1 << 30 }
    }
}

/// Result of [`value_iteration`]: per-slice stopping indices and optionally every value.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueGrid {
    /// Slice times, decreasing from `t1`.
    pub times: Vec<f64>,
    /// Exactly `√(t_i − t_{i+1})`.
    pub dy: f64,
    /// Nodes are `j dy` for `|j| ≤ j_max`.
    pub j_max: usize,
    /// Smallest `j ≥ 0` where the slice stops, `None` if it never does.
    pub upper_index: Vec<Option<usize>>,
    /// Smallest `j ≥ 0` with a stop at `−j dy`.
    pub lower_index: Vec<Option<usize>>,
    /// `V(t0, 0)`.
    pub value_at_origin: f64,
    /// Row-major `V`, one row per slice, when retained.
    pub values: Option<Vec<f64>>,
}

impl ValueGrid {
    pub fn width(&self) -> usize {
        2 * self.j_max + 1
    }

    /// `V(t_i, j dy)` when the full grid was retained.
    pub fn value(&self, i: usize, j: isize) -> Option<f64> {
        let v = self.values.as_ref()?;
        let col = (j + self.j_max as isize) as usize;
        v.get(i * self.width() + col).copied()
    }
}

/// Backward induction `V(t_i, y) = max(G(t_i, y), ½(V(t_{i−1}, y + dy) + V(t_{i−1}, y − dy)))`.
///
/// The two outermost nodes are stopped by fiat; a slice whose first stop is there is
/// reported as having none.
pub fn value_iteration<G: Fn(f64, f64) -> f64>(reward: G, cfg: &TreeConfig) -> Result<ValueGrid> {
    let TreeConfig { t0, t1, dt, y_max, retain_full, memory_budget_bytes } = *cfg;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::invalid("tree", alloc::format!("need t0 < t1, got [{t0}, {t1}]")));
    }
    if !(dt > 0.0 && dt.is_finite() && y_max > 0.0 && y_max.is_finite()) {
        return Err(Error::invalid("tree", alloc::format!("dt = {dt}, y_max = {y_max}")));
    }
    let n = libm::round((t1 - t0) / dt).max(1.0) as usize;
    let dt = (t1 - t0) / n as f64;
    let dy = sqrt(dt);
    let j_max = libm::ceil(y_max / dy) as usize + 1;
    let width = 2 * j_max + 1;
    let row_bytes = (width * 8) as u64;
    let required = if retain_full { row_bytes * (n as u64 + 1) } else { 2 * row_bytes };
    if required > memory_budget_bytes {
        return Err(Error::Resource { required_bytes: required, budget_bytes: memory_budget_bytes });
    }
    let ys: Vec<f64> = (0..width).map(|c| (c as f64 - j_max as f64) * dy).collect();
    let times: Vec<f64> = (0..=n).map(|i| if i == n { t0 } else { t1 - i as f64 * dt }).collect();

    let eval = |t: f64, y: f64| -> Result<f64> {
        let g = reward(t, y);
        if g.is_finite() {
            Ok(g)
        } else {
            Err(Error::NonFinite { op: "tree reward", at: y })
        }
    };

    let mut v = Vec::with_capacity(width);
    for &y in &ys {
        v.push(eval(t1, y)?);
    }
    let mut next = vec![0.0; width];
    let mut values = if retain_full { Some(v.clone()) } else { None };
    // The terminal slice stops everywhere.
    let mut upper_index = vec![Some(0)];
    let mut lower_index = vec![Some(0)];
    let mut stop = vec![false; width];

    for &t in &times[1..] {
        for c in 0..width {
            let g = eval(t, ys[c])?;
            if c == 0 || c == width - 1 {
                next[c] = g;
                stop[c] = false;
                continue;
            }
            let cont = 0.5 * (v[c - 1] + v[c + 1]);
            if g > 0.0 && g >= cont * (1.0 - 1e-12) {
                next[c] = g;
                stop[c] = true;
            } else {
                next[c] = cont.max(g);
                stop[c] = false;
            }
        }
        upper_index.push((0..j_max).find(|&j| stop[j_max + j]));
        lower_index.push((0..j_max).find(|&j| stop[j_max - j]));
        core::mem::swap(&mut v, &mut next);
        if let Some(all) = values.as_mut() {
            all.extend_from_slice(&v);
        }
    }
    Ok(ValueGrid { times, dy, j_max, upper_index, lower_index, value_at_origin: v[j_max], values })
}

/// Boundary read off a [`ValueGrid`], with slices that never stop flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedBoundary {
    pub boundary: Boundary,
    /// Upper value is the lattice top because no stop was found.
    pub upper_flagged: Vec<bool>,
    pub lower_flagged: Vec<bool>,
}

/// First stopping node on each side of each slice. Identical sides give a mirrored
/// boundary; a lower side that never stops before the terminal slice is unbounded.
pub fn extract_boundary(vg: &ValueGrid) -> Result<ExtractedBoundary> {
    let top = vg.j_max as f64 * vg.dy;
    let side = |idx: &[Option<usize>]| -> (Vec<f64>, Vec<bool>) {
        idx.iter().map(|j| j.map_or((top, true), |j| (j as f64 * vg.dy, false))).unzip()
    };
    let (upper, upper_flagged) = side(&vg.upper_index);
    let (lower_abs, lower_flagged) = side(&vg.lower_index);
    let lower = if vg.upper_index == vg.lower_index {
        LowerBoundary::Mirror
    } else if lower_flagged[1..].iter().all(|&f| f) {
        LowerBoundary::Unbounded
    } else {
        LowerBoundary::Curve(lower_abs.iter().map(|v| -v).collect())
    };
    let boundary = Boundary::new(vg.times.clone(), upper, lower)?;
    Ok(ExtractedBoundary { boundary, upper_flagged, lower_flagged })
}

/// `(1 − r)(w⁺ h⁺ + w⁻ h⁻)` for a prior in `(r, y)`.
pub fn standardized_reward(prior: &Prior, spec: AsymmetricSpec) -> impl Fn(f64, f64) -> f64 + '_ {
    move |r, y| (1.0 - r) * spec.payoff(prior.h_xi(r, y).unwrap_or(f64::NAN))
}

/// `(1 + 1/s)(w⁺ y⁺ + w⁻ y⁻)` for the standardized normal problem in `(s, W)`.
pub fn standard_normal_reward(spec: AsymmetricSpec) -> impl Fn(f64, f64) -> f64 {
    move |s, y| (1.0 + 1.0 / s) * spec.payoff(y)
}

// ---------------------------------------------------------------------------------------
// Monte Carlo plumbing

/// Paths per chunk; chunks are the unit of parallel work and of ordered merging.
pub const CHUNK_PATHS: u64 = 4096;

/// Count, mean and centred second moment, merged with the pairwise update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        sqrt(self.m2 / (self.n - 1) as f64 / self.n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyValueEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub step: f64,
}

impl PolicyValueEstimate {
    /// `|a − b| / √(se_a² + se_b²)`.
    pub fn z_score(&self, other: &PolicyValueEstimate) -> f64 {
        let se = sqrt(self.std_error * self.std_error + other.std_error * other.std_error);
        abs(self.mean - other.mean) / se
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: u64,
    pub step: f64,
    pub seed: u64,
    /// Simulation cut-off for unbounded horizons.
    pub max_time: f64,
}

impl McConfig {
    pub fn new(n_paths: u64, step: f64, seed: u64) -> Self {
        Self { n_paths, step, seed, max_time: 50.0 }
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::invalid("mc", "n_paths must be positive"));
        }
        if !(self.step > 0.0 && self.step.is_finite() && self.max_time > 0.0 && self.max_time.is_finite()) {
            return Err(Error::invalid("mc", alloc::format!("step = {}, max_time = {}", self.step, self.max_time)));
        }
        Ok(())
    }
}

/// A per-path estimator that can be run chunk by chunk.
pub trait PathEstimator {
    fn config(&self) -> &McConfig;
    /// Sample of path number `path`, drawn from the substream `(seed, path)`.
    fn path_value(&self, path: u64) -> f64;
}

pub fn n_chunks(n_paths: u64) -> u64 {
    n_paths.div_ceil(CHUNK_PATHS)
}

/// Statistics of chunk `chunk`, accumulated in path order.
pub fn run_chunk<E: PathEstimator + ?Sized>(est: &E, chunk: u64) -> RunningStats {
    let n = est.config().n_paths;
    let mut s = RunningStats::default();
    for path in chunk * CHUNK_PATHS..((chunk + 1) * CHUNK_PATHS).min(n) {
        s.push(est.path_value(path));
    }
    s
}

/// Merge chunk statistics given in chunk order.
pub fn finish<E: PathEstimator + ?Sized>(est: &E, chunks: &[RunningStats]) -> Result<PolicyValueEstimate> {
    let mut total = RunningStats::default();
    for c in chunks {
        total.merge(c);
    }
    if !(total.mean.is_finite() && total.m2.is_finite()) {
        return Err(Error::NonFinite { op: "monte carlo estimate", at: total.mean });
    }
    let cfg = est.config();
    Ok(PolicyValueEstimate { mean: total.mean, std_error: total.std_error(), n_paths: total.n, seed: cfg.seed, step: cfg.step })
}

pub fn run_serial<E: PathEstimator + ?Sized>(est: &E) -> Result<PolicyValueEstimate> {
    let chunks: Vec<RunningStats> = (0..n_chunks(est.config().n_paths)).map(|c| run_chunk(est, c)).collect();
    finish(est, &chunks)
}

// ---------------------------------------------------------------------------------------
// Stopping-rule values

/// When to stop, in standardized `(r, S)` coordinates.
#[derive(Debug, Clone, Copy)]
pub enum StoppingRule<'a> {
    /// Stop when `S ≥ b⁺(r)` or `S ≤ b⁻(r)`. Held flat before the earliest grid time and
    /// after the terminal one.
    Boundary(&'a Boundary),
    /// Fixed thresholds; `lower = −∞` stops from above only.
    Constant { upper: f64, lower: f64 },
    /// Run to the horizon.
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Simulate the drift and pay `δ (ν − ρ)⁺` times the decision weight.
    Policy,
    /// Driftless paths paying `f̃(ρ)(w⁺ h⁺ + w⁻ h⁻)` with the normalized `h`.
    Transformed,
}

/// A stopping rule with thresholds tabulated on the simulation grid.
pub struct RuleValue<'a> {
    prior: &'a Prior,
    spec: AsymmetricSpec,
    horizon: &'a HorizonModel,
    cfg: McConfig,
    kind: EstimatorKind,
    upper: Vec<f64>,
    lower: Vec<f64>,
    // Simulation end for the fixed horizon or the cut-off otherwise.
    t_end: f64,
}

impl<'a> RuleValue<'a> {
    pub fn new(
        kind: EstimatorKind,
        prior: &'a Prior,
        rule: StoppingRule,
        spec: AsymmetricSpec,
        horizon: &'a HorizonModel,
        cfg: McConfig,
    ) -> Result<Self> {
        prior.validate()?;
        spec.validate()?;
        horizon.validate()?;
        cfg.validate()?;
        if let Prior::NormalConjugate { r0, .. } = prior {
            if *r0 <= 0.0 {
                return Err(Error::Singular { detail: "Monte Carlo needs a proper prior (r0 > 0)".into() });
            }
        }
        let t_end = if horizon.is_fixed() { 1.0 } else { cfg.max_time };
        let (upper, lower) = match rule {
            StoppingRule::Boundary(b) => {
                b.validate()?;
                if abs(b.grid[0] - 1.0) > 1e-12 {
                    return Err(Error::invalid("stopping rule", alloc::format!("boundary grid starts at r = {}, not 1", b.grid[0])));
                }
                let last = b.grid[b.grid.len() - 1];
                let k_max = libm::ceil(1.0 / cfg.step) as usize;
                let mut up = Vec::with_capacity(k_max + 1);
                let mut lo = Vec::with_capacity(k_max + 1);
                for k in 0..=k_max {
                    let r = (k as f64 * cfg.step).clamp(last, 1.0);
                    up.push(b.upper_at(r)?);
                    lo.push(b.lower_at(r)?);
                }
                (up, lo)
            }
            StoppingRule::Constant { upper, lower } => {
                if upper.is_nan() || lower.is_nan() || lower > upper {
                    return Err(Error::invalid("stopping rule", alloc::format!("thresholds ({lower}, {upper})")));
                }
                (vec![upper], vec![lower])
            }
            StoppingRule::Never => (vec![f64::INFINITY], vec![f64::NEG_INFINITY]),
        };
        Ok(Self { prior, spec, horizon, cfg, kind, upper, lower, t_end })
    }

    fn simulate(&self, path: u64) -> f64 {
        let mut rng = PathRng::new(self.cfg.seed, path);
        let step = self.cfg.step;
        let sd = sqrt(step);
        let (drift, nu) = match self.kind {
            EstimatorKind::Policy => {
                let d = self.prior.sample(&mut rng).unwrap_or(f64::NAN);
                (d, self.horizon.sample(&mut rng))
            }
            EstimatorKind::Transformed => (0.0, f64::INFINITY),
        };
        let last = self.upper.len() - 1;
        let mut s = 0.0;
        let mut k: usize = 0;
        loop {
            let t = k as f64 * step;
            if t >= nu {
                // The horizon arrived first: nobody is left to treat.
                return 0.0;
            }
            let kk = k.min(last);
            if s >= self.upper[kk] || s <= self.lower[kk] || t >= self.t_end {
                return self.payoff(drift, nu, t, s);
            }
            s += drift * step + sd * rng.next_normal();
            k += 1;
        }
    }

    fn payoff(&self, delta: f64, nu: f64, rho: f64, s: f64) -> f64 {
        match self.kind {
            EstimatorKind::Policy => {
                let (wu, wl) = self.spec.tail_weights();
                let remaining = (nu - rho).max(0.0);
                match self.prior.optimal_decision(rho, s) {
                    Ok(Decision::Plus) => wu * delta * remaining,
                    Ok(Decision::Minus) => -wl * delta * remaining,
                    Err(_) => f64::NAN,
                }
            }
            EstimatorKind::Transformed => {
                let disc = self.horizon.f_tilde(rho);
                if disc == 0.0 {
                    return 0.0;
                }
                disc * self.spec.payoff(self.prior.h_exact(rho, s).unwrap_or(f64::NAN))
            }
        }
    }
}

impl PathEstimator for RuleValue<'_> {
    fn config(&self) -> &McConfig {
        &self.cfg
    }

    fn path_value(&self, path: u64) -> f64 {
        self.simulate(path)
    }
}

/// Expected utility of a stopping rule with the optimal terminal decision, simulating
/// the drift under the prior.
pub fn mc_policy_value(
    prior: &Prior,
    rule: StoppingRule,
    spec: AsymmetricSpec,
    horizon: &HorizonModel,
    cfg: McConfig,
) -> Result<PolicyValueEstimate> {
    run_serial(&RuleValue::new(EstimatorKind::Policy, prior, rule, spec, horizon, cfg)?)
}

/// The same value computed on driftless paths through the `h` function.
pub fn mc_transformed_value(
    prior: &Prior,
    rule: StoppingRule,
    spec: AsymmetricSpec,
    horizon: &HorizonModel,
    cfg: McConfig,
) -> Result<PolicyValueEstimate> {
    run_serial(&RuleValue::new(EstimatorKind::Transformed, prior, rule, spec, horizon, cfg)?)
}

// ---------------------------------------------------------------------------------------
// Continuous threshold rules with a bridge correction

// Probability that a Brownian bridge with variance `v` from `a` to `b` touches `x`,
// both ends on the same side.
fn bridge_hit(a: f64, b: f64, x: f64, v: f64) -> f64 {
    exp(-2.0 * (x - a) * (x - b) / v)
}

/// `E[inf{t : |W_t| ≥ x}]` for standard Brownian motion from 0.
///
/// Between grid points a crossing is detected with the Brownian-bridge probability.
pub struct FirstExitTime {
    pub threshold: f64,
    pub cfg: McConfig,
}

impl FirstExitTime {
    pub fn new(threshold: f64, cfg: McConfig) -> Result<Self> {
        cfg.validate()?;
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::invalid("first exit", alloc::format!("threshold = {threshold}")));
        }
        Ok(Self { threshold, cfg })
    }
}

impl PathEstimator for FirstExitTime {
    fn config(&self) -> &McConfig {
        &self.cfg
    }

    fn path_value(&self, path: u64) -> f64 {
        let mut rng = PathRng::new(self.cfg.seed, path);
        let (dt, x) = (self.cfg.step, self.threshold);
        let sd = sqrt(dt);
        let mut w = 0.0;
        let mut t = 0.0;
        while t < self.cfg.max_time {
            let next = w + sd * rng.next_normal();
            let u = rng.next_uniform();
            t += dt;
            if abs(next) >= x {
                return t;
            }
            let stay = (1.0 - bridge_hit(w, next, x, dt)) * (1.0 - bridge_hit(-w, -next, x, dt));
            if u > stay {
                return t;
            }
            w = next;
        }
        t
    }
}

pub fn mc_first_exit_time(threshold: f64, cfg: McConfig) -> Result<PolicyValueEstimate> {
    run_serial(&FirstExitTime::new(threshold, cfg)?)
}

/// `E[e^{−(2r0+1)τ} |X_τ|]` for `τ = inf{t : |X_t| ≥ w}` and `dX = X dt + √2 dB`, `X_0 = 0`.
///
/// Transitions are exact; crossings between grid points use the bridge probability with
/// the step variance. Paths that have not exited by `max_time` pay zero. Estimators
/// with the same seed and step share random numbers.
pub struct OuThresholdValue {
    pub r0: f64,
    pub threshold: f64,
    pub cfg: McConfig,
}

impl OuThresholdValue {
    pub fn new(r0: f64, threshold: f64, cfg: McConfig) -> Result<Self> {
        cfg.validate()?;
        if !(r0 > 0.0 && r0.is_finite() && threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::invalid("ou threshold", alloc::format!("r0 = {r0}, threshold = {threshold}")));
        }
        Ok(Self { r0, threshold, cfg })
    }
}

impl PathEstimator for OuThresholdValue {
    fn config(&self) -> &McConfig {
        &self.cfg
    }

    fn path_value(&self, path: u64) -> f64 {
        let mut rng = PathRng::new(self.cfg.seed, path);
        let dt = self.cfg.step;
        let (grow, var) = (exp(dt), expm1(2.0 * dt));
        let sd = sqrt(var);
        let beta = 2.0 * self.r0 + 1.0;
        let w = self.threshold;
        let mut x = 0.0;
        let mut t = 0.0;
        while t < self.cfg.max_time {
            let next = grow * x + sd * rng.next_normal();
            let u = rng.next_uniform();
            t += dt;
            let crossed = abs(next) >= w
                || u > (1.0 - bridge_hit(x, next, w, var)) * (1.0 - bridge_hit(-x, -next, w, var));
            if crossed {
                // Continuous paths exit exactly at the level.
                return exp(-beta * t) * w;
            }
            x = next;
        }
        0.0
    }
}

pub fn mc_ou_threshold_value(r0: f64, threshold: f64, cfg: McConfig) -> Result<PolicyValueEstimate> {
    run_serial(&OuThresholdValue::new(r0, threshold, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volterra::{solve_symmetric, SolverConfig};

    #[test]
    fn running_stats_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1013) as f64 / 17.0).collect();
        let mut all = RunningStats::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut parts = RunningStats::default();
        for c in xs.chunks(97) {
            let mut s = RunningStats::default();
            c.iter().for_each(|&x| s.push(x));
            parts.merge(&s);
        }
        assert_eq!(parts.n, 1000);
        assert!((parts.mean - all.mean).abs() < 1e-12);
        assert!((parts.m2 - all.m2).abs() < 1e-8 * all.m2);
    }

    #[test]
    fn tree_terminal_and_symmetry() {
        let prior = Prior::two_point(1.0).unwrap();
        let mut cfg = TreeConfig::new(0.0, 1.0, 1e-3, 4.0);
        cfg.retain_full = true;
        let vg = value_iteration(standardized_reward(&prior, AsymmetricSpec::Finite(0.0)), &cfg).unwrap();
        for j in -(vg.j_max as isize)..=vg.j_max as isize {
            assert_eq!(vg.value(0, j), Some(0.0));
        }
        for i in [1, 100, 999] {
            for j in 1..vg.j_max as isize {
                assert_eq!(vg.value(i, j), vg.value(i, -j));
                let g = standardized_reward(&prior, AsymmetricSpec::Finite(0.0))(vg.times[i], j as f64 * vg.dy);
                assert!(vg.value(i, j).unwrap() >= g);
            }
        }
        let ex = extract_boundary(&vg).unwrap();
        assert!(ex.boundary.is_symmetric());
        assert_eq!(ex.boundary.upper[0], 0.0);
        assert!(ex.upper_flagged.iter().all(|&f| !f));
        assert!((vg.dy * vg.dy - (vg.times[0] - vg.times[1])).abs() < 1e-15);
    }

    #[test]
    fn tree_flags_slices_without_stops() {
        // Reward increasing in time: waiting is always better until the end.
        let vg = value_iteration(|t, y| (1.0 + t) * (1.0 + y * y), &TreeConfig::new(0.0, 1.0, 0.01, 1.0)).unwrap();
        let ex = extract_boundary(&vg).unwrap();
        assert!(!ex.upper_flagged[0]);
        assert!(ex.upper_flagged[1..].iter().all(|&f| f));
        assert_eq!(ex.boundary.upper[5], vg.j_max as f64 * vg.dy);
    }

    #[test]
    fn tree_memory_budget() {
        let mut cfg = TreeConfig::new(0.0, 1.0, 1e-4, 5.0);
        cfg.retain_full = true;
        cfg.memory_budget_bytes = 1 << 20;
        assert!(matches!(value_iteration(|_, _| 1.0, &cfg), Err(Error::Resource { .. })));
        assert!(matches!(value_iteration(|_, _| f64::NAN, &TreeConfig::new(0.0, 1.0, 0.1, 1.0)), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn tree_matches_solver_coarsely() {
        let prior = Prior::two_point(1.0).unwrap();
        let vg = value_iteration(standardized_reward(&prior, AsymmetricSpec::Finite(0.0)), &TreeConfig::new(0.0, 1.0, 4e-4, 7.0)).unwrap();
        let tree = extract_boundary(&vg).unwrap().boundary;
        let solved = solve_symmetric(&prior, &SolverConfig { k: 400, ..SolverConfig::default() }).unwrap();
        let d = crate::volterra::sup_difference(&tree, &solved, 0.05, 0.95).unwrap();
        assert!(d < 0.06, "{d}");
    }

    #[test]
    fn trivial_rules_have_zero_value() {
        let prior = Prior::two_point(1.0).unwrap();
        let fixed = HorizonModel::Fixed { n: 1.0 };
        let cfg = McConfig::new(20_000, 1e-2, 5);
        let q0 = AsymmetricSpec::Finite(0.0);
        let at_once = StoppingRule::Constant { upper: 0.0, lower: 0.0 };
        let a = mc_policy_value(&prior, at_once, q0, &fixed, cfg).unwrap();
        assert!(a.mean.abs() <= 3.0 * a.std_error, "{a:?}");
        let b = mc_transformed_value(&prior, at_once, q0, &fixed, cfg).unwrap();
        assert_eq!(b.mean, 0.0);
        let c = mc_policy_value(&prior, StoppingRule::Never, q0, &fixed, cfg).unwrap();
        assert_eq!(c.mean, 0.0);
        let d = mc_transformed_value(&prior, StoppingRule::Never, q0, &fixed, cfg).unwrap();
        assert_eq!(d.mean, 0.0);
    }

    #[test]
    fn estimates_are_reproducible_and_chunk_order_invariant() {
        let prior = Prior::normal(0.2, 2.0).unwrap();
        let h = HorizonModel::Exponential { lambda: 1.0 };
        let rule = StoppingRule::Constant { upper: 0.5, lower: -0.5 };
        let cfg = McConfig::new(10_000, 1e-2, 11);
        let est = RuleValue::new(EstimatorKind::Policy, &prior, rule, AsymmetricSpec::Finite(1.0), &h, cfg).unwrap();
        let a = run_serial(&est).unwrap();
        let b = run_serial(&est).unwrap();
        assert_eq!(a, b);
        let chunks: Vec<RunningStats> = (0..n_chunks(cfg.n_paths)).rev().map(|c| run_chunk(&est, c)).collect();
        let ordered: Vec<RunningStats> = chunks.into_iter().rev().collect();
        assert_eq!(finish(&est, &ordered).unwrap(), a);
        assert_eq!(a.n_paths, 10_000);
    }

    #[test]
    fn girsanov_identity_on_a_constant_rule() {
        let prior = Prior::mixture(vec![-0.5, 1.5], vec![0.6, 0.4]).unwrap();
        let h = HorizonModel::Fixed { n: 1.0 };
        let rule = StoppingRule::Constant { upper: 0.6, lower: -0.4 };
        let spec = AsymmetricSpec::Finite(1.0);
        let a = mc_policy_value(&prior, rule, spec, &h, McConfig::new(40_000, 1e-3, 1)).unwrap();
        let b = mc_transformed_value(&prior, rule, spec, &h, McConfig::new(40_000, 1e-3, 2)).unwrap();
        assert!(a.z_score(&b) < 3.0, "{a:?} {b:?}");
    }

    #[test]
    fn bridge_corrected_exit_time() {
        let e = mc_first_exit_time(0.8, McConfig::new(40_000, 1e-3, 9)).unwrap();
        assert!((e.mean - 0.64).abs() <= 3.0 * e.std_error, "{e:?}");
        assert!(mc_first_exit_time(0.0, McConfig::new(1, 1e-3, 9)).is_err());
    }

    #[test]
    fn rule_validation() {
        let prior = Prior::two_point(1.0).unwrap();
        let h = HorizonModel::Fixed { n: 1.0 };
        let short = Boundary::new(vec![0.9, 0.1], vec![0.1, 0.2], LowerBoundary::Mirror).unwrap();
        let q = AsymmetricSpec::Finite(0.0);
        assert!(mc_policy_value(&prior, StoppingRule::Boundary(&short), q, &h, McConfig::new(10, 1e-2, 1)).is_err());
        assert!(mc_policy_value(&prior, StoppingRule::Never, q, &h, McConfig::new(0, 1e-2, 1)).is_err());
        let improper = Prior::normal(0.0, 0.0).unwrap();
        assert!(mc_policy_value(&improper, StoppingRule::Never, q, &h, McConfig::new(10, 1e-2, 1)).is_err());
    }
}
