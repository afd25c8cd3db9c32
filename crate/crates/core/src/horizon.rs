//! Patient-horizon laws and their discount functions.
//!
//! With `f(t) = E[(N − t)⁺]` the standardized discount is `f̃(r) = f(r E[N]) / E[N]`, so
//! `f̃(0) = 1`, `f̃′(r) = −P(N > r E[N])` and `f̃` is convex and nonincreasing.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, exp, ln, pow};
use crate::rng::PathRng;

#[derive(Debug, Clone, PartialEq)]
pub enum HorizonModel {
    Fixed { n: f64 },
    Exponential { lambda: f64 },
    /// Pareto shifted to start at zero; `omega > 1` keeps the mean finite.
    Lomax { lambda: f64, omega: f64 },
    /// User-supplied `f̃` at increasing times, linear in between.
    Table { r: Vec<f64>, f: Vec<f64> },
}

impl HorizonModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |d: alloc::string::String| Err(Error::invalid("horizon", d));
        match self {
            HorizonModel::Fixed { n } if !(n.is_finite() && *n > 0.0) => bad(format!("n = {n} must be positive")),
            HorizonModel::Exponential { lambda } if !(lambda.is_finite() && *lambda > 0.0) => {
                bad(format!("lambda = {lambda} must be positive"))
            }
            HorizonModel::Lomax { lambda, omega }
                if !(lambda.is_finite() && *lambda > 0.0 && omega.is_finite() && *omega > 1.0) =>
            {
                bad(format!("lomax needs lambda > 0 and omega > 1, got {lambda}, {omega}"))
            }
            HorizonModel::Table { r, f } => validate_table(r, f),
            _ => Ok(()),
        }
    }

    /// `E[N]` in patients; tables are already standardized and have none.
    pub fn horizon_mean(&self) -> Option<f64> {
        match self {
            HorizonModel::Fixed { n } => Some(*n),
            HorizonModel::Exponential { lambda } => Some(1.0 / lambda),
            HorizonModel::Lomax { lambda, omega } => Some(lambda / (omega - 1.0)),
            HorizonModel::Table { .. } => None,
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, HorizonModel::Fixed { .. })
    }

    /// `f̃(r)` for `r ≥ 0`.
    pub fn f_tilde(&self, r: f64) -> f64 {
        match self {
            HorizonModel::Fixed { .. } => {
                if r < 1.0 {
                    1.0 - r
                } else {
                    0.0
                }
            }
            HorizonModel::Exponential { .. } => exp(-r),
            HorizonModel::Lomax { omega, .. } => pow(1.0 + r / (omega - 1.0), 1.0 - omega),
            HorizonModel::Table { r: rs, f } => {
                let (k, slope) = table_segment(rs, f, r);
                if k + 1 < rs.len() {
                    f[k] + slope * (r - rs[k])
                } else {
                    // Past the last knot: continue the last slope down to zero.
                    (f[k] + slope * (r - rs[k])).max(0.0)
                }
            }
        }
    }

    /// `f̃′(r) = −P(N > r E[N])` (right derivative at knots).
    pub fn f_tilde_derivative(&self, r: f64) -> f64 {
        match self {
            HorizonModel::Fixed { .. } => {
                if r < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            HorizonModel::Exponential { .. } => -exp(-r),
            HorizonModel::Lomax { omega, .. } => -pow(1.0 + r / (omega - 1.0), -omega),
            HorizonModel::Table { r: rs, f } => {
                if self.f_tilde(r) <= 0.0 {
                    0.0
                } else {
                    table_segment(rs, f, r).1
                }
            }
        }
    }

    /// Draw `ν = N / E[N]`.
    pub fn sample(&self, rng: &mut PathRng) -> f64 {
        match self {
            HorizonModel::Fixed { .. } => 1.0,
            HorizonModel::Exponential { .. } => -ln(rng.next_uniform()),
            HorizonModel::Lomax { omega, .. } => (omega - 1.0) * (pow(rng.next_uniform(), -1.0 / omega) - 1.0),
            HorizonModel::Table { r, f } => {
                // Survival is −slope on each segment; invert it at a uniform level.
                let u = rng.next_uniform();
                let n = r.len();
                for k in 0..n - 1 {
                    let slope = (f[k + 1] - f[k]) / (r[k + 1] - r[k]);
                    if -slope <= u {
                        return r[k];
                    }
                }
                let last = (f[n - 1] - f[n - 2]) / (r[n - 1] - r[n - 2]);
                if -last <= u || f[n - 1] <= 0.0 {
                    r[n - 1]
                } else {
                    r[n - 1] + f[n - 1] / -last
                }
            }
        }
    }
}

fn validate_table(r: &[f64], f: &[f64]) -> Result<()> {
    let bad = |d: &str| Err(Error::invalid("horizon table", d));
    if r.len() < 2 || r.len() != f.len() {
        return bad("needs at least two (r, f) pairs of equal length");
    }
    if r.iter().chain(f).any(|v| !v.is_finite()) {
        return bad("values must be finite");
    }
    if r[0] != 0.0 || f[0] != 1.0 {
        return bad("must start at r = 0 with f = 1");
    }
    if r.windows(2).any(|w| !(w[1] > w[0])) {
        return bad("r must be strictly increasing");
    }
    if f.iter().any(|&v| v < 0.0) {
        return bad("f must be nonnegative");
    }
    let slopes: Vec<f64> = (0..r.len() - 1).map(|k| (f[k + 1] - f[k]) / (r[k + 1] - r[k])).collect();
    if slopes.iter().any(|&s| s > 0.0 || s < -1.0 - 1e-12) {
        return bad("slopes must lie in [-1, 0]");
    }
    if slopes.windows(2).any(|w| w[1] < w[0] - 1e-12 * abs(w[0]).max(1.0)) {
        return bad("f must be convex (nondecreasing slopes)");
    }
    Ok(())
}

// Segment index containing r (last segment past the end) and its slope.
fn table_segment(r: &[f64], f: &[f64], t: f64) -> (usize, f64) {
    let n = r.len();
    let k = r.partition_point(|&x| x <= t).saturating_sub(1).min(n - 2);
    let slope = (f[k + 1] - f[k]) / (r[k + 1] - r[k]);
    if t >= r[n - 1] {
        (n - 1, slope)
    } else {
        (k, slope)
    }
}
