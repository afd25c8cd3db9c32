// Backward trapezoidal engine shared by the h-function problem in (r, y) and the
// standardized normal problem in (s, W).
//
// At node i with starting point y on side +/- the equation is
//
//   R(t_i) P(y) = int_{t_i}^{t_0} m(u) [wU U(u, b+(u)) - wL L(u, b-(u))] du
//
// with payoff P = wU h+ + wL h-, U/L the one-sided tail expectations of h(u, X_u)
// started from (t_i, y), and R(t) = int_t^{t_0} m(u) du. Because h(X) is a martingale,
// U(z) + L(z) = h(t_i, y) for every u, so the h-proportional part of the right side is
// integrated exactly and cancels the left side:
//
//   upper:  0 =  int m(u) [wU L(u, b+(u)) + wL L(u, b-(u))] du
//   lower:  0 = -int m(u) [wU U(u, b+(u)) + wL U(u, b-(u))] du
//
// Only these localized remainders go through the trapezoid rule, with the diagonal
// limit (own weight) * h(t_i, y) / 2 at u = t_i. The grid decreases from t_0.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, exp, max};
use crate::numerics::{expand_bracket_right, find_root, RootBracket};

pub(crate) trait StepKernel {
    type Point;

    fn new_point(&self) -> Self::Point;
    fn set_point(&self, p: &mut Self::Point, t: f64, y: f64);
    /// Values returned by `h` and the tails are scaled by `exp(-log_scale)`.
    fn log_scale(&self, p: &Self::Point) -> f64;
    fn h(&self, p: &Self::Point) -> f64;
    /// `E[h(u, X_u) 1(X_u >= z)]` from the current point.
    fn upper_tail(&self, p: &Self::Point, u: f64, z: f64) -> f64;
    /// `E[h(u, X_u) 1(X_u <= z)]` from the current point.
    fn lower_tail(&self, p: &Self::Point, u: f64, z: f64) -> f64;
    /// `R(t)`, the integral of `weight` from `t` to the terminal time.
    fn reward_factor(&self, t: f64) -> f64;
    fn weight(&self, u: f64) -> f64;
    /// Width added above the previous boundary value for the initial root bracket.
    fn bracket_width(&self, t: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TailWeights {
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Lower<'a> {
    Mirror,
    Curve(&'a [f64]),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Upper,
    Lower,
}

pub(crate) struct Engine<'a, K: StepKernel> {
    pub kernel: &'a K,
    pub grid: &'a [f64],
    pub weights: TailWeights,
}

impl<K: StepKernel> Engine<'_, K> {
    /// Scaled defect at node `i` from `y` (increasing away from zero on each side),
    /// together with the log scale.
    fn equation(&self, p: &mut K::Point, i: usize, y: f64, side: Side, upper: &[f64], lower: Lower) -> (f64, f64) {
        let k = self.kernel;
        let g = self.grid;
        let w = self.weights;
        let t = g[i];
        k.set_point(p, t, y);
        let own = match side {
            Side::Upper => w.upper,
            Side::Lower => w.lower,
        };
        let tail = |u: f64, z: f64| match side {
            Side::Upper => k.lower_tail(p, u, z),
            Side::Lower => k.upper_tail(p, u, z),
        };
        let mut prev = 0.5 * own * k.h(p) * k.weight(t);
        let mut acc = 0.0;
        for j in (0..i).rev() {
            let u = g[j];
            let mut v = w.upper * tail(u, upper[j]);
            match lower {
                Lower::Mirror => v += w.lower * tail(u, -upper[j]),
                Lower::Curve(l) => v += w.lower * tail(u, l[j]),
                Lower::Unbounded => {}
            }
            let cur = k.weight(u) * v;
            acc += 0.5 * (g[j] - g[j + 1]) * (cur + prev);
            prev = cur;
        }
        let f = match side {
            Side::Upper => acc,
            Side::Lower => -acc,
        };
        (f, k.log_scale(p))
    }

    fn solve_node(&self, p: &mut K::Point, i: usize, side: Side, upper: &[f64], lower: Lower, prev: f64, tol: f64) -> Result<f64> {
        let sign = match side {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        };
        let mut f = |x: f64| self.equation(p, i, sign * x, side, upper, lower).0;
        let hi = abs(prev) + self.kernel.bracket_width(self.grid[i]);
        let step_err = |e: Error| Error::SolverStep { step: i, time: self.grid[i], source: alloc::boxed::Box::new(e) };
        let (lo, hi) = expand_bracket_right(&mut f, 0.0, hi, 40).map_err(step_err)?;
        let x = find_root(&mut f, &RootBracket { lo, hi, tol, max_iter: 400 }).map_err(step_err)?;
        Ok(sign * x)
    }

    /// Sequential backward solve. `lower` selects the mode; a `Curve` argument is ignored
    /// apart from its variant and the lower curve is solved alongside the upper one.
    pub fn solve(&self, lower: Lower, tol: f64) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        let n = self.grid.len();
        let mut up = vec![0.0; n];
        let mut lo = match lower {
            Lower::Curve(_) => Some(vec![0.0; n]),
            _ => None,
        };
        let mut p = self.kernel.new_point();
        for i in 1..n {
            let mode = match (&lo, lower) {
                (Some(l), _) => Lower::Curve(&l[..i]),
                (None, other) => other,
            };
            let b = self.solve_node(&mut p, i, Side::Upper, &up[..i], mode, up[i - 1], tol)?;
            let c = match &lo {
                Some(l) => Some(self.solve_node(&mut p, i, Side::Lower, &up[..i], mode, l[i - 1], tol)?),
                None => None,
            };
            up[i] = b;
            if let (Some(l), Some(c)) = (lo.as_mut(), c) {
                l[i] = c;
            }
        }
        Ok((up, lo))
    }

    /// Largest absolute unscaled defect over nodes `1..n`, both sides where present.
    pub fn residual(&self, upper: &[f64], lower: Lower) -> f64 {
        let mut p = self.kernel.new_point();
        let mut worst: f64 = 0.0;
        for i in 1..self.grid.len() {
            let (f, s) = self.equation(&mut p, i, upper[i], Side::Upper, upper, lower);
            worst = max(worst, abs(f * exp(s)));
            if let Lower::Curve(l) = lower {
                let (f, s) = self.equation(&mut p, i, l[i], Side::Lower, upper, lower);
                worst = max(worst, abs(f * exp(s)));
            }
        }
        worst
    }

    /// One Jacobi sweep of `b -> b - ω F(b)`, with `ω` divided by the reward factor when
    /// `per_reward` is set; returns the sup-change.
    pub fn apply_q(&self, upper: &[f64], lower: Option<&[f64]>, mode: Lower, omega: f64, per_reward: bool) -> (Vec<f64>, Option<Vec<f64>>, f64) {
        let mut p = self.kernel.new_point();
        let n = self.grid.len();
        let mode = match (mode, lower) {
            (Lower::Curve(_), Some(l)) => Lower::Curve(l),
            (m, _) => m,
        };
        let mut new_up = vec![0.0; n];
        let mut new_lo = lower.map(|_| vec![0.0; n]);
        let mut change: f64 = 0.0;
        for i in 1..n {
            let step = if per_reward { omega / self.kernel.reward_factor(self.grid[i]) } else { omega };
            let (f, s) = self.equation(&mut p, i, upper[i], Side::Upper, upper, mode);
            new_up[i] = upper[i] - step * f * exp(s);
            change = max(change, abs(new_up[i] - upper[i]));
            if let (Some(l), Some(nl)) = (lower, new_lo.as_mut()) {
                let (f, s) = self.equation(&mut p, i, l[i], Side::Lower, upper, mode);
                nl[i] = l[i] + step * f * exp(s);
                change = max(change, abs(nl[i] - l[i]));
            }
        }
        (new_up, new_lo, change)
    }
}
