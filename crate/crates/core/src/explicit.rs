//! Closed-form and one-dimensional-root thresholds for random horizons.
//!
//! With an exponential horizon and the worst case over `δ = ±δ₀` the boundary for the
//! sum is flat; `C = √(δ₀² + 2)` throughout. With a Lomax horizon whose scale equals the
//! prior sample size the standardized boundary is `ŵ* √(−s)`.

use alloc::format;

use crate::error::{Error, Result};
use crate::math::{abs, cosh, exp, ln, sinh, sqrt, tanh};
use crate::numerics::{find_root, kummer_m, RootBracket};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub threshold: f64,
    /// Defining equation evaluated at `threshold`.
    pub residual: f64,
    pub expected_stop_time: Option<f64>,
}

fn check_delta0(delta0: f64) -> Result<f64> {
    if !(delta0.is_finite() && delta0 > 0.0) {
        return Err(Error::domain("explicit threshold", format!("delta0 = {delta0} must be positive and finite")));
    }
    Ok(sqrt(delta0 * delta0 + 2.0))
}

/// `δ₀ cosh(δ₀x) cosh(Cx) − C sinh(δ₀x) sinh(Cx)`.
pub fn two_sided_equation(delta0: f64, x: f64) -> f64 {
    let c = sqrt(delta0 * delta0 + 2.0);
    delta0 * cosh(delta0 * x) * cosh(c * x) - c * sinh(delta0 * x) * sinh(c * x)
}

/// `(δ₀ cosh(δ₀x) − C sinh(δ₀x)) e^{Cx}`.
pub fn one_sided_equation(delta0: f64, x: f64) -> f64 {
    let c = sqrt(delta0 * delta0 + 2.0);
    (delta0 * cosh(delta0 * x) - c * sinh(delta0 * x)) * exp(c * x)
}

/// Two-sided threshold `x₁*` for `|S|`; the rule stops at expected time `x₁*²`.
pub fn maximin_exp_two_sided(delta0: f64) -> Result<ThresholdResult> {
    let c = check_delta0(delta0)?;
    // Same zero as the cosh/sinh form, divided by cosh·cosh to stay finite.
    let g = |x: f64| delta0 - c * tanh(delta0 * x) * tanh(c * x);
    let lo = 1e-6;
    let mut hi = 1.0 / delta0;
    let mut doublings = 0;
    while g(hi) > 0.0 {
        if doublings == 30 {
            return Err(Error::Bracket { lo, hi, f_lo: g(lo), f_hi: g(hi) });
        }
        hi *= 2.0;
        doublings += 1;
    }
    let x = find_root(g, &RootBracket::new(lo, hi, 1e-15 * hi, 200)?)?;
    Ok(ThresholdResult { threshold: x, residual: two_sided_equation(delta0, x), expected_stop_time: Some(x * x) })
}

/// `ln((C + δ₀)/(C − δ₀)) / (2δ₀)`.
pub fn one_sided_closed_form_ratio(delta0: f64) -> f64 {
    let c = sqrt(delta0 * delta0 + 2.0);
    // C − δ₀ = 2/(C + δ₀) avoids cancellation for large δ₀.
    ln((c + delta0) * (c + delta0) / 2.0) / (2.0 * delta0)
}

/// `ln(√(δ₀²/2 + 1) + δ₀/√2) / δ₀`.
pub fn one_sided_closed_form_sum(delta0: f64) -> f64 {
    ln(sqrt(delta0 * delta0 / 2.0 + 1.0) + delta0 / core::f64::consts::SQRT_2) / delta0
}

/// One-sided threshold `x₂*` for `S`.
pub fn maximin_exp_one_sided(delta0: f64) -> Result<ThresholdResult> {
    check_delta0(delta0)?;
    let x = one_sided_closed_form_sum(delta0);
    Ok(ThresholdResult { threshold: x, residual: one_sided_equation(delta0, x), expected_stop_time: None })
}

/// `2(r₀+1) M(r₀+2, 3/2, w²/2) / M(r₀+1, 1/2, w²/2) · w² − 1 − w²`.
pub fn lomax_equation(r0: f64, w: f64) -> Result<f64> {
    let z = 0.5 * w * w;
    let ratio = kummer_m(r0 + 2.0, 1.5, z)? / kummer_m(r0 + 1.0, 0.5, z)?;
    Ok(2.0 * (r0 + 1.0) * ratio * w * w - 1.0 - w * w)
}

/// `ŵ*(r₀)`, the stopping level of the discounted OU problem.
pub fn lomax_threshold(r0: f64) -> Result<ThresholdResult> {
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::domain("lomax threshold", format!("r0 = {r0} must be positive and finite")));
    }
    let f = |w: f64| lomax_equation(r0, w);
    // The equation is -1 at w = 0.
    let lo = 1e-6;
    let mut hi = 1.0;
    let mut f_hi = f(hi)?;
    let mut doublings = 0;
    while f_hi < 0.0 {
        if doublings == 30 {
            return Err(Error::Bracket { lo, hi, f_lo: f(lo)?, f_hi });
        }
        hi *= 2.0;
        f_hi = f(hi)?;
        doublings += 1;
    }
    // Kummer converged at `hi`, so it converges on the whole bracket.
    let w = find_root(|w| f(w).unwrap_or(f64::NAN), &RootBracket::new(lo, hi, 1e-15 * hi, 200)?)?;
    Ok(ThresholdResult { threshold: w, residual: f(w)?, expected_stop_time: None })
}

/// `E[e^{−(2r₀+1)τ} |X_τ|] = w e^{w²/2} / M(r₀+1, 1/2, w²/2)` for the rule `|X| ≥ w` in the
/// OU problem started at 0.
pub fn ou_threshold_value(r0: f64, w: f64) -> Result<f64> {
    if !(r0.is_finite() && r0 > 0.0 && w.is_finite() && w > 0.0) {
        return Err(Error::domain("ou threshold value", format!("r0 = {r0}, w = {w}")));
    }
    let z = 0.5 * w * w;
    Ok(w * exp(z) / kummer_m(r0 + 1.0, 0.5, z)?)
}

/// Standardized boundary `ŵ*(r₀) √(−s)`.
pub fn lomax_boundary(r0: f64, s: f64) -> Result<f64> {
    if !(s < 0.0) || !s.is_finite() {
        return Err(Error::domain("lomax boundary", format!("s = {s} must be negative and finite")));
    }
    Ok(lomax_threshold(r0)?.threshold * sqrt(abs(s)))
}
