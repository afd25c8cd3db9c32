//! Effect-size priors, the `h`-function and the clinical/standardized coordinate map.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, exp, sinh, sqrt};
use crate::rng::PathRng;

/// Prior on the standardized effect `δ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    /// `N(m0, 1/r0)`; `r0 = 0` is the improper flat limit.
    NormalConjugate { m0: f64, r0: f64 },
    /// Mass 1/2 at each of `±delta0`.
    SymmetricTwoPoint { delta0: f64 },
    /// Finitely many atoms `points[i]` with probabilities `weights[i]`.
    DiscreteMixture { points: Vec<f64>, weights: Vec<f64> },
}

/// Terminal decision: `Plus` selects the treatment favoured by `δ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Plus,
    Minus,
}

impl Decision {
    /// Sign convention with `sgn(0) = +1`.
    pub fn from_sign(x: f64) -> Self {
        if x >= 0.0 {
            Decision::Plus
        } else {
            Decision::Minus
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Decision::Plus => 1.0,
            Decision::Minus => -1.0,
        }
    }
}

impl Prior {
    pub fn normal(m0: f64, r0: f64) -> Result<Self> {
        let p = Prior::NormalConjugate { m0, r0 };
        p.validate()?;
        Ok(p)
    }

    pub fn two_point(delta0: f64) -> Result<Self> {
        let p = Prior::SymmetricTwoPoint { delta0 };
        p.validate()?;
        Ok(p)
    }

    pub fn mixture(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let p = Prior::DiscreteMixture { points, weights };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Prior::NormalConjugate { m0, r0 } => {
                if !m0.is_finite() || !(r0.is_finite() && *r0 >= 0.0) {
                    return Err(Error::invalid("prior", format!("normal needs finite m0 and r0 >= 0, got m0 = {m0}, r0 = {r0}")));
                }
            }
            Prior::SymmetricTwoPoint { delta0 } => {
                if !(delta0.is_finite() && *delta0 > 0.0) {
                    return Err(Error::invalid("prior", format!("two-point needs delta0 > 0, got {delta0}")));
                }
            }
            Prior::DiscreteMixture { points, weights } => {
                if points.is_empty() || points.len() != weights.len() {
                    return Err(Error::invalid(
                        "prior",
                        format!("mixture needs equal nonzero lengths, got {} points and {} weights", points.len(), weights.len()),
                    ));
                }
                if points.iter().any(|p| !p.is_finite()) {
                    return Err(Error::invalid("prior", "mixture points must be finite"));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::invalid("prior", "mixture weights must be positive"));
                }
                let total: f64 = weights.iter().sum();
                if abs(total - 1.0) > 1e-12 {
                    return Err(Error::invalid("prior", format!("mixture weights sum to {total}, not 1")));
                }
            }
        }
        Ok(())
    }

    /// `(δ, weight)` atoms for the discrete families; `None` for the normal prior.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Prior::NormalConjugate { .. } => None,
            Prior::SymmetricTwoPoint { delta0 } => Some(alloc::vec![(*delta0, 0.5), (-*delta0, 0.5)]),
            Prior::DiscreteMixture { points, weights } => {
                Some(points.iter().copied().zip(weights.iter().copied()).collect())
            }
        }
    }

    /// True when the prior is invariant under `δ -> -δ`.
    ///
    /// Mixture atoms must pair up exactly (to 1e-12) after sorting.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Prior::NormalConjugate { m0, .. } => *m0 == 0.0,
            Prior::SymmetricTwoPoint { .. } => true,
            Prior::DiscreteMixture { points, weights } => {
                let mut atoms: Vec<(f64, f64)> = points.iter().copied().zip(weights.iter().copied()).collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                let n = atoms.len();
                (0..n).all(|i| {
                    let (p, w) = atoms[i];
                    let (pm, wm) = atoms[n - 1 - i];
                    abs(p + pm) <= 1e-12 * (1.0 + abs(p)) && abs(w - wm) <= 1e-12
                })
            }
        }
    }

    /// Prior mean of `δ` (`m0` for the normal family, including the improper limit).
    pub fn mean(&self) -> f64 {
        match self {
            Prior::NormalConjugate { m0, .. } => *m0,
            Prior::SymmetricTwoPoint { .. } => 0.0,
            Prior::DiscreteMixture { points, weights } => points.iter().zip(weights).map(|(p, w)| p * w).sum(),
        }
    }

    /// The `h`-function at standardized time `r` and sum `y`.
    ///
    /// Discrete families: `Σ w δ exp(δy − δ²r/2)`. Normal family: `m_r(y)·β(r, y)`, which is
    /// the exact mixture integral divided by the positive constant `√r0·exp(−r0 m0²/2)`.
    /// Only the sign and ratios of `h` matter to boundaries and decisions, so the
    /// constant is dropped; [`Prior::h_exact`] keeps it.
    pub fn h_xi(&self, r: f64, y: f64) -> Result<f64> {
        match self {
            Prior::NormalConjugate { m0, r0 } => {
                let prec = r0 + r;
                if prec <= 0.0 {
                    return Err(Error::Singular { detail: format!("normal prior with r0 = {r0} at r = {r}") });
                }
                let m = (m0 * r0 + y) / prec;
                Ok(m * exp(0.5 * m * m * prec) / sqrt(prec))
            }
            Prior::SymmetricTwoPoint { delta0 } => {
                let d = *delta0;
                Ok(d * sinh(d * y) * exp(-0.5 * d * d * r))
            }
            Prior::DiscreteMixture { points, weights } => {
                Ok(points.iter().zip(weights).map(|(d, w)| w * d * exp(d * y - 0.5 * d * d * r)).sum())
            }
        }
    }

    /// `E_ν[δ exp(δy − δ²r/2)]` with the prior's normalization kept.
    ///
    /// Agrees with [`Prior::h_xi`] for the discrete families. The improper normal prior
    /// has no normalized form and yields a singular-input error.
    pub fn h_exact(&self, r: f64, y: f64) -> Result<f64> {
        match self {
            Prior::NormalConjugate { m0, r0 } => {
                if *r0 <= 0.0 {
                    return Err(Error::Singular { detail: "improper normal prior has no normalized h".into() });
                }
                Ok(sqrt(*r0) * exp(-0.5 * r0 * m0 * m0) * self.h_xi(r, y)?)
            }
            _ => self.h_xi(r, y),
        }
    }

    /// Optimal terminal decision `sgn(h)` with `sgn(0) = +1`.
    pub fn optimal_decision(&self, r: f64, y: f64) -> Result<Decision> {
        Ok(Decision::from_sign(self.h_xi(r, y)?))
    }

    /// Draw `δ` from the prior.
    pub fn sample(&self, rng: &mut PathRng) -> Result<f64> {
        match self {
            Prior::NormalConjugate { m0, r0 } => {
                if *r0 <= 0.0 {
                    return Err(Error::Singular { detail: "cannot sample the improper normal prior".into() });
                }
                Ok(m0 + rng.next_normal() / sqrt(*r0))
            }
            Prior::SymmetricTwoPoint { delta0 } => {
                Ok(if rng.next_uniform() < 0.5 { *delta0 } else { -*delta0 })
            }
            Prior::DiscreteMixture { points, weights } => {
                let u = rng.next_uniform();
                let mut acc = 0.0;
                for (p, w) in points.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        return Ok(*p);
                    }
                }
                Ok(points[points.len() - 1])
            }
        }
    }
}

/// Clinical units (effect `μ`, patients `t`, response sum `x`) to standardized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardizedScaling {
    /// Response standard deviation.
    pub sigma: f64,
    /// Expected patient horizon `E[N]` (equal to `N` when fixed).
    pub horizon_mean: f64,
}

impl StandardizedScaling {
    pub fn new(sigma: f64, horizon_mean: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0 && horizon_mean.is_finite() && horizon_mean > 0.0) {
            return Err(Error::invalid("scaling", format!("sigma = {sigma}, horizon_mean = {horizon_mean}")));
        }
        Ok(Self { sigma, horizon_mean })
    }

    /// `(δ, r, y) = (μ√N/σ, t/N, x/(σ√N))`.
    pub fn to_standardized(&self, mu: f64, t: f64, x: f64) -> (f64, f64, f64) {
        let root_n = sqrt(self.horizon_mean);
        (mu * root_n / self.sigma, t / self.horizon_mean, x / (self.sigma * root_n))
    }

    /// Inverse of [`StandardizedScaling::to_standardized`].
    pub fn from_standardized(&self, delta: f64, r: f64, y: f64) -> (f64, f64, f64) {
        let root_n = sqrt(self.horizon_mean);
        (delta * self.sigma / root_n, r * self.horizon_mean, y * self.sigma * root_n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_point_h_values() {
        let p = Prior::two_point(1.0).unwrap();
        assert_eq!(p.h_xi(0.0, 0.0).unwrap(), 0.0);
        // sinh(1) by its Taylor series.
        let mut term = 1.0f64;
        let mut series = 1.0f64;
        for k in 1..20 {
            term /= ((2 * k) * (2 * k + 1)) as f64;
            series += term;
        }
        assert!((p.h_xi(0.0, 1.0).unwrap() - series).abs() < 1e-15);
        assert!((series - 1.175_201_193_643_801_5).abs() < 1e-15);
    }

    #[test]
    fn normal_h_values() {
        let p = Prior::normal(0.0, 1.0).unwrap();
        for r in [0.0, 0.3, 1.0] {
            assert_eq!(p.h_xi(r, 0.0).unwrap(), 0.0);
        }
        let flat = Prior::normal(0.0, 0.0).unwrap();
        assert!(matches!(flat.h_xi(0.0, 1.0), Err(Error::Singular { .. })));
        assert!(flat.h_xi(0.5, 1.0).is_ok());
        assert!(matches!(flat.h_exact(0.5, 1.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn normal_h_exact_matches_quadrature() {
        let (m0, r0, r, y) = (0.4, 2.0, 0.3, -0.7);
        let p = Prior::normal(m0, r0).unwrap();
        // Midpoint rule over ±12 prior standard deviations.
        let sd = 1.0 / r0.sqrt();
        let n = 200_000;
        let (lo, hi) = (m0 - 12.0 * sd, m0 + 12.0 * sd);
        let dx = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let d = lo + (i as f64 + 0.5) * dx;
            let dens = (r0 / (2.0 * std::f64::consts::PI)).sqrt() * (-0.5 * r0 * (d - m0).powi(2)).exp();
            acc += dens * d * (d * y - 0.5 * d * d * r).exp() * dx;
        }
        let got = p.h_exact(r, y).unwrap();
        assert!((got - acc).abs() < 1e-10 * acc.abs().max(1.0), "{got} vs {acc}");
    }

    #[test]
    fn decisions() {
        let p = Prior::two_point(1.0).unwrap();
        assert_eq!(p.optimal_decision(0.3, 0.2).unwrap(), Decision::Plus);
        assert_eq!(p.optimal_decision(0.3, -0.2).unwrap(), Decision::Minus);
        assert_eq!(p.optimal_decision(0.3, 0.0).unwrap(), Decision::Plus);
        let n = Prior::normal(-3.0, 1.0).unwrap();
        assert_eq!(n.optimal_decision(0.0, 0.0).unwrap(), Decision::Minus);
    }

    #[test]
    fn validation() {
        assert!(Prior::two_point(0.0).is_err());
        assert!(Prior::normal(0.0, -1.0).is_err());
        assert!(Prior::mixture(vec![1.0, -1.0], vec![0.5, 0.4]).is_err());
        assert!(Prior::mixture(vec![1.0], vec![0.5, 0.5]).is_err());
        assert!(Prior::mixture(vec![1.0, -1.0], vec![1.0, 0.0]).is_err());
        assert!(Prior::mixture(vec![1.0, -1.0], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn symmetry_detection() {
        assert!(Prior::two_point(2.0).unwrap().is_symmetric());
        assert!(Prior::normal(0.0, 1.0).unwrap().is_symmetric());
        assert!(!Prior::normal(0.1, 1.0).unwrap().is_symmetric());
        assert!(Prior::mixture(vec![0.5, -2.0, 2.0, -0.5], vec![0.3, 0.2, 0.2, 0.3]).unwrap().is_symmetric());
        assert!(!Prior::mixture(vec![0.5, -2.0, 2.0, -0.5], vec![0.4, 0.2, 0.2, 0.2]).unwrap().is_symmetric());
        assert!(Prior::mixture(vec![0.0, 1.0, -1.0], vec![0.5, 0.25, 0.25]).unwrap().is_symmetric());
    }

    #[test]
    fn scaling_examples() {
        let id = StandardizedScaling::new(1.0, 1.0).unwrap();
        assert_eq!(id.to_standardized(0.3, 0.4, -1.2), (0.3, 0.4, -1.2));
        let s = StandardizedScaling::new(2.0, 100.0).unwrap();
        let (d, r, y) = s.to_standardized(0.2, 50.0, 10.0);
        assert!((d - 1.0).abs() < 1e-15 && (r - 0.5).abs() < 1e-15 && (y - 0.5).abs() < 1e-15);
        assert!(StandardizedScaling::new(0.0, 1.0).is_err());
    }

    #[test]
    fn sampling_matches_prior_mean() {
        let p = Prior::mixture(vec![-1.0, 0.5, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        let mut acc = 0.0;
        let n = 100_000;
        for i in 0..n {
            acc += p.sample(&mut PathRng::new(9, i)).unwrap();
        }
        let mean = acc / n as f64;
        assert!((mean - p.mean()).abs() < 0.03);
    }

    fn mixture_strategy() -> impl Strategy<Value = Prior> {
        prop::collection::vec((-3.0f64..3.0, 0.1f64..1.0), 1..5).prop_map(|atoms| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let points = atoms.iter().map(|a| a.0).collect();
            let mut weights: Vec<f64> = atoms.iter().map(|a| a.1 / total).collect();
            let rest: f64 = weights[1..].iter().sum();
            weights[0] = 1.0 - rest;
            Prior::mixture(points, weights).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn h_is_space_time_harmonic(p in mixture_strategy(), r in 0.05f64..2.0, y in -2.0f64..2.0) {
            let e = 1e-3;
            let h = |r: f64, y: f64| p.h_xi(r, y).unwrap();
            let dr = (h(r + e, y) - h(r - e, y)) / (2.0 * e);
            let dyy = (h(r, y + e) - 2.0 * h(r, y) + h(r, y - e)) / (e * e);
            let scale = p.atoms().unwrap().iter()
                .map(|(d, w)| w * d.abs() * (d * y - 0.5 * d * d * r).exp() * (1.0 + d * d))
                .sum::<f64>();
            prop_assert!((dr + 0.5 * dyy).abs() <= 1e-5 * scale);
        }

        #[test]
        fn symmetric_h_is_odd(d in 0.1f64..3.0, r in 0.0f64..2.0, y in -4.0f64..4.0) {
            let p = Prior::two_point(d).unwrap();
            prop_assert_eq!(p.h_xi(r, -y).unwrap(), -p.h_xi(r, y).unwrap());
            let n = Prior::normal(0.0, d).unwrap();
            prop_assert_eq!(n.h_xi(r, -y).unwrap(), -n.h_xi(r, y).unwrap());
            let m = Prior::mixture(vec![-d, -0.5, 0.5, d], vec![0.1, 0.4, 0.4, 0.1]).unwrap();
            let (a, b) = (m.h_xi(r, -y).unwrap(), m.h_xi(r, y).unwrap());
            prop_assert!((a + b).abs() <= 1e-14 * b.abs().max(1e-300));
        }

        #[test]
        fn scaling_round_trip(sigma in 0.1f64..10.0, n in 1.0f64..1e4, mu in -2.0f64..2.0,
                              t in 0.0f64..1e4, x in -100.0f64..100.0) {
            let s = StandardizedScaling::new(sigma, n).unwrap();
            let (d, r, y) = s.to_standardized(mu, t, x);
            let (mu2, t2, x2) = s.from_standardized(d, r, y);
            prop_assert!((mu2 - mu).abs() <= 1e-14 * mu.abs().max(1.0));
            prop_assert!((t2 - t).abs() <= 1e-14 * t.abs().max(1.0));
            prop_assert!((x2 - x).abs() <= 1e-14 * x.abs().max(1.0));
        }
    }
}
