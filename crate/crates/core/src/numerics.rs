//! Special functions and bracketed root finding.

use alloc::format;

use crate::error::{Error, Result};
use crate::math::{abs, erfc, exp, ln, min, sqrt, FRAC_1_SQRT_2PI};

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Iteration cap for the Kummer power series.
pub const KUMMER_MAX_TERMS: usize = 10_000;

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp(-0.5 * x * x)
}

/// Standard normal distribution function, `Φ(x) = erfc(-x/√2) / 2`.
///
/// The erfc form keeps full relative accuracy in the lower tail, which matters
/// for kernels that subtract two tail probabilities.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)`, accurate for large positive `x`.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Inverse of [`std_normal_cdf`] (Wichura's AS 241, PPND16).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("std_normal_quantile", format!("p = {p} not in (0, 1)")));
    }
    let q = p - 0.5;
    if abs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return Ok(q * num / den);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = sqrt(-ln(tail));
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_445_9e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    Ok(if q < 0.0 { -val } else { val })
}

/// Kummer's confluent hypergeometric function `M(a, b, z)` by its power series.
///
/// Restricted to `a, b > 0` and `z >= 0`, where all terms are positive.
pub fn kummer_m(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && z >= 0.0) || !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::domain("kummer_m", format!("a = {a}, b = {b}, z = {z}")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..KUMMER_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        sum += term;
        if !sum.is_finite() {
            return Err(Error::NonFinite { op: "kummer_m", at: z });
        }
        if term <= 1e-16 * sum {
            return Ok(sum);
        }
    }
    Err(Error::Convergence { op: "kummer_m", iterations: KUMMER_MAX_TERMS })
}

/// Bracket and stopping rule for [`find_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    /// Absolute tolerance on the final bracket width.
    pub tol: f64,
    pub max_iter: usize,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("bracket", format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if !(tol > 0.0) || max_iter == 0 {
            return Err(Error::invalid("bracket", format!("tol = {tol}, max_iter = {max_iter}")));
        }
        Ok(Self { lo, hi, tol, max_iter })
    }
}

/// Bracketed root finder (Brent's method: inverse quadratic interpolation and secant
/// steps, falling back to bisection).
///
/// Terminates when the bracket around the root is no wider than `tol` (plus a few
/// ulps) or on an exact zero. Deterministic for a deterministic `f`.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, bracket: &RootBracket) -> Result<f64> {
    let RootBracket { lo, hi, tol, max_iter } = *bracket;
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() {
        return Err(Error::NonFinite { op: "find_root", at: a });
    }
    if fb.is_nan() {
        return Err(Error::NonFinite { op: "find_root", at: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if (fa < 0.0) == (fb < 0.0) {
        return Err(Error::Bracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if abs(fc) < abs(fb) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * abs(b) + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if abs(xm) <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if abs(e) >= tol1 && abs(fa) > abs(fb) {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = abs(p);
            let bound = min(3.0 * xm * q - abs(tol1 * q), abs(e * q));
            if 2.0 * p < bound {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if abs(d) > tol1 { d } else if xm > 0.0 { tol1 } else { -tol1 };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::NonFinite { op: "find_root", at: b });
        }
    }
    Err(Error::Convergence { op: "find_root", iterations: max_iter })
}

/// Doubles `hi` (keeping `lo`) until `f` changes sign, at most `max_doublings` times.
pub fn expand_bracket_right<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    mut hi: f64,
    max_doublings: u32,
) -> Result<(f64, f64)> {
    let f_lo = f(lo);
    let mut f_hi = f(hi);
    for _ in 0..max_doublings {
        if f_hi.is_nan() {
            return Err(Error::NonFinite { op: "expand_bracket_right", at: hi });
        }
        if (f_lo < 0.0) != (f_hi < 0.0) || f_hi == 0.0 {
            return Ok((lo, hi));
        }
        hi *= 2.0;
        f_hi = f(hi);
    }
    if (f_lo < 0.0) != (f_hi < 0.0) || f_hi == 0.0 {
        return Ok((lo, hi));
    }
    Err(Error::Bracket { lo, hi, f_lo, f_hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Composite Simpson integration of the density, independent of erfc.
    fn simpson_tail_above(a: f64) -> f64 {
        let n = 200_000;
        let b = a + 40.0;
        let h = (b - a) / n as f64;
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = pdf(a) + pdf(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(x);
        }
        s * h / 3.0
    }

    #[test]
    fn pdf_values() {
        assert!((std_normal_pdf(0.0) - 0.398_942_280_4).abs() < 1e-10);
        let expected = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((std_normal_pdf(1.0) - expected).abs() < 1e-16);
        assert!((std_normal_pdf(1.0) - 0.241_970_724_5).abs() < 1e-10);
        assert_eq!(std_normal_pdf(2.5), std_normal_pdf(-2.5));
    }

    #[test]
    fn cdf_basic_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        let oracle = 1.0 - simpson_tail_above(1.959964);
        assert!((oracle - 0.975).abs() < 1e-8);
        assert!((std_normal_cdf(1.959964) - oracle).abs() < 1e-13);
    }

    #[test]
    fn cdf_relative_accuracy_against_quadrature() {
        for &x in &[-8.0, -6.5, -4.0, -2.2, -1.0, -0.3, 0.7, 3.0, 8.0] {
            let oracle = if x < 0.0 { simpson_tail_above(-x) } else { 1.0 - simpson_tail_above(x) };
            let got = std_normal_cdf(x);
            assert!(((got - oracle) / oracle).abs() < 1e-12, "x = {x}: {got} vs {oracle}");
        }
    }

    #[test]
    fn quantile_values_and_errors() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        let x = std_normal_quantile(0.99).unwrap();
        // Bisection against the cdf as an independent route.
        let bis = find_root(|t| std_normal_cdf(t) - 0.99, &RootBracket::new(0.0, 5.0, 1e-14, 200).unwrap())
            .unwrap();
        assert!((x - bis).abs() < 1e-12);
        assert!((x - 2.326_347_874_040_841).abs() < 1e-12);
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(std_normal_quantile(p), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn quantile_satisfies_cdf_in_far_tails() {
        for &p in &[1e-300, 1e-100, 1e-20, 1e-10, 1e-5, 0.02425, 0.3, 0.97575, 1.0 - 1e-10] {
            let x = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(x) - p).abs() <= 1e-10, "p = {p}");
            if p < 0.5 {
                assert!(((std_normal_cdf(x) - p) / p).abs() < 1e-12, "p = {p}");
            }
        }
    }

    #[test]
    fn kummer_identities() {
        assert_eq!(kummer_m(2.0, 3.0, 0.0).unwrap(), 1.0);
        assert!((kummer_m(1.0, 1.0, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-14);
        assert!((kummer_m(1.0, 1.0, 7.5).unwrap() - 7.5f64.exp()).abs() < 1e-10 * 7.5f64.exp());
        // High-precision reference value, plus Kummer's transformation
        // M(a,b,z) = e^z M(b-a,b,-z) summed here as an alternating series.
        let got = kummer_m(2.0, 1.5, 0.5).unwrap();
        assert!((got - 1.910_686_134_642_448).abs() < 1e-14);
        let (a, b, z) = (-0.5f64, 1.5f64, -0.5f64);
        let (mut term, mut sum) = (1.0f64, 1.0f64);
        for k in 0..200 {
            let k = k as f64;
            term *= (a + k) / (b + k) * z / (k + 1.0);
            sum += term;
        }
        assert!((got - 0.5f64.exp() * sum).abs() < 1e-14);
    }

    #[test]
    fn kummer_domain_and_convergence_errors() {
        assert!(matches!(kummer_m(-1.0, 1.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(kummer_m(1.0, 0.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(kummer_m(1.0, 1.0, -0.1), Err(Error::Domain { .. })));
        assert!(kummer_m(1.0, 1.0, 800.0).is_err());
    }

    #[test]
    fn kummer_derivative_matches_contiguous_relation() {
        // d/dz M(a,b,z) = (a/b) M(a+1,b+1,z) at 20 pseudo-random points.
        let mut state = 0x2545_f491_4f6c_dd1d_u64;
        let mut uniform = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let a = 0.1 + 5.0 * uniform();
            let b = 0.2 + 3.0 * uniform();
            let z = 0.1 + 10.0 * uniform();
            let h = 1e-5 * z.max(1.0);
            let fd = (kummer_m(a, b, z + h).unwrap() - kummer_m(a, b, z - h).unwrap()) / (2.0 * h);
            let exact = a / b * kummer_m(a + 1.0, b + 1.0, z).unwrap();
            assert!(((fd - exact) / exact).abs() < 1e-6, "a={a} b={b} z={z}");
        }
    }

    #[test]
    fn root_finder_examples() {
        let br = RootBracket::new(1.0, 2.0, 1e-12, 200).unwrap();
        let r = find_root(|x| x * x - 2.0, &br).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-11);
        let r = find_root(|x| x, &RootBracket::new(-1.0, 1.0, 1e-12, 200).unwrap()).unwrap();
        assert!(r.abs() < 1e-12);
        let br = RootBracket::new(0.0, 5.0, 1e-12, 200).unwrap();
        let r = find_root(|x| std_normal_cdf(x) - 0.99, &br).unwrap();
        assert!((r - std_normal_quantile(0.99).unwrap()).abs() < 1e-11);
    }

    #[test]
    fn root_finder_errors() {
        let br = RootBracket::new(-1.0, 1.0, 1e-12, 100).unwrap();
        assert!(matches!(find_root(|x| x * x + 1.0, &br), Err(Error::Bracket { .. })));
        let br = RootBracket::new(0.0, 1e6, 1e-14, 3).unwrap();
        assert!(matches!(find_root(|x| (x - 0.123).powi(3), &br), Err(Error::Convergence { .. })));
        assert!(RootBracket::new(1.0, 1.0, 1e-3, 10).is_err());
        assert!(RootBracket::new(0.0, 1.0, 0.0, 10).is_err());
    }

    #[test]
    fn root_finder_is_fast_on_steep_functions() {
        let mut calls = 0;
        let br = RootBracket::new(0.0, 50.0, 1e-13, 400).unwrap();
        let r = find_root(
            |x| {
                calls += 1;
                x.exp() - 1e10
            },
            &br,
        )
        .unwrap();
        assert!((r - 1e10f64.ln()).abs() < 1e-12);
        assert!(calls < 120, "calls = {calls}");
    }

    #[test]
    fn expand_bracket_finds_sign_change() {
        let (lo, hi) = expand_bracket_right(|x| x - 1000.0, 0.0, 1.0, 30).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi >= 1000.0 && hi <= 2048.0);
        assert!(expand_bracket_right(|_| 1.0, 0.0, 1.0, 5).is_err());
    }

    proptest! {
        #[test]
        fn cdf_reflection(x in -8.0f64..8.0) {
            prop_assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() <= 1e-14);
        }

        #[test]
        fn cdf_monotone(x in -8.0f64..8.0, dx in 1e-3f64..1.0) {
            prop_assert!(std_normal_cdf(x + dx) > std_normal_cdf(x));
        }

        #[test]
        fn quantile_round_trip(x in -5.0f64..5.0) {
            let p = std_normal_cdf(x);
            prop_assert!((std_normal_quantile(p).unwrap() - x).abs() <= 1e-9);
        }
    }
}
