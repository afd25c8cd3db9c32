// Thin aliases over libm so every build (std or not) evaluates the same bits.

pub(crate) use libm::{cos, cosh, erfc, exp, expm1, fabs as abs, log as ln, pow, sin, sinh, sqrt, tanh};

pub(crate) const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub(crate) fn max(a: f64, b: f64) -> f64 {
    libm::fmax(a, b)
}

pub(crate) fn min(a: f64, b: f64) -> f64 {
    libm::fmin(a, b)
}
