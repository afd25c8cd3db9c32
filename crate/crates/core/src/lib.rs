//! Optimal stopping boundaries for Anscombe's sequential two-treatment model.
//!
//! The crate is `no_std` (with `alloc`) and carries no IO. It covers:
//!
//! - [`numerics`]: normal distribution functions, Kummer's `M`, bracketed root finding.
//! - [`priors`]: effect-size priors, the `h`-function and the clinical/standardized
//!   coordinate map.
//! - [`volterra`]: backward trapezoidal and fixed-point solvers for the symmetric
//!   boundary integral equation and its asymmetric (`q`) extension.
//! - [`normal_conjugate`]: the prior-free `c(s)` problem for conjugate normal priors and
//!   the maps to posterior-mean, sum and p-value boundaries, plus small-`r` asymptotics.
//! - [`horizon`]: random patient-horizon laws and their discount functions.
//! - [`explicit`]: closed-form thresholds for exponential and Lomax horizons.
//! - [`oracle`]: binomial-tree value iteration and Monte Carlo policy evaluation.
//!
//! All transcendental functions go through `libm`, so results are bit-identical across
//! hosts for a fixed input (and fixed seed, for the Monte Carlo paths).
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod backward;
mod error;
mod math;

pub mod explicit;
pub mod horizon;
pub mod normal_conjugate;
pub mod numerics;
pub mod oracle;
pub mod priors;
pub mod rng;
pub mod volterra;

pub use error::{Error, Result};
pub use horizon::HorizonModel;
pub use normal_conjugate::StandardBoundary;
pub use oracle::{McConfig, PolicyValueEstimate, StoppingRule};
pub use priors::{Decision, Prior, StandardizedScaling};
pub use volterra::{AsymmetricSpec, Boundary, GridShape, LowerBoundary, SolverConfig};
