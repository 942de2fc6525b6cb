//! Numerical verification of Stirling-type limits.
//!
//! Every sequence studied here converges to a constant built from `e` and
//! `π`: the Stirling ratio, truncated means of standardized Poisson, Gamma and
//! binomial sums, Irwin–Hall truncated moments, the Wallis product and Laplace
//! approximations to Gamma-type integrals. Each quantity is evaluated through
//! exact big-integer arithmetic where it is rational, and through
//! configurable-precision floating point otherwise, then checked against an
//! independent brute-force route.
//!
//! The crate is organised bottom-up:
//!
//! - [`exact_arith`]: big integers, rationals, [`Real`] and [`LogReal`].
//! - [`classic_limits`]: Stirling ratio, de Moivre constant, Wallis product.
//! - [`clt_truncated`]: truncated means `L_n(c)` and the ratio limits.
//! - [`irwin_hall`]: exact density, CDF and truncated moments.
//! - [`laplace_bic`]: mode finding, Laplace approximation, quadrature, BIC.
//! - [`convergence`]: grids, error tables, rate fits, Aitken extrapolation.
//! - [`experiments`] and [`report`]: the experiment registry and serializers.
//! - [`cli`]: the `stirlab` command-line front end.

pub mod classic_limits;
pub mod cli;
pub mod clt_truncated;
pub mod convergence;
mod error;
pub mod exact_arith;
pub mod experiments;
pub mod irwin_hall;
pub mod laplace_bic;
pub mod report;

pub use error::{Error, Result};
pub use exact_arith::{BigInt, BigRational, Constants, LogReal, PrecisionContext, Real, Sign};
