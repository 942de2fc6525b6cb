//! The Stirling ratio, de Moivre's middle-binomial constant, the Wallis
//! partial product, the trapezoid residual of `ln n!`, and the scaled density
//! of the uniform-sample median.

use crate::exact_arith::{binomial, log_factorial, BigInt, BigRational, PrecisionContext, Real};
use crate::{Error, Result};

/// One term of a classic sequence, with its exact rational value when the
/// quantity is rational.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicSequencePoint {
    pub n: u64,
    pub exact: Option<BigRational>,
    pub value: Real,
    pub target: Real,
}

impl ClassicSequencePoint {
    /// `|value - Real(exact)| ≤ 2^(4-bits)·|value|` whenever `exact` is present.
    pub fn is_consistent(&self, ctx: &PrecisionContext) -> bool {
        match &self.exact {
            None => true,
            Some(q) => {
                let diff = (&self.value - Real::from_rational(q, ctx)).abs();
                diff <= self.value.abs() * ctx.rel_bound(4)
            }
        }
    }
}

/// Product of many small factors by pairwise multiplication.
fn tree_product(mut factors: Vec<BigInt>) -> BigInt {
    if factors.is_empty() {
        return BigInt::from(1);
    }
    while factors.len() > 1 {
        factors = factors
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => BigInt::from(a * b),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    factors.pop().unwrap()
}

/// `r_n = n! / (n^(n+1/2) e^(-n))`, which decreases to `√(2π)`.
pub fn stirling_ratio(n: u64, ctx: &PrecisionContext) -> Result<Real> {
    if n == 0 {
        return Err(Error::domain("stirling_ratio needs n ≥ 1"));
    }
    let w = ctx.working();
    let nn = Real::from_u64(n, &w);
    let log_ratio = log_factorial(n, &w) - (&nn + Real::from_f64(0.5, &w)) * nn.ln() + &nn;
    Ok(log_ratio.exp().round_to(ctx))
}

/// Exact `P(Y_2n = n) = C(2n, n) 2^(-2n)` for a binomial(2n, 1/2).
pub fn middle_binomial_prob(n: u64) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::domain("middle_binomial_prob needs n ≥ 1"));
    }
    Ok(central_binomial_prob(n))
}

fn central_binomial_prob(n: u64) -> BigRational {
    let num = binomial(2 * n, n as i64);
    let den = BigInt::from(1) << (2 * n) as u32;
    BigRational::from((num, den))
}

/// `c_n = ½ √(2n+1) C(2n,n) 2^(-2n)`, tending to `1/√(2π)`.
///
/// The rational factor is exact; only `√(2n+1)` is rounded.
pub fn demoivre_cn(n: u64, ctx: &PrecisionContext) -> Real {
    let w = ctx.working();
    let q = Real::from_rational(&central_binomial_prob(n), &w);
    let root = Real::from_u64(2 * n + 1, &w).sqrt();
    (q * root).mul_pow2(-1).round_to(ctx)
}

/// Exact Wallis partial product `w_n = ∏_{j=1}^n (2j)² / ((2j-1)(2j+1))`.
pub fn wallis_partial(n: u64) -> BigRational {
    let num = tree_product((1..=n).map(|j| BigInt::from(2 * j).square()).collect());
    let den = tree_product((1..=n).map(|j| BigInt::from(4 * j * j - 1)).collect());
    BigRational::from((num, den))
}

/// `1/√(w_n)`, which tends to `√(2/π)`.
pub fn wallis_inverse_sqrt(n: u64, ctx: &PrecisionContext) -> Real {
    let w = ctx.working();
    Real::from_rational(&wallis_partial(n), &w).sqrt().recip().round_to(ctx)
}

/// `t_n = ln n! - ½ ln n - (n ln n - n + 1)`.
///
/// This converges to `ln √(2π) - 1`, not to zero: the trapezoid error for
/// `ln x` accumulates to a constant.
pub fn trapezoid_residual(n: u64, ctx: &PrecisionContext) -> Result<Real> {
    if n == 0 {
        return Err(Error::domain("trapezoid_residual needs n ≥ 1"));
    }
    let w = ctx.working();
    let nn = Real::from_u64(n, &w);
    let ln_n = nn.ln();
    let integral = &nn * &ln_n - &nn + 1;
    let residual = log_factorial(n, &w) - ln_n.mul_pow2(-1) - integral;
    Ok(residual.round_to(ctx))
}

/// `ln √(2π) - 1`, the limit of [`trapezoid_residual`].
pub fn trapezoid_limit(ctx: &PrecisionContext) -> Real {
    let w = ctx.working();
    ((Real::pi(&w) * 2).sqrt().ln() - 1).round_to(ctx)
}

/// Standard normal density `φ(z)`.
pub fn normal_density(z: &Real, ctx: &PrecisionContext) -> Real {
    let w = ctx.working();
    let z = z.round_to(&w);
    let peak = (Real::pi(&w) * 2).sqrt().recip();
    (peak * (-(z.square().mul_pow2(-1))).exp()).round_to(ctx)
}

/// Density of `Z_n = 2√n (M_n - ½)` for the median `M_n` of `n = 2m+1`
/// uniforms: `½ √n C(2m,m) 2^(-2m) (1 - z²/n)^m` on `|z| ≤ √n`.
pub fn median_density_scaled(m: u64, z: &Real, ctx: &PrecisionContext) -> Result<Real> {
    let w = ctx.working();
    let n = Real::from_u64(2 * m + 1, &w);
    let z2 = z.round_to(&w).square();
    if z2 > n {
        return Err(Error::domain(format!(
            "median density argument |z| = {} exceeds √n for n = {}",
            z.abs().format_sci(10),
            2 * m + 1
        )));
    }
    let shape = (Real::one(&w) - z2 / &n).powi(m as i64);
    let peak = Real::from_rational(&central_binomial_prob(m), &w) * n.sqrt();
    Ok((peak.mul_pow2(-1) * shape).round_to(ctx))
}

pub fn stirling_point(n: u64, ctx: &PrecisionContext) -> Result<ClassicSequencePoint> {
    Ok(ClassicSequencePoint {
        n,
        exact: None,
        value: stirling_ratio(n, ctx)?,
        target: (Real::pi(ctx) * 2).sqrt(),
    })
}

pub fn middle_binomial_point(n: u64, ctx: &PrecisionContext) -> Result<ClassicSequencePoint> {
    let exact = middle_binomial_prob(n)?;
    let w = ctx.working();
    Ok(ClassicSequencePoint {
        n,
        value: Real::from_rational(&exact, ctx),
        exact: Some(exact),
        target: (Real::pi(&w) * n as i64).sqrt().recip().round_to(ctx),
    })
}

pub fn wallis_point(n: u64, ctx: &PrecisionContext) -> ClassicSequencePoint {
    let exact = wallis_partial(n);
    ClassicSequencePoint {
        n,
        value: Real::from_rational(&exact, ctx),
        exact: Some(exact),
        target: Real::pi(ctx).mul_pow2(-1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace_bic::{adaptive_integrate, PanelRule};

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn close(a: &Real, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol
    }

    #[test]
    fn stirling_ratio_examples() {
        let c = ctx();
        let e = Real::one(&c).exp();
        assert!(stirling_ratio(1, &c).unwrap().rel_diff(&e) <= c.rel_bound(8));
        // 2! e^2 / 2^2.5 evaluated in doubles
        let oracle = 2.0 * 2f64.exp() / 2f64.powf(2.5);
        assert!(close(&stirling_ratio(2, &c).unwrap(), oracle, 1e-14));
        assert!(close(&stirling_ratio(2, &c).unwrap(), 2.6124258370608, 1e-12));
        assert!(stirling_ratio(0, &c).is_err());
    }

    #[test]
    fn stirling_ratio_decreases_towards_sqrt_2pi() {
        let c = ctx();
        let bound = (Real::pi(&c) * 2).sqrt();
        let mut prev = stirling_ratio(1, &c).unwrap();
        for n in 2..=200 {
            let cur = stirling_ratio(n, &c).unwrap();
            assert!(cur < prev, "n = {n}");
            assert!(cur > bound);
            prev = cur;
        }
    }

    #[test]
    fn demoivre_examples() {
        let c = ctx();
        assert_eq!(demoivre_cn(0, &c).to_f64(), 0.5);
        let root3_over4 = Real::from_i64(3, &c).sqrt().mul_pow2(-2);
        assert!(demoivre_cn(1, &c).rel_diff(&root3_over4) <= c.rel_bound(4));
        let target = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!(close(&demoivre_cn(100_000, &c), target, 1e-5));
    }

    #[test]
    fn middle_binomial_examples() {
        assert_eq!(middle_binomial_prob(1).unwrap(), BigRational::from((1, 2)));
        assert_eq!(middle_binomial_prob(2).unwrap(), BigRational::from((3, 8)));
        assert_eq!(middle_binomial_prob(10).unwrap(), BigRational::from((46189, 262144)));
        assert!(middle_binomial_prob(0).is_err());
        let p = middle_binomial_point(10, &ctx()).unwrap();
        assert!(p.is_consistent(&ctx()));
        assert!(close(&p.value, 0.1762, 1e-4));
        assert!(close(&p.target, 0.1784, 1e-4));
    }

    #[test]
    fn wallis_examples() {
        assert_eq!(wallis_partial(0), BigRational::from(1));
        assert_eq!(wallis_partial(1), BigRational::from((4, 3)));
        assert_eq!(wallis_partial(2), BigRational::from((64, 45)));
        assert!(wallis_point(5, &ctx()).is_consistent(&ctx()));
    }

    #[test]
    fn wallis_times_squared_middle_probability_is_one() {
        for n in 0..=500u64 {
            let q = central_binomial_prob(n);
            let product = wallis_partial(n) * BigRational::from(2 * n + 1) * q.clone() * q;
            assert_eq!(product, 1, "n = {n}");
        }
    }

    #[test]
    fn inverse_sqrt_wallis_matches_scaled_middle_probability() {
        let c = ctx();
        for n in [1u64, 7, 50, 333] {
            let lhs = wallis_inverse_sqrt(n, &c);
            let rhs = Real::from_u64(2 * n + 1, &c).sqrt() * Real::from_rational(&central_binomial_prob(n), &c);
            assert!(lhs.rel_diff(&rhs) <= c.rel_bound(8));
            // and via de Moivre: 1/√w_n = 2 c_n
            assert!(lhs.rel_diff(&demoivre_cn(n, &c).mul_pow2(1)) <= c.rel_bound(8));
        }
    }

    #[test]
    fn wallis_increases_below_half_pi() {
        // each factor (2j)²/((2j-1)(2j+1)) exceeds one, so the last term bounds all
        for j in 1..=10_000u64 {
            assert!(4 * j * j > 4 * j * j - 1);
        }
        let c = ctx();
        let w = Real::from_rational(&wallis_partial(10_000), &c);
        assert!(w < Real::pi(&c).mul_pow2(-1));
        assert!(Real::from_rational(&wallis_partial(9_999), &c) < w);
    }

    #[test]
    fn trapezoid_examples() {
        let c = ctx();
        assert!(trapezoid_residual(1, &c).unwrap().is_zero());
        assert!(close(&trapezoid_residual(10, &c).unwrap(), -0.072730903361964, 1e-14));
        assert!(close(&trapezoid_limit(&c), -0.0810614667953273, 1e-15));
        let limit = trapezoid_limit(&c);
        let mut prev = None;
        for n in [10u64, 100, 1000, 10_000] {
            let err = (trapezoid_residual(n, &c).unwrap() - &limit).abs();
            if let Some(p) = prev {
                assert!(err < p);
            }
            prev = Some(err);
        }
    }

    #[test]
    fn median_density_examples() {
        let c = ctx();
        let zero = Real::zero(&c);
        assert_eq!(median_density_scaled(0, &zero, &c).unwrap().to_f64(), 0.5);
        let peak = median_density_scaled(1, &zero, &c).unwrap();
        assert!(peak.rel_diff(&demoivre_cn(1, &c)) <= c.rel_bound(4));
        assert!(close(&peak, 0.4330127, 1e-7));
        let outside = Real::from_f64(1.8, &c);
        assert!(median_density_scaled(1, &outside, &c).is_err());
        let edge = Real::from_i64(3, &c).sqrt();
        assert!(median_density_scaled(1, &edge, &c).unwrap().abs() <= c.rel_bound(0));
    }

    #[test]
    fn median_density_shape_error_shrinks() {
        let c = ctx();
        let one = Real::one(&c);
        let limit = Real::from_f64(-0.5, &c).exp();
        let mut prev: Option<Real> = None;
        for m in [10u64, 100, 1000] {
            let n = Real::from_u64(2 * m + 1, &c);
            let shape = (&one - one.clone() / n).powi(m as i64);
            let err = (shape - &limit).abs();
            if let Some(p) = &prev {
                assert!(&err < p);
            }
            prev = Some(err);
        }
    }

    #[test]
    fn median_density_integrates_to_one() {
        let c = ctx();
        let tol = Real::from_f64(1e-20, &c);
        for m in [1u64, 5, 20] {
            let half_width = Real::from_u64(2 * m + 1, &c).sqrt();
            let total = adaptive_integrate(
                |z: &Real| median_density_scaled(m, z, &c).unwrap_or_else(|_| Real::zero(&c)),
                &-&half_width,
                &half_width,
                &Real::from_f64(1e-30, &c),
                60,
                PanelRule::default(),
                &c,
            )
            .unwrap();
            assert!((total - 1).abs() <= tol, "m = {m}");
        }
    }

    #[test]
    fn normal_density_peak() {
        let c = ctx();
        assert!(close(&normal_density(&Real::zero(&c), &c), 0.3989422804014327, 1e-16));
    }
}
