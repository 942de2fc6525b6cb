//! Flat-prior marginal likelihoods versus their BIC-style approximation
//! `L_max (2π/J)^(1/2)`.

use rug::ops::Pow;

use super::{integrate_exp, Domain, LaplaceProblem, QuadratureConfig};
use crate::exact_arith::{factorial, log_factorial, BigInt, BigRational, LogReal, PrecisionContext, Real};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum BicCase {
    /// One Poisson count `x`.
    PoissonSingle { x: u64 },
    /// `n` Poisson counts summing to `z`.
    PoissonSample { n: u64, z: u64 },
    /// `n` exponential observations summing to `z`.
    Exponential { n: u64, z: BigRational },
    /// `x` successes out of `n`.
    Binomial { n: u64, x: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BicComparison {
    pub exact_side: Real,
    pub bic_side: Real,
    pub ratio: Real,
}

impl BicCase {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            BicCase::PoissonSingle { x } => *x >= 1,
            BicCase::PoissonSample { n, z } => *n >= 1 && *z >= 1,
            BicCase::Exponential { n, z } => *n >= 1 && z.cmp0().is_gt(),
            BicCase::Binomial { n, x } => *x >= 1 && *x < *n,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid BIC case {self:?}")))
        }
    }

    /// The exact marginal likelihood.
    pub fn exact_side(&self) -> Result<BigRational> {
        self.validate()?;
        Ok(match self {
            BicCase::PoissonSingle { .. } => BigRational::from(1),
            BicCase::PoissonSample { n, z } => {
                let den = BigInt::from(BigInt::from(*n).pow(u32_of(*z + 1)?));
                BigRational::from((factorial(*z), den))
            }
            BicCase::Exponential { n, z } => {
                let num = BigRational::from(factorial(*n));
                num / BigRational::from(z.clone().pow(u32_of(*n + 1)?))
            }
            BicCase::Binomial { n, x } => BigRational::from((factorial(*x) * factorial(*n - *x), factorial(*n + 1))),
        })
    }

    /// Log of the approximating right-hand side.
    pub fn log_bic_side(&self, ctx: &PrecisionContext) -> Result<Real> {
        self.validate()?;
        let w = ctx.working();
        let half_log_2pi = (Real::pi(&w) * 2).ln().mul_pow2(-1);
        let value = match self {
            BicCase::PoissonSingle { x } => {
                // exp(-x) x^x / x! · (2πx)^(1/2)
                let xr = Real::from_u64(*x, &w);
                let lx = xr.ln();
                -&xr + &xr * &lx - log_factorial(*x, &w) + &half_log_2pi + lx.mul_pow2(-1)
            }
            BicCase::PoissonSample { n, z } => {
                // exp(-z) (z/n)^z √(2π) z^(1/2) / n
                let zr = Real::from_u64(*z, &w);
                let lz = zr.ln();
                let ln_n = Real::from_u64(*n, &w).ln();
                -&zr + &zr * (&lz - &ln_n) + &half_log_2pi + lz.mul_pow2(-1) - ln_n
            }
            BicCase::Exponential { n, z } => {
                // (n/z)^n exp(-n) √(2π) √n / z
                let nr = Real::from_u64(*n, &w);
                let ln_n = nr.ln();
                let ln_z = Real::from_rational(z, &w).ln();
                &nr * (&ln_n - &ln_z) - &nr + &half_log_2pi + ln_n.mul_pow2(-1) - ln_z
            }
            BicCase::Binomial { n, x } => {
                // (x/n)^x ((n-x)/n)^(n-x) {(x/n)((n-x)/n)}^(1/2) √(2π)/√n
                let ln_n = Real::from_u64(*n, &w).ln();
                let lp = Real::from_u64(*x, &w).ln() - &ln_n;
                let lq = Real::from_u64(*n - *x, &w).ln() - &ln_n;
                Real::from_u64(*x, &w) * &lp
                    + Real::from_u64(*n - *x, &w) * &lq
                    + (&lp + &lq).mul_pow2(-1)
                    + &half_log_2pi
                    - ln_n.mul_pow2(-1)
            }
        };
        Ok(value.round_to(ctx))
    }
}

fn u32_of(v: u64) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::OutOfRange(format!("exponent {v} too large")))
}

/// Exact side, approximation and their ratio; the ratio is formed in log space.
pub fn bic_case(case: &BicCase, ctx: &PrecisionContext) -> Result<BicComparison> {
    let exact = LogReal::from_rational(&case.exact_side()?, ctx);
    let approx = LogReal::from_log(case.log_bic_side(ctx)?);
    let ratio = exact.div(&approx)?;
    Ok(BicComparison {
        exact_side: exact.to_real(ctx)?,
        bic_side: approx.to_real(ctx)?,
        ratio: ratio.to_real(ctx)?,
    })
}

/// The log-likelihood of `case` as a function of its parameter.
pub fn bic_problem(case: &BicCase, ctx: &PrecisionContext) -> Result<LaplaceProblem> {
    case.validate()?;
    let w = ctx.working();
    Ok(match case {
        BicCase::PoissonSingle { x } => {
            let xr = Real::from_u64(*x, &w);
            let lf = log_factorial(*x, &w);
            let (x1, x2) = (xr.clone(), xr.clone());
            LaplaceProblem::new(
                Box::new(move |t: &Real| &xr * t.ln() - t - &lf),
                Domain::positive(ctx),
                Real::one(ctx),
            )
            .with_derivatives(
                Box::new(move |t: &Real| &x1 / t - 1),
                Box::new(move |t: &Real| -(&x2 / t.square())),
            )
        }
        BicCase::PoissonSample { n, z } => {
            let nr = Real::from_u64(*n, &w);
            let zr = Real::from_u64(*z, &w);
            let (n1, z1, z2) = (nr.clone(), zr.clone(), zr.clone());
            LaplaceProblem::new(
                Box::new(move |t: &Real| &zr * t.ln() - &nr * t),
                Domain::positive(ctx),
                Real::one(ctx),
            )
            .with_derivatives(
                Box::new(move |t: &Real| &z1 / t - &n1),
                Box::new(move |t: &Real| -(&z2 / t.square())),
            )
        }
        BicCase::Exponential { n, z } => {
            let nr = Real::from_u64(*n, &w);
            let zr = Real::from_rational(z, &w);
            let (n1, n2, z1) = (nr.clone(), nr.clone(), zr.clone());
            LaplaceProblem::new(
                Box::new(move |t: &Real| &nr * t.ln() - &zr * t),
                Domain::positive(ctx),
                Real::one(ctx),
            )
            .with_derivatives(
                Box::new(move |t: &Real| &n1 / t - &z1),
                Box::new(move |t: &Real| -(&n2 / t.square())),
            )
        }
        BicCase::Binomial { n, x } => {
            let xr = Real::from_u64(*x, &w);
            let yr = Real::from_u64(*n - *x, &w);
            let (x1, y1, x2, y2) = (xr.clone(), yr.clone(), xr.clone(), yr.clone());
            LaplaceProblem::new(
                Box::new(move |p: &Real| &xr * p.ln() + &yr * (-p).ln_1p()),
                Domain::interval(Real::zero(ctx), Real::one(ctx)),
                Real::from_f64(0.5, ctx),
            )
            .with_derivatives(
                Box::new(move |p: &Real| &x1 / p - &y1 / (-p + 1)),
                Box::new(move |p: &Real| -(&x2 / p.square()) - &y2 / (-p + 1).square()),
            )
        }
    })
}

/// Quadrature of the likelihood over its parameter; should reproduce the exact side.
pub fn bic_integral_check(case: &BicCase, config: &QuadratureConfig, ctx: &PrecisionContext) -> Result<Real> {
    integrate_exp(&bic_problem(case, ctx)?, config, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace_bic::laplace_approx;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn abs1(r: &Real) -> f64 {
        (r.to_f64() - 1.0).abs()
    }

    #[test]
    fn examples() {
        let c = ctx();
        let single = bic_case(&BicCase::PoissonSingle { x: 10 }, &c).unwrap();
        assert_eq!(single.exact_side, Real::one(&c));
        assert!((single.ratio.to_f64() - 1.0083653591324).abs() < 1e-12);

        let bin = bic_case(&BicCase::Binomial { n: 2, x: 1 }, &c).unwrap();
        assert!(bin.exact_side.rel_diff(&(Real::one(&c) / 6)) <= c.pow2(250));
        let closed = (Real::pi(&c) * 2).sqrt() / (Real::from_i64(2, &c).sqrt() * 8);
        assert!(bin.bic_side.rel_diff(&closed) <= c.pow2(240));
        assert!((bin.bic_side.to_f64() - 0.2215567313631895).abs() < 1e-15);
        assert!((bin.ratio.to_f64() - 0.7522527780636751).abs() < 1e-12);
    }

    #[test]
    fn exact_sides() {
        assert_eq!(
            BicCase::PoissonSample { n: 2, z: 3 }.exact_side().unwrap(),
            BigRational::from((6, 16))
        );
        assert_eq!(
            BicCase::Exponential {
                n: 3,
                z: BigRational::from(2)
            }
            .exact_side()
            .unwrap(),
            BigRational::from((3, 8))
        );
        assert_eq!(
            BicCase::Binomial { n: 4, x: 1 }.exact_side().unwrap(),
            BigRational::from((1, 20))
        );
    }

    #[test]
    fn preconditions() {
        let c = ctx();
        for bad in [
            BicCase::PoissonSingle { x: 0 },
            BicCase::PoissonSample { n: 0, z: 3 },
            BicCase::PoissonSample { n: 3, z: 0 },
            BicCase::Exponential {
                n: 2,
                z: BigRational::from(0),
            },
            BicCase::Exponential {
                n: 0,
                z: BigRational::from(1),
            },
            BicCase::Binomial { n: 5, x: 0 },
            BicCase::Binomial { n: 5, x: 5 },
        ] {
            assert!(matches!(bic_case(&bad, &c), Err(Error::Domain(_))), "{bad:?}");
        }
    }

    #[test]
    fn integral_checks_match_exact_sides() {
        let c = ctx();
        let cfg = QuadratureConfig::new(&c);
        let tol = Real::from_f64(1e-20, &c);
        let cases = [
            (
                BicCase::Exponential {
                    n: 3,
                    z: BigRational::from(2),
                },
                0.375,
            ),
            (BicCase::Binomial { n: 2, x: 1 }, 1.0 / 6.0),
            (BicCase::PoissonSingle { x: 4 }, 1.0),
            (BicCase::PoissonSample { n: 3, z: 7 }, 5040.0 / 6561.0),
            (BicCase::Binomial { n: 40, x: 13 }, f64::NAN),
        ];
        for (case, expected) in cases {
            let q = bic_integral_check(&case, &cfg, &c).unwrap();
            let exact = Real::from_rational(&case.exact_side().unwrap(), &c);
            assert!(q.rel_diff(&exact) <= tol, "{case:?}: {q} vs {exact}");
            if expected.is_finite() {
                assert!((q.to_f64() - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bic_side_is_the_laplace_approximation() {
        let c = ctx();
        for case in [
            BicCase::PoissonSingle { x: 9 },
            BicCase::PoissonSample { n: 4, z: 11 },
            BicCase::Exponential {
                n: 6,
                z: BigRational::from((7, 2)),
            },
            BicCase::Binomial { n: 30, x: 11 },
        ] {
            let bic = bic_case(&case, &c).unwrap().bic_side;
            let lap = laplace_approx(&bic_problem(&case, &c).unwrap(), &c).unwrap();
            assert!(bic.rel_diff(&lap) <= c.pow2(100), "{case:?}");
        }
    }

    #[test]
    fn ratios_approach_one_by_halving() {
        let c = ctx();
        let sizes = [16u64, 32, 64, 128, 256];
        let families: [fn(u64) -> BicCase; 4] = [
            |n| BicCase::PoissonSingle { x: n / 2 },
            |n| BicCase::PoissonSample { n, z: n },
            |n| BicCase::Exponential {
                n,
                z: BigRational::from(n),
            },
            |n| BicCase::Binomial { n, x: n / 2 },
        ];
        for family in families {
            let errs: Vec<f64> = sizes
                .iter()
                .map(|&n| abs1(&bic_case(&family(n), &c).unwrap().ratio))
                .collect();
            for pair in errs.windows(2) {
                assert!(pair[1] <= pair[0] / 2.0 * 1.05, "{errs:?}");
            }
        }
    }
}
