//! The Irwin–Hall law of a sum of `n` independent uniforms: exact density,
//! distribution function, the truncated moments `s_n` and `I_n`, and their
//! scaled limits.
//!
//! Every alternating sum here is evaluated over exact integers. The sum in
//! `b_n` is about `e^(-n)` times its largest term, so floating point loses
//! all digits long before `n` reaches a hundred.

use rug::ops::Pow;

use crate::exact_arith::{binomial, factorial, log_factorial, BigInt, BigRational, PrecisionContext, Real};
use crate::{Error, Result};

/// Largest `n` accepted by the exact routines.
pub const MAX_EXACT_N: u64 = 1024;

/// Denominator bound used by [`rationalize`].
pub const RATIONALIZE_BITS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrwinHallDist {
    n: u64,
}

impl IrwinHallDist {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("Irwin-Hall needs n ≥ 1"));
        }
        check_size(n)?;
        Ok(IrwinHallDist { n })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Mean of one uniform.
    pub fn xi(&self) -> BigRational {
        BigRational::from((1, 2))
    }

    /// Variance of one uniform.
    pub fn sigma_sq(&self) -> BigRational {
        BigRational::from((1, 12))
    }

    /// `f_n(y) = (1/(n-1)!) Σ_{j ≤ ⌊y⌋} (-1)^j C(n,j) (y-j)^(n-1)`, zero off `[0, n]`.
    pub fn density(&self, y: &BigRational) -> BigRational {
        if y.cmp0().is_lt() || *y > self.n {
            return BigRational::new();
        }
        let sum = alternating_power_sum(self.n, y, self.n - 1);
        sum / factorial(self.n - 1)
    }

    /// `F_n(y) = (1/n!) Σ_{j ≤ ⌊y⌋} (-1)^j C(n,j) (y-j)^n`, clamped to `[0, 1]`.
    pub fn cdf(&self, y: &BigRational) -> BigRational {
        if y.cmp0().is_le() {
            return BigRational::new();
        }
        if *y >= self.n {
            return BigRational::from(1);
        }
        alternating_power_sum(self.n, y, self.n) / factorial(self.n)
    }
}

fn check_size(n: u64) -> Result<()> {
    if n > MAX_EXACT_N {
        Err(Error::OutOfRange(format!(
            "n = {n} exceeds the exact limit {MAX_EXACT_N}"
        )))
    } else {
        Ok(())
    }
}

fn require_even(n: u64) -> Result<()> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::domain(format!("n = {n} must be even and at least 2")));
    }
    check_size(n)
}

/// `Σ_{j=0}^{⌊y⌋} (-1)^j C(n,j) (y-j)^power`.
///
/// The `j = n` term is dropped: it only enters at `y = n`, where it vanishes
/// for `n ≥ 2` and would make `f_1(1) = 0` break the symmetry for `n = 1`.
fn alternating_power_sum(n: u64, y: &BigRational, power: u64) -> BigRational {
    let top = y.clone().floor().numer().to_u64().unwrap_or(0).min(n - 1);
    let mut sum = BigRational::new();
    for j in 0..=top {
        let base = y.clone() - BigInt::from(j);
        let term = BigRational::from(base.pow(power as u32)) * binomial(n, j as i64);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

/// Nearest rational with denominator `2^64` to `x`.
pub fn rationalize(x: &Real) -> Result<BigRational> {
    let scaled = x.mul_pow2(RATIONALIZE_BITS as i32);
    let rounded = scaled
        .inner()
        .to_integer()
        .ok_or_else(|| Error::domain("cannot rationalize a non-finite value"))?;
    Ok(BigRational::from((rounded, BigInt::from(1) << RATIONALIZE_BITS)))
}

/// `T_n = Σ_{j=0}^{n/2} (-1)^j C(n,j) (n-2j)^(n+1)`, the integer shared by `s_n` and `b_n`.
fn alternating_integer(n: u64) -> BigInt {
    let mut total = BigInt::new();
    for j in 0..=n / 2 {
        let term = BigInt::from(BigInt::from(n - 2 * j).pow((n + 1) as u32)) * binomial(n, j as i64);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// `s_n = ∫_0^(n/2) F_n = (1/(n+1)!) Σ_{j=0}^{n/2} (-1)^j C(n,j) (n/2-j)^(n+1)`.
pub fn truncated_moment_sn(n: u64) -> Result<BigRational> {
    require_even(n)?;
    let den = factorial(n + 1) << ((n + 1) as u32);
    Ok(BigRational::from((alternating_integer(n), den)))
}

/// `I_n = ∫_0^(n/2) y f_n(y) dy = n/4 - s_n`.
pub fn truncated_moment_in(n: u64) -> Result<BigRational> {
    Ok(BigRational::from((n, 4)) - truncated_moment_sn(n)?)
}

/// `∫_0^(n/2) y f_n(y) dy` by integrating each polynomial piece of the density
/// over its knot interval exactly.
pub fn quadrature_oracle_in_exact(n: u64) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::domain("the oracle needs n ≥ 2"));
    }
    check_size(n)?;
    let upper = BigRational::from((n, 2));
    let mut total = BigRational::new();
    let mut k = 0u64;
    while upper > k {
        let lo = BigRational::from(k);
        let hi = if upper > k + 1 {
            BigRational::from(k + 1)
        } else {
            upper.clone()
        };
        for j in 0..=k.min(n) {
            // ∫ y (y-j)^(n-1) dy = (y-j)^(n+1)/(n+1) + j (y-j)^n / n
            let antiderivative = |y: &BigRational| {
                let d = y.clone() - BigInt::from(j);
                BigRational::from(d.clone().pow((n + 1) as u32)) / BigInt::from(n + 1)
                    + BigRational::from(d.pow(n as u32)) * BigInt::from(j) / BigInt::from(n)
            };
            let piece = (antiderivative(&hi) - antiderivative(&lo)) * binomial(n, j as i64);
            if j % 2 == 0 {
                total += piece;
            } else {
                total -= piece;
            }
        }
        k += 1;
    }
    Ok(total / factorial(n - 1))
}

pub fn quadrature_oracle_in(n: u64, ctx: &PrecisionContext) -> Result<Real> {
    Ok(Real::from_rational(&quadrature_oracle_in_exact(n)?, ctx))
}

/// `s_n / √n`, which tends to `σ/√(2π) = 1/√(24π)`.
pub fn scaled_sn(n: u64, ctx: &PrecisionContext) -> Result<Real> {
    let s = truncated_moment_sn(n)?;
    let w = ctx.working();
    Ok((Real::from_rational(&s, &w) / Real::from_u64(n, &w).sqrt()).round_to(ctx))
}

/// `(I_n - n/4) / (σ√n)`, which tends to `-1/√(2π)`.
pub fn standardized_in(n: u64, ctx: &PrecisionContext) -> Result<Real> {
    let deviation = truncated_moment_in(n)? - BigRational::from((n, 4));
    let w = ctx.working();
    let sigma_sqrt_n = (Real::from_u64(n, &w) / 12).sqrt();
    Ok((Real::from_rational(&deviation, &w) / sigma_sqrt_n).round_to(ctx))
}

/// The exact alternating sum `S_n` with its two normalizations.
#[derive(Debug, Clone, PartialEq)]
pub struct BnTerm {
    pub n: u64,
    /// `S_n = Σ_{j=0}^{n/2} (-1)^j C(n,j) 2^(-n) (1-2j/n)^(n+1)`.
    pub sum: BigRational,
    /// `b_n = ½ e^n S_n / (n+1)`, tending to `1/√12`.
    pub bn: Real,
    /// `e^n S_n / n`, tending to `1/√3`.
    pub final_display: Real,
}

pub fn bn_term(n: u64, ctx: &PrecisionContext) -> Result<BnTerm> {
    require_even(n)?;
    let den = BigInt::from(BigInt::from(n).pow((n + 1) as u32)) << (n as u32);
    let sum = BigRational::from((alternating_integer(n), den));
    let w = ctx.working();
    let scaled = Real::from_rational(&sum, &w) * Real::from_u64(n, &w).exp();
    Ok(BnTerm {
        n,
        bn: (&scaled / (n as i64 + 1)).mul_pow2(-1).round_to(ctx),
        final_display: (&scaled / n as i64).round_to(ctx),
        sum,
    })
}

/// `a_n = (n+1) e^(-n) n^(n+1/2) / (n+1)!`, with `a_n b_n = s_n/√n`.
pub fn an_term(n: u64, ctx: &PrecisionContext) -> Result<Real> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let w = ctx.working();
    let nr = Real::from_u64(n, &w);
    let log =
        Real::from_u64(n + 1, &w).ln() - &nr + (&nr + Real::from_f64(0.5, &w)) * nr.ln() - log_factorial(n + 1, &w);
    Ok(log.exp().round_to(ctx))
}

/// `1/√(24π)`.
pub fn sn_target(ctx: &PrecisionContext) -> Real {
    let w = ctx.working();
    (Real::pi(&w) * 24).sqrt().recip().round_to(ctx)
}

/// `1/√12`.
pub fn bn_target(ctx: &PrecisionContext) -> Real {
    Real::from_i64(12, &ctx.working()).sqrt().recip().round_to(ctx)
}

/// `1/√3`.
pub fn final_display_target(ctx: &PrecisionContext) -> Real {
    Real::from_i64(3, &ctx.working()).sqrt().recip().round_to(ctx)
}
