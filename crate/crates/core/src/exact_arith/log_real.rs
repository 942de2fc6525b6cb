use std::cmp::Ordering;

use super::{BigInt, BigRational, PrecisionContext, Real};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(ordering: Option<Ordering>) -> Sign {
        match ordering {
            Some(Ordering::Less) => Sign::Negative,
            Some(Ordering::Greater) => Sign::Positive,
            _ => Sign::Zero,
        }
    }

    fn product(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        }
    }

    fn negate(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// `sign · exp(log_magnitude)`.
///
/// Products and quotients are additions in log space, so ratios such as
/// `n^(n+1/2) e^(-n) / n!` stay representable long after the factors overflow.
/// `log_magnitude` is meaningless when the sign is [`Sign::Zero`].
#[derive(Debug, Clone, PartialEq)]
pub struct LogReal {
    sign: Sign,
    log_magnitude: Real,
}

impl LogReal {
    pub fn zero(ctx: &PrecisionContext) -> Self {
        LogReal {
            sign: Sign::Zero,
            log_magnitude: Real::zero(ctx),
        }
    }

    pub fn one(ctx: &PrecisionContext) -> Self {
        Self::from_log(Real::zero(ctx))
    }

    /// The positive value `exp(log_magnitude)`.
    pub fn from_log(log_magnitude: Real) -> Self {
        LogReal {
            sign: Sign::Positive,
            log_magnitude,
        }
    }

    pub fn from_parts(sign: Sign, log_magnitude: Real) -> Self {
        LogReal { sign, log_magnitude }
    }

    pub fn from_real(value: &Real) -> Self {
        let sign = Sign::of(value.cmp0());
        let log_magnitude = if sign == Sign::Zero {
            value.clone()
        } else {
            value.abs().ln()
        };
        LogReal { sign, log_magnitude }
    }

    pub fn from_integer(value: &BigInt, ctx: &PrecisionContext) -> Self {
        Self::from_real(&Real::from_integer(value, ctx))
    }

    pub fn from_rational(value: &BigRational, ctx: &PrecisionContext) -> Self {
        let sign = Sign::of(Some(value.cmp0()));
        if sign == Sign::Zero {
            return Self::zero(ctx);
        }
        let num = Real::from_integer(value.numer(), ctx).abs().ln();
        let den = Real::from_integer(value.denom(), ctx).ln();
        LogReal {
            sign,
            log_magnitude: num - den,
        }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn log_magnitude(&self) -> &Real {
        &self.log_magnitude
    }

    /// Natural log of a positive value.
    pub fn ln(&self) -> Result<Real> {
        match self.sign {
            Sign::Positive => Ok(self.log_magnitude.clone()),
            _ => Err(Error::domain("logarithm of a non-positive LogReal")),
        }
    }

    pub fn mul(&self, other: &LogReal) -> LogReal {
        let sign = self.sign.product(other.sign);
        LogReal {
            sign,
            log_magnitude: &self.log_magnitude + &other.log_magnitude,
        }
    }

    pub fn div(&self, other: &LogReal) -> Result<LogReal> {
        if other.sign == Sign::Zero {
            return Err(Error::domain("division of a LogReal by zero"));
        }
        Ok(LogReal {
            sign: self.sign.product(other.sign),
            log_magnitude: &self.log_magnitude - &other.log_magnitude,
        })
    }

    pub fn powi(&self, exponent: i64) -> Result<LogReal> {
        match (self.sign, exponent) {
            (_, 0) => Ok(LogReal::from_parts(
                Sign::Positive,
                Real::zero_like(&self.log_magnitude),
            )),
            (Sign::Zero, e) if e < 0 => Err(Error::domain("negative power of zero")),
            (Sign::Zero, _) => Ok(self.clone()),
            (sign, e) => {
                let sign = if sign == Sign::Negative && e % 2 != 0 {
                    Sign::Negative
                } else {
                    Sign::Positive
                };
                Ok(LogReal {
                    sign,
                    log_magnitude: &self.log_magnitude * e,
                })
            }
        }
    }

    pub fn neg(&self) -> LogReal {
        LogReal {
            sign: self.sign.negate(),
            log_magnitude: self.log_magnitude.clone(),
        }
    }

    /// Signed log-sum-exp: the smaller magnitude is expressed relative to the
    /// larger one, so only `ln(1 ± e^(-d))` with `d ≥ 0` is ever formed.
    pub fn add(&self, other: &LogReal) -> LogReal {
        if self.sign == Sign::Zero {
            return other.clone();
        }
        if other.sign == Sign::Zero {
            return self.clone();
        }
        let (big, small) = if self.log_magnitude >= other.log_magnitude {
            (self, other)
        } else {
            (other, self)
        };
        let gap = &big.log_magnitude - &small.log_magnitude;
        let ratio = (-gap).exp();
        if big.sign == small.sign {
            LogReal {
                sign: big.sign,
                log_magnitude: &big.log_magnitude + ratio.ln_1p(),
            }
        } else if *ratio.inner() >= 1 {
            LogReal {
                sign: Sign::Zero,
                log_magnitude: Real::zero_like(&ratio),
            }
        } else {
            LogReal {
                sign: big.sign,
                log_magnitude: &big.log_magnitude + (-ratio).ln_1p(),
            }
        }
    }

    pub fn sub(&self, other: &LogReal) -> LogReal {
        self.add(&other.neg())
    }

    /// Converts back to linear space, failing instead of saturating when the
    /// magnitude is outside the floating exponent range.
    pub fn to_real(&self, ctx: &PrecisionContext) -> Result<Real> {
        if self.sign == Sign::Zero {
            return Ok(Real::zero(ctx));
        }
        let log2 = self.log_magnitude.to_f64() / std::f64::consts::LN_2;
        let max = f64::from(rug::float::exp_max()) - 2.0;
        let min = f64::from(rug::float::exp_min()) + 2.0;
        if !log2.is_finite() || log2 >= max || log2 <= min {
            return Err(Error::OutOfRange(format!(
                "exp({}) does not fit a floating exponent",
                self.log_magnitude.format_sci(12)
            )));
        }
        let magnitude = self.log_magnitude.round_to(&ctx.working()).exp().round_to(ctx);
        Ok(match self.sign {
            Sign::Negative => -magnitude,
            _ => magnitude,
        })
    }
}
