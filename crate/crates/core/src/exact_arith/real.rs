use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use super::{BigInt, BigRational, PrecisionContext};

/// A binary floating-point value carrying its own precision.
///
/// Values are created at a [`PrecisionContext`]'s `bits`; binary operations
/// produce a result at the larger of the two operand precisions, correctly
/// rounded, so each elementary step has relative error at most `2^(-bits)`.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub fn from_float(value: Float) -> Self {
        Real(value)
    }

    pub fn from_i64(value: i64, ctx: &PrecisionContext) -> Self {
        Real(Float::with_val(ctx.bits(), value))
    }

    pub fn from_u64(value: u64, ctx: &PrecisionContext) -> Self {
        Real(Float::with_val(ctx.bits(), value))
    }

    pub fn from_f64(value: f64, ctx: &PrecisionContext) -> Self {
        Real(Float::with_val(ctx.bits(), value))
    }

    pub fn from_integer(value: &BigInt, ctx: &PrecisionContext) -> Self {
        Real(Float::with_val(ctx.bits(), value))
    }

    pub fn from_rational(value: &BigRational, ctx: &PrecisionContext) -> Self {
        Real(Float::with_val(ctx.bits(), value))
    }

    pub fn zero(ctx: &PrecisionContext) -> Self {
        Self::from_i64(0, ctx)
    }

    pub fn one(ctx: &PrecisionContext) -> Self {
        Self::from_i64(1, ctx)
    }

    /// Zero at the precision of `other`.
    pub fn zero_like(other: &Real) -> Self {
        Real(Float::with_val(other.prec(), 0))
    }

    pub fn one_like(other: &Real) -> Self {
        Real(Float::with_val(other.prec(), 1))
    }

    pub fn pi(ctx: &PrecisionContext) -> Self {
        Real(Float::with_val(ctx.bits(), Constant::Pi))
    }

    pub fn inner(&self) -> &Float {
        &self.0
    }

    pub fn into_inner(self) -> Float {
        self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Rounds (or widens) to the context's precision.
    pub fn round_to(&self, ctx: &PrecisionContext) -> Self {
        Real(Float::with_val(ctx.bits(), &self.0))
    }

    pub fn exp(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.exp_ref()))
    }

    pub fn ln(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.ln_ref()))
    }

    /// `ln(1 + self)` without forming `1 + self`.
    pub fn ln_1p(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.ln_1p_ref()))
    }

    pub fn sqrt(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.sqrt_ref()))
    }

    pub fn recip(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.recip_ref()))
    }

    pub fn abs(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.abs_ref()))
    }

    pub fn square(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.square_ref()))
    }

    pub fn powi(&self, exponent: i64) -> Self {
        Real(Float::with_val(self.prec(), (&self.0).pow(exponent)))
    }

    pub fn pow(&self, exponent: &Real) -> Self {
        Real(Float::with_val(self.prec(), (&self.0).pow(&exponent.0)))
    }

    /// Exact scaling by `2^k`.
    pub fn mul_pow2(&self, k: i32) -> Self {
        let mut out = self.0.clone();
        if k >= 0 {
            out <<= k as u32;
        } else {
            out >>= k.unsigned_abs();
        }
        Real(out)
    }

    pub fn floor_to_integer(&self) -> Option<BigInt> {
        self.0.to_integer_round(rug::float::Round::Down).map(|(i, _)| i)
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.0.to_rational()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_positive(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Greater)
    }

    pub fn is_negative(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Less)
    }

    pub fn cmp0(&self) -> Option<Ordering> {
        self.0.cmp0()
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `|self - reference| / |reference|`, or the absolute difference when the
    /// reference is zero.
    pub fn rel_diff(&self, reference: &Real) -> Real {
        let diff = (self - reference).abs();
        if reference.is_zero() {
            diff
        } else {
            diff / reference.abs()
        }
    }

    /// Scientific notation with `digits` significant decimal digits, e.g.
    /// `2.718281828e0`. Zero is written with the same digit count.
    pub fn format_sci(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.0.is_zero() {
            return if digits == 1 {
                "0e0".to_string()
            } else {
                format!("0.{}e0", "0".repeat(digits - 1))
            };
        }
        format!("{:.*e}", digits, self.0)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_sci(40))
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(Float::with_val(self.prec(), -&self.0))
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let prec = self.prec().max(rhs.prec());
                Real(Float::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $trait<i64> for &Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                Real(Float::with_val(self.prec(), &self.0 $op rhs))
            }
        }
        impl $trait<i64> for Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                (&self).$method(rhs)
            }
        }
    };
}

real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);
real_binop!(Div, div, /);

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn format_is_fixed_width_scientific() {
        let c = ctx();
        let e = Real::one(&c).exp();
        assert_eq!(e.format_sci(10), "2.718281828e0");
        assert_eq!(Real::zero(&c).format_sci(4), "0.000e0");
        assert_eq!(Real::from_f64(-0.00125, &c).format_sci(3), "-1.25e-3");
        assert_eq!(e.to_string().len(), "2.".len() + 39 + "e0".len());
    }

    #[test]
    fn mixed_precision_uses_larger_operand() {
        let lo = PrecisionContext::new(64).unwrap();
        let a = Real::from_i64(1, &lo);
        let b = Real::from_i64(3, &ctx());
        assert_eq!((&a / &b).prec(), 256);
        assert_eq!((&a / 3).prec(), 64);
    }

    #[test]
    fn floor_and_pow2() {
        let c = ctx();
        let x = Real::from_f64(7.99, &c);
        assert_eq!(x.floor_to_integer().unwrap(), 7);
        assert_eq!(Real::from_f64(-0.5, &c).floor_to_integer().unwrap(), -1);
        assert_eq!(Real::from_i64(3, &c).mul_pow2(-2).to_f64(), 0.75);
        assert_eq!(c.rel_bound(0).mul_pow2(256).to_f64(), 1.0);
    }

    #[test]
    fn elementary_ops_agree_with_double_precision_reference() {
        let c = ctx();
        let hi = PrecisionContext::new(512).unwrap();
        let bound = c.rel_bound(4);
        let x = Real::from_rational(&BigRational::from((22, 7)), &c);
        let xh = Real::from_rational(&BigRational::from((22, 7)), &hi);
        let y = Real::from_rational(&BigRational::from((-5, 3)), &c);
        let yh = Real::from_rational(&BigRational::from((-5, 3)), &hi);
        let pairs = [
            (&x + &y, &xh + &yh),
            (&x - &y, &xh - &yh),
            (&x * &y, &xh * &yh),
            (&x / &y, &xh / &yh),
            (x.exp(), xh.exp()),
            (x.ln(), xh.ln()),
            (x.sqrt(), xh.sqrt()),
            (x.pow(&y), xh.pow(&yh)),
        ];
        for (lo, reference) in pairs {
            assert!(lo.rel_diff(&reference) <= bound, "{lo} vs {reference}");
        }
    }
}
