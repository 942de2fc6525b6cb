//! Exact combinatorics and configurable-precision reals.
//!
//! Integers and rationals are arbitrary-size and exact; [`Real`] is a binary
//! floating value whose precision is fixed by a [`PrecisionContext`]. Every
//! operation is a pure function of its inputs and the context passed in, so
//! terms of a sequence can be evaluated concurrently.

mod combinatorics;
mod log_real;
mod real;

pub use combinatorics::{binomial, factorial, log_factorial, product_range, rising_product};
pub use log_real::{LogReal, Sign};
pub use real::Real;

use crate::{Error, Result};

/// Arbitrary-size integer.
pub type BigInt = rug::Integer;

/// Arbitrary-size rational, always in lowest terms with a positive denominator.
pub type BigRational = rug::Rational;

pub const DEFAULT_BITS: u32 = 256;
pub const DEFAULT_GUARD_BITS: u32 = 32;
pub const MIN_BITS: u32 = 64;

/// Target precision for [`Real`] values plus a small number of guard bits used
/// inside composite evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    bits: u32,
    guard: u32,
}

impl PrecisionContext {
    pub fn new(bits: u32) -> Result<Self> {
        Self::with_guard(bits, DEFAULT_GUARD_BITS)
    }

    pub fn with_guard(bits: u32, guard: u32) -> Result<Self> {
        if bits < MIN_BITS {
            return Err(Error::InvalidPrecision(bits));
        }
        Ok(Self { bits, guard })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn guard(&self) -> u32 {
        self.guard
    }

    /// The context composite evaluations run under before rounding back.
    pub fn working(&self) -> Self {
        Self {
            bits: self.bits + self.guard,
            guard: self.guard,
        }
    }

    /// `2^(-k)` at this precision.
    pub fn pow2(&self, k: i32) -> Real {
        Real::from_i64(1, self).mul_pow2(-k)
    }

    /// The relative tolerance `2^(offset - bits)`, e.g. `rel_bound(4)` for the
    /// elementary-operation bound.
    pub fn rel_bound(&self, offset: i32) -> Real {
        self.pow2(self.bits as i32 - offset)
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self {
            bits: DEFAULT_BITS,
            guard: DEFAULT_GUARD_BITS,
        }
    }
}

/// The constants every limit in this crate is expressed through.
#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    pub e: Real,
    pub pi: Real,
    pub sqrt2pi: Real,
    pub inv_sqrt2pi: Real,
}

impl Constants {
    pub fn new(ctx: &PrecisionContext) -> Self {
        let w = ctx.working();
        let e = Real::from_i64(1, &w).exp();
        let pi = Real::pi(&w);
        let sqrt2pi = (&pi * 2).sqrt();
        let inv_sqrt2pi = sqrt2pi.recip();
        Self {
            e: e.round_to(ctx),
            pi: pi.round_to(ctx),
            sqrt2pi: sqrt2pi.round_to(ctx),
            inv_sqrt2pi: inv_sqrt2pi.round_to(ctx),
        }
    }
}

pub fn constants(ctx: &PrecisionContext) -> Constants {
    Constants::new(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_floor_is_enforced() {
        assert_eq!(PrecisionContext::new(63), Err(Error::InvalidPrecision(63)));
        assert!(PrecisionContext::new(64).is_ok());
        let ctx = PrecisionContext::default();
        assert_eq!((ctx.bits(), ctx.guard()), (256, 32));
        assert_eq!(ctx.working().bits(), 288);
    }

    #[test]
    fn constants_match_reference_digits() {
        let c = constants(&PrecisionContext::default());
        assert!(c.e.format_sci(20).starts_with("2.7182818284"));
        assert!(c.pi.format_sci(20).starts_with("3.1415926535"));
        assert!(c.sqrt2pi.format_sci(20).starts_with("2.5066282746"));
        assert!(c.inv_sqrt2pi.format_sci(20).starts_with("3.989422804"));
    }

    #[test]
    fn constants_within_two_ulps_of_double_precision_values() {
        let ctx = PrecisionContext::default();
        let hi = PrecisionContext::new(512).unwrap();
        let c = constants(&ctx);
        let r = constants(&hi);
        let ulp2 = ctx.rel_bound(1);
        for (lo, hi) in [
            (&c.e, &r.e),
            (&c.pi, &r.pi),
            (&c.sqrt2pi, &r.sqrt2pi),
            (&c.inv_sqrt2pi, &r.inv_sqrt2pi),
        ] {
            assert!(lo.rel_diff(hi) <= ulp2);
        }
    }
}
