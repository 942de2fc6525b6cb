use super::{BigInt, PrecisionContext, Real};

/// Largest `n` for which [`log_factorial`] forms `n!` exactly.
pub const EXACT_LOG_FACTORIAL_LIMIT: u64 = 1_000_000;

const LOG_FACTORIAL_BLOCK: u64 = 4096;

fn to_u32(n: u64, what: &str) -> u32 {
    u32::try_from(n).unwrap_or_else(|_| panic!("{what} argument {n} exceeds u32"))
}

/// Exact `n!`.
pub fn factorial(n: u64) -> BigInt {
    BigInt::from(BigInt::factorial(to_u32(n, "factorial")))
}

/// Exact `C(n, j)`, zero outside `0 ≤ j ≤ n`.
pub fn binomial(n: u64, j: i64) -> BigInt {
    if j < 0 || j as u64 > n {
        return BigInt::new();
    }
    BigInt::from(BigInt::binomial_u(to_u32(n, "binomial"), to_u32(j as u64, "binomial")))
}

/// Exact product `lo · (lo+1) ⋯ hi`, equal to 1 when `lo > hi`.
pub fn product_range(lo: u64, hi: u64) -> BigInt {
    if lo > hi {
        return BigInt::from(1);
    }
    if hi - lo < 16 {
        return (lo..=hi).fold(BigInt::from(1), |acc, k| acc * k);
    }
    let mid = lo + (hi - lo) / 2;
    product_range(lo, mid) * product_range(mid + 1, hi)
}

/// Exact `(n+1)(n+2)⋯(n+m)`.
pub fn rising_product(n: u64, m: u64) -> BigInt {
    product_range(n + 1, n + m)
}

/// `ln(n!)`.
///
/// Up to [`EXACT_LOG_FACTORIAL_LIMIT`] the exact integer is formed and its log
/// taken once; above that, logs of exact block products are summed.
pub fn log_factorial(n: u64, ctx: &PrecisionContext) -> Real {
    let w = ctx.working();
    if n <= EXACT_LOG_FACTORIAL_LIMIT {
        return Real::from_integer(&factorial(n), &w).ln().round_to(ctx);
    }
    let mut total = Real::zero(&w);
    let mut lo = 2;
    while lo <= n {
        let hi = (lo + LOG_FACTORIAL_BLOCK - 1).min(n);
        total = total + Real::from_integer(&product_range(lo, hi), &w).ln();
        lo = hi + 1;
    }
    total.round_to(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn factorial_examples() {
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(5), 120);
        // iterated exact multiplication
        let oracle = (1..=20u64).fold(BigInt::from(1), |a, k| a * k);
        assert_eq!(factorial(20), oracle);
        assert_eq!(factorial(20), "2432902008176640000".parse::<BigInt>().unwrap());
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(3, -1), 0);
        // multiplicative formula C(n,j) = prod (n-j+i)/i
        let mut oracle = BigInt::from(1);
        for i in 1..=25u64 {
            oracle *= 25 + i;
            oracle /= i;
        }
        assert_eq!(binomial(50, 25), oracle);
        assert_eq!(binomial(50, 25), 126410606437752u64);
    }

    #[test]
    fn rising_product_examples() {
        assert_eq!(rising_product(5, 0), 1);
        assert_eq!(rising_product(5, 2), 42);
        assert_eq!(rising_product(10, 3), 11 * 12 * 13);
        assert_eq!(rising_product(0, 30), factorial(30));
    }

    #[test]
    fn log_factorial_examples() {
        let ctx = PrecisionContext::default();
        assert!(log_factorial(1, &ctx).is_zero());
        assert!(log_factorial(0, &ctx).is_zero());
        let ln2 = Real::from_i64(2, &ctx).ln();
        assert!(log_factorial(2, &ctx).rel_diff(&ln2) <= ctx.rel_bound(8));
        let l10 = log_factorial(10, &ctx);
        assert!(l10.format_sci(20).starts_with("1.5104412573"));
    }

    #[test]
    fn log_factorial_block_path_matches_exact_path() {
        let ctx = PrecisionContext::default();
        let n = EXACT_LOG_FACTORIAL_LIMIT + 1;
        let exact = (Real::from_integer(&factorial(n), &ctx.working()).ln()).round_to(&ctx);
        assert!(log_factorial(n, &ctx).rel_diff(&exact) <= ctx.rel_bound(8));
    }

    #[test]
    fn pascal_recurrence_up_to_200() {
        for n in 1..=200u64 {
            for j in 0..=n as i64 {
                assert_eq!(
                    binomial(n, j),
                    binomial(n - 1, j - 1) + binomial(n - 1, j),
                    "n={n} j={j}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn absorption_identity(n in 1u64..300, j in -3i64..303) {
            let lhs = binomial(n, j) * j;
            let rhs = binomial(n - 1, j - 1) * n;
            prop_assert_eq!(lhs, rhs);
        }
    }
}
