//! Truncated means `L_n(c) = E Z_n I(0 ≤ Z_n ≤ c)` of standardized Poisson,
//! Gamma and symmetric binomial sums, their telescoped closed forms, the
//! finite-`c` ratio limits, mean absolute deviations and random-walk returns.

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;

use crate::exact_arith::{
    binomial, factorial, log_factorial, rising_product, BigInt, BigRational, PrecisionContext, Real,
};
use crate::laplace_bic::{adaptive_integrate, PanelRule};
use crate::{Error, Result};

/// Truncation point: a nonnegative rational or `∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cutoff {
    Finite(BigRational),
    Infinite,
}

impl Cutoff {
    pub fn finite(c: impl Into<BigRational>) -> Result<Self> {
        let c = c.into();
        if c.cmp0().is_lt() {
            return Err(Error::domain("cutoff must be nonnegative"));
        }
        Ok(Cutoff::Finite(c))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Cutoff::Infinite)
    }

    /// `⌊c√n⌋`, computed exactly; `None` for `∞`.
    pub fn steps(&self, n: u64) -> Option<u64> {
        match self {
            Cutoff::Infinite => None,
            Cutoff::Finite(c) => Some(floor_c_sqrt(c, n)),
        }
    }

    pub fn to_real(&self, ctx: &PrecisionContext) -> Option<Real> {
        match self {
            Cutoff::Infinite => None,
            Cutoff::Finite(c) => Some(Real::from_rational(c, ctx)),
        }
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cutoff::Infinite => f.write_str("inf"),
            Cutoff::Finite(c) => write!(f, "{c}"),
        }
    }
}

impl FromStr for Cutoff {
    type Err = Error;

    /// Accepts `inf`, integers, decimals such as `0.25`, and fractions such as `1/3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
            return Ok(Cutoff::Infinite);
        }
        Cutoff::finite(parse_rational(s)?)
    }
}

/// Parses a decimal or `p/q` string exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::domain(format!("cannot parse {s:?} as a number"));
    if s.contains('/') {
        return BigRational::from_str_radix(s, 10).map_err(|_| bad());
    }
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|ch| ch.is_ascii_digit()) {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let num = BigInt::from_str_radix(if joined.is_empty() { "0" } else { &joined }, 10).map_err(|_| bad())?;
    let den = BigInt::from(BigInt::u_pow_u(10, frac_part.len() as u32));
    let value = BigRational::from((num, den));
    Ok(if negative { -value } else { value })
}

/// `⌊c√n⌋` for rational `c = p/q ≥ 0`, via `⌊√(p²n)⌋ div q`.
fn floor_c_sqrt(c: &BigRational, n: u64) -> u64 {
    let (p, q) = c.clone().into_numer_denom();
    let root = (p.clone() * &p * n).sqrt();
    let m = root / q;
    m.to_u64().expect("truncation index exceeds u64")
}

/// The three distributions with telescoping truncated means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistributionKind {
    Poisson,
    Gamma,
    BinomialHalf,
}

/// One evaluated `L_n(c)` with its optional direct-summation twin.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMeanResult {
    pub n: u64,
    pub c: Cutoff,
    pub closed_form: Real,
    pub brute_force: Option<Real>,
    pub target: Real,
}

impl TruncatedMeanResult {
    /// `|closed − brute| ≤ max(1e-25, 2^(16-bits)|closed|)`, vacuous without a twin.
    pub fn is_consistent(&self, ctx: &PrecisionContext) -> bool {
        let Some(brute) = &self.brute_force else {
            return true;
        };
        let allowed = Real::from_f64(1e-25, ctx).max(&self.closed_form.abs() * ctx.rel_bound(16));
        (&self.closed_form - brute).abs() <= allowed
    }
}

/// `L(c) = (2π)^(-1/2)(1 - e^(-c²/2))`.
pub fn normal_l(c: &Cutoff, ctx: &PrecisionContext) -> Real {
    let w = ctx.working();
    let phi0 = (Real::pi(&w) * 2).sqrt().recip();
    let value = match c.to_real(&w) {
        None => phi0,
        Some(c) => {
            // 1 - e^(-x) = -expm1(-x), formed without cancellation for small c
            let x = c.square().mul_pow2(-1);
            let one_minus = -Real::from_float((-x).into_inner().exp_m1());
            phi0 * one_minus
        }
    };
    value.round_to(ctx)
}

/// `ln(√n e^(-n) n^n / n!)`.
fn log_scaled_peak(n: u64, w: &PrecisionContext) -> Real {
    let nr = Real::from_u64(n, w);
    let ln_n = nr.ln();
    (&nr + Real::from_f64(0.5, w)) * ln_n - &nr - log_factorial(n, w)
}

/// `n^m / ((n+1)⋯(n+m))` exactly.
fn poisson_tail_ratio(n: u64, m: u64) -> BigRational {
    BigRational::from((BigInt::from(BigInt::from(n).pow(m as u32)), rising_product(n, m)))
}

fn require_positive(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::domain("n must be at least 1"))
    } else {
        Ok(())
    }
}

/// Poisson `L_n(c)` from the telescoped sum `√n {p_n(n) - p_n(n+m)}`, `m = ⌊c√n⌋`.
pub fn poisson_ln(n: u64, c: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    let w = ctx.working();
    let peak = log_scaled_peak(n, &w).exp();
    let value = match c.steps(n) {
        None => peak,
        Some(m) => {
            let rest = BigRational::from(1) - poisson_tail_ratio(n, m);
            peak * Real::from_rational(&rest, &w)
        }
    };
    Ok(value.round_to(ctx))
}

/// `Σ_{j=n}^{n+m} (j-n) n^j/j!` exactly; for `m = None` the sum runs until both
/// the next term and the geometric bound on the remainder fall below
/// `2^(-bits/2)` of the running sum.
fn excess_sum(n: u64, m: Option<u64>, ctx: &PrecisionContext) -> BigRational {
    let w = ctx.working();
    let threshold = ctx.pow2((ctx.bits() / 2) as i32);
    // q = n^j / j! at j = n
    let mut q = BigRational::from((BigInt::from(BigInt::from(n).pow(n as u32)), factorial(n)));
    let mut sum = BigRational::new();
    let mut j = n;
    loop {
        if let Some(m) = m {
            if j > n + m {
                break;
            }
        }
        let term = q.clone() * BigInt::from(j - n);
        sum += &term;
        q *= BigRational::from((n, j + 1));
        j += 1;
        if m.is_none() && j > n + 1 {
            // next term t_j and the ratio r = t_{j+1}/t_j, which decreases in j
            let next = q.clone() * BigInt::from(j - n);
            let ratio = BigRational::from((BigInt::from(j + 1 - n) * n, BigInt::from(j - n) * (j + 1)));
            if ratio < 1 {
                let scale = Real::from_rational(&sum, &w) * &threshold;
                let next_r = Real::from_rational(&next, &w);
                let tail = &next_r / (Real::one(&w) - Real::from_rational(&ratio, &w));
                if next_r < scale && tail < scale {
                    break;
                }
            }
        }
    }
    sum
}

/// Poisson `L_n(c)` by direct summation of `((j-n)/√n) p_n(j)`.
pub fn poisson_ln_bruteforce(n: u64, c: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    let w = ctx.working();
    let sum = excess_sum(n, c.steps(n), ctx);
    let nr = Real::from_u64(n, &w);
    let value = Real::from_rational(&sum, &w) * (-&nr).exp() / nr.sqrt();
    Ok(value.round_to(ctx))
}

/// `n^m / ((n+1)⋯(n+m))` with `m = ⌊c√n⌋`; tends to `e^(-c²/2)`.
pub fn poisson_product_ratio_exact(n: u64, c: &BigRational) -> Result<BigRational> {
    require_positive(n)?;
    Ok(poisson_tail_ratio(n, floor_c_sqrt(c, n)))
}

pub fn poisson_product_ratio(n: u64, c: &BigRational, ctx: &PrecisionContext) -> Result<Real> {
    Ok(Real::from_rational(&poisson_product_ratio_exact(n, c)?, ctx))
}

/// `E|Y_n - n| = 2 e^(-n) n^(n+1) / n!` for `Y_n ~ Pois(n)`.
pub fn poisson_mad(n: u64, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    let w = ctx.working();
    let value = (log_scaled_peak(n, &w) + Real::from_u64(n, &w).ln().mul_pow2(-1))
        .exp()
        .mul_pow2(1);
    Ok(value.round_to(ctx))
}

/// `Σ_j |j-n| p_n(j)`, exact below `n` and certified-truncated above.
pub fn poisson_mad_bruteforce(n: u64, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    let w = ctx.working();
    let mut lower = BigRational::new();
    let mut q = BigRational::from(1);
    for j in 0..n {
        lower += q.clone() * BigInt::from(n - j);
        q *= BigRational::from((n, j + 1));
    }
    let total = lower + excess_sum(n, None, ctx);
    let value = Real::from_rational(&total, &w) * (-Real::from_u64(n, &w)).exp();
    Ok(value.round_to(ctx))
}

/// Gamma `L_n(∞) = √n e^(-n) n^n / n!`; the limit is `1/√(2π)`.
pub fn gamma_ln_inf(n: u64, ctx: &PrecisionContext) -> Result<Real> {
    poisson_ln(n, &Cutoff::Infinite, ctx)
}

/// Gamma `L_n(c) = √n e^(-n) n^n/n! · {1 - e^(-c√n)(1 + c/√n)^n}`.
pub fn gamma_ln(n: u64, c: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    let Cutoff::Finite(cr) = c else {
        return gamma_ln_inf(n, ctx);
    };
    let w = ctx.working();
    let peak = log_scaled_peak(n, &w).exp();
    let value = peak * (Real::one(&w) - gamma_exp_ratio(n, cr, &w)?);
    Ok(value.round_to(ctx))
}

/// `∫_n^(n+c√n) ((x-n)/√n) g_n(x) dx` by adaptive quadrature.
pub fn gamma_ln_quadrature(n: u64, c: &BigRational, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    let w = ctx.working();
    let nr = Real::from_u64(n, &w);
    let sqrt_n = nr.sqrt();
    let upper = &nr + Real::from_rational(c, &w) * &sqrt_n;
    let log_gamma_n = log_factorial(n - 1, &w);
    let n_minus_1 = Real::from_u64(n - 1, &w);
    let integrand = |x: &Real| {
        let log_density = &n_minus_1 * x.ln() - x - &log_gamma_n;
        (x - &nr) / &sqrt_n * log_density.exp()
    };
    let value = adaptive_integrate(
        integrand,
        &nr,
        &upper,
        &ctx.pow2((ctx.bits() / 2) as i32),
        60,
        PanelRule::default(),
        &w,
    )?;
    Ok(value.round_to(ctx))
}

/// `e^(-c√n)(1 + c/√n)^n`, formed as `exp(n ln(1 + c/√n) - c√n)`.
pub fn gamma_exp_ratio(n: u64, c: &BigRational, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    let w = ctx.working();
    let sqrt_n = Real::from_u64(n, &w).sqrt();
    let cr = Real::from_rational(c, &w);
    let exponent = (&cr / &sqrt_n).ln_1p() * Real::from_u64(n, &w) - &cr * &sqrt_n;
    Ok(exponent.exp().round_to(ctx))
}

/// `x g_n(x) / g_(n+1)(x)` in log space, which is `n` identically.
pub fn gamma_identity_check(n: u64, x: &Real, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    if !x.is_positive() {
        return Err(Error::domain("x must be positive"));
    }
    let w = ctx.working();
    let x = x.round_to(&w);
    let ln_x = x.ln();
    let log_g = |k: u64| Real::from_u64(k - 1, &w) * &ln_x - &x - log_factorial(k - 1, &w);
    Ok((&ln_x + log_g(n) - log_g(n + 1)).exp().round_to(ctx))
}

fn require_even(n: u64) -> Result<()> {
    if n < 2 || n % 2 == 1 {
        Err(Error::domain(format!("n = {n} must be even and at least 2")))
    } else {
        Ok(())
    }
}

fn pow2_rational(k: u64) -> BigRational {
    BigRational::from((1, BigInt::from(1) << (k as u32)))
}

/// `b_n(j) = C(n, j) 2^(-n)`, zero outside `0 ≤ j ≤ n`.
pub fn binomial_half_pmf(n: u64, j: i64) -> BigRational {
    BigRational::from(binomial(n, j)) * pow2_rational(n)
}

/// The three readings of the symmetric-binomial `L_n(∞)`, all scaled by `2/√n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialTruncated {
    pub n: u64,
    /// `½√n {b_(n-1)(n/2-1) - 2^(1-n)}` as printed.
    pub printed: Real,
    /// `½√n b_(n-1)(n/2-1)`, the full telescoped sum.
    pub telescoped: Real,
    /// `Σ_(j ≥ n/2) ((j-n/2)/(½√n)) b_n(j)` enumerated exactly.
    pub brute_force: Real,
    /// Exact `Σ_(j ≥ n/2) (j-n/2) b_n(j)`.
    pub excess: BigRational,
}

pub fn binomial_ln_inf(n: u64, ctx: &PrecisionContext) -> Result<BinomialTruncated> {
    require_even(n)?;
    let half = (n / 2) as i64;
    let peak = binomial_half_pmf(n - 1, half - 1);
    let printed = peak.clone() - pow2_rational(n - 1);
    let mut excess = BigRational::new();
    for j in half..=n as i64 {
        excess += binomial_half_pmf(n, j) * BigInt::from(j - half);
    }
    let w = ctx.working();
    let half_sqrt_n = Real::from_u64(n, &w).sqrt().mul_pow2(-1);
    let scale = |q: &BigRational| (Real::from_rational(q, &w) * &half_sqrt_n).round_to(ctx);
    let brute = excess.clone() * BigRational::from(4) / BigInt::from(n);
    Ok(BinomialTruncated {
        n,
        printed: scale(&printed),
        telescoped: scale(&peak),
        brute_force: scale(&brute),
        excess,
    })
}

/// Binomial `L_n(c) = ½√n {b_(n-1)(n/2-1) - b_(n-1)(j_n)}`, `j_n = ⌊(n + c√n)/2⌋`.
pub fn binomial_ln(n: u64, c: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    require_even(n)?;
    let half = (n / 2) as i64;
    let upper = match c.steps(n) {
        None => BigRational::new(),
        Some(m) => binomial_half_pmf(n - 1, ((n + m) / 2) as i64),
    };
    let diff = binomial_half_pmf(n - 1, half - 1) - upper;
    let w = ctx.working();
    Ok((Real::from_rational(&diff, &w) * Real::from_u64(n, &w).sqrt().mul_pow2(-1)).round_to(ctx))
}

/// Direct sum over `n/2 ≤ j ≤ j_n` of `((j-n/2)/(½√n)) b_n(j)`.
pub fn binomial_ln_bruteforce(n: u64, c: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    require_even(n)?;
    let half = (n / 2) as i64;
    let top = c.steps(n).map_or(n, |m| ((n + m) / 2).min(n)) as i64;
    let mut sum = BigRational::new();
    for j in half..=top {
        sum += binomial_half_pmf(n, j) * BigInt::from(j - half);
    }
    let w = ctx.working();
    let value = Real::from_rational(&sum, &w).mul_pow2(1) / Real::from_u64(n, &w).sqrt();
    Ok(value.round_to(ctx))
}

/// `½√n C(n-1, n/2-1) 2^(1-n)` for even `n`, `½√(n+1) C(n, (n-1)/2) 2^(-n)` for odd `n`.
pub fn binomial_half_peak(n: u64, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    let w = ctx.working();
    let (root, q) = if n.is_multiple_of(2) {
        (n, binomial_half_pmf(n - 1, (n / 2) as i64 - 1))
    } else {
        (n + 1, binomial_half_pmf(n, ((n - 1) / 2) as i64))
    };
    Ok((Real::from_u64(root, &w).sqrt().mul_pow2(-1) * Real::from_rational(&q, &w)).round_to(ctx))
}

/// `C(n, ⌊n/2 + c√n/2⌋) / C(n, ⌊n/2⌋)`.
pub fn binomial_ratio(n: u64, c: &BigRational) -> Result<BigRational> {
    require_positive(n)?;
    let j = (n + floor_c_sqrt(c, n)) / 2;
    if j > n {
        return Err(Error::OutOfRange(format!("c = {c} is too large for n = {n}")));
    }
    Ok(BigRational::from((binomial(n, j as i64), binomial(n, (n / 2) as i64))))
}

/// `d_n = √n C(n-1, n/2-1) 2^(-n)`.
pub fn binomial_mad_dn(n: u64, ctx: &PrecisionContext) -> Result<Real> {
    require_even(n)?;
    let q = binomial_half_pmf(n - 1, (n / 2) as i64 - 1) / BigInt::from(2);
    let w = ctx.working();
    Ok((Real::from_u64(n, &w).sqrt() * Real::from_rational(&q, &w)).round_to(ctx))
}

/// `D_n(p) = E|X/n - p|` for `X ~ Bin(n, p)`, exactly.
pub fn binomial_mad(n: u64, p: &BigRational) -> BigRational {
    let (a, big_n) = p.clone().into_numer_denom();
    let b = big_n.clone() - &a;
    let mut num = BigInt::new();
    let mut a_pow = BigInt::from(1);
    let mut b_pows = Vec::with_capacity(n as usize + 1);
    let mut bp = BigInt::from(1);
    for _ in 0..=n {
        b_pows.push(bp.clone());
        bp *= &b;
    }
    for j in 0..=n {
        let dev = (BigInt::from(j) * &big_n - BigInt::from(n) * &a).abs();
        num += dev * binomial(n, j as i64) * &a_pow * &b_pows[(n - j) as usize];
        a_pow *= &a;
    }
    let den = BigInt::from(n) * BigInt::from((&big_n).pow(n as u32 + 1));
    BigRational::from((num, den))
}

/// Grid maximum of `D_n(p)` with its location.
#[derive(Debug, Clone, PartialEq)]
pub struct MadMaximum {
    pub p: BigRational,
    pub d_max: BigRational,
    /// `√n · d_max`.
    pub scaled: Real,
}

const MAD_REFINEMENTS: usize = 3;

/// Maximizes `D_n(p)` over `p = k/(grid_size-1)`, then refines three times
/// around the best point with ten times finer spacing.
pub fn binomial_mad_max(n: u64, grid_size: u64, ctx: &PrecisionContext) -> Result<MadMaximum> {
    require_positive(n)?;
    if grid_size < 2 {
        return Err(Error::domain("grid needs at least two points"));
    }
    let mut step = BigRational::from((1, grid_size - 1));
    let mut best_p = BigRational::new();
    let mut best = BigRational::new();
    for k in 0..grid_size {
        let p = BigRational::from((k, grid_size - 1));
        let d = binomial_mad(n, &p);
        if d > best {
            best = d;
            best_p = p;
        }
    }
    for _ in 0..MAD_REFINEMENTS {
        step /= 10;
        let centre = best_p.clone();
        for k in -10i64..=10 {
            let p = centre.clone() + step.clone() * k;
            if p.cmp0().is_lt() || p > 1 {
                continue;
            }
            let d = binomial_mad(n, &p);
            if d > best {
                best = d;
                best_p = p;
            }
        }
    }
    let w = ctx.working();
    let scaled = (Real::from_u64(n, &w).sqrt() * Real::from_rational(&best, &w)).round_to(ctx);
    Ok(MadMaximum {
        p: best_p,
        d_max: best,
        scaled,
    })
}

/// `p_n = C(2n, n) 2^(-2n)`.
pub fn random_walk_return(n: u64) -> Result<BigRational> {
    require_positive(n)?;
    Ok(binomial_half_pmf(2 * n, n as i64))
}

/// `E N_(2n) = Σ_(i=1)^n p_i`.
pub fn random_walk_expected_visits(n: u64) -> Result<BigRational> {
    require_positive(n)?;
    let mut p = BigRational::from(1);
    let mut total = BigRational::new();
    for i in 1..=n {
        p *= BigRational::from((2 * i - 1, 2 * i));
        total += &p;
    }
    Ok(total)
}

/// Evaluates `L_n(c)` for `kind`, with the direct twin when one exists.
pub fn truncated_mean(
    kind: DistributionKind,
    n: u64,
    c: &Cutoff,
    with_brute_force: bool,
    ctx: &PrecisionContext,
) -> Result<TruncatedMeanResult> {
    let (closed_form, brute_force) = match kind {
        DistributionKind::Poisson => (
            poisson_ln(n, c, ctx)?,
            with_brute_force.then(|| poisson_ln_bruteforce(n, c, ctx)).transpose()?,
        ),
        DistributionKind::Gamma => {
            let brute = match (c, with_brute_force) {
                (Cutoff::Finite(cr), true) => Some(gamma_ln_quadrature(n, cr, ctx)?),
                _ => None,
            };
            (gamma_ln(n, c, ctx)?, brute)
        }
        DistributionKind::BinomialHalf => (
            binomial_ln(n, c, ctx)?,
            with_brute_force
                .then(|| binomial_ln_bruteforce(n, c, ctx))
                .transpose()?,
        ),
    };
    Ok(TruncatedMeanResult {
        n,
        c: c.clone(),
        closed_form,
        brute_force,
        target: normal_l(c, ctx),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::from((num, den))
    }

    fn close(a: &Real, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() < tol
    }

    #[test]
    fn cutoff_parsing_and_floor_index() {
        assert_eq!("inf".parse::<Cutoff>().unwrap(), Cutoff::Infinite);
        assert_eq!("0.25".parse::<Cutoff>().unwrap(), Cutoff::Finite(q(1, 4)));
        assert_eq!("2/3".parse::<Cutoff>().unwrap(), Cutoff::Finite(q(2, 3)));
        assert_eq!("3".parse::<Cutoff>().unwrap(), Cutoff::Finite(q(3, 1)));
        assert!("-1".parse::<Cutoff>().is_err());
        assert!("abc".parse::<Cutoff>().is_err());
        // √10000 = 100 exactly; √2·1 = 1.41
        assert_eq!(Cutoff::Finite(q(1, 1)).steps(10_000), Some(100));
        assert_eq!(Cutoff::Finite(q(1, 1)).steps(2), Some(1));
        assert_eq!(Cutoff::Finite(q(1, 2)).steps(16), Some(2));
        assert_eq!(Cutoff::Finite(q(1, 3)).steps(9), Some(1));
        assert_eq!(Cutoff::Finite(q(99, 100)).steps(1), Some(0));
    }

    #[test]
    fn normal_l_examples() {
        let c = ctx();
        assert!(close(&normal_l(&Cutoff::Infinite, &c), 0.3989422804014327, 1e-15));
        assert!(close(
            &normal_l(&Cutoff::Finite(q(1, 1)), &c),
            0.1569715558822893,
            1e-15
        ));
        let tiny = normal_l(&Cutoff::Finite(q(1, 1_000_000_000)), &c);
        assert!(tiny.is_positive() && tiny.to_f64() < 1e-18);
    }

    #[test]
    fn poisson_examples() {
        let c = ctx();
        let e_inv = Real::from_i64(-1, &c).exp();
        assert!(poisson_ln(1, &Cutoff::Infinite, &c).unwrap().rel_diff(&e_inv) <= c.rel_bound(4));
        // the infinite sum is cut once the certified remainder is below 2^(-bits/2)
        let cut_tol = c.pow2((c.bits() / 2) as i32);
        assert!(
            poisson_ln_bruteforce(1, &Cutoff::Infinite, &c)
                .unwrap()
                .rel_diff(&e_inv)
                <= cut_tol
        );
        assert!(poisson_ln_bruteforce(5, &Cutoff::Finite(q(1, 10)), &c)
            .unwrap()
            .is_zero());
        let tol = Real::from_f64(1e-25, &c);
        for (n, cut) in [(4, Cutoff::Finite(q(1, 1))), (9, Cutoff::Finite(q(1, 1)))] {
            let a = poisson_ln(n, &cut, &c).unwrap();
            let b = poisson_ln_bruteforce(n, &cut, &c).unwrap();
            assert!((a - b).abs() <= tol);
        }
        // (4, c = 1): ½·4⁵/5! + 1·4⁶/6!, times e^-4
        let direct = Real::from_rational(&(q(512, 120) + q(4096, 720)), &c) * Real::from_i64(-4, &c).exp();
        let closed = poisson_ln(4, &Cutoff::Finite(q(1, 1)), &c).unwrap();
        assert!(closed.rel_diff(&direct) <= c.rel_bound(8));
    }

    #[test]
    fn poisson_ratio_and_mad_examples() {
        let c = ctx();
        assert_eq!(poisson_product_ratio_exact(50, &q(1, 10)).unwrap(), q(1, 1));
        let r = poisson_product_ratio(100, &q(1, 1), &c).unwrap();
        assert!(close(&r, 0.5876057, 1e-7), "{r}");
        let mad1 = poisson_mad(1, &c).unwrap();
        assert!(mad1.rel_diff(&(Real::from_i64(-1, &c).exp() * 2)) <= c.rel_bound(4));
        let tol = Real::from_f64(1e-25, &c);
        for n in [1u64, 4, 17] {
            let diff = poisson_mad(n, &c).unwrap() - poisson_mad_bruteforce(n, &c).unwrap();
            assert!(diff.abs() <= tol, "n = {n}");
        }
    }

    #[test]
    fn gamma_examples() {
        let c = ctx();
        assert!(close(&gamma_ln_inf(1, &c).unwrap(), (-1f64).exp(), 1e-15));
        // √2 e^-2 · 4/2
        assert!(close(&gamma_ln_inf(2, &c).unwrap(), 0.3827859860416437, 1e-15));
        assert!(close(&gamma_exp_ratio(100, &q(1, 1), &c).unwrap(), 0.6256388, 1e-7));
        let small = gamma_exp_ratio(100, &q(1, 1_000_000_000_000), &c).unwrap();
        assert!((small.to_f64() - 1.0).abs() < 1e-20);
        for (n, x, want) in [(3u64, 2.5, 3i64), (10, 10.0, 10), (50, 1.0, 50)] {
            let v = gamma_identity_check(n, &Real::from_f64(x, &c), &c).unwrap();
            assert!(v.rel_diff(&Real::from_i64(want, &c)) <= c.rel_bound(16));
        }
    }

    #[test]
    fn gamma_finite_cutoff_matches_quadrature() {
        let c = ctx();
        for (n, cut) in [(5u64, q(1, 1)), (20, q(1, 2)), (40, q(2, 1))] {
            let closed = gamma_ln(n, &Cutoff::Finite(cut.clone()), &c).unwrap();
            let quad = gamma_ln_quadrature(n, &cut, &c).unwrap();
            assert!(closed.rel_diff(&quad) <= Real::from_f64(1e-30, &c), "n = {n}");
        }
    }

    #[test]
    fn binomial_examples() {
        let c = ctx();
        let four = binomial_ln_inf(4, &c).unwrap();
        assert_eq!(four.excess, q(3, 8));
        assert!(close(&four.brute_force, 0.375, 1e-30));
        assert!(close(&four.telescoped, 0.375, 1e-30));
        assert!(close(&four.printed, 0.25, 1e-30));
        assert!(binomial_ln_inf(5, &c).is_err());
        assert!(binomial_ln(7, &Cutoff::Infinite, &c).is_err());
        assert_eq!(binomial_ratio(100, &q(1, 10)).unwrap(), q(1, 1));
        let r = binomial_ratio(100, &q(1, 1)).unwrap();
        assert_eq!(r, BigRational::from((binomial(100, 55), binomial(100, 50))));
        assert!((r.to_f64() - 0.6090559).abs() < 1e-7);
        assert!(matches!(binomial_ratio(4, &q(3, 1)), Err(Error::OutOfRange(_))));
        let odd = binomial_half_peak(5, &c).unwrap();
        // ½√6 · C(5,2)/32
        assert!(close(&odd, 0.5 * 6f64.sqrt() * 10.0 / 32.0, 1e-15));
    }

    #[test]
    fn binomial_finite_cutoff_telescopes() {
        let c = ctx();
        for n in [2u64, 10, 40] {
            for cut in [
                Cutoff::Finite(q(1, 2)),
                Cutoff::Finite(q(1, 1)),
                Cutoff::Finite(q(3, 1)),
                Cutoff::Infinite,
            ] {
                let a = binomial_ln(n, &cut, &c).unwrap();
                let b = binomial_ln_bruteforce(n, &cut, &c).unwrap();
                assert!((a - b).abs() <= c.rel_bound(8), "n = {n}, c = {cut}");
            }
        }
    }

    #[test]
    fn binomial_brute_force_error_decreases() {
        let c = ctx();
        let target = normal_l(&Cutoff::Infinite, &c);
        let errs: Vec<Real> = [8u64, 16, 32, 64, 128, 256]
            .iter()
            .map(|&n| (binomial_ln_inf(n, &c).unwrap().brute_force - &target).abs())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn mad_examples() {
        let c = ctx();
        assert!(close(&binomial_mad_dn(4, &c).unwrap(), 0.375, 1e-30));
        assert!(binomial_mad_dn(3, &c).is_err());
        assert_eq!(binomial_mad(4, &q(1, 2)), q(3, 16));
        assert_eq!(binomial_mad(1, &q(1, 4)), q(3, 8));
        let max = binomial_mad_max(4, 1001, &c).unwrap();
        // D_4 peaks near p = 0.4 and 0.6, above D_4(½)
        assert!(max.d_max > q(3, 16));
        assert!((max.scaled.to_f64() - 0.41472).abs() < 1e-4, "{}", max.scaled);
    }

    #[test]
    fn random_walk_examples() {
        assert_eq!(random_walk_return(1).unwrap(), q(1, 2));
        assert_eq!(random_walk_return(2).unwrap(), q(3, 8));
        assert_eq!(random_walk_expected_visits(2).unwrap(), q(7, 8));
        assert!(random_walk_return(0).is_err());
    }

    #[test]
    fn telescoping_matches_direct_sum_small_grid() {
        let c = ctx();
        let tol = Real::from_f64(1e-25, &c);
        let cuts = [
            Cutoff::Finite(q(1, 2)),
            Cutoff::Finite(q(1, 1)),
            Cutoff::Finite(q(2, 1)),
            Cutoff::Infinite,
        ];
        for n in [1u64, 2, 7, 30, 60] {
            for cut in &cuts {
                let r = truncated_mean(DistributionKind::Poisson, n, cut, true, &c).unwrap();
                assert!(r.is_consistent(&c));
                let gap = (&r.closed_form - r.brute_force.as_ref().unwrap()).abs();
                assert!(gap <= tol, "n = {n}, c = {cut}");
            }
        }
    }

    #[test]
    fn poisson_partial_mass_is_bounded() {
        let c = ctx();
        let w = c.working();
        for n in [1u64, 10, 40] {
            let mut q_j = BigRational::from(1);
            let mut partial = BigRational::new();
            let scale = (-Real::from_u64(n, &w)).exp();
            let mut last = Real::zero(&w);
            for j in 0..(6 * n + 40) {
                partial += &q_j;
                q_j *= BigRational::from((n, j + 1));
                let mass = Real::from_rational(&partial, &w) * &scale;
                assert!(mass <= Real::one(&w) && mass >= last);
                last = mass;
            }
            assert!((Real::one(&w) - last) < Real::from_f64(1e-12, &w));
        }
    }

    #[test]
    fn binomial_recurrence_holds_exactly() {
        for n in 1..=100u64 {
            for j in 0..=n as i64 {
                let lhs = binomial_half_pmf(n, j);
                let rhs = (binomial_half_pmf(n - 1, j - 1) + binomial_half_pmf(n - 1, j)) / BigInt::from(2);
                assert_eq!(lhs, rhs);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn gamma_identity_is_n(n in 1u64..400, x in 1e-3f64..500.0) {
            let c = ctx();
            let v = gamma_identity_check(n, &Real::from_f64(x, &c), &c).unwrap();
            prop_assert!(v.rel_diff(&Real::from_u64(n, &c)) <= c.rel_bound(16));
        }

        #[test]
        fn ratios_lie_in_unit_interval(n in 1u64..5000, num in 1i64..40) {
            let c = ctx();
            let cut = q(num, 10);
            let p = poisson_product_ratio_exact(n, &cut).unwrap();
            prop_assert!(p.cmp0().is_gt() && p <= 1);
            let g = gamma_exp_ratio(n, &cut, &c).unwrap();
            prop_assert!(g.is_positive() && g <= Real::one(&c));
            if let Ok(b) = binomial_ratio(n, &cut) {
                prop_assert!(b.cmp0().is_gt() && b <= 1);
            }
        }
    }
}
