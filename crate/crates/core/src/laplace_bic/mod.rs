//! Laplace approximation of `∫ e^g`, a reference quadrature for the same
//! integral, and the four flat-prior BIC case studies.

mod bic;
mod quadrature;

pub use bic::{bic_case, bic_integral_check, bic_problem, BicCase, BicComparison};
pub use quadrature::{adaptive_integrate, GaussLegendre, PanelRule};

use crate::exact_arith::{LogReal, PrecisionContext, Real};
use crate::{Error, Result};

pub type ScalarFn = Box<dyn Fn(&Real) -> Real + Send + Sync>;

const MAX_NEWTON_ITERATIONS: usize = 200;
const MAX_STEP_HALVINGS: usize = 80;

/// Open interval with optionally infinite ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lower: Option<Real>,
    pub upper: Option<Real>,
}

impl Domain {
    pub fn real_line() -> Self {
        Domain {
            lower: None,
            upper: None,
        }
    }

    pub fn positive(ctx: &PrecisionContext) -> Self {
        Domain {
            lower: Some(Real::zero(ctx)),
            upper: None,
        }
    }

    pub fn interval(lower: Real, upper: Real) -> Self {
        Domain {
            lower: Some(lower),
            upper: Some(upper),
        }
    }

    pub fn contains(&self, x: &Real) -> bool {
        self.lower.as_ref().is_none_or(|a| x > a) && self.upper.as_ref().is_none_or(|b| x < b)
    }
}

/// A log-integrand `g` with optional analytic derivatives.
///
/// Without derivatives, central differences with step `2^(-bits/3)` stand in.
pub struct LaplaceProblem {
    pub log_integrand: ScalarFn,
    pub first_deriv: Option<ScalarFn>,
    pub second_deriv: Option<ScalarFn>,
    pub domain: Domain,
    pub initial_guess: Real,
}

impl LaplaceProblem {
    pub fn new(log_integrand: ScalarFn, domain: Domain, initial_guess: Real) -> Self {
        LaplaceProblem {
            log_integrand,
            first_deriv: None,
            second_deriv: None,
            domain,
            initial_guess,
        }
    }

    pub fn with_derivatives(mut self, first: ScalarFn, second: ScalarFn) -> Self {
        self.first_deriv = Some(first);
        self.second_deriv = Some(second);
        self
    }

    pub fn without_derivatives(mut self) -> Self {
        self.first_deriv = None;
        self.second_deriv = None;
        self
    }

    /// `g(x) = n ln x - x` on `(0, ∞)`, whose integral of `e^g` is `n!`.
    pub fn gamma(n: u64, ctx: &PrecisionContext) -> Self {
        let w = ctx.working();
        let nn = Real::from_u64(n, &w);
        let (n1, n2) = (nn.clone(), nn.clone());
        LaplaceProblem::new(
            Box::new(move |x: &Real| &nn * x.ln() - x),
            Domain::positive(ctx),
            Real::one(ctx),
        )
        .with_derivatives(
            Box::new(move |x: &Real| &n1 / x - 1),
            Box::new(move |x: &Real| -(&n2 / x.square())),
        )
    }

    /// `g(x) = -x²/2` on the real line.
    pub fn gaussian(ctx: &PrecisionContext) -> Self {
        LaplaceProblem::new(
            Box::new(|x: &Real| -(x.square().mul_pow2(-1))),
            Domain::real_line(),
            Real::one(ctx),
        )
        .with_derivatives(Box::new(|x: &Real| -x), Box::new(|x: &Real| -Real::one_like(x)))
    }

    pub fn value(&self, x: &Real) -> Real {
        (self.log_integrand)(x)
    }

    fn fd_step(ctx: &PrecisionContext) -> Real {
        ctx.pow2((ctx.bits() / 3) as i32)
    }

    pub fn first(&self, x: &Real, ctx: &PrecisionContext) -> Real {
        match &self.first_deriv {
            Some(d) => d(x),
            None => {
                let h = Self::fd_step(ctx);
                (self.value(&(x + &h)) - self.value(&(x - &h))) / h.mul_pow2(1)
            }
        }
    }

    pub fn second(&self, x: &Real, ctx: &PrecisionContext) -> Real {
        match &self.second_deriv {
            Some(d) => d(x),
            None => {
                let h = Self::fd_step(ctx);
                (self.value(&(x + &h)) - self.value(x).mul_pow2(1) + self.value(&(x - &h))) / h.square()
            }
        }
    }
}

/// Location and shape of the maximum of `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub x0: Real,
    pub g_max: Real,
    /// `c = -g''(x0)`.
    pub curvature: Real,
}

/// Damped Newton iteration on `g'`.
///
/// Converged when `|g'(x)| ≤ 2^(-bits/2)·max(1, |x|)`; each step is halved
/// until it stays inside the domain and does not decrease `g`.
pub fn find_mode(problem: &LaplaceProblem, ctx: &PrecisionContext) -> Result<Mode> {
    let w = ctx.working();
    let mut x = problem.initial_guess.round_to(&w);
    if !problem.domain.contains(&x) {
        return Err(Error::domain("initial guess lies outside the domain"));
    }
    let tol = ctx.pow2((ctx.bits() / 2) as i32);
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let d1 = problem.first(&x, &w);
        let d2 = problem.second(&x, &w);
        let scale = x.abs().max(Real::one(&w));
        if d1.abs() <= &tol * &scale {
            // one polishing step while it stays in the domain
            if d2.is_negative() {
                let polished = &x - &d1 / &d2;
                if problem.domain.contains(&polished) {
                    x = polished;
                }
            }
            return finish(problem, x, ctx);
        }
        let step = if d2.is_negative() { -(&d1 / &d2) } else { &d1 * &scale };
        x = damped_step(problem, &x, step);
    }
    Err(Error::NoConvergence(MAX_NEWTON_ITERATIONS))
}

fn damped_step(problem: &LaplaceProblem, x: &Real, mut step: Real) -> Real {
    let g0 = problem.value(x);
    for _ in 0..MAX_STEP_HALVINGS {
        let candidate = x + &step;
        if problem.domain.contains(&candidate) {
            let g1 = problem.value(&candidate);
            if g1.is_finite() && g1 >= g0 {
                return candidate;
            }
        }
        step = step.mul_pow2(-1);
    }
    // step is below rounding; keep it if it is admissible at all
    let candidate = x + &step;
    if problem.domain.contains(&candidate) {
        candidate
    } else {
        x.clone()
    }
}

fn finish(problem: &LaplaceProblem, x: Real, ctx: &PrecisionContext) -> Result<Mode> {
    let w = ctx.working();
    let curvature = -problem.second(&x, &w);
    if !curvature.is_positive() {
        return Err(Error::NegativeCurvature(curvature.format_sci(12)));
    }
    Ok(Mode {
        g_max: problem.value(&x).round_to(ctx),
        x0: x.round_to(ctx),
        curvature: curvature.round_to(ctx),
    })
}

/// `e^(g_max) √(2π/c)` in log space.
pub fn laplace_approx_log(problem: &LaplaceProblem, ctx: &PrecisionContext) -> Result<LogReal> {
    let mode = find_mode(problem, ctx)?;
    Ok(laplace_from_mode(&mode, ctx))
}

fn laplace_from_mode(mode: &Mode, ctx: &PrecisionContext) -> LogReal {
    let w = ctx.working();
    let log_width = ((Real::pi(&w) * 2) / mode.curvature.round_to(&w)).ln().mul_pow2(-1);
    LogReal::from_log((mode.g_max.round_to(&w) + log_width).round_to(ctx))
}

/// `e^(g_max) √(2π/c)`.
pub fn laplace_approx(problem: &LaplaceProblem, ctx: &PrecisionContext) -> Result<Real> {
    laplace_approx_log(problem, ctx)?.to_real(ctx)
}

/// Settings for [`integrate_exp`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tolerance: Real,
    pub max_depth: u32,
    /// `Λ`: integrate only where `g(x) ≥ g_max - Λ`.
    pub tail_cut: Real,
    pub rule: PanelRule,
}

impl QuadratureConfig {
    pub fn new(ctx: &PrecisionContext) -> Self {
        QuadratureConfig {
            rel_tolerance: ctx.pow2((ctx.bits() / 2) as i32),
            max_depth: 60,
            tail_cut: Real::from_i64(60, ctx),
            rule: PanelRule::default(),
        }
    }

    pub fn with_tail_cut(mut self, tail_cut: Real) -> Self {
        self.tail_cut = tail_cut;
        self
    }

    pub fn with_rel_tolerance(mut self, rel_tolerance: Real) -> Self {
        self.rel_tolerance = rel_tolerance;
        self
    }

    pub fn with_rule(mut self, rule: PanelRule) -> Self {
        self.rule = rule;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.rel_tolerance.is_positive() {
            return Err(Error::domain("relative tolerance must be positive"));
        }
        if self.tail_cut < Real::from_i64(30, &PrecisionContext::default()) {
            return Err(Error::domain("tail cut must be at least 30"));
        }
        Ok(())
    }
}

/// `∫ e^g` over the part of the domain where `g ≥ g_max - Λ`.
///
/// The cut points solve `g = g_max - Λ` by bracketing outward from the mode in
/// steps of `2^k/√c` and bisecting; the integrand is scaled by `e^(-g_max)`.
pub fn integrate_exp(problem: &LaplaceProblem, config: &QuadratureConfig, ctx: &PrecisionContext) -> Result<Real> {
    integrate_exp_log(problem, config, ctx)?.to_real(ctx)
}

/// [`integrate_exp`] returned in log space.
pub fn integrate_exp_log(
    problem: &LaplaceProblem,
    config: &QuadratureConfig,
    ctx: &PrecisionContext,
) -> Result<LogReal> {
    config.validate()?;
    let w = ctx.working();
    let mode = find_mode(problem, ctx)?;
    let x0 = mode.x0.round_to(&w);
    let g_max = problem.value(&x0);
    let level = &g_max - config.tail_cut.round_to(&w);
    let sigma = mode.curvature.round_to(&w).sqrt().recip();
    let lower = cut_point(problem, &x0, &level, &sigma, Side::Lower, &w);
    let upper = cut_point(problem, &x0, &level, &sigma, Side::Upper, &w);
    let scaled = adaptive_integrate(
        |x: &Real| (problem.value(x) - &g_max).exp(),
        &lower,
        &upper,
        &config.rel_tolerance,
        config.max_depth,
        config.rule,
        &w,
    )?;
    if !scaled.is_positive() {
        return Err(Error::domain("integral of e^g is not positive"));
    }
    Ok(LogReal::from_log((g_max + scaled.ln()).round_to(ctx)))
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Lower,
    Upper,
}

fn cut_point(
    problem: &LaplaceProblem,
    x0: &Real,
    level: &Real,
    sigma: &Real,
    side: Side,
    w: &PrecisionContext,
) -> Real {
    let above = |x: &Real| {
        let g = problem.value(x);
        g.is_finite() && g >= *level
    };
    let bound = match side {
        Side::Lower => problem.domain.lower.as_ref(),
        Side::Upper => problem.domain.upper.as_ref(),
    }
    .map(|b| b.round_to(w));
    let signed = |d: &Real| match side {
        Side::Lower => x0 - d,
        Side::Upper => x0 + d,
    };
    let mut inside = x0.clone();
    let mut distance = sigma.clone();
    let outside = loop {
        let mut probe = signed(&distance);
        if let Some(b) = &bound {
            let past = match side {
                Side::Lower => probe <= *b,
                Side::Upper => probe >= *b,
            };
            if past {
                probe = b.clone();
                if above(&probe) {
                    return probe;
                }
                break probe;
            }
        }
        if !above(&probe) {
            break probe;
        }
        inside = probe;
        distance = distance.mul_pow2(1);
    };
    let mut lo = inside;
    let mut hi = outside;
    let resolution = sigma * w.pow2(40);
    while (&hi - &lo).abs() > resolution {
        let mid = (&lo + &hi).mul_pow2(-1);
        if above(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
