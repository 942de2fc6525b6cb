//! The experiment registry: each experiment is one or more named sequences
//! with their limits, evaluated on a grid, plus the checks `--assert` enforces.

use std::fmt;

use crate::classic_limits::{
    demoivre_cn, median_density_scaled, middle_binomial_prob, normal_density, stirling_ratio, trapezoid_limit,
    trapezoid_residual, wallis_inverse_sqrt,
};
use crate::clt_truncated::{
    binomial_ln, binomial_ln_bruteforce, binomial_ln_inf, binomial_mad_dn, binomial_mad_max, binomial_ratio,
    gamma_exp_ratio, gamma_ln, gamma_ln_inf, gamma_ln_quadrature, normal_l, poisson_ln, poisson_ln_bruteforce,
    poisson_mad, poisson_mad_bruteforce, poisson_product_ratio, random_walk_expected_visits, random_walk_return,
    Cutoff,
};
use crate::convergence::{
    build_report, make_grid, Approach, ConvergenceReport, GridConstraint, GridKind, SequenceSpec,
};
use crate::exact_arith::{factorial, BigRational, PrecisionContext, Real};
use crate::irwin_hall::{
    bn_target, bn_term, final_display_target, quadrature_oracle_in_exact, scaled_sn, sn_target, standardized_in,
    truncated_moment_in, MAX_EXACT_N,
};
use crate::laplace_bic::{bic_case, integrate_exp, laplace_approx, BicCase, LaplaceProblem, QuadratureConfig};
use crate::{Error, Result};

pub const FLAG_POISSON_ENDPOINT: &str =
    "poisson-truncated: printed leading term p_n(j) read as the telescoped left endpoint p_n(n)";
pub const FLAG_GAMMA_LIMIT: &str =
    "gamma-truncated: printed limit of L_n(inf) is sqrt(2 pi); corrected target 1/sqrt(2 pi), printed variant reported";
pub const FLAG_BINOMIAL_PRINTED: &str =
    "binomial-truncated: printed closed form subtracts (1/2)^(n-1) and omits the j = n term; \
     exact telescoped value (n/4) b_(n-1)(n/2-1) is authoritative, printed variant reported";
pub const FLAG_TRAPEZOID: &str =
    "trapezoid: printed residual is O(1/n); corrected limit ln sqrt(2 pi) - 1, printed target 0 reported";
pub const FLAG_RANDOM_WALK: &str = "random-walk: printed return probability 1/(pi sqrt n), corrected 1/sqrt(pi n); \
     printed visit count (1/sqrt pi)(1/2)sqrt n, corrected 2 sqrt(n/pi); printed variants reported";
pub const FLAG_EXACT: &str = "exact-arithmetic path: alternating sums over big integers";

/// Grid-max oracle for the binomial MAD is limited to small `n`.
const MAD_GRID_MAX_N: u64 = 64;
const MAD_GRID_POINTS: u64 = 1001;
const DIRECT_SUM_MAX_N: u64 = 400;
const QUADRATURE_MAX_N: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    Stirling,
    Demoivre,
    MiddleBinomial,
    Wallis,
    Trapezoid,
    MedianDensity,
    PoissonTruncated,
    PoissonRatio,
    PoissonMad,
    GammaTruncated,
    GammaRatio,
    BinomialTruncated,
    BinomialRatio,
    BinomialMad,
    RandomWalk,
    IrwinHallSn,
    IrwinHallIn,
    IrwinHallBn,
    LaplaceGamma,
    BicPoissonSingle,
    BicPoissonSample,
    BicExponential,
    BicBinomial,
}

impl Experiment {
    pub const ALL: [Experiment; 23] = [
        Experiment::Stirling,
        Experiment::Demoivre,
        Experiment::MiddleBinomial,
        Experiment::Wallis,
        Experiment::Trapezoid,
        Experiment::MedianDensity,
        Experiment::PoissonTruncated,
        Experiment::PoissonRatio,
        Experiment::PoissonMad,
        Experiment::GammaTruncated,
        Experiment::GammaRatio,
        Experiment::BinomialTruncated,
        Experiment::BinomialRatio,
        Experiment::BinomialMad,
        Experiment::RandomWalk,
        Experiment::IrwinHallSn,
        Experiment::IrwinHallIn,
        Experiment::IrwinHallBn,
        Experiment::LaplaceGamma,
        Experiment::BicPoissonSingle,
        Experiment::BicPoissonSample,
        Experiment::BicExponential,
        Experiment::BicBinomial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Stirling => "stirling",
            Experiment::Demoivre => "demoivre",
            Experiment::MiddleBinomial => "middle-binomial",
            Experiment::Wallis => "wallis",
            Experiment::Trapezoid => "trapezoid",
            Experiment::MedianDensity => "median-density",
            Experiment::PoissonTruncated => "poisson-truncated",
            Experiment::PoissonRatio => "poisson-ratio",
            Experiment::PoissonMad => "poisson-mad",
            Experiment::GammaTruncated => "gamma-truncated",
            Experiment::GammaRatio => "gamma-ratio",
            Experiment::BinomialTruncated => "binomial-truncated",
            Experiment::BinomialRatio => "binomial-ratio",
            Experiment::BinomialMad => "binomial-mad",
            Experiment::RandomWalk => "random-walk",
            Experiment::IrwinHallSn => "irwin-hall-sn",
            Experiment::IrwinHallIn => "irwin-hall-in",
            Experiment::IrwinHallBn => "irwin-hall-bn",
            Experiment::LaplaceGamma => "laplace-gamma",
            Experiment::BicPoissonSingle => "bic-poisson-single",
            Experiment::BicPoissonSample => "bic-poisson-sample",
            Experiment::BicExponential => "bic-exponential",
            Experiment::BicBinomial => "bic-binomial",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::Stirling => "n!/(n^(n+1/2) e^-n) -> sqrt(2 pi)",
            Experiment::Demoivre => "(1/2) sqrt(2n+1) C(2n,n) 4^-n -> 1/sqrt(2 pi)",
            Experiment::MiddleBinomial => "C(2n,n) 4^-n sqrt(pi n) -> 1",
            Experiment::Wallis => "1/sqrt(w_n) -> sqrt(2/pi)",
            Experiment::Trapezoid => "ln n! - (1/2) ln n - (n ln n - n + 1) -> ln sqrt(2 pi) - 1",
            Experiment::MedianDensity => "scaled uniform-median density at z = c -> phi(c)",
            Experiment::PoissonTruncated => "Poisson L_n(c) -> L(c)",
            Experiment::PoissonRatio => "n^m/((n+1)...(n+m)), m = floor(c sqrt n) -> exp(-c^2/2)",
            Experiment::PoissonMad => "E|Y_n - n|/sqrt n -> sqrt(2/pi)",
            Experiment::GammaTruncated => "Gamma L_n(c) -> L(c)",
            Experiment::GammaRatio => "exp(-c sqrt n)(1 + c/sqrt n)^n -> exp(-c^2/2)",
            Experiment::BinomialTruncated => "symmetric binomial L_n(c) -> L(c)",
            Experiment::BinomialRatio => "C(n, floor(n/2 + c sqrt(n)/2))/C(n, floor(n/2)) -> exp(-c^2/2)",
            Experiment::BinomialMad => "d_n = sqrt n C(n-1,n/2-1) 2^-n -> 1/sqrt(2 pi)",
            Experiment::RandomWalk => "return probability and expected visits to zero",
            Experiment::IrwinHallSn => "s_n/sqrt n -> 1/sqrt(24 pi)",
            Experiment::IrwinHallIn => "(I_n - n/4)/(sigma sqrt n) -> -1/sqrt(2 pi)",
            Experiment::IrwinHallBn => "b_n -> 1/sqrt 12 and e^n S_n/n -> 1/sqrt 3",
            Experiment::LaplaceGamma => "n!/(Laplace approximation of the Gamma integral) -> 1",
            Experiment::BicPoissonSingle => "BIC ratio, one Poisson count x = n",
            Experiment::BicPoissonSample => "BIC ratio, n Poisson counts with total z = n",
            Experiment::BicExponential => "BIC ratio, n exponentials with total z = n",
            Experiment::BicBinomial => "BIC ratio, binomial with x = n/2",
        }
    }

    /// Whether the cutoff `c` enters the experiment.
    pub fn uses_c(self) -> bool {
        matches!(
            self,
            Experiment::MedianDensity
                | Experiment::PoissonTruncated
                | Experiment::PoissonRatio
                | Experiment::GammaTruncated
                | Experiment::GammaRatio
                | Experiment::BinomialTruncated
                | Experiment::BinomialRatio
        )
    }

    pub fn default_n_max(self) -> u64 {
        match self {
            Experiment::Wallis => 10_000,
            Experiment::PoissonRatio | Experiment::GammaRatio => 1 << 20,
            Experiment::BinomialRatio => 1 << 16,
            Experiment::IrwinHallSn | Experiment::IrwinHallIn | Experiment::IrwinHallBn => 512,
            Experiment::LaplaceGamma
            | Experiment::BicPoissonSingle
            | Experiment::BicPoissonSample
            | Experiment::BicExponential
            | Experiment::BicBinomial => 1024,
            _ => 4096,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Grid and precision settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_min: Option<u64>,
    pub n_max: Option<u64>,
    pub grid: GridKind,
    pub points: Option<usize>,
    pub c: Cutoff,
    pub ctx: PrecisionContext,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_min: None,
            n_max: None,
            grid: GridKind::Geometric,
            points: None,
            c: Cutoff::Finite(BigRational::from(1)),
            ctx: PrecisionContext::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub experiment: Experiment,
    /// The cutoff, for experiments that use one.
    pub c: Option<Cutoff>,
    pub precision_bits: u32,
    pub reports: Vec<ConvergenceReport>,
    pub checks: Vec<Check>,
}

impl ExperimentRun {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn report(&self, name: &str) -> Option<&ConvergenceReport> {
        self.reports.iter().find(|r| r.name == name)
    }
}

fn finite_c(c: &Cutoff, exp: Experiment) -> Result<BigRational> {
    match c {
        Cutoff::Finite(q) => Ok(q.clone()),
        Cutoff::Infinite => Err(Error::domain(format!("{exp} needs a finite c"))),
    }
}

fn floor_approach(c: &Cutoff) -> Approach {
    if c.is_infinite() {
        Approach::Monotone
    } else {
        Approach::FirstVsLast
    }
}

fn exp_half_c2(c: &BigRational, ctx: &PrecisionContext) -> Real {
    let w = ctx.working();
    (-Real::from_rational(c, &w).square().mul_pow2(-1)).exp().round_to(ctx)
}

fn inv_sqrt2pi(ctx: &PrecisionContext) -> Real {
    let w = ctx.working();
    (Real::pi(&w) * 2).sqrt().recip().round_to(ctx)
}

fn named(exp: Experiment, suffix: &str) -> String {
    if suffix.is_empty() {
        exp.name().to_string()
    } else {
        format!("{}/{}", exp.name(), suffix)
    }
}

/// The sequences an experiment reports; the first is the primary one.
pub fn sequences(exp: Experiment, c: &Cutoff, ctx: &PrecisionContext) -> Result<Vec<SequenceSpec>> {
    let w = ctx.working();
    let one = Real::one(ctx);
    let even = GridConstraint::even();
    let irwin = GridConstraint::even().with_max(MAX_EXACT_N);
    Ok(match exp {
        Experiment::Stirling => vec![SequenceSpec::new(
            named(exp, ""),
            (Real::pi(&w) * 2).sqrt().round_to(ctx),
            stirling_ratio,
        )],
        Experiment::Demoivre => vec![SequenceSpec::new(named(exp, ""), inv_sqrt2pi(ctx), |n, ctx| {
            Ok(demoivre_cn(n, ctx))
        })],
        Experiment::MiddleBinomial => vec![SequenceSpec::new(named(exp, ""), one, |n, ctx| {
            let w = ctx.working();
            let p = Real::from_rational(&middle_binomial_prob(n)?, &w);
            Ok((p * (Real::pi(&w) * n as i64).sqrt()).round_to(ctx))
        })
        .with_notes("C(2n,n) 4^-n sqrt(pi n); C(2n,n) 4^-n itself behaves as 1/sqrt(pi n)")],
        Experiment::Wallis => vec![SequenceSpec::new(
            named(exp, ""),
            (Real::from_i64(2, &w) / Real::pi(&w)).sqrt().round_to(ctx),
            |n, ctx| Ok(wallis_inverse_sqrt(n, ctx)),
        )
        .with_flag(FLAG_EXACT)],
        Experiment::Trapezoid => vec![
            SequenceSpec::new(named(exp, ""), trapezoid_limit(ctx), trapezoid_residual).with_flag(FLAG_TRAPEZOID),
            SequenceSpec::new(named(exp, "printed"), Real::zero(ctx), trapezoid_residual)
                .with_flag(FLAG_TRAPEZOID)
                .unchecked(),
        ],
        Experiment::MedianDensity => {
            let z = finite_c(c, exp)?;
            let zr = Real::from_rational(&z, ctx);
            // m such that z² ≤ 2m + 1
            let z2 = z.clone() * &z;
            let min_m = (z2 - 1u32).ceil().numer().to_u64().unwrap_or(0).div_ceil(2).max(1);
            let target = normal_density(&zr, ctx);
            vec![
                SequenceSpec::new(named(exp, ""), target, move |m, ctx| median_density_scaled(m, &zr, ctx))
                    .with_constraint(GridConstraint::ANY.with_min(min_m))
                    .with_notes("n = 2m + 1 uniforms; grid runs over m"),
            ]
        }
        Experiment::PoissonTruncated => {
            let (c1, c2) = (c.clone(), c.clone());
            vec![
                SequenceSpec::new(named(exp, ""), normal_l(c, ctx), move |n, ctx| poisson_ln(n, &c1, ctx))
                    .with_approach(floor_approach(c))
                    .with_flag(FLAG_POISSON_ENDPOINT),
                SequenceSpec::new(named(exp, "direct"), normal_l(c, ctx), move |n, ctx| {
                    poisson_ln_bruteforce(n, &c2, ctx)
                })
                .with_constraint(GridConstraint::ANY.with_max(DIRECT_SUM_MAX_N))
                .with_notes("direct summation oracle")
                .unchecked(),
            ]
        }
        Experiment::PoissonRatio => {
            let cr = finite_c(c, exp)?;
            let target = exp_half_c2(&cr, ctx);
            vec![
                SequenceSpec::new(named(exp, ""), target, move |n, ctx| poisson_product_ratio(n, &cr, ctx))
                    .with_approach(Approach::FirstVsLast)
                    .with_notes("exact rational, floor(c sqrt n) index"),
            ]
        }
        Experiment::PoissonMad => {
            let target = (Real::from_i64(2, &w) / Real::pi(&w)).sqrt().round_to(ctx);
            let scaled = |n: u64, v: Real, ctx: &PrecisionContext| {
                let w = ctx.working();
                Ok((v / Real::from_u64(n, &w).sqrt()).round_to(ctx))
            };
            vec![
                SequenceSpec::new(named(exp, ""), target.clone(), move |n, ctx| {
                    scaled(n, poisson_mad(n, ctx)?, ctx)
                }),
                SequenceSpec::new(named(exp, "direct"), target, move |n, ctx| {
                    scaled(n, poisson_mad_bruteforce(n, ctx)?, ctx)
                })
                .with_constraint(GridConstraint::ANY.with_max(DIRECT_SUM_MAX_N))
                .with_notes("direct summation oracle")
                .unchecked(),
            ]
        }
        Experiment::GammaTruncated => {
            let c1 = c.clone();
            let mut specs = vec![
                SequenceSpec::new(named(exp, ""), normal_l(c, ctx), move |n, ctx| gamma_ln(n, &c1, ctx))
                    .with_flag(FLAG_GAMMA_LIMIT),
                SequenceSpec::new(named(exp, "inf"), inv_sqrt2pi(ctx), gamma_ln_inf).with_flag(FLAG_GAMMA_LIMIT),
                SequenceSpec::new(
                    named(exp, "printed"),
                    (Real::pi(&w) * 2).sqrt().round_to(ctx),
                    gamma_ln_inf,
                )
                .with_flag(FLAG_GAMMA_LIMIT)
                .unchecked(),
            ];
            if let Cutoff::Finite(cr) = c {
                let cr = cr.clone();
                specs.push(
                    SequenceSpec::new(named(exp, "quadrature"), normal_l(c, ctx), move |n, ctx| {
                        gamma_ln_quadrature(n, &cr, ctx)
                    })
                    .with_constraint(GridConstraint::ANY.with_max(QUADRATURE_MAX_N))
                    .with_notes("adaptive quadrature oracle")
                    .unchecked(),
                );
            }
            specs
        }
        Experiment::GammaRatio => {
            let cr = finite_c(c, exp)?;
            let target = exp_half_c2(&cr, ctx);
            vec![SequenceSpec::new(named(exp, ""), target, move |n, ctx| {
                gamma_exp_ratio(n, &cr, ctx)
            })]
        }
        Experiment::BinomialTruncated => {
            let (c1, c2) = (c.clone(), c.clone());
            vec![
                SequenceSpec::new(named(exp, ""), normal_l(c, ctx), move |n, ctx| binomial_ln(n, &c1, ctx))
                    .with_constraint(even)
                    .with_approach(floor_approach(c))
                    .with_flag(FLAG_BINOMIAL_PRINTED),
                SequenceSpec::new(named(exp, "telescoped"), inv_sqrt2pi(ctx), |n, ctx| {
                    Ok(binomial_ln_inf(n, ctx)?.telescoped)
                })
                .with_constraint(even)
                .with_flag(FLAG_BINOMIAL_PRINTED)
                .with_notes("authoritative exact value at c = inf"),
                SequenceSpec::new(named(exp, "printed"), inv_sqrt2pi(ctx), |n, ctx| {
                    Ok(binomial_ln_inf(n, ctx)?.printed)
                })
                .with_constraint(even)
                .with_flag(FLAG_BINOMIAL_PRINTED)
                .unchecked(),
                SequenceSpec::new(named(exp, "direct"), normal_l(c, ctx), move |n, ctx| {
                    binomial_ln_bruteforce(n, &c2, ctx)
                })
                .with_constraint(even)
                .with_notes("exact enumeration oracle")
                .unchecked(),
            ]
        }
        Experiment::BinomialRatio => {
            let cr = finite_c(c, exp)?;
            let target = exp_half_c2(&cr, ctx);
            // floor(c sqrt n) ≤ n needs n ≥ c²
            let min_n = (cr.clone() * &cr).ceil().numer().to_u64().unwrap_or(1).max(1);
            vec![SequenceSpec::new(named(exp, ""), target, move |n, ctx| {
                Ok(Real::from_rational(&binomial_ratio(n, &cr)?, ctx))
            })
            .with_constraint(GridConstraint::ANY.with_min(min_n))
            .with_approach(Approach::FirstVsLast)
            .with_notes("exact rational, floor index")]
        }
        Experiment::BinomialMad => vec![
            SequenceSpec::new(named(exp, ""), inv_sqrt2pi(ctx), binomial_mad_dn).with_constraint(even),
            SequenceSpec::new(named(exp, "grid-max"), inv_sqrt2pi(ctx), |n, ctx| {
                Ok(binomial_mad_max(n, MAD_GRID_POINTS, ctx)?.scaled)
            })
            .with_constraint(even.with_max(MAD_GRID_MAX_N))
            .with_notes("sqrt n times the refined grid maximum of D_n(p)")
            .unchecked(),
        ],
        Experiment::RandomWalk => {
            let return_scaled = |n: u64, ctx: &PrecisionContext| {
                let w = ctx.working();
                Ok(Real::from_rational(&random_walk_return(n)?, &w) * Real::from_u64(n, &w).sqrt())
            };
            let visits_scaled = |n: u64, ctx: &PrecisionContext| {
                let w = ctx.working();
                Ok(
                    (Real::from_rational(&random_walk_expected_visits(n)?, &w) / Real::from_u64(n, &w).sqrt())
                        .round_to(ctx),
                )
            };
            let sqrt_pi = Real::pi(&w).sqrt();
            vec![
                SequenceSpec::new(named(exp, ""), one.clone(), move |n, ctx| {
                    let w = ctx.working();
                    Ok((return_scaled(n, ctx)? * Real::pi(&w).sqrt()).round_to(ctx))
                })
                .with_flag(FLAG_RANDOM_WALK)
                .with_notes("p_n sqrt(pi n) -> 1"),
                SequenceSpec::new(named(exp, "printed"), one, move |n, ctx| {
                    let w = ctx.working();
                    Ok((return_scaled(n, ctx)? * Real::pi(&w)).round_to(ctx))
                })
                .with_flag(FLAG_RANDOM_WALK)
                .with_notes("p_n pi sqrt n, against the printed 1/(pi sqrt n)")
                .unchecked(),
                SequenceSpec::new(named(exp, "visits"), (sqrt_pi.recip() * 2).round_to(ctx), visits_scaled)
                    .with_flag(FLAG_RANDOM_WALK)
                    .with_notes("E N_2n / sqrt n -> 2/sqrt pi"),
                SequenceSpec::new(
                    named(exp, "visits-printed"),
                    sqrt_pi.mul_pow2(1).recip().round_to(ctx),
                    visits_scaled,
                )
                .with_flag(FLAG_RANDOM_WALK)
                .with_notes("E N_2n / sqrt n against the printed (1/sqrt pi)(1/2)")
                .unchecked(),
            ]
        }
        Experiment::IrwinHallSn => vec![SequenceSpec::new(named(exp, ""), sn_target(ctx), scaled_sn)
            .with_constraint(irwin)
            .with_flag(FLAG_EXACT)],
        Experiment::IrwinHallIn => vec![SequenceSpec::new(named(exp, ""), -inv_sqrt2pi(ctx), standardized_in)
            .with_constraint(irwin)
            .with_flag(FLAG_EXACT)],
        Experiment::IrwinHallBn => vec![
            SequenceSpec::new(named(exp, ""), bn_target(ctx), |n, ctx| Ok(bn_term(n, ctx)?.bn))
                .with_constraint(irwin)
                .with_approach(Approach::FirstVsLast)
                .with_flag(FLAG_EXACT),
            SequenceSpec::new(named(exp, "final-display"), final_display_target(ctx), |n, ctx| {
                Ok(bn_term(n, ctx)?.final_display)
            })
            .with_constraint(irwin)
            .with_approach(Approach::FirstVsLast)
            .with_flag(FLAG_EXACT),
        ],
        Experiment::LaplaceGamma => vec![
            SequenceSpec::new(named(exp, ""), one.clone(), |n, ctx| {
                let approx = laplace_approx(&LaplaceProblem::gamma(n, ctx), ctx)?;
                Ok(Real::from_integer(&factorial(n), ctx) / approx)
            })
            .with_notes("n! over exp(g_max) sqrt(2 pi / c)"),
            SequenceSpec::new(named(exp, "quadrature"), one, |n, ctx| {
                let q = integrate_exp(&LaplaceProblem::gamma(n, ctx), &QuadratureConfig::new(ctx), ctx)?;
                Ok(q / Real::from_integer(&factorial(n), ctx))
            })
            .with_constraint(GridConstraint::ANY.with_max(QUADRATURE_MAX_N))
            .with_notes("quadrature of x^n e^-x over n!")
            .unchecked(),
        ],
        Experiment::BicPoissonSingle => vec![bic_spec(exp, GridConstraint::ANY, |n| BicCase::PoissonSingle { x: n })],
        Experiment::BicPoissonSample => {
            vec![bic_spec(exp, GridConstraint::ANY, |n| BicCase::PoissonSample {
                n,
                z: n,
            })]
        }
        Experiment::BicExponential => vec![bic_spec(exp, GridConstraint::ANY, |n| BicCase::Exponential {
            n,
            z: BigRational::from(n),
        })],
        Experiment::BicBinomial => vec![bic_spec(exp, GridConstraint::ANY.with_min(2), |n| BicCase::Binomial {
            n,
            x: n / 2,
        })],
    })
}

fn bic_spec(exp: Experiment, constraint: GridConstraint, case: fn(u64) -> BicCase) -> SequenceSpec {
    SequenceSpec::new(
        named(exp, ""),
        Real::one(&PrecisionContext::default()),
        move |n, ctx| Ok(bic_case(&case(n), ctx)?.ratio),
    )
    .with_constraint(constraint)
    .with_approach(Approach::FirstVsLast)
    .with_notes("exact marginal likelihood over L_max sqrt(2 pi / J)")
}

/// Runs every sequence of `exp` and evaluates its checks.
///
/// Secondary sequences whose domain misses the requested range are skipped.
pub fn run(exp: Experiment, config: &ExperimentConfig) -> Result<ExperimentRun> {
    let ctx = &config.ctx;
    let mut reports = Vec::new();
    for (index, spec) in sequences(exp, &config.c, ctx)?.into_iter().enumerate() {
        let spec = SequenceSpec {
            target: spec.target.round_to(ctx),
            ..spec
        };
        let n_min = config.n_min.unwrap_or(spec.constraint.min_n).max(spec.constraint.min_n);
        let mut n_max = config.n_max.unwrap_or_else(|| exp.default_n_max());
        if let Some(cap) = spec.constraint.max_n {
            n_max = n_max.min(cap);
        }
        let grid = if n_min > n_max {
            Err(Error::EmptyGrid)
        } else {
            make_grid(config.grid, n_min, n_max, config.points, &spec.constraint)
        };
        let grid = match grid {
            Ok(g) => g,
            Err(e) if index == 0 => return Err(e),
            Err(_) => continue,
        };
        reports.push(build_report(&spec, &grid, ctx)?);
    }
    let checks = checks(exp, &reports, ctx);
    Ok(ExperimentRun {
        experiment: exp,
        c: exp.uses_c().then(|| config.c.clone()),
        precision_bits: ctx.bits(),
        reports,
        checks,
    })
}

fn checks(exp: Experiment, reports: &[ConvergenceReport], ctx: &PrecisionContext) -> Vec<Check> {
    let mut out: Vec<Check> = reports
        .iter()
        .filter(|r| r.checked)
        .map(|r| {
            let kind = match r.approach {
                Approach::Monotone => "error non-increasing",
                Approach::FirstVsLast => "last error below first",
            };
            Check::new(format!("{}: approach", r.name), r.approach_holds(), kind)
        })
        .collect();
    let primary = &reports[0];
    let find = |suffix: &str| reports.iter().find(|r| r.name == named(exp, suffix));
    match exp {
        Experiment::Stirling => {
            let ok = primary.rows.iter().all(|row| {
                let ratio = &row.value / &primary.target;
                let n = row.n as i64;
                let lo = (Real::one(ctx) / (12 * n + 1)).exp();
                let hi = (Real::one(ctx) / (12 * n)).exp();
                ratio > lo && ratio < hi
            });
            out.push(Check::new(
                "stirling: Robbins bounds",
                ok,
                "r_n/sqrt(2 pi) in (e^(1/(12n+1)), e^(1/(12n)))",
            ));
        }
        Experiment::Wallis => {
            let ok = primary
                .rows
                .iter()
                .all(|row| row.rel_error <= Real::one(ctx) / (4 * row.n as i64));
            out.push(Check::new(
                "wallis: relative error",
                ok,
                "rel_error <= 1/(4n) at every n",
            ));
        }
        Experiment::Trapezoid | Experiment::GammaTruncated | Experiment::BinomialTruncated | Experiment::RandomWalk => {
            let corrected = match exp {
                Experiment::GammaTruncated => find("inf"),
                Experiment::BinomialTruncated => find("telescoped"),
                _ => Some(primary),
            };
            if let Some(r) = corrected {
                let ok = r
                    .last_row()
                    .is_some_and(|row| row.abs_error <= Real::one(ctx) / row.n as i64);
                out.push(Check::new(
                    format!("{}: corrected target", r.name),
                    ok,
                    "abs_error <= 1/n at the last n",
                ));
            }
        }
        _ => {}
    }
    let twin = match exp {
        Experiment::PoissonTruncated | Experiment::PoissonMad | Experiment::BinomialTruncated => find("direct"),
        Experiment::GammaTruncated => find("quadrature"),
        _ => None,
    };
    if let Some(twin) = twin {
        out.push(agreement_check(primary, twin, ctx));
    }
    match exp {
        Experiment::IrwinHallIn => {
            let mut ok = true;
            for row in primary.rows.iter().filter(|r| r.n <= 64) {
                ok &= matches!(
                    (truncated_moment_in(row.n), quadrature_oracle_in_exact(row.n)),
                    (Ok(a), Ok(b)) if a == b
                );
            }
            out.push(Check::new(
                "irwin-hall-in: dual path",
                ok,
                "closed form equals piecewise integration exactly for n <= 64",
            ));
        }
        Experiment::LaplaceGamma => {
            let ok = primary.rows.iter().all(|row| {
                let n = row.n as i64;
                row.value > (Real::one(ctx) / (12 * n + 1)).exp() && row.value < (Real::one(ctx) / (12 * n)).exp()
            });
            out.push(Check::new(
                "laplace-gamma: Robbins bounds",
                ok,
                "ratio in (e^(1/(12n+1)), e^(1/(12n)))",
            ));
            if let Some(q) = find("quadrature") {
                let tol = Real::from_f64(1e-18, ctx);
                let ok = q.rows.iter().all(|row| row.abs_error <= tol);
                out.push(Check::new(
                    "laplace-gamma: quadrature",
                    ok,
                    "integral matches n! to 1e-18 relative",
                ));
            }
        }
        _ => {}
    }
    out
}

/// `|a - b| ≤ max(1e-25, 2^(16-bits)|a|)` on the shared grid points.
fn agreement_check(primary: &ConvergenceReport, twin: &ConvergenceReport, ctx: &PrecisionContext) -> Check {
    let floor = Real::from_f64(1e-25, ctx);
    let ok = twin.rows.iter().all(|t| {
        primary.rows.iter().find(|p| p.n == t.n).is_none_or(|p| {
            let allowed = floor.clone().max(p.value.abs() * ctx.rel_bound(16));
            (&p.value - &t.value).abs() <= allowed
        })
    });
    Check::new(
        format!("{}: agrees with {}", primary.name, twin.name),
        ok,
        "|closed - oracle| <= max(1e-25, 2^(16-bits)|closed|)",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_name(e.name()), Some(e));
        }
        assert_eq!(Experiment::from_name("all"), None);
    }

    #[test]
    fn every_experiment_passes_its_checks_at_small_sizes() {
        let config = ExperimentConfig {
            n_max: Some(64),
            ..ExperimentConfig::default()
        };
        for e in Experiment::ALL {
            let run = run(e, &config).unwrap_or_else(|err| panic!("{e}: {err}"));
            for check in &run.checks {
                assert!(check.passed, "{e}: {} ({})", check.name, check.detail);
            }
        }
    }

    #[test]
    fn flagged_experiments_carry_flags_and_printed_variants() {
        let config = ExperimentConfig {
            n_max: Some(256),
            ..ExperimentConfig::default()
        };
        for (e, flag) in [
            (Experiment::BinomialTruncated, FLAG_BINOMIAL_PRINTED),
            (Experiment::GammaTruncated, FLAG_GAMMA_LIMIT),
            (Experiment::Trapezoid, FLAG_TRAPEZOID),
            (Experiment::RandomWalk, FLAG_RANDOM_WALK),
        ] {
            let run = run(e, &config).unwrap();
            assert!(run.reports[0].flags.iter().any(|f| f == flag), "{e}");
            assert!(
                run.reports.iter().any(|r| r.name.ends_with("printed") && !r.checked),
                "{e}"
            );
            assert!(run.passed(), "{e}");
        }
    }

    #[test]
    fn infinite_cutoff_is_rejected_where_meaningless() {
        let config = ExperimentConfig {
            c: Cutoff::Infinite,
            n_max: Some(16),
            ..ExperimentConfig::default()
        };
        assert!(run(Experiment::PoissonRatio, &config).is_err());
        assert!(run(Experiment::MedianDensity, &config).is_err());
        assert!(run(Experiment::PoissonTruncated, &config).unwrap().passed());
    }

    #[test]
    fn binomial_ratio_grid_starts_where_the_index_fits() {
        let config = ExperimentConfig {
            c: Cutoff::Finite(BigRational::from(3)),
            n_max: Some(64),
            ..ExperimentConfig::default()
        };
        let run = run(Experiment::BinomialRatio, &config).unwrap();
        assert_eq!(run.reports[0].rows[0].n, 9);
    }
}
