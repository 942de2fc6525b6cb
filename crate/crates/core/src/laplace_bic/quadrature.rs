use crate::exact_arith::{PrecisionContext, Real};
use crate::{Error, Result};

/// Rule applied on each panel of the adaptive bisection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelRule {
    /// Three-point Simpson with the usual `(S₂ - S₁)/15` correction.
    Simpson,
    /// Gauss–Legendre with the given number of nodes.
    GaussLegendre(usize),
}

impl Default for PanelRule {
    fn default() -> Self {
        PanelRule::GaussLegendre(20)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on `P_k` at the context precision.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<Real>,
    weights: Vec<Real>,
}

impl GaussLegendre {
    pub fn new(points: usize, ctx: &PrecisionContext) -> Self {
        assert!(points >= 1, "Gauss-Legendre needs at least one node");
        let k = points as i64;
        let tol = ctx.rel_bound(-4);
        let mut nodes = Vec::with_capacity(points);
        let mut weights = Vec::with_capacity(points);
        for i in 0..points {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (points as f64 + 0.5)).cos();
            let mut x = Real::from_f64(guess, ctx);
            let mut deriv = Real::one(ctx);
            for _ in 0..64 {
                let (p, dp) = legendre(k, &x);
                let step = p / &dp;
                x = &x - &step;
                deriv = dp;
                if step.abs() <= tol {
                    break;
                }
            }
            let (_, dp) = legendre(k, &x);
            if !dp.is_zero() {
                deriv = dp;
            }
            let w = Real::from_i64(2, ctx) / ((Real::one(ctx) - x.square()) * deriv.square());
            nodes.push(x);
            weights.push(w);
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[Real] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Real] {
        &self.weights
    }

    fn panel<F: Fn(&Real) -> Real>(&self, f: &F, a: &Real, b: &Real) -> Real {
        let half = (b - a).mul_pow2(-1);
        let mid = (a + b).mul_pow2(-1);
        let mut sum = Real::zero_like(a);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum = sum + w * finite_or_zero(f(&(&mid + &half * x)));
        }
        sum * half
    }
}

/// `(P_k(x), P_k'(x))` by the three-term recurrence.
fn legendre(k: i64, x: &Real) -> (Real, Real) {
    let mut prev = Real::one_like(x);
    let mut cur = x.clone();
    if k == 0 {
        return (prev, Real::zero_like(x));
    }
    for j in 1..k {
        let next = ((x * &cur) * (2 * j + 1) - &prev * j) / (j + 1);
        prev = cur;
        cur = next;
    }
    let deriv = ((x * &cur) - &prev) * k / (x.square() - 1);
    (cur, deriv)
}

fn finite_or_zero(v: Real) -> Real {
    if v.is_finite() {
        v
    } else {
        Real::zero_like(&v)
    }
}

/// Adaptive bisection quadrature of `f` over `[a, b]`.
///
/// A panel is accepted when the two half-panel estimates differ from the
/// whole-panel estimate by at most its share of `rel_tol · |I|`, where `|I|`
/// is a coarse 16-panel estimate of the integral. Non-finite integrand values
/// count as zero so log-integrands may be `-∞` at the endpoints.
pub fn adaptive_integrate<F: Fn(&Real) -> Real>(
    f: F,
    a: &Real,
    b: &Real,
    rel_tol: &Real,
    max_depth: u32,
    rule: PanelRule,
    ctx: &PrecisionContext,
) -> Result<Real> {
    let w = ctx.working();
    let a = a.round_to(&w);
    let b = b.round_to(&w);
    if a == b {
        return Ok(Real::zero(ctx));
    }
    const COARSE_PANELS: i64 = 16;
    let width = &b - &a;
    let edges: Vec<Real> = (0..=COARSE_PANELS).map(|i| &a + &width * i / COARSE_PANELS).collect();
    let total = match rule {
        PanelRule::GaussLegendre(points) => {
            let gl = GaussLegendre::new(points, &w);
            let coarse: Vec<Real> = edges.windows(2).map(|e| gl.panel(&f, &e[0], &e[1])).collect();
            let scale = coarse.iter().fold(Real::zero(&w), |s, v| s + v).abs();
            let tol = panel_tolerance(&scale, rel_tol, &w) / COARSE_PANELS;
            let mut sum = Real::zero(&w);
            for (e, whole) in edges.windows(2).zip(coarse) {
                sum = sum + gauss_recurse(&gl, &f, &e[0], &e[1], whole, &tol, 0, max_depth)?;
            }
            sum
        }
        PanelRule::Simpson => {
            let values: Vec<Real> = edges.iter().map(|x| finite_or_zero(f(x))).collect();
            let mids: Vec<Real> = edges
                .windows(2)
                .map(|e| finite_or_zero(f(&(&e[0] + &e[1]).mul_pow2(-1))))
                .collect();
            let coarse: Vec<Real> = (0..COARSE_PANELS as usize)
                .map(|i| simpson(&edges[i], &edges[i + 1], &values[i], &mids[i], &values[i + 1]))
                .collect();
            let scale = coarse.iter().fold(Real::zero(&w), |s, v| s + v).abs();
            let tol = panel_tolerance(&scale, rel_tol, &w) / COARSE_PANELS;
            let mut sum = Real::zero(&w);
            for i in 0..COARSE_PANELS as usize {
                let ends = SimpsonPanel {
                    a: &edges[i],
                    b: &edges[i + 1],
                    fa: &values[i],
                    fm: &mids[i],
                    fb: &values[i + 1],
                };
                sum = sum + simpson_recurse(&f, ends, coarse[i].clone(), &tol, 0, max_depth)?;
            }
            sum
        }
    };
    Ok(total.round_to(ctx))
}

fn panel_tolerance(scale: &Real, rel_tol: &Real, w: &PrecisionContext) -> Real {
    let floor = w.rel_bound(0);
    let scale = if scale.is_zero() { floor.clone() } else { scale.clone() };
    (scale * rel_tol).max(floor)
}

#[allow(clippy::too_many_arguments)]
fn gauss_recurse<F: Fn(&Real) -> Real>(
    gl: &GaussLegendre,
    f: &F,
    a: &Real,
    b: &Real,
    whole: Real,
    tol: &Real,
    depth: u32,
    max_depth: u32,
) -> Result<Real> {
    let m = (a + b).mul_pow2(-1);
    let left = gl.panel(f, a, &m);
    let right = gl.panel(f, &m, b);
    let halves = &left + &right;
    if (&halves - &whole).abs() <= *tol {
        return Ok(halves);
    }
    if depth >= max_depth {
        return Err(Error::MaxDepthExceeded(max_depth));
    }
    let half_tol = tol.mul_pow2(-1);
    Ok(gauss_recurse(gl, f, a, &m, left, &half_tol, depth + 1, max_depth)?
        + gauss_recurse(gl, f, &m, b, right, &half_tol, depth + 1, max_depth)?)
}

fn simpson(a: &Real, b: &Real, fa: &Real, fm: &Real, fb: &Real) -> Real {
    (b - a) * (fa + fm * 4 + fb) / 6
}

#[derive(Clone, Copy)]
struct SimpsonPanel<'a> {
    a: &'a Real,
    b: &'a Real,
    fa: &'a Real,
    fm: &'a Real,
    fb: &'a Real,
}

fn simpson_recurse<F: Fn(&Real) -> Real>(
    f: &F,
    p: SimpsonPanel<'_>,
    whole: Real,
    tol: &Real,
    depth: u32,
    max_depth: u32,
) -> Result<Real> {
    let m = (p.a + p.b).mul_pow2(-1);
    let lm = (p.a + &m).mul_pow2(-1);
    let rm = (&m + p.b).mul_pow2(-1);
    let flm = finite_or_zero(f(&lm));
    let frm = finite_or_zero(f(&rm));
    let left = simpson(p.a, &m, p.fa, &flm, p.fm);
    let right = simpson(&m, p.b, p.fm, &frm, p.fb);
    let delta = &left + &right - &whole;
    if delta.abs() <= tol * 15 {
        return Ok(&left + &right + delta / 15);
    }
    if depth >= max_depth {
        return Err(Error::MaxDepthExceeded(max_depth));
    }
    let half_tol = tol.mul_pow2(-1);
    let lp = SimpsonPanel {
        a: p.a,
        b: &m,
        fa: p.fa,
        fm: &flm,
        fb: p.fm,
    };
    let rp = SimpsonPanel {
        a: &m,
        b: p.b,
        fa: p.fm,
        fm: &frm,
        fb: p.fb,
    };
    Ok(simpson_recurse(f, lp, left, &half_tol, depth + 1, max_depth)?
        + simpson_recurse(f, rp, right, &half_tol, depth + 1, max_depth)?)
}
