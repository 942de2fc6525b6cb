//! Evaluating a sequence on an `n`-grid, measuring its error against a known
//! limit, fitting a log–log rate and extrapolating with Aitken's Δ².

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::exact_arith::{PrecisionContext, Real};
use crate::{Error, Result};

pub type Evaluator = Arc<dyn Fn(u64, &PrecisionContext) -> Result<Real> + Send + Sync>;

/// Which `n` a sequence is defined for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridConstraint {
    pub min_n: u64,
    pub max_n: Option<u64>,
    pub even_only: bool,
}

impl GridConstraint {
    pub const ANY: GridConstraint = GridConstraint {
        min_n: 1,
        max_n: None,
        even_only: false,
    };

    pub fn even() -> Self {
        GridConstraint {
            min_n: 2,
            even_only: true,
            ..Self::ANY
        }
    }

    pub fn with_min(mut self, min_n: u64) -> Self {
        self.min_n = min_n;
        self
    }

    pub fn with_max(mut self, max_n: u64) -> Self {
        self.max_n = Some(max_n);
        self
    }

    pub fn admits(&self, n: u64) -> bool {
        n >= self.min_n && self.max_n.is_none_or(|m| n <= m) && (!self.even_only || n.is_multiple_of(2))
    }

    /// Moves `n` onto the constraint: up to the minimum, up to the next even value.
    fn snap(&self, n: u64) -> u64 {
        let n = n.max(self.min_n);
        if self.even_only && !n.is_multiple_of(2) {
            n + 1
        } else {
            n
        }
    }
}

impl Default for GridConstraint {
    fn default() -> Self {
        Self::ANY
    }
}

/// How the error of a sequence is expected to shrink along the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approach {
    /// `absError` never increases from one grid point to the next.
    Monotone,
    /// Only the last error is required to be below the first.
    FirstVsLast,
}

/// A named sequence with its limit.
#[derive(Clone)]
pub struct SequenceSpec {
    pub name: String,
    pub evaluator: Evaluator,
    pub target: Real,
    pub notes: String,
    pub flags: Vec<String>,
    pub constraint: GridConstraint,
    pub approach: Approach,
    /// False for variants reported only for comparison, such as a formula as
    /// printed; their error pattern is not asserted.
    pub checked: bool,
}

impl fmt::Debug for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceSpec")
            .field("name", &self.name)
            .field("target", &self.target)
            .field("notes", &self.notes)
            .field("flags", &self.flags)
            .field("constraint", &self.constraint)
            .field("approach", &self.approach)
            .field("checked", &self.checked)
            .finish_non_exhaustive()
    }
}

impl SequenceSpec {
    pub fn new<F>(name: impl Into<String>, target: Real, evaluator: F) -> Self
    where
        F: Fn(u64, &PrecisionContext) -> Result<Real> + Send + Sync + 'static,
    {
        SequenceSpec {
            name: name.into(),
            evaluator: Arc::new(evaluator),
            target,
            notes: String::new(),
            flags: Vec::new(),
            constraint: GridConstraint::ANY,
            approach: Approach::Monotone,
            checked: true,
        }
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn with_flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }

    pub fn with_constraint(mut self, constraint: GridConstraint) -> Self {
        self.constraint = constraint;
        self
    }

    pub fn with_approach(mut self, approach: Approach) -> Self {
        self.approach = approach;
        self
    }

    pub fn unchecked(mut self) -> Self {
        self.checked = false;
        self
    }

    pub fn evaluate(&self, n: u64, ctx: &PrecisionContext) -> Result<Real> {
        (self.evaluator)(n, ctx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRow {
    pub n: u64,
    pub value: Real,
    pub abs_error: Real,
    pub rel_error: Real,
}

impl SequenceRow {
    pub fn new(n: u64, value: Real, target: &Real) -> Self {
        let abs_error = (&value - target).abs();
        let rel_error = if target.is_zero() {
            abs_error.clone()
        } else {
            &abs_error / target.abs()
        };
        SequenceRow {
            n,
            value,
            abs_error,
            rel_error,
        }
    }
}

/// Least-squares fit of `ln(absError)` against `ln n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub slope: Real,
    pub r_squared: Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub name: String,
    pub target: Real,
    pub rows: Vec<SequenceRow>,
    pub rate: Option<RateEstimate>,
    pub aitken_limit: Option<Real>,
    pub flags: Vec<String>,
    pub notes: String,
    pub approach: Approach,
    pub checked: bool,
}

impl ConvergenceReport {
    /// Checks the error pattern the sequence is expected to follow.
    pub fn approach_holds(&self) -> bool {
        let errs: Vec<&Real> = self.rows.iter().map(|r| &r.abs_error).collect();
        match (self.approach, errs.first(), errs.last()) {
            (_, None, _) | (_, _, None) => false,
            (Approach::Monotone, _, _) => errs.windows(2).all(|w| w[1] <= w[0]),
            (Approach::FirstVsLast, Some(first), Some(last)) => errs.len() == 1 || last < first,
        }
    }

    pub fn last_row(&self) -> Option<&SequenceRow> {
        self.rows.last()
    }
}

/// Evaluates `spec` at each `n`, possibly in parallel; rows come back sorted.
///
/// When several points fail, the error of the smallest failing `n` is returned.
pub fn evaluate_grid(spec: &SequenceSpec, grid: &[u64], ctx: &PrecisionContext) -> Result<Vec<SequenceRow>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UnsortedGrid);
    }
    let results: Vec<Result<SequenceRow>> = grid
        .par_iter()
        .map(|&n| {
            spec.evaluate(n, ctx)
                .map(|value| SequenceRow::new(n, value, &spec.target))
                .map_err(|e| e.at(n))
        })
        .collect();
    results.into_iter().collect()
}

pub fn estimate_rate(rows: &[SequenceRow]) -> Result<RateEstimate> {
    let points: Vec<(&SequenceRow, Real)> = rows
        .iter()
        .filter(|r| r.abs_error.is_positive() && r.n > 0)
        .map(|r| (r, r.abs_error.ln()))
        .collect();
    if points.len() < 4 {
        return Err(Error::InsufficientRows(points.len()));
    }
    let prec = points[0].1.prec();
    let zero = Real::from_float(rug::Float::with_val(prec, 0));
    let k = points.len() as i64;
    let xs: Vec<Real> = points
        .iter()
        .map(|(r, _)| Real::from_float(rug::Float::with_val(prec, r.n)).ln())
        .collect();
    let ys: Vec<Real> = points.into_iter().map(|(_, y)| y).collect();
    let mean = |v: &[Real]| v.iter().fold(zero.clone(), |acc, x| acc + x) / k;
    let (mx, my) = (mean(&xs), mean(&ys));
    let mut sxx = zero.clone();
    let mut sxy = zero.clone();
    let mut syy = zero.clone();
    for (x, y) in xs.iter().zip(&ys) {
        let dx = x - &mx;
        let dy = y - &my;
        sxx = sxx + dx.square();
        sxy = sxy + &dx * &dy;
        syy = syy + dy.square();
    }
    if sxx.is_zero() {
        return Err(Error::InsufficientRows(1));
    }
    let slope = &sxy / &sxx;
    let r_squared = if syy.is_zero() {
        Real::one_like(&slope)
    } else {
        sxy.square() / (sxx * syy)
    };
    Ok(RateEstimate { slope, r_squared })
}

/// The last Aitken Δ² transform `x_k - (Δx_k)² / Δ²x_k` with a nonzero denominator.
pub fn aitken(values: &[Real]) -> Result<Real> {
    if values.len() < 3 {
        return Err(Error::DegenerateDifferences);
    }
    values
        .windows(3)
        .rev()
        .find_map(|w| {
            let d1 = &w[1] - &w[0];
            let d2 = &w[2] - &w[1].mul_pow2(1) + &w[0];
            (!d2.is_zero()).then(|| &w[0] - d1.square() / d2)
        })
        .ok_or(Error::DegenerateDifferences)
}

/// Evaluates, fits and extrapolates in one go.
pub fn build_report(spec: &SequenceSpec, grid: &[u64], ctx: &PrecisionContext) -> Result<ConvergenceReport> {
    let rows = evaluate_grid(spec, grid, ctx)?;
    let rate = estimate_rate(&rows).ok();
    let values: Vec<Real> = rows.iter().map(|r| r.value.clone()).collect();
    let aitken_limit = aitken(&values).ok();
    Ok(ConvergenceReport {
        name: spec.name.clone(),
        target: spec.target.clone(),
        rows,
        rate,
        aitken_limit,
        flags: spec.flags.clone(),
        notes: spec.notes.clone(),
        approach: spec.approach,
        checked: spec.checked,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Geometric,
    Linear,
}

/// Default number of points for a linear grid without an explicit count.
pub const DEFAULT_LINEAR_POINTS: usize = 16;

/// Grid on `[n_min, n_max]` meeting `constraint`, strictly increasing.
///
/// A geometric grid without a point count doubles from `n_min` and ends at
/// `n_max`; with a count,
/// points are spaced evenly in `ln n`. Points are snapped onto the constraint
/// and duplicates dropped.
pub fn make_grid(
    kind: GridKind,
    n_min: u64,
    n_max: u64,
    points: Option<usize>,
    constraint: &GridConstraint,
) -> Result<Vec<u64>> {
    if n_min > n_max || points == Some(0) {
        return Err(Error::domain("grid needs n_min ≤ n_max and at least one point"));
    }
    let raw: Vec<u64> = match (kind, points) {
        (GridKind::Geometric, None) => {
            let mut v = Vec::new();
            let mut n = n_min.max(1);
            while n <= n_max {
                v.push(n);
                n = n.saturating_mul(2);
            }
            v.push(n_max);
            v
        }
        (_, Some(1)) => vec![n_max],
        (GridKind::Geometric, Some(p)) => {
            let (lo, hi) = ((n_min.max(1)) as f64, n_max as f64);
            (0..p)
                .map(|i| {
                    let t = i as f64 / (p - 1) as f64;
                    (lo * (hi / lo).powf(t)).round() as u64
                })
                .collect()
        }
        (GridKind::Linear, p) => {
            let p = p.unwrap_or(DEFAULT_LINEAR_POINTS) as u64;
            let span = n_max - n_min;
            if p == 1 || span == 0 {
                vec![n_max]
            } else {
                (0..p).map(|i| n_min + (span * i + (p - 1) / 2) / (p - 1)).collect()
            }
        }
    };
    let mut grid: Vec<u64> = raw
        .into_iter()
        .map(|n| constraint.snap(n))
        .filter(|&n| constraint.admits(n) && n <= n_max)
        .collect();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(grid)
}
