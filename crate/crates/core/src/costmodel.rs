//! Analytical runtime model for Stream-K as a function of grid size `g`.
//!
//! The runtime of the whole schedule is taken to be that of one
//! tile-outputting CTA:
//!
//! ```text
//! time(g) = a + b·[peers(g) > 1] + c·iters_per_cta(g) + d·(peers(g) − 1)
//! iters_per_cta(g) = ceil(total_iters / g)
//! peers(g)         = ceil(iters_per_tile / iters_per_cta(g))
//! ```
//!
//! `a` is the fixed per-CTA cost, `b` the conditional cost of emitting
//! partial sums, `c` the cost of one MAC-loop iteration and `d` the cost of
//! reducing one collaborator's partials.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;

use crate::domain::TileGrid;
use crate::error::{Error, Result};
use crate::scalar::TimeScalar;

/// Workload constants `{a, b, c, d}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostParams<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: TimeScalar> CostParams<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self> {
        let zero = T::zero();
        if !(a >= zero && b >= zero && d >= zero) {
            return Err(Error::InvalidParameter("cost constants must be non-negative".into()));
        }
        if !(c > zero) {
            return Err(Error::InvalidParameter("per-iteration cost c must be positive".into()));
        }
        Ok(Self { a, b, c, d })
    }

    /// `a = b = d = 0`, `c = 1`: time is the iteration count.
    pub fn unit() -> Self {
        Self { a: T::zero(), b: T::zero(), c: T::one(), d: T::zero() }
    }
}

/// Iterations handed to each CTA (the ceiling share).
///
/// # Panics
///
/// If `g == 0`.
pub fn iters_per_cta(grid: &TileGrid, g: usize) -> usize {
    assert!(g >= 1, "grid size must be at least 1");
    grid.total_iters.div_ceil(g)
}

/// Modeled number of CTAs collaborating on a tile.
pub fn fixup_peers(grid: &TileGrid, g: usize) -> usize {
    grid.iters_per_tile.div_ceil(iters_per_cta(grid, g))
}

/// The four terms of the model, kept apart for inspection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeBreakdown<T> {
    pub fixed: T,
    pub partials: T,
    pub mac: T,
    pub reduce: T,
}

impl<T: TimeScalar> TimeBreakdown<T> {
    pub fn total(&self) -> T {
        self.fixed + self.partials + self.mac + self.reduce
    }
}

pub fn predict_breakdown<T: TimeScalar>(
    params: &CostParams<T>,
    grid: &TileGrid,
    g: usize,
) -> TimeBreakdown<T> {
    let iters = iters_per_cta(grid, g);
    let peers = fixup_peers(grid, g);
    TimeBreakdown {
        fixed: params.a,
        partials: if peers > 1 { params.b } else { T::zero() },
        mac: params.c * T::from_count(iters),
        reduce: params.d * T::from_count(peers - 1),
    }
}

/// Modeled runtime of a `g`-CTA Stream-K launch.
pub fn predict_time<T: TimeScalar>(params: &CostParams<T>, grid: &TileGrid, g: usize) -> T {
    predict_breakdown(params, grid, g).total()
}

/// Candidate grid sizes `{1..=p} ∪ {t}`, clamped to `total_iters`,
/// ascending and deduplicated.
pub fn search_domain(grid: &TileGrid, p: usize) -> Vec<usize> {
    let cap = grid.total_iters.max(1);
    let mut domain: Vec<usize> = (1..=p.max(1))
        .chain(std::iter::once(grid.total_tiles))
        .map(|g| g.min(cap))
        .collect();
    domain.sort_unstable();
    domain.dedup();
    domain
}

/// Grid size with the lowest modeled time over [`search_domain`]; ties go
/// to the larger `g`.
pub fn select_grid_size<T: TimeScalar>(params: &CostParams<T>, grid: &TileGrid, p: usize) -> usize {
    let mut best = (1, predict_time(params, grid, 1));
    for g in search_domain(grid, p) {
        let t = predict_time(params, grid, g);
        if t <= best.1 {
            best = (g, t);
        }
    }
    best.0
}

/// One measured (or synthesized) runtime for a grid at grid size `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationSample<T> {
    pub grid: TileGrid,
    pub g: usize,
    pub time: T,
}

/// Fitted constants plus the Euclidean norm of the fit residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration<T> {
    pub params: CostParams<T>,
    pub residual: T,
}

const FEATURES: [&str; 4] = [
    "fixed cost (intercept)",
    "partial-output indicator (peers > 1)",
    "iterations per CTA",
    "collaborator count (peers - 1)",
];

/// Design-matrix row `[1, [peers > 1], iters_per_cta, peers − 1]`.
pub fn feature_row<T: TimeScalar>(grid: &TileGrid, g: usize) -> [T; 4] {
    let peers = fixup_peers(grid, g);
    [
        T::one(),
        if peers > 1 { T::one() } else { T::zero() },
        T::from_count(iters_per_cta(grid, g)),
        T::from_count(peers - 1),
    ]
}

/// Non-negative least-squares fit of `{a, b, c, d}`.
///
/// With four unknowns the active-set problem is solved exactly by
/// enumerating all column subsets, fitting each by Householder QR and
/// keeping the best fit whose coefficients are all non-negative.
pub fn calibrate<T: TimeScalar + Float>(samples: &[CalibrationSample<T>]) -> Result<Calibration<T>> {
    if samples.len() < FEATURES.len() {
        return Err(Error::Calibration(format!(
            "rank-deficient samples: {} samples cannot determine {} constants",
            samples.len(),
            FEATURES.len()
        )));
    }
    let rows: Vec<[T; 4]> = samples.iter().map(|s| feature_row(&s.grid, s.g)).collect();
    let y: Vec<T> = samples.iter().map(|s| s.time).collect();
    let column = |j: usize| -> Vec<T> { rows.iter().map(|r| r[j]).collect() };

    let all: Vec<Vec<T>> = (0..4).map(column).collect();
    if let Some(j) = first_dependent_column(&all) {
        return Err(Error::Calibration(format!(
            "rank-deficient samples: {} does not vary independently of the other features",
            FEATURES[j]
        )));
    }

    let mut best: Option<([T; 4], T)> = None;
    for mask in 0u32..16 {
        let active: Vec<usize> = (0..4).filter(|j| mask & (1 << j) != 0).collect();
        let cols: Vec<Vec<T>> = active.iter().map(|&j| all[j].clone()).collect();
        let Some((coef, residual)) = least_squares(&cols, &y) else {
            continue;
        };
        if coef.iter().any(|&v| v < T::zero()) {
            continue;
        }
        let mut theta = [T::zero(); 4];
        for (&j, &v) in active.iter().zip(&coef) {
            theta[j] = v;
        }
        if best.is_none_or(|(_, r)| residual < r) {
            best = Some((theta, residual));
        }
    }
    let (theta, residual) = best.ok_or_else(|| Error::Calibration("no feasible fit".into()))?;
    let params = CostParams::new(theta[0], theta[1], theta[2], theta[3]).map_err(|_| {
        Error::Calibration("fitted per-iteration cost c is zero; samples carry no MAC signal".into())
    })?;
    Ok(Calibration { params, residual })
}

/// Index of the first column lying (numerically) in the span of the
/// columns before it, if any.
fn first_dependent_column<T: Float>(cols: &[Vec<T>]) -> Option<usize> {
    let mut work = cols.to_vec();
    let mut scratch = vec![T::zero(); cols.first().map_or(0, Vec::len)];
    let tol = T::epsilon().sqrt();
    let r = householder(&mut work, &mut scratch);
    cols.iter().zip(&r).position(|(col, &rjj)| {
        let norm = col.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
        norm == T::zero() || rjj.abs() <= tol * norm
    })
}

/// In-place Householder QR of the columns, applying the same reflections
/// to `y`. Returns the diagonal of R.
fn householder<T: Float>(cols: &mut [Vec<T>], y: &mut [T]) -> Vec<T> {
    let n = y.len();
    let mut diag = Vec::with_capacity(cols.len());
    for j in 0..cols.len() {
        if j >= n {
            diag.push(T::zero());
            continue;
        }
        let norm = cols[j][j..].iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
        if norm == T::zero() {
            diag.push(T::zero());
            continue;
        }
        let alpha = if cols[j][j] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = cols[j][j..].to_vec();
        v[0] = v[0] - alpha;
        let vv = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        let two = T::one() + T::one();
        let reflect = |target: &mut [T]| {
            let dot = v.iter().zip(target.iter()).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            let scale = two * dot / vv;
            for (t, &vi) in target.iter_mut().zip(&v) {
                *t = *t - scale * vi;
            }
        };
        for col in cols.iter_mut().skip(j) {
            reflect(&mut col[j..]);
        }
        reflect(&mut y[j..]);
        diag.push(alpha);
    }
    diag
}

/// Ordinary least squares on full-rank columns. Returns coefficients and
/// the residual norm, or `None` when the columns are rank-deficient.
fn least_squares<T: Float>(cols: &[Vec<T>], y: &[T]) -> Option<(Vec<T>, T)> {
    let p = cols.len();
    let mut work = cols.to_vec();
    let mut qty = y.to_vec();
    let diag = householder(&mut work, &mut qty);
    if diag.iter().any(|&d| d == T::zero()) {
        return None;
    }
    let mut coef = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut acc = qty[i];
        for j in i + 1..p {
            acc = acc - work[j][i] * coef[j];
        }
        coef[i] = acc / diag[i];
    }
    let residual = qty[p..].iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
    Some((coef, residual))
}

/// `a=…`, `b=…`, `c=…`, `d=…`, `fit_residual=…` key-value text.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamsFile {
    pub params: CostParams<f64>,
    pub fit_residual: Option<f64>,
}

impl fmt::Display for ParamsFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "a={}", p.a)?;
        writeln!(f, "b={}", p.b)?;
        writeln!(f, "c={}", p.c)?;
        writeln!(f, "d={}", p.d)?;
        if let Some(r) = self.fit_residual {
            writeln!(f, "fit_residual={r}")?;
        }
        Ok(())
    }
}

/// Blank lines and `#` comments are ignored; `a`..`d` are required.
impl FromStr for ParamsFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut vals: [Option<f64>; 5] = [None; 5];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key=value, got `{line}`", lineno + 1))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Parse(format!("line {}: bad number `{}`", lineno + 1, value.trim()))
            })?;
            let slot = match key.trim() {
                "a" => 0,
                "b" => 1,
                "c" => 2,
                "d" => 3,
                "fit_residual" => 4,
                other => {
                    return Err(Error::Parse(format!("line {}: unknown key `{other}`", lineno + 1)))
                }
            };
            vals[slot] = Some(value);
        }
        let need = |i: usize, name: &str| {
            vals[i].ok_or_else(|| Error::Parse(format!("missing `{name}` in params file")))
        };
        let params = CostParams::new(need(0, "a")?, need(1, "b")?, need(2, "c")?, need(3, "d")?)?;
        Ok(ParamsFile { params, fit_residual: vals[4] })
    }
}
