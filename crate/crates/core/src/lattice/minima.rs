//! Shortest vectors and the graded invariants `Min_delta`, `V_delta`, `dim_delta`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::enumerate::{Enumerator, LatticePoint, DEFAULT_MAX_CANDIDATES};
use super::{DiagonalElement, Lattice};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, RANK_TOL};

/// Relative tolerance for "equal length" decisions (`|v| <= (1 + tol) alpha`
/// style comparisons and breakpoint clustering).
pub const LENGTH_TOL: f64 = 1e-9;

/// `j * eps` must stay this far from every breakpoint to count as interior.
pub const COVER_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct EnumOptions {
    pub max_candidates: usize,
    pub rank_tol: f64,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { max_candidates: DEFAULT_MAX_CANDIDATES, rank_tol: RANK_TOL }
    }
}

/// Vectors shorter than `(1 + delta_max) alpha`, one per `+-` pair.
///
/// `breakpoints` are the distinct relative excesses `|v|/alpha - 1` (values
/// within [`LENGTH_TOL`] are merged) and always start at `0`. `levels[i]` is
/// the index into `breakpoints` of `vectors[i]`.
#[derive(Debug, Clone, Serialize)]
pub struct ShortVectorReport {
    pub alpha: f64,
    pub vectors: Vec<Vec<f64>>,
    pub coords: Vec<Vec<i64>>,
    pub breakpoints: Vec<f64>,
    #[serde(skip)]
    pub(crate) levels: Vec<usize>,
    #[serde(skip)]
    rank_tol: f64,
}

impl ShortVectorReport {
    /// `dim_delta` from the already enumerated vectors. Only meaningful for
    /// `delta` up to the `delta_max` the report was built with.
    ///
    /// The strict inequality of `Min_delta` is read through the breakpoints:
    /// a vector counts iff its breakpoint is `< delta`, and the minimal
    /// vectors always count (so `delta = 0` means the limit from the right).
    pub fn dim_at(&self, delta: f64) -> usize {
        let rows: Vec<Vec<f64>> = self
            .vectors
            .iter()
            .zip(&self.levels)
            .filter(|(_, &l)| l == 0 || self.breakpoints[l] < delta)
            .map(|(v, _)| v.clone())
            .collect();
        if rows.is_empty() {
            return 0;
        }
        let n = rows[0].len();
        linalg::rank_with_tol(&linalg::matrix_from_rows(&rows, n), self.rank_tol)
    }

    /// Vectors of minimal length.
    pub fn minimal(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.vectors.iter().zip(&self.levels).filter(|(_, &l)| l == 0).map(|(v, _)| v)
    }
}

pub fn alpha(x: &Lattice) -> Result<f64> {
    Enumerator::new(x, DEFAULT_MAX_CANDIDATES).shortest_norm()
}

pub fn short_vectors(x: &Lattice, delta_max: f64) -> Result<ShortVectorReport> {
    short_vectors_with(x, delta_max, EnumOptions::default())
}

pub fn short_vectors_with(x: &Lattice, delta_max: f64, opts: EnumOptions) -> Result<ShortVectorReport> {
    let n = x.dim();
    if !(0.0..=(n as f64 + 1.0)).contains(&delta_max) {
        return Err(Error::InvalidArgument(format!("delta_max = {delta_max} outside [0, {}]", n + 1)));
    }
    let e = Enumerator::new(x, opts.max_candidates);
    let alpha = e.shortest_norm()?;
    let points = e.within((1.0 + delta_max) * alpha * (1.0 + LENGTH_TOL))?;
    Ok(build_report(alpha, points, delta_max, opts.rank_tol))
}

fn build_report(alpha: f64, points: Vec<LatticePoint>, delta_max: f64, rank_tol: f64) -> ShortVectorReport {
    let mut vectors = Vec::new();
    let mut coords = Vec::new();
    let mut levels = Vec::new();
    let mut breakpoints: Vec<f64> = Vec::new();
    let mut cluster_start = f64::NAN;
    // Points arrive sorted by norm, so excesses are nondecreasing.
    for p in points {
        let excess = (p.norm / alpha - 1.0).max(0.0);
        let minimal = excess <= LENGTH_TOL;
        if !minimal && excess >= delta_max {
            continue;
        }
        if breakpoints.is_empty() {
            breakpoints.push(0.0);
            cluster_start = excess;
        } else if excess - cluster_start > LENGTH_TOL {
            breakpoints.push(excess);
            cluster_start = excess;
        }
        levels.push(breakpoints.len() - 1);
        vectors.push(p.vector);
        coords.push(p.coords);
    }
    ShortVectorReport { alpha, vectors, coords, breakpoints, levels, rank_tol }
}

pub fn dim_delta(x: &Lattice, delta: f64) -> Result<usize> {
    Ok(short_vectors(x, delta)?.dim_at(delta))
}

/// Indices `j` with `a` in `U_j^(eps)`: `dim_delta(a x) = j` for all `delta`
/// near `j * eps`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverMembership {
    pub first: Option<usize>,
    pub all: Vec<usize>,
}

pub fn cover_membership(x: &Lattice, a: &DiagonalElement, eps: f64) -> Result<CoverMembership> {
    let n = x.dim();
    if !(eps > 0.0 && eps < 1.0 / n as f64) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside (0, 1/{n})")));
    }
    let y = a.apply(x)?;
    let report = short_vectors(&y, n as f64 * eps + 2.0 * COVER_MARGIN)?;
    let all: Vec<usize> = (1..=n)
        .filter(|&j| {
            let delta = j as f64 * eps;
            report.breakpoints.iter().all(|b| (b - delta).abs() > COVER_MARGIN) && report.dim_at(delta) == j
        })
        .collect();
    Ok(CoverMembership { first: all.first().copied(), all })
}

/// Vectors with `|v| <= (1 + tol) alpha`, one per `+-` pair.
fn near_minimal(x: &Lattice, tol: f64) -> Result<Vec<LatticePoint>> {
    let e = Enumerator::new(x, DEFAULT_MAX_CANDIDATES);
    let alpha = e.shortest_norm()?;
    let bound = (1.0 + tol) * alpha * (1.0 + LENGTH_TOL);
    Ok(e.within(bound)?.into_iter().filter(|p| p.norm <= bound).collect())
}

fn rank_of_points(points: &[LatticePoint], n: usize) -> usize {
    let rows: Vec<Vec<f64>> = points.iter().map(|p| p.vector.clone()).collect();
    linalg::rank_of_rows(&rows, n)
}

pub fn is_well_rounded(x: &Lattice, tol: f64) -> Result<bool> {
    if tol < 0.0 {
        return Err(Error::InvalidArgument("tol must be nonnegative".into()));
    }
    let pts = near_minimal(x, tol)?;
    Ok(rank_of_points(&pts, x.dim()) == x.dim())
}

/// Exactly `n` pairs of (near-)minimal vectors, linearly independent.
pub fn is_generic_well_rounded(x: &Lattice, tol: f64) -> Result<bool> {
    if !is_well_rounded(x, tol)? {
        return Err(Error::NotWellRounded);
    }
    let pts = near_minimal(x, tol)?;
    Ok(pts.len() == x.dim() && rank_of_points(&pts, x.dim()) == x.dim())
}

/// Rank of the functionals `t -> sum_j t_j ((v_i)_j^2 - (v_n)_j^2)`,
/// `i < n`, restricted to the trace-zero hyperplane. These are the
/// derivatives at the identity of `a -> |a v_i|^2 - |a v_n|^2` (up to a
/// factor of two).
pub fn wr_transversality_rank(x: &Lattice) -> Result<usize> {
    let n = x.dim();
    let generic = match is_generic_well_rounded(x, 0.0) {
        Ok(g) => g,
        Err(Error::NotWellRounded) => false,
        Err(e) => return Err(e),
    };
    if !generic {
        return Err(Error::NotGenericWR);
    }
    let mins = near_minimal(x, 0.0)?;
    let last: Vec<f64> = mins[n - 1].vector.iter().map(|v| v * v).collect();
    let functionals = DMatrix::from_fn(n - 1, n, |i, j| mins[i].vector[j].powi(2) - last[j]);
    let ones = DMatrix::from_element(1, n, 1.0);
    let hyperplane = linalg::null_space(&ones, RANK_TOL);
    let q = DMatrix::from_fn(n, hyperplane.len(), |i, k| hyperplane[k][i]);
    Ok(linalg::rank(&(functionals * q)))
}

/// Greedy independent minima: the shortest vector, then the shortest vector
/// independent of those chosen, and so on. The lengths are the successive
/// minima of `x`.
pub fn independent_minima(x: &Lattice) -> Result<Vec<LatticePoint>> {
    let e = Enumerator::new(x, DEFAULT_MAX_CANDIDATES);
    let n = x.dim();
    let cap = e.reduced_norms().into_iter().fold(0.0_f64, f64::max);
    let alpha = e.shortest_norm()?;
    let mut radius = (2.0 * alpha).min(cap);
    loop {
        let pts = e.within(radius)?;
        let chosen = greedy_independent(pts, n);
        if chosen.len() == n || radius >= cap {
            if chosen.len() < n {
                // The reduced basis itself is independent, so this is unreachable
                // unless rounding broke the rank test.
                return Err(Error::RankDeficient { rank: chosen.len(), expected: n });
            }
            return Ok(chosen);
        }
        radius = (2.0 * radius).min(cap);
    }
}

fn greedy_independent(points: Vec<LatticePoint>, n: usize) -> Vec<LatticePoint> {
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut chosen = Vec::with_capacity(n);
    for p in points {
        let r = linalg::orthogonal_residual(&p.vector, &ortho);
        let len = dot(&r, &r).sqrt();
        if len > RANK_TOL * p.norm {
            ortho.push(r.iter().map(|v| v / len).collect());
            chosen.push(p);
            if chosen.len() == n {
                break;
            }
        }
    }
    chosen
}

/// A certified lower bound for `alpha(a x)` whenever `a` lies in `U_n^(eps)`
/// with `eps < 1`: then `a x` has `n` independent vectors of length at most
/// `(n+1) alpha`, they span a sublattice of covolume at least one, and
/// Hadamard's inequality gives `((n+1) alpha)^n >= 1`.
pub fn compactness_bound(n: usize) -> f64 {
    1.0 / (n as f64 + 1.0)
}
