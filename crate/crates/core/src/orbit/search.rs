//! Search for a well-rounded lattice on a closed orbit `A x`.
//!
//! The orbit is parameterized by `Delta_rho x (T_2 / stabilizer)`: affine
//! coordinates `u` on the simplex with vertices `b_1..b_d` and coordinates
//! `mu` along the stabilizer generators. A coarse grid seeds Nelder-Mead on
//! `log spread`; each local minimum is then polished by Newton's method on
//! the equal-length equations for the current independent minima.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{spread, ClosedOrbitStructure};
use crate::error::{Error, Result};
use crate::lattice::{independent_minima, DiagonalElement, Enumerator, Lattice, DEFAULT_MAX_CANDIDATES};

/// Block projections are sampled among lattice vectors of at most this length.
const ETA_RADIUS: f64 = 3.0;
const ETA_GRID: usize = 16;
const MAX_STARTS: usize = 16;
const MAX_GRID: usize = 512;
const NEWTON_STEPS: usize = 40;
const POLISH_ROUNDS: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct SearchOptions {
    /// Maximum number of spread evaluations.
    pub budget: usize,
    pub seed: u64,
    /// Success once `spread - 1 <= tolerance`.
    pub tolerance: f64,
    /// Added to `log(2C / eta)` when choosing `rho`.
    pub eta_margin: f64,
    /// Keep every evaluated `(a, spread)` pair.
    pub record_trace: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: 5_000, seed: 0, tolerance: 1e-9, eta_margin: 0.5, record_trace: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TracePoint {
    pub log_coords: Vec<f64>,
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub a_star: DiagonalElement,
    /// `a_star x`.
    pub lattice: Lattice,
    pub spread: f64,
    pub evaluations: usize,
    pub eta: f64,
    pub rho: f64,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

impl SearchResult {
    /// Trace as CSV with columns `t_1..t_{n-1},spread`.
    pub fn trace_csv(&self, digits: usize) -> String {
        let n = self.a_star.dim();
        let mut out: Vec<String> = Vec::with_capacity(self.trace.len() + 1);
        let mut header: Vec<String> = (1..n).map(|i| format!("t_{i}")).collect();
        header.push("spread".into());
        out.push(header.join(","));
        for p in &self.trace {
            let mut cols: Vec<String> = p.log_coords[..n - 1].iter().map(|v| fmt_sig(*v, digits)).collect();
            cols.push(fmt_sig(p.spread, digits));
            out.push(cols.join(","));
        }
        out.push(String::new());
        out.join("\n")
    }
}

fn fmt_sig(v: f64, digits: usize) -> String {
    crate::report::format_sig(v, digits)
}

struct Objective<'a> {
    x: &'a Lattice,
    vertices: Vec<Vec<f64>>,
    gens: Vec<Vec<f64>>,
    budget: usize,
    evaluations: usize,
    record: bool,
    trace: Vec<TracePoint>,
    best: Option<(Vec<f64>, f64)>,
}

impl<'a> Objective<'a> {
    fn simplex_dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Log coordinates for affine simplex coordinates `u` and stabilizer
    /// coordinates `mu`, concatenated in `p`.
    fn log_coords(&self, p: &[f64]) -> Vec<f64> {
        let s = self.simplex_dim();
        let n = self.x.dim();
        let mut t = vec![0.0; n];
        let last = 1.0 - p[..s].iter().sum::<f64>();
        for (i, v) in self.vertices.iter().enumerate() {
            let w = if i < s { p[i] } else { last };
            for (tj, vj) in t.iter_mut().zip(v) {
                *tj += w * vj;
            }
        }
        for (mu, g) in p[s..].iter().zip(&self.gens) {
            for (tj, gj) in t.iter_mut().zip(g) {
                *tj += mu * gj;
            }
        }
        t
    }

    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    /// Records an already computed value.
    fn note(&mut self, t: Vec<f64>, value: f64) {
        self.evaluations += 1;
        if self.record {
            self.trace.push(TracePoint { log_coords: t.clone(), spread: value });
        }
        if self.best.as_ref().is_none_or(|(_, b)| value < *b) {
            self.best = Some((t, value));
        }
    }

    /// Spread at log coordinates `t`, or `None` once the budget is spent.
    fn eval_log(&mut self, t: Vec<f64>) -> Option<f64> {
        if self.exhausted() {
            return None;
        }
        let v = spread_at(self.x, &t);
        self.note(t, v);
        Some(v)
    }

    fn eval(&mut self, p: &[f64]) -> Option<f64> {
        let t = self.log_coords(p);
        self.eval_log(t)
    }
}

fn spread_at(x: &Lattice, t: &[f64]) -> f64 {
    let a = DiagonalElement::project(t.to_vec());
    a.apply(x).and_then(|y| spread(&y)).unwrap_or(f64::INFINITY)
}

/// Smallest nonzero block projection of short vectors over a grid of `T_2`.
fn estimate_eta(x: &Lattice, s: &ClosedOrbitStructure) -> f64 {
    let owner = s.block_of();
    let t = s.t2_stabilizer_gens.len();
    let per = if t == 0 { 1 } else { ((ETA_GRID * ETA_GRID) as f64).powf(1.0 / t as f64).floor().max(2.0) as usize };
    let total = per.pow(t as u32);
    let mins: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut log = vec![0.0; x.dim()];
            let mut rest = idx;
            for g in &s.t2_stabilizer_gens {
                let mu = (rest % per) as f64 / per as f64;
                rest /= per;
                for (l, gj) in log.iter_mut().zip(g) {
                    *l += mu * gj;
                }
            }
            let Ok(y) = DiagonalElement::project(log).apply(x) else {
                return f64::INFINITY;
            };
            let e = Enumerator::new(&y, DEFAULT_MAX_CANDIDATES);
            let Ok(points) = e.within(ETA_RADIUS) else {
                return f64::INFINITY;
            };
            let mut best = f64::INFINITY;
            for p in &points {
                let mut sq = vec![0.0; s.block_count()];
                for (j, v) in p.vector.iter().enumerate() {
                    sq[owner[j]] += v * v;
                }
                for q in sq {
                    if q > 1e-20 {
                        best = best.min(q.sqrt());
                    }
                }
            }
            best
        })
        .collect();
    let eta = mins.into_iter().fold(f64::INFINITY, f64::min);
    if eta.is_finite() {
        eta
    } else {
        crate::lattice::alpha(x).unwrap_or(1.0)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Compositions of `r` into `parts` nonnegative integers, lexicographically.
fn compositions(r: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![r]];
    }
    let mut out = Vec::new();
    for first in 0..=r {
        for mut rest in compositions(r - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn grid_size(r: usize, d: usize, t: usize) -> usize {
    binomial(r + d - 1, d - 1).saturating_mul(r.saturating_pow(t as u32))
}

/// Grid points in parameter space: simplex points with denominator `r`
/// times the half-open lattice `{0, 1/r, ..., (r-1)/r}^t`.
fn grid_points(r: usize, d: usize, t: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let simplex = compositions(r, d);
    let total_t = r.pow(t as u32);
    for c in &simplex {
        for idx in 0..total_t {
            let mut p: Vec<f64> = c[..d - 1].iter().map(|&k| k as f64 / r as f64).collect();
            let mut rest = idx;
            for _ in 0..t {
                p.push((rest % r) as f64 / r as f64);
                rest /= r;
            }
            out.push(p);
        }
    }
    out
}

/// Nelder-Mead on `objective` (minimizing `spread`), starting from `start`
/// with axis steps `step`. Stops on convergence, on reaching `target`, or
/// when the budget runs out.
fn nelder_mead(obj: &mut Objective, start: &[f64], start_value: f64, step: f64, target: f64) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.to_vec(), start_value)];
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += step;
        let Some(v) = obj.eval(&p) else {
            break;
        };
        simplex.push((p, v));
    }
    if simplex.len() < dim + 1 {
        return best_of(simplex);
    }
    let by_value = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| a.1.total_cmp(&b.1);
    loop {
        simplex.sort_by(by_value);
        let (lo, hi) = (simplex[0].1, simplex[dim].1);
        let size = simplex[1..]
            .iter()
            .map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if lo <= target || size < 1e-13 || (hi - lo) <= 1e-15 * lo {
            break;
        }
        let centroid: Vec<f64> =
            (0..dim).map(|k| simplex[..dim].iter().map(|(p, _)| p[k]).sum::<f64>() / dim as f64).collect();
        let along = |c: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[dim].0).map(|(m, w)| m + c * (m - w)).collect()
        };
        let reflected = along(1.0);
        let Some(fr) = obj.eval(&reflected) else { break };
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let Some(fe) = obj.eval(&expanded) else {
                simplex[dim] = (reflected, fr);
                break;
            };
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let (contracted, outside) = if fr < simplex[dim].1 { (along(0.5), true) } else { (along(-0.5), false) };
            let Some(fc) = obj.eval(&contracted) else { break };
            let limit = if outside { fr } else { simplex[dim].1 };
            if fc < limit {
                simplex[dim] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = best.iter().zip(&entry.0).map(|(b, q)| b + 0.5 * (q - b)).collect();
                    let Some(v) = obj.eval(&p) else {
                        return best_of(simplex);
                    };
                    *entry = (p, v);
                }
            }
        }
    }
    best_of(simplex)
}

fn best_of(simplex: Vec<(Vec<f64>, f64)>) -> (Vec<f64>, f64) {
    simplex.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty simplex")
}

/// Newton iteration on `log|a w_i|^2 = log|a w_n|^2` (`i < n`) together with
/// `sum t = 0`, for fixed lattice vectors `w_i`.
fn newton_equalize(ws: &[Vec<f64>], t0: &[f64]) -> Option<Vec<f64>> {
    let n = t0.len();
    let mut t = t0.to_vec();
    for _ in 0..NEWTON_STEPS {
        let scaled: Vec<Vec<f64>> = ws
            .iter()
            .map(|w| w.iter().zip(&t).map(|(wj, tj)| (2.0 * tj).exp() * wj * wj).collect())
            .collect();
        let sq: Vec<f64> = scaled.iter().map(|s| s.iter().sum()).collect();
        let mut g = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            g[i] = sq[i].ln() - sq[n - 1].ln();
            for j in 0..n {
                jac[(i, j)] = 2.0 * scaled[i][j] / sq[i] - 2.0 * scaled[n - 1][j] / sq[n - 1];
            }
        }
        g[n - 1] = t.iter().sum();
        for j in 0..n {
            jac[(n - 1, j)] = 1.0;
        }
        if g.amax() < 1e-15 {
            break;
        }
        let step = jac.svd(true, true).solve(&(-g), 1e-12).ok()?;
        let len = step.norm();
        let damp = if len > 1.0 { 1.0 / len } else { 1.0 };
        for (tj, sj) in t.iter_mut().zip(step.iter()) {
            *tj += damp * sj;
        }
        if !t.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    Some(t)
}

/// Repeatedly equalizes the current independent minima.
fn polish(obj: &mut Objective, t0: Vec<f64>, v0: f64, target: f64) -> (Vec<f64>, f64) {
    let (mut t, mut v) = (t0, v0);
    for _ in 0..POLISH_ROUNDS {
        if v <= target {
            break;
        }
        let Ok(y) = DiagonalElement::project(t.clone()).apply(obj.x) else { break };
        let Ok(mins) = independent_minima(&y) else { break };
        let ws: Vec<Vec<f64>> = mins.iter().map(|p| obj.x.vector(&p.coords)).collect();
        let Some(next) = newton_equalize(&ws, &t) else { break };
        let Some(nv) = obj.eval_log(next.clone()) else { break };
        if nv < v {
            t = next;
            v = nv;
        } else {
            break;
        }
    }
    (t, v)
}

fn finish(x: &Lattice, obj: Objective, eta: f64, rho: f64) -> Result<SearchResult> {
    let (t, value) = obj.best.expect("at least one evaluation");
    let a_star = DiagonalElement::project(t);
    let lattice = a_star.apply(x)?;
    Ok(SearchResult { a_star, lattice, spread: value, evaluations: obj.evaluations, eta, rho, trace: obj.trace })
}

/// Searches `A x` for a lattice with `spread - 1 <= opts.tolerance`.
///
/// Deterministic for a given seed. When the budget runs out first the best
/// point found is returned inside [`Error::BudgetExhausted`].
pub fn search_well_rounded(x: &Lattice, s: &ClosedOrbitStructure, opts: &SearchOptions) -> Result<SearchResult> {
    if opts.budget < 100 {
        return Err(Error::InvalidArgument(format!("budget {} is below the minimum of 100", opts.budget)));
    }
    if !(opts.tolerance > 0.0) || !(opts.eta_margin > 0.0) {
        return Err(Error::InvalidArgument("tolerance and eta margin must be positive".into()));
    }
    s.validate(x)?;
    let n = x.dim();
    let d = s.block_count();
    let t = s.t2_stabilizer_gens.len();
    let target = 1.0 + opts.tolerance;

    let eta = estimate_eta(x, s);
    let c = (n as f64).sqrt();
    let rho = (2.0 * c / eta).ln() + opts.eta_margin;
    let mut obj = Objective {
        x,
        vertices: (0..d).map(|i| s.simplex_vertex(i, rho)).collect(),
        gens: s.t2_stabilizer_gens.clone(),
        budget: opts.budget,
        evaluations: 0,
        record: opts.record_trace,
        trace: Vec::new(),
        best: None,
    };

    let v0 = obj.eval_log(vec![0.0; n]).expect("budget is at least 100");
    if v0 <= target {
        return finish(x, obj, eta, rho);
    }

    // Coarse grid, at most a quarter of the budget.
    let grid_budget = (opts.budget / 4).min(MAX_GRID);
    let mut r = 1;
    while grid_size(r + 1, d, t) <= grid_budget {
        r += 1;
    }
    let points = grid_points(r, d, t);
    let logs: Vec<Vec<f64>> = points.iter().map(|p| obj.log_coords(p)).collect();
    let values: Vec<f64> = logs.par_iter().map(|l| spread_at(x, l)).collect();
    for (l, v) in logs.into_iter().zip(&values) {
        obj.note(l, *v);
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let step = 1.0 / r as f64;
    let dim = (d - 1) + t;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts: Vec<(Vec<f64>, f64)> =
        order.iter().take(MAX_STARTS).map(|&i| (points[i].clone(), values[i])).collect();
    starts.reverse();
    loop {
        if obj.best.as_ref().is_some_and(|(_, b)| *b <= target) {
            return finish(x, obj, eta, rho);
        }
        if obj.exhausted() {
            let best = finish(x, obj, eta, rho)?;
            return Err(Error::BudgetExhausted(Box::new(best)));
        }
        let (start, value) = match starts.pop() {
            Some(s) => s,
            None => {
                // Random restart: Dirichlet point of the simplex, uniform in T_2.
                let e: Vec<f64> = (0..d).map(|_| -rng.gen_range(f64::EPSILON..1.0f64).ln()).collect();
                let total: f64 = e.iter().sum();
                let mut p: Vec<f64> = e[..d - 1].iter().map(|v| v / total).collect();
                p.extend((0..t).map(|_| rng.gen_range(0.0..1.0)));
                let Some(v) = obj.eval(&p) else { continue };
                (p, v)
            }
        };
        debug_assert_eq!(start.len(), dim);
        let (p, v) = nelder_mead(&mut obj, &start, value, step, target);
        let lt = obj.log_coords(&p);
        polish(&mut obj, lt, v, target);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{block_sum, compact_orbit_from_quadratic, OrbitPart};

    #[test]
    fn compositions_and_grid() {
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(grid_size(4, 2, 1), 20);
        assert_eq!(grid_points(4, 2, 1).len(), 20);
        assert_eq!(grid_points(3, 1, 1), vec![vec![0.0], vec![1.0 / 3.0], vec![2.0 / 3.0]]);
    }

    #[test]
    fn standard_lattice_needs_no_move() {
        let (x, s) = block_sum(&[OrbitPart::Unit, OrbitPart::Unit]).unwrap();
        let r = search_well_rounded(&x, &s, &SearchOptions::default()).unwrap();
        assert_eq!(r.a_star.log_coords(), &[0.0, 0.0]);
        assert_eq!(r.spread, 1.0);
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn finds_well_rounded_point_on_compact_orbit() {
        let (x, s) = compact_orbit_from_quadratic(2).unwrap();
        let r = search_well_rounded(&x, &s, &SearchOptions::default()).unwrap();
        assert!(r.spread - 1.0 <= 1e-6);
        assert!(r.evaluations <= 5_000);
        assert!((spread(&r.lattice).unwrap() - r.spread).abs() <= 1e-9);
    }

    #[test]
    fn small_budget_is_rejected() {
        let (x, s) = compact_orbit_from_quadratic(2).unwrap();
        let opts = SearchOptions { budget: 99, ..SearchOptions::default() };
        assert!(matches!(search_well_rounded(&x, &s, &opts), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn newton_equalizes_standard_basis() {
        let ws = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let t = newton_equalize(&ws, &[0.4, -0.1, -0.3]).unwrap();
        for v in t {
            assert!(v.abs() < 1e-12);
        }
    }
}
