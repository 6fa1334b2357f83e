//! LLL preprocessing and Fincke-Pohst style enumeration of short lattice vectors.
//!
//! The basis is LLL-reduced (tracking the integral change of basis) and then
//! enumerated depth-first over the Gram-Schmidt levels. Results are reported
//! in integer coordinates of the *original* basis, one vector per `+-` pair
//! (first nonzero coordinate positive).

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{dot, norm};

pub const DEFAULT_MAX_CANDIDATES: usize = 1_000_000;

const LLL_DELTA: f64 = 0.99;
const LLL_MAX_STEPS: usize = 100_000;

/// Relative slack applied to enumeration radii so that boundary vectors
/// survive rounding; callers filter with their own comparison afterwards.
const RADIUS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    /// Integer coordinates in the original basis.
    pub coords: Vec<i64>,
    pub vector: Vec<f64>,
    pub norm: f64,
}

struct GramSchmidt {
    /// `mu[i][j]` for `j < i`.
    mu: Vec<Vec<f64>>,
    /// Squared norms of the orthogonalized vectors.
    sq_norms: Vec<f64>,
}

fn gram_schmidt(basis: &[Vec<f64>]) -> GramSchmidt {
    let n = basis.len();
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut sq_norms = vec![0.0; n];
    for i in 0..n {
        let mut v = basis[i].clone();
        for j in 0..i {
            let m = dot(&basis[i], &ortho[j]) / sq_norms[j];
            mu[i][j] = m;
            for (vk, ok) in v.iter_mut().zip(&ortho[j]) {
                *vk -= m * ok;
            }
        }
        sq_norms[i] = dot(&v, &v);
        ortho.push(v);
    }
    GramSchmidt { mu, sq_norms }
}

/// LLL reduction. Returns the reduced basis and `transform` with
/// `reduced[i] = sum_k transform[i][k] * basis[k]`.
fn lll(basis: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<i64>>) {
    let n = basis.len();
    let mut b = basis.to_vec();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut k = 1;
    let mut steps = 0;
    while k < n && steps < LLL_MAX_STEPS {
        steps += 1;
        for j in (0..k).rev() {
            let gs = gram_schmidt(&b);
            let q = gs.mu[k][j].round();
            if q != 0.0 {
                let qi = q as i64;
                let (head, tail) = b.split_at_mut(k);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= q * y;
                }
                let (uh, ut) = u.split_at_mut(k);
                for (x, y) in ut[0].iter_mut().zip(&uh[j]) {
                    *x -= qi * y;
                }
            }
        }
        let gs = gram_schmidt(&b);
        let m = gs.mu[k][k - 1];
        if gs.sq_norms[k] >= (LLL_DELTA - m * m) * gs.sq_norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    (b, u)
}

/// Enumeration state for one lattice: reduced basis plus Gram-Schmidt data.
pub(crate) struct Enumerator {
    reduced: Vec<Vec<f64>>,
    transform: Vec<Vec<i64>>,
    gs: GramSchmidt,
    max_candidates: usize,
}

impl Enumerator {
    pub(crate) fn new(x: &Lattice, max_candidates: usize) -> Self {
        let (reduced, transform) = lll(x.basis());
        let gs = gram_schmidt(&reduced);
        Enumerator { reduced, transform, gs, max_candidates }
    }

    pub(crate) fn dim(&self) -> usize {
        self.reduced.len()
    }

    /// Norms of the reduced basis vectors: `n` independent lattice vectors.
    pub(crate) fn reduced_norms(&self) -> Vec<f64> {
        self.reduced.iter().map(|b| norm(b)).collect()
    }

    /// Length of a shortest nonzero vector.
    pub(crate) fn shortest_norm(&self) -> Result<f64> {
        let bound = self.reduced_norms().into_iter().fold(f64::INFINITY, f64::min);
        let pts = self.within(bound)?;
        Ok(pts.iter().map(|p| p.norm).fold(bound, f64::min))
    }

    /// Every nonzero lattice vector with norm at most `radius` (up to a tiny
    /// relative slack), one per `+-` pair, sorted by norm with ties broken by
    /// integer coordinates.
    pub(crate) fn within(&self, radius: f64) -> Result<Vec<LatticePoint>> {
        let n = self.dim();
        let r2 = (radius * (1.0 + RADIUS_SLACK)).powi(2);
        let mut y = vec![0i64; n];
        let mut found = Vec::new();
        let mut visited = 0usize;
        self.descend(n, 0.0, r2, &mut y, &mut found, &mut visited)?;
        sort_points(&mut found);
        Ok(found)
    }

    fn descend(
        &self,
        level: usize,
        used: f64,
        r2: f64,
        y: &mut [i64],
        out: &mut Vec<LatticePoint>,
        visited: &mut usize,
    ) -> Result<()> {
        if level == 0 {
            if y.iter().all(|&c| c == 0) {
                return Ok(());
            }
            if let Some(p) = self.point_from_reduced(y) {
                if p.norm * p.norm <= r2 {
                    out.push(p);
                }
            }
            return Ok(());
        }
        let i = level - 1;
        let n = self.dim();
        let center: f64 = -((i + 1)..n).map(|j| self.gs.mu[j][i] * y[j] as f64).sum::<f64>();
        let b = self.gs.sq_norms[i];
        let rem = (r2 - used).max(0.0);
        let half = (rem / b).sqrt();
        let lo = (center - half).ceil() as i64;
        let hi = (center + half).floor() as i64;
        for yi in lo..=hi {
            *visited += 1;
            if *visited > self.max_candidates {
                return Err(Error::EnumerationBudgetExceeded { cap: self.max_candidates });
            }
            let d = yi as f64 - center;
            let next = used + b * d * d;
            if next > r2 * (1.0 + RADIUS_SLACK) {
                continue;
            }
            y[i] = yi;
            self.descend(i, next, r2, y, out, visited)?;
        }
        y[i] = 0;
        Ok(())
    }

    /// Converts reduced-basis coefficients; returns `None` for the negative
    /// representative of a `+-` pair.
    fn point_from_reduced(&self, y: &[i64]) -> Option<LatticePoint> {
        let n = self.dim();
        let coords: Vec<i64> = (0..n).map(|k| (0..n).map(|i| y[i] * self.transform[i][k]).sum()).collect();
        let first = coords.iter().find(|&&c| c != 0)?;
        if *first < 0 {
            return None;
        }
        let mut vector = vec![0.0; n];
        for (yi, row) in y.iter().zip(&self.reduced) {
            if *yi != 0 {
                for (v, b) in vector.iter_mut().zip(row) {
                    *v += *yi as f64 * b;
                }
            }
        }
        let norm = norm(&vector);
        Some(LatticePoint { coords, vector, norm })
    }
}

/// Sorts by norm; runs of norms equal up to relative `1e-10` are ordered by
/// integer coordinates so the output does not depend on rounding noise.
fn sort_points(points: &mut [LatticePoint]) {
    points.sort_by(|a, b| a.norm.total_cmp(&b.norm).then_with(|| a.coords.cmp(&b.coords)));
    let mut start = 0;
    while start < points.len() {
        let base = points[start].norm;
        let mut end = start + 1;
        while end < points.len() && points[end].norm - base <= 1e-10 * base {
            end += 1;
        }
        points[start..end].sort_by(|a, b| a.coords.cmp(&b.coords));
        start = end;
    }
}
