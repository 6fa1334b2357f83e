//! Unimodular lattices in `R^n` and the positive diagonal group acting on them.

mod enumerate;
mod minima;

pub use enumerate::{LatticePoint, DEFAULT_MAX_CANDIDATES};
pub use minima::{
    alpha, compactness_bound, cover_membership, dim_delta, independent_minima, is_generic_well_rounded,
    is_well_rounded, short_vectors, short_vectors_with, wr_transversality_rank, CoverMembership, EnumOptions,
    ShortVectorReport, COVER_MARGIN, LENGTH_TOL,
};

pub(crate) use enumerate::Enumerator;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;

/// Allowed deviation of `|det|` from one for a unimodular basis.
pub const UNIMODULAR_TOL: f64 = 1e-9;

/// A covolume-one lattice given by a basis whose rows are the basis vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct LatticeFile {
    dim: usize,
    basis: Vec<Vec<f64>>,
}

fn check_square(rows: &[Vec<f64>]) -> Result<usize> {
    let n = rows.len();
    if !(MIN_DIM..=MAX_DIM).contains(&n) {
        return Err(Error::InvalidDimension(n));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("basis has non-finite entries".into()));
    }
    Ok(n)
}

impl Lattice {
    /// Rescales `raw` to covolume one: every entry is divided by `|det|^(1/n)`.
    pub fn normalize(raw: Vec<Vec<f64>>) -> Result<Self> {
        let n = check_square(&raw)?;
        let det = linalg::matrix_from_rows(&raw, n).determinant();
        if det.abs() <= 1e-12 || !det.is_finite() {
            return Err(Error::SingularBasis { det });
        }
        let scale = det.abs().powf(1.0 / n as f64);
        let basis = raw.into_iter().map(|r| r.into_iter().map(|v| v / scale).collect()).collect();
        Ok(Lattice { dim: n, basis })
    }

    /// Wraps a basis that is already unimodular.
    pub fn from_unimodular(basis: Vec<Vec<f64>>) -> Result<Self> {
        let n = check_square(&basis)?;
        let det = linalg::matrix_from_rows(&basis, n).determinant();
        if (det.abs() - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::InvalidArgument(format!("basis is not unimodular (det = {det})")));
        }
        Ok(Lattice { dim: n, basis })
    }

    pub(crate) fn from_basis_unchecked(basis: Vec<Vec<f64>>) -> Self {
        Lattice { dim: basis.len(), basis }
    }

    /// The standard lattice `Z^n`.
    pub fn standard(n: usize) -> Result<Self> {
        let basis = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Lattice::normalize(basis)
    }

    /// The hexagonal (A2) lattice.
    pub fn hexagonal() -> Self {
        Lattice::normalize(vec![vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]]).expect("nonsingular")
    }

    /// The D4 root lattice `{x in Z^4 : sum x even}`.
    pub fn d4() -> Self {
        Lattice::normalize(vec![
            vec![1.0, -1.0, 0.0, 0.0],
            vec![0.0, 1.0, -1.0, 0.0],
            vec![0.0, 0.0, 1.0, -1.0],
            vec![0.0, 0.0, 1.0, 1.0],
        ])
        .expect("nonsingular")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LatticeFile = serde_json::from_str(text)?;
        if file.dim != file.basis.len() {
            return Err(Error::DimensionMismatch { expected: file.dim, found: file.basis.len() });
        }
        Lattice::normalize(file.basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        linalg::matrix_from_rows(&self.basis, self.dim)
    }

    pub fn det(&self) -> f64 {
        self.matrix().determinant()
    }

    /// The lattice vector with integer coordinates `coords` in this basis.
    pub fn vector(&self, coords: &[i64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for (c, row) in coords.iter().zip(&self.basis) {
            if *c == 0 {
                continue;
            }
            for (vi, bi) in v.iter_mut().zip(row) {
                *vi += *c as f64 * bi;
            }
        }
        v
    }

    /// Real coordinates of `v` with respect to the basis (`v * B^-1`).
    pub fn coordinates_of(&self, v: &[f64]) -> Vec<f64> {
        let inv = self.matrix().try_inverse().expect("unimodular basis is invertible");
        (0..self.dim).map(|j| (0..self.dim).map(|i| v[i] * inv[(i, j)]).sum()).collect()
    }

    /// Whether `other` spans the same subgroup of `R^n`: the change of basis
    /// `U = B' B^-1` must be an integer matrix with `|det U| = 1`.
    pub fn same_lattice(&self, other: &Lattice, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let Some(inv) = self.matrix().try_inverse() else {
            return false;
        };
        let u = other.matrix() * inv;
        let integral = u.iter().all(|v| (v - v.round()).abs() <= tol);
        let rounded = u.map(|v| v.round());
        integral && (rounded.determinant().abs() - 1.0).abs() <= tol
    }
}

/// A point of the positive diagonal group in logarithmic coordinates:
/// `a = diag(e^t_1, ..., e^t_n)` with `sum t_i = 0`.
///
/// The invariant metric on the group is the Euclidean distance between log
/// coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalElement {
    log_coords: Vec<f64>,
}

impl DiagonalElement {
    pub fn new(log_coords: Vec<f64>) -> Result<Self> {
        let sum: f64 = log_coords.iter().sum();
        let scale = log_coords.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if sum.abs() > 1e-12 * scale || log_coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotTraceZero(sum));
        }
        Ok(DiagonalElement { log_coords })
    }

    /// Projects arbitrary log coordinates onto the trace-zero hyperplane.
    pub fn project(mut log_coords: Vec<f64>) -> Self {
        let mean = log_coords.iter().sum::<f64>() / log_coords.len().max(1) as f64;
        for v in &mut log_coords {
            *v -= mean;
        }
        DiagonalElement { log_coords }
    }

    pub fn identity(n: usize) -> Self {
        DiagonalElement { log_coords: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.log_coords.len()
    }

    pub fn log_coords(&self) -> &[f64] {
        &self.log_coords
    }

    /// Group product, i.e. the sum of log coordinates.
    pub fn compose(&self, other: &DiagonalElement) -> DiagonalElement {
        let log_coords = self.log_coords.iter().zip(&other.log_coords).map(|(a, b)| a + b).collect();
        DiagonalElement { log_coords }
    }

    pub fn inverse(&self) -> DiagonalElement {
        DiagonalElement { log_coords: self.log_coords.iter().map(|v| -v).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.log_coords.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn distance(&self, other: &DiagonalElement) -> f64 {
        self.log_coords.iter().zip(&other.log_coords).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }

    /// `a v` for a single vector.
    pub fn act_on_vector(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.log_coords).map(|(x, t)| x * t.exp()).collect()
    }

    /// The lattice `a x`: column `j` of the basis is scaled by `e^t_j`.
    pub fn apply(&self, x: &Lattice) -> Result<Lattice> {
        if self.dim() != x.dim() {
            return Err(Error::DimensionMismatch { expected: x.dim(), found: self.dim() });
        }
        let basis = x.basis.iter().map(|row| self.act_on_vector(row)).collect();
        Ok(Lattice::from_basis_unchecked(basis))
    }
}

/// `a x`.
pub fn apply(a: &DiagonalElement, x: &Lattice) -> Result<Lattice> {
    a.apply(x)
}
