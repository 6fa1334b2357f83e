//! Small dense linear-algebra helpers shared by the lattice and exterior code.
//!
//! Floating-point rank decisions go through singular values with a relative
//! threshold; exact decisions (rational flags) go through fraction-field
//! Gaussian elimination in [`exact`].

use nalgebra::{DMatrix, DVector};

/// Singular values below `RANK_TOL * sigma_max` count as zero.
pub const RANK_TOL: f64 = 1e-7;

pub fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Numerical rank of a matrix with the relative singular-value threshold.
pub fn rank_with_tol(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0_f64, f64::max);
    if max == 0.0 || !max.is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    rank_with_tol(m, RANK_TOL)
}

pub fn rank_of_rows(rows: &[Vec<f64>], ncols: usize) -> usize {
    rank(&matrix_from_rows(rows, ncols))
}

/// Orthonormal basis of the kernel of `m` (as column vectors of length `m.ncols()`).
///
/// `scale` is the reference magnitude for the relative threshold; singular
/// values at most `rel_tol * scale` are treated as zero. The basis is made
/// deterministic by projecting the standard basis onto the kernel and
/// orthonormalizing in coordinate order.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return (0..n).map(|i| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })).collect();
    }
    // Pad with zero rows so the SVD returns a full set of right singular vectors.
    let rows = m.nrows().max(n);
    let padded = DMatrix::from_fn(rows, n, |i, j| if i < m.nrows() { m[(i, j)] } else { 0.0 });
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let max = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    let thresh = if max > 0.0 { rel_tol * max } else { 0.0 };
    let mut kernel: Vec<DVector<f64>> = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= thresh {
            kernel.push(v_t.row(k).transpose());
        }
    }
    if kernel.is_empty() {
        return kernel;
    }
    let project = |e: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(n);
        for v in &kernel {
            out += v * v.dot(e);
        }
        out
    };
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(kernel.len());
    for i in 0..n {
        if basis.len() == kernel.len() {
            break;
        }
        let e = DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
        let mut w = project(&e);
        for b in &basis {
            let c = b.dot(&w);
            w -= b * c;
        }
        let len = w.norm();
        if len > 1e-8 {
            basis.push(w / len);
        }
    }
    basis
}

/// Component of `v` orthogonal to the span of the orthonormal vectors `basis`.
pub fn orthogonal_residual(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut r = v.to_vec();
    for b in basis {
        let c = dot(b, &r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= c * bi;
        }
    }
    r
}

/// Exact arithmetic over the rationals.
pub mod exact {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Signed, ToPrimitive, Zero};

    pub type Rational = BigRational;

    pub fn from_i64(v: i64) -> Rational {
        Rational::from_integer(BigInt::from(v))
    }

    /// Parses `"p"`, `"p/q"` or a finite decimal like `"0.25"`.
    pub fn parse(s: &str) -> Option<Rational> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            return Some(Rational::new(p, q));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let negative = int.starts_with('-');
            let digits = format!("{}{}", int.trim_start_matches('-'), frac);
            let num: BigInt = digits.parse().ok()?;
            let den = num_traits::pow(BigInt::from(10), frac.len());
            let r = Rational::new(num, den);
            return Some(if negative { -r } else { r });
        }
        s.parse::<BigInt>().ok().map(Rational::from_integer)
    }

    pub fn to_f64(r: &Rational) -> f64 {
        r.to_f64().unwrap_or(f64::NAN)
    }

    /// Row echelon form in place; returns the pivot count (rank) and the
    /// determinant sign/scale bookkeeping for square inputs.
    fn eliminate(m: &mut [Vec<Rational>]) -> (usize, Rational) {
        let rows = m.len();
        let cols = if rows == 0 { 0 } else { m[0].len() };
        let mut det = Rational::one();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
                det = Rational::zero();
                continue;
            };
            if p != r {
                m.swap(p, r);
                det = -det;
            }
            let pivot = m[r][c].clone();
            det *= &pivot;
            for i in (r + 1)..rows {
                if m[i][c].is_zero() {
                    continue;
                }
                let f = &m[i][c] / &pivot;
                for k in c..cols {
                    let delta = &f * &m[r][k];
                    m[i][k] -= delta;
                }
            }
            r += 1;
        }
        (r, det)
    }

    pub fn rank(rows: &[Vec<Rational>]) -> usize {
        let mut m = rows.to_vec();
        eliminate(&mut m).0
    }

    pub fn det(square: &[Vec<Rational>]) -> Rational {
        let n = square.len();
        assert!(square.iter().all(|r| r.len() == n), "det needs a square matrix");
        if n == 0 {
            return Rational::one();
        }
        let mut m = square.to_vec();
        let (rank, det) = eliminate(&mut m);
        if rank < n {
            Rational::zero()
        } else {
            det
        }
    }

    pub fn abs(r: &Rational) -> Rational {
        r.abs()
    }
}
