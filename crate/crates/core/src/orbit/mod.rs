//! Closed diagonal orbits built from real quadratic orders, and a search
//! along them for well-rounded lattices.
//!
//! A closed orbit here is a block sum `x = Lambda_1 + ... + Lambda_d` with
//! each `Lambda_i` either `Z` (a unit block) or the geodesic lattice of
//! `Z[sqrt D]` in a coordinate plane. `T_1` rescales whole blocks, `T_2`
//! has determinant one on every block and meets the stabilizer of `x` in a
//! lattice generated by the units of the quadratic blocks.

mod search;

pub use search::{search_well_rounded, SearchOptions, SearchResult, TracePoint};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{independent_minima, DiagonalElement, Lattice, MAX_DIM, MIN_DIM};

/// Block decomposition of a closed orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedOrbitStructure {
    pub n: usize,
    /// Coordinate sets `V_1..V_d`, 1-based.
    pub blocks: Vec<Vec<usize>>,
    pub t1_dim: usize,
    pub t2_dim: usize,
    /// Log-coordinate generators of the stabilizer of `x` in `T_2`.
    pub t2_stabilizer_gens: Vec<Vec<f64>>,
}

impl ClosedOrbitStructure {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Which block each coordinate (0-based) belongs to.
    pub fn block_of(&self) -> Vec<usize> {
        let mut owner = vec![0; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                owner[i - 1] = b;
            }
        }
        owner
    }

    /// Vertex `b_i` of `Delta_rho`: expands every block other than `V_i` by
    /// `e^rho` and contracts `V_i` to keep determinant one.
    pub fn simplex_vertex(&self, i: usize, rho: f64) -> Vec<f64> {
        let size = self.blocks[i].len() as f64;
        let inner = -rho * (self.n as f64 - size) / size;
        let owner = self.block_of();
        owner.iter().map(|&b| if b == i { inner } else { rho }).collect()
    }

    /// Checks the generator invariants: trace zero on every block, and each
    /// generator fixes `x` up to an integral change of basis.
    pub fn validate(&self, x: &Lattice) -> Result<()> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.dim() });
        }
        let mut seen: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        seen.sort_unstable();
        if seen != (1..=self.n).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument("blocks do not partition the coordinates".into()));
        }
        for g in &self.t2_stabilizer_gens {
            for block in &self.blocks {
                let s: f64 = block.iter().map(|&i| g[i - 1]).sum();
                if s.abs() > 1e-9 * (1.0 + g.iter().fold(0.0_f64, |m, v| m.max(v.abs()))) {
                    return Err(Error::InvalidArgument("stabilizer generator is not in T_2".into()));
                }
            }
            let moved = DiagonalElement::new(g.clone())?.apply(x)?;
            if !x.same_lattice(&moved, 1e-8) {
                return Err(Error::InvalidArgument("stabilizer generator does not fix the lattice".into()));
            }
        }
        Ok(())
    }
}

/// One summand of a block sum.
#[derive(Debug, Clone)]
pub enum OrbitPart {
    /// The one-dimensional block `Z`.
    Unit,
    /// A rank-two block with its own orbit structure.
    Planar(Lattice, ClosedOrbitStructure),
}

/// Orbit description file: `{"blocks": [{"type":"unit"} | {"type":"quadratic","D":2}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub blocks: Vec<BlockSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BlockSpec {
    Unit,
    Quadratic {
        #[serde(rename = "D")]
        d: i64,
    },
}

impl OrbitSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<(Lattice, ClosedOrbitStructure)> {
        let parts = self
            .blocks
            .iter()
            .map(|b| match b {
                BlockSpec::Unit => Ok(OrbitPart::Unit),
                BlockSpec::Quadratic { d } => {
                    let (x, s) = compact_orbit_from_quadratic(*d)?;
                    Ok(OrbitPart::Planar(x, s))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        block_sum(&parts)
    }
}

/// A unit `x + y sqrt(D)` of `Z[sqrt D]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadraticUnit {
    pub x: i128,
    pub y: i128,
    /// `x^2 - D y^2`, either `1` or `-1`.
    pub norm: i8,
}

impl QuadraticUnit {
    pub fn log(&self, d: i64) -> f64 {
        (self.x as f64 + self.y as f64 * (d as f64).sqrt()).ln()
    }
}

fn is_squarefree(d: i64) -> bool {
    let mut k = 2i64;
    while k * k <= d {
        if d % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    true
}

fn isqrt(d: i64) -> i64 {
    let mut r = (d as f64).sqrt() as i64;
    while r * r > d {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= d {
        r += 1;
    }
    r
}

/// Fundamental unit of `Z[sqrt D]`: the first convergent `p/q` of the
/// continued fraction of `sqrt D` with `p^2 - D q^2 = +-1`.
pub fn fundamental_unit(d: i64) -> Result<QuadraticUnit> {
    if d < 2 || !is_squarefree(d) {
        return Err(Error::NotSquarefree(d));
    }
    let a0 = isqrt(d) as i128;
    let dd = d as i128;
    let (mut m, mut den, mut a) = (0i128, 1i128, a0);
    let (mut p_prev, mut p) = (1i128, a0);
    let (mut q_prev, mut q) = (0i128, 1i128);
    let overflow = || Error::UnitOverflow(d);
    loop {
        let norm = p
            .checked_mul(p)
            .and_then(|pp| q.checked_mul(q).and_then(|qq| qq.checked_mul(dd)).and_then(|dq| pp.checked_sub(dq)))
            .ok_or_else(overflow)?;
        if norm == 1 || norm == -1 {
            return Ok(QuadraticUnit { x: p, y: q, norm: norm as i8 });
        }
        m = den * a - m;
        den = (dd - m * m) / den;
        a = (a0 + m) / den;
        let p_next = a.checked_mul(p).and_then(|v| v.checked_add(p_prev)).ok_or_else(overflow)?;
        let q_next = a.checked_mul(q).and_then(|v| v.checked_add(q_prev)).ok_or_else(overflow)?;
        (p_prev, p) = (p, p_next);
        (q_prev, q) = (q, q_next);
    }
}

/// The totally positive unit generating the stabilizer: `eps` when its
/// norm is `1`, otherwise `eps^2`.
pub fn stabilizer_unit(d: i64) -> Result<QuadraticUnit> {
    let e = fundamental_unit(d)?;
    if e.norm == 1 {
        return Ok(e);
    }
    let dd = d as i128;
    let overflow = || Error::UnitOverflow(d);
    let x = e
        .x
        .checked_mul(e.x)
        .and_then(|a| e.y.checked_mul(e.y).and_then(|b| b.checked_mul(dd)).and_then(|b| a.checked_add(b)))
        .ok_or_else(overflow)?;
    let y = e.x.checked_mul(e.y).and_then(|v| v.checked_mul(2)).ok_or_else(overflow)?;
    Ok(QuadraticUnit { x, y, norm: 1 })
}

/// The lattice spanned by `(1, 1)` and `(sqrt D, -sqrt D)`, normalized, with
/// its compact diagonal orbit.
pub fn compact_orbit_from_quadratic(d: i64) -> Result<(Lattice, ClosedOrbitStructure)> {
    let u = stabilizer_unit(d)?;
    let s = (d as f64).sqrt();
    let x = Lattice::normalize(vec![vec![1.0, 1.0], vec![s, -s]])?;
    let l = u.log(d);
    let structure = ClosedOrbitStructure {
        n: 2,
        blocks: vec![vec![1, 2]],
        t1_dim: 0,
        t2_dim: 1,
        t2_stabilizer_gens: vec![vec![l, -l]],
    };
    Ok((x, structure))
}

/// Orthogonal direct sum of the parts in consecutive coordinates.
pub fn block_sum(parts: &[OrbitPart]) -> Result<(Lattice, ClosedOrbitStructure)> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("block sum needs at least one part".into()));
    }
    let n: usize = parts
        .iter()
        .map(|p| match p {
            OrbitPart::Unit => 1,
            OrbitPart::Planar(x, _) => x.dim(),
        })
        .sum();
    if !(MIN_DIM..=MAX_DIM).contains(&n) {
        return Err(Error::InvalidDimension(n));
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut blocks = Vec::new();
    let mut gens = Vec::new();
    let mut offset = 0;
    for p in parts {
        match p {
            OrbitPart::Unit => {
                let mut row = vec![0.0; n];
                row[offset] = 1.0;
                basis.push(row);
                blocks.push(vec![offset + 1]);
                offset += 1;
            }
            OrbitPart::Planar(x, s) => {
                let k = x.dim();
                for r in x.basis() {
                    let mut row = vec![0.0; n];
                    row[offset..offset + k].copy_from_slice(r);
                    basis.push(row);
                }
                for b in &s.blocks {
                    blocks.push(b.iter().map(|i| i + offset).collect());
                }
                for g in &s.t2_stabilizer_gens {
                    let mut row = vec![0.0; n];
                    row[offset..offset + k].copy_from_slice(g);
                    gens.push(row);
                }
                offset += k;
            }
        }
    }
    let x = Lattice::normalize(basis)?;
    let d = blocks.len();
    Ok((x, ClosedOrbitStructure { n, blocks, t1_dim: d - 1, t2_dim: n - d, t2_stabilizer_gens: gens }))
}

/// `lambda_n / lambda_1` for the greedy independent minima; `1` exactly when
/// `x` is well-rounded.
pub fn spread(x: &Lattice) -> Result<f64> {
    let mins = independent_minima(x)?;
    let first = mins.first().map_or(1.0, |p| p.norm);
    let last = mins.last().map_or(1.0, |p| p.norm);
    Ok((last / first).max(1.0))
}
