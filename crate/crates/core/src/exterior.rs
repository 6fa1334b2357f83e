//! Exterior powers of `R^n` as seen by the diagonal group.
//!
//! A rank-`d` subgroup or subspace is recorded by its Plücker coordinates
//! (the `d x d` minors of a basis), modulo sign. The diagonal group acts on
//! the coordinate `e_J` through the character `chi_J(a) = exp(sum_{i in J} t_i)`,
//! so stabilizers are kernels of linear systems in log coordinates.

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{DiagonalElement, Lattice};
use crate::linalg::{self, exact, exact::Rational, RANK_TOL};

/// A coefficient counts as nonzero when `|c| > SUPPORT_TOL * |w|`.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Minors at or below this magnitude (columns normalized to unit length)
/// are treated as zero by the floating-point flag algorithm.
pub const MINOR_TOL: f64 = 1e-10;

/// Strictly increasing indices `i_1 < ... < i_d`, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() || indices.len() > n {
            return Err(Error::InvalidArgument(format!("multi-index order {} outside 1..={n}", indices.len())));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!("multi-index {indices:?} is not strictly increasing")));
        }
        Ok(MultiIndex(indices))
    }

    pub fn full(n: usize) -> Self {
        MultiIndex((1..=n).collect())
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn is_subset_of(&self, other: &MultiIndex) -> bool {
        self.0.iter().all(|i| other.0.contains(i))
    }

    /// All multi-indices of order `d` in `1..=n`, lexicographically.
    pub fn all(n: usize, d: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(d);
        fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if cur.len() == d {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for i in start..=n {
                if n - i + 1 < d - cur.len() {
                    break;
                }
                cur.push(i);
                rec(i + 1, n, d, cur, out);
                cur.pop();
            }
        }
        if d >= 1 && d <= n {
            rec(1, n, d, &mut cur, &mut out);
        }
        out
    }

    /// Sub-multi-indices with one entry removed, lexicographically.
    pub fn facets(&self) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> = (0..self.0.len())
            .map(|skip| MultiIndex(self.0.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &i)| i).collect()))
            .filter(|j| !j.0.is_empty())
            .collect();
        out.sort();
        out
    }
}

/// Sign-quotiented Plücker coordinates of a rank-`d` subgroup of `R^n`.
/// Coefficients are stored densely in lexicographic multi-index order and
/// the first nonzero one is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeClass {
    n: usize,
    d: usize,
    coeffs: Vec<(MultiIndex, f64)>,
}

#[derive(Serialize, Deserialize)]
struct WedgeEntry {
    #[serde(rename = "J")]
    j: MultiIndex,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct WedgeRepr {
    n: usize,
    d: usize,
    coeffs: Vec<WedgeEntry>,
}

impl Serialize for WedgeClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WedgeRepr {
            n: self.n,
            d: self.d,
            coeffs: self.coeffs.iter().map(|(j, c)| WedgeEntry { j: j.clone(), c: *c }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WedgeClass {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = WedgeRepr::deserialize(de)?;
        let coeffs = repr.coeffs.into_iter().map(|e| (e.j, e.c)).collect();
        Ok(WedgeClass::from_coeffs(repr.n, repr.d, coeffs))
    }
}

impl WedgeClass {
    fn from_coeffs(n: usize, d: usize, mut coeffs: Vec<(MultiIndex, f64)>) -> Self {
        coeffs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut w = WedgeClass { n, d, coeffs };
        w.canonicalize();
        w
    }

    fn canonicalize(&mut self) {
        let norm = self.norm();
        let first = self.coeffs.iter().find(|(_, c)| c.abs() > SUPPORT_TOL * norm).map(|(_, c)| *c);
        if matches!(first, Some(c) if c < 0.0) {
            for (_, c) in &mut self.coeffs {
                *c = -*c;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &[(MultiIndex, f64)] {
        &self.coeffs
    }

    pub fn coefficient(&self, j: &MultiIndex) -> f64 {
        self.coeffs.iter().find(|(k, _)| k == j).map_or(0.0, |(_, c)| *c)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|(_, c)| c * c).sum::<f64>().sqrt()
    }

    /// Multi-indices with coefficient above `SUPPORT_TOL * |w|`.
    pub fn support(&self) -> Vec<MultiIndex> {
        let norm = self.norm();
        self.coeffs.iter().filter(|(_, c)| c.abs() > SUPPORT_TOL * norm).map(|(j, _)| j.clone()).collect()
    }

    /// `a w`: the `e_J` coefficient is multiplied by `chi_J(a)`.
    pub fn act(&self, a: &DiagonalElement) -> Result<WedgeClass> {
        if a.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: a.dim() });
        }
        let coeffs = self.coeffs.iter().map(|(j, c)| Ok((j.clone(), c * chi(j, a)?))).collect::<Result<_>>()?;
        Ok(WedgeClass::from_coeffs(self.n, self.d, coeffs))
    }

    /// Largest coefficient difference against `other` (same `n`, `d`).
    pub fn max_difference(&self, other: &WedgeClass) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|((_, a), (_, b))| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn check_vectors(vectors: &[Vec<f64>]) -> Result<(usize, usize)> {
    let d = vectors.len();
    let n = vectors.first().map_or(0, Vec::len);
    if d == 0 || n == 0 || d > n {
        return Err(Error::InvalidArgument(format!("need 1..=n vectors, got {d} in dimension {n}")));
    }
    if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
    }
    Ok((d, n))
}

/// Determinant of the `d x d` minor of `rows` on the columns `j`.
fn minor(rows: &[Vec<f64>], j: &MultiIndex) -> f64 {
    let d = rows.len();
    DMatrix::from_fn(d, d, |r, c| rows[r][j.0[c] - 1]).determinant()
}

fn exact_minor(rows: &[Vec<Rational>], j: &MultiIndex) -> Rational {
    let m: Vec<Vec<Rational>> = rows.iter().map(|r| j.0.iter().map(|&c| r[c - 1].clone()).collect()).collect();
    exact::det(&m)
}

/// `w_Lambda` for the subgroup spanned by `vectors`.
pub fn wedge_of_group(vectors: &[Vec<f64>]) -> Result<WedgeClass> {
    let (d, n) = check_vectors(vectors)?;
    let rank = linalg::rank_of_rows(vectors, n);
    if rank < d {
        return Err(Error::RankDeficient { rank, expected: d });
    }
    let coeffs = MultiIndex::all(n, d).into_iter().map(|j| {
        let c = minor(vectors, &j);
        (j, c)
    });
    Ok(WedgeClass::from_coeffs(n, d, coeffs.collect()))
}

/// Covolume of the subgroup spanned by `vectors` inside its span.
pub fn covolume(vectors: &[Vec<f64>]) -> Result<f64> {
    Ok(wedge_of_group(vectors)?.norm())
}

/// `chi_J(a) = det(a restricted to R^J)`.
pub fn chi(j: &MultiIndex, a: &DiagonalElement) -> Result<f64> {
    let t = a.log_coords();
    if let Some(&bad) = j.0.iter().find(|&&i| i == 0 || i > t.len()) {
        return Err(Error::IndexOutOfRange { index: bad, n: t.len() });
    }
    Ok(j.0.iter().map(|&i| t[i - 1]).sum::<f64>().exp())
}

/// Kernel of the character system inside the trace-zero hyperplane.
#[derive(Debug, Clone, Serialize)]
pub struct Stabilizer {
    pub dimension: usize,
    /// Orthonormal basis, as log-coordinate vectors.
    pub basis: Vec<Vec<f64>>,
}

/// Solves `sum_i t_i = 0` together with `sum_{i in J} t_i = 0` for every
/// `J` in `supports`.
pub fn stabilizer_subspace(n: usize, supports: &[MultiIndex]) -> Result<Stabilizer> {
    if supports.is_empty() {
        return Err(Error::InvalidArgument("support set is empty".into()));
    }
    let m = character_system(n, supports)?;
    let basis: Vec<Vec<f64>> = linalg::null_space(&m, RANK_TOL)
        .into_iter()
        .map(|v| {
            let mut v: Vec<f64> = v.iter().copied().collect();
            if v.iter().find(|c| c.abs() > 1e-12).is_some_and(|c| *c < 0.0) {
                v.iter_mut().for_each(|c| *c = -*c);
            }
            v
        })
        .collect();
    Ok(Stabilizer { dimension: basis.len(), basis })
}

fn character_system(n: usize, supports: &[MultiIndex]) -> Result<DMatrix<f64>> {
    for j in supports {
        if let Some(&bad) = j.0.iter().find(|&&i| i == 0 || i > n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
    }
    Ok(DMatrix::from_fn(supports.len() + 1, n, |r, c| {
        if r == 0 || supports[r - 1].0.contains(&(c + 1)) {
            1.0
        } else {
            0.0
        }
    }))
}

/// Rank of the character system (trace row included).
pub fn character_rank(n: usize, supports: &[MultiIndex]) -> Result<usize> {
    Ok(linalg::rank(&character_system(n, supports)?))
}

/// A flag `0 < L_1 < ... < L_k < R^n`, each `L_i` given by basis rows.
///
/// Flags built from rational entries keep an exact copy, and every rank or
/// minor decision is then made exactly.
#[derive(Debug, Clone)]
pub struct Flag {
    n: usize,
    bases: Vec<Vec<Vec<f64>>>,
    exact: Option<Vec<Vec<Vec<Rational>>>>,
}

impl Flag {
    pub fn new(n: usize, bases: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let flag = Flag { n, bases, exact: None };
        flag.validate()?;
        Ok(flag)
    }

    pub fn rational(n: usize, bases: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        let floats = bases.iter().map(|b| b.iter().map(|r| r.iter().map(exact::to_f64).collect()).collect()).collect();
        let flag = Flag { n, bases: floats, exact: Some(bases) };
        flag.validate()?;
        Ok(flag)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of proper subspaces `k`.
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.exact.is_some()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }

    pub fn bases(&self) -> &[Vec<Vec<f64>>] {
        &self.bases
    }

    pub fn is_complete(&self) -> bool {
        self.dims() == (1..self.n).collect::<Vec<_>>()
    }

    fn rank_of(&self, level: usize, extra: Option<usize>) -> usize {
        match &self.exact {
            Some(ex) => {
                let mut rows = ex[level].clone();
                if let Some(e) = extra {
                    rows.extend(ex[e].iter().cloned());
                }
                exact::rank(&rows)
            }
            None => {
                let mut rows = self.bases[level].clone();
                if let Some(e) = extra {
                    rows.extend(self.bases[e].iter().cloned());
                }
                linalg::rank_of_rows(&rows, self.n)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.bases.is_empty() {
            return Err(Error::InvalidFlag("flag has no subspaces".into()));
        }
        for (i, b) in self.bases.iter().enumerate() {
            if b.iter().any(|r| r.len() != self.n) {
                return Err(Error::InvalidFlag(format!("subspace {} has rows of the wrong length", i + 1)));
            }
            if b.is_empty() || b.len() >= self.n {
                return Err(Error::InvalidFlag(format!("subspace {} has dimension {} outside 1..{}", i + 1, b.len(), self.n)));
            }
            if self.rank_of(i, None) != b.len() {
                return Err(Error::InvalidFlag(format!("basis of subspace {} is linearly dependent", i + 1)));
            }
        }
        for i in 1..self.bases.len() {
            let (d0, d1) = (self.bases[i - 1].len(), self.bases[i].len());
            if d0 >= d1 {
                return Err(Error::InvalidFlag("dimensions must increase strictly".into()));
            }
            if self.rank_of(i, Some(i - 1)) != d1 {
                return Err(Error::InvalidFlag(format!("subspace {i} is not contained in subspace {}", i + 1)));
            }
        }
        Ok(())
    }

    /// Basis `v_1..v_n` of `R^n` with `L_i = span(v_1..v_{d_i})`: basis rows
    /// of each subspace are added greedily, then standard basis vectors.
    fn adapted_basis_float(&self) -> Vec<Vec<f64>> {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(self.n);
        let standard = (0..self.n).map(|i| (0..self.n).map(|k| if k == i { 1.0 } else { 0.0 }).collect::<Vec<f64>>());
        for cand in self.bases.iter().flatten().cloned().chain(standard) {
            if rows.len() == self.n {
                break;
            }
            rows.push(cand);
            if linalg::rank_of_rows(&rows, self.n) < rows.len() {
                rows.pop();
            }
        }
        rows
    }

    fn adapted_basis_exact(ex: &[Vec<Vec<Rational>>], n: usize) -> Vec<Vec<Rational>> {
        let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(n);
        let standard =
            (0..n).map(|i| (0..n).map(|k| if k == i { exact::from_i64(1) } else { exact::from_i64(0) }).collect());
        for cand in ex.iter().flatten().cloned().chain(standard) {
            if rows.len() == n {
                break;
            }
            rows.push(cand);
            if exact::rank(&rows) < rows.len() {
                rows.pop();
            }
        }
        rows
    }

    /// The complete flag `span(v_1) < ... < span(v_1..v_{n-1})` refining this one.
    pub fn complete(&self) -> Flag {
        match &self.exact {
            Some(ex) => {
                let rows = Flag::adapted_basis_exact(ex, self.n);
                let bases = (1..self.n).map(|d| rows[..d].to_vec()).collect();
                Flag::rational(self.n, bases).expect("completion of a valid flag is valid")
            }
            None => {
                let rows = self.adapted_basis_float();
                let bases = (1..self.n).map(|d| rows[..d].to_vec()).collect();
                Flag::new(self.n, bases).expect("completion of a valid flag is valid")
            }
        }
    }

    /// Union of the supports of `w_{L_i}` over the flag.
    pub fn supports(&self) -> Result<Vec<MultiIndex>> {
        let mut all: Vec<MultiIndex> = Vec::new();
        for (i, b) in self.bases.iter().enumerate() {
            let supp = match &self.exact {
                Some(ex) => MultiIndex::all(self.n, b.len())
                    .into_iter()
                    .filter(|j| !exact_minor(&ex[i], j).is_zero())
                    .collect(),
                None => wedge_of_group(b)?.support(),
            };
            all.extend(supp);
        }
        all.sort();
        all.dedup();
        Ok(all)
    }
}

/// Nested multi-indices `J_1 < J_2 < ... < J_n = (1..n)` with
/// `J_d in supp(L_d)` for the completion of `flag`.
///
/// Built downward from `J_n`: `J_d` is the lexicographically first facet of
/// `J_{d+1}` whose minor `det S_{J_d}` (rows `J_d`, first `d` basis vectors)
/// is nonzero. Expansion of `det S_{J_{d+1}}` along its last column
/// guarantees such a facet exists.
pub fn nested_multiindices(flag: &Flag) -> Result<Vec<MultiIndex>> {
    let n = flag.n;
    let full = flag.complete();
    let mut chain = vec![MultiIndex::full(n)];
    match &full.exact {
        Some(ex) => {
            let rows = &ex[n - 2];
            let mut basis = rows.clone();
            let last = Flag::adapted_basis_exact(ex, n).pop().expect("n >= 2");
            basis.push(last);
            for d in (1..n).rev() {
                let upper = chain.last().expect("nonempty");
                let pick = upper.facets().into_iter().find(|j| !exact_minor(&basis[..d], j).is_zero());
                chain.push(pick.ok_or(Error::NumericallySingularMinor { d })?);
            }
        }
        None => {
            let basis: Vec<Vec<f64>> = full
                .adapted_basis_float()
                .into_iter()
                .map(|v| {
                    let len = linalg::norm(&v);
                    v.into_iter().map(|c| c / len).collect()
                })
                .collect();
            for d in (1..n).rev() {
                let upper = chain.last().expect("nonempty");
                let pick = upper.facets().into_iter().find(|j| minor(&basis[..d], j).abs() > MINOR_TOL);
                chain.push(pick.ok_or(Error::NumericallySingularMinor { d })?);
            }
        }
    }
    chain.reverse();
    Ok(chain)
}

#[derive(Debug, Clone, Serialize)]
pub struct CodimCheck {
    pub codim: usize,
    pub k: usize,
    pub satisfies: bool,
}

/// Codimension of the flag stabilizer `A_F` in `A`, compared against the
/// flag length.
pub fn flag_codim_check(flag: &Flag) -> Result<CodimCheck> {
    let supports = flag.supports()?;
    let stab = stabilizer_subspace(flag.n, &supports)?;
    let codim = (flag.n - 1) - stab.dimension;
    Ok(CodimCheck { codim, k: flag.len(), satisfies: codim >= flag.len() })
}

/// Axis-aligned sampling grid in the coordinates of a subgroup's generators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub steps: Vec<usize>,
}

impl SamplingGrid {
    fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for ((lo, hi), &steps) in self.lo.iter().zip(&self.hi).zip(&self.steps) {
            let vals: Vec<f64> = if steps <= 1 {
                vec![*lo]
            } else {
                (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect()
            };
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlmostAffineReport {
    pub samples: usize,
    pub in_sublevel: usize,
    pub stabilizer_dim: usize,
    /// Witness `b` (log coordinates): centroid of the sublevel samples.
    pub center: Vec<f64>,
    /// Largest distance from a sublevel sample to `b + A_F`; the empirical `R`.
    pub max_distance: f64,
    pub within: bool,
}

/// Samples `a` in the subgroup `T` (spanned by `generators`, in log
/// coordinates) over `grid`, keeps those with `|a w_{Lambda_i}| <= bound` for
/// every group, and measures how far they stray from the best coset
/// `b A_F` where `A_F` is the common stabilizer of the groups.
pub fn sublevel_almost_affine_check(
    x: &Lattice,
    groups: &[Vec<Vec<f64>>],
    bound: f64,
    generators: &[Vec<f64>],
    grid: &SamplingGrid,
    radius: f64,
) -> Result<AlmostAffineReport> {
    let n = x.dim();
    if generators.len() != grid.lo.len() || grid.lo.len() != grid.hi.len() || grid.hi.len() != grid.steps.len() {
        return Err(Error::InvalidArgument("grid shape must match the number of generators".into()));
    }
    let mut wedges = Vec::with_capacity(groups.len());
    for g in groups {
        for v in g {
            let c = x.coordinates_of(v);
            if c.iter().any(|ci| (ci - ci.round()).abs() > 1e-7) {
                return Err(Error::InvalidArgument("group vector is not in the lattice".into()));
            }
        }
        wedges.push(wedge_of_group(g)?);
    }
    let mut supports: Vec<MultiIndex> = wedges.iter().flat_map(WedgeClass::support).collect();
    supports.sort();
    supports.dedup();
    let stab = stabilizer_subspace(n, &supports)?;

    let samples = grid.points();
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for s in &samples {
        let mut t = vec![0.0; n];
        for (c, g) in s.iter().zip(generators) {
            for (ti, gi) in t.iter_mut().zip(g) {
                *ti += c * gi;
            }
        }
        let a = DiagonalElement::project(t);
        let inside = wedges.iter().try_fold(true, |ok, w| Ok::<_, Error>(ok && w.act(&a)?.norm() <= bound))?;
        if inside {
            kept.push(a.log_coords().to_vec());
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptySublevelSet);
    }
    let mut center = vec![0.0; n];
    for p in &kept {
        for (c, v) in center.iter_mut().zip(p) {
            *c += v / kept.len() as f64;
        }
    }
    let max_distance = kept
        .iter()
        .map(|p| {
            let diff: Vec<f64> = p.iter().zip(&center).map(|(a, b)| a - b).collect();
            linalg::norm(&linalg::orthogonal_residual(&diff, &stab.basis))
        })
        .fold(0.0, f64::max);
    Ok(AlmostAffineReport {
        samples: samples.len(),
        in_sublevel: kept.len(),
        stabilizer_dim: stab.dimension,
        center,
        max_distance,
        within: max_distance <= radius,
    })
}
