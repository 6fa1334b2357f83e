//! Covers of `Delta x R^t` by finite unions of open boxes, examined on a grid.
//!
//! A simplex factor of dimension `s` is realized as the scaled
//! Coxeter-Freudenthal-Kuhn simplex `{0 <= x_1 <= ... <= x_s <= rho}` and
//! sampled at the points `k / resolution` with integer `k`. The `R^t` factor
//! is truncated to `[-L, L]^t`. Every topological answer here is a statement
//! about that grid.

mod certify;
mod fold;

pub use certify::{
    certify_multiplicity, kkm_check, separate_components, AffineFit, CertifyOptions, CertificateReport,
    ComponentMiss, KkmReport, Separation,
};
pub use fold::{fold_to_cfk, fold_to_cfk_scaled, unfold_cover, UnfoldedCover};

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::format_sig;

/// Refuse grids larger than this many points.
pub const MAX_GRID_POINTS: usize = 4_000_000;

/// `Delta_1 x ... x Delta_m x [-L, L]^t` with every simplex of scale `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainFile", into = "DomainFile")]
pub struct GridDomain {
    factors: Vec<usize>,
    t: usize,
    rho: f64,
    t_bound: f64,
    resolution: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DomainFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<usize>>,
    #[serde(default)]
    t: usize,
    #[serde(default = "one")]
    rho: f64,
    #[serde(default = "one")]
    t_bound: f64,
    #[serde(default = "default_resolution")]
    resolution: usize,
}

fn one() -> f64 {
    1.0
}

fn default_resolution() -> usize {
    32
}

impl TryFrom<DomainFile> for GridDomain {
    type Error = Error;

    fn try_from(f: DomainFile) -> Result<Self> {
        let factors = match (f.s, f.factors) {
            (Some(_), Some(_)) => return Err(Error::Parse("give either `s` or `factors`, not both".into())),
            (Some(s), None) => vec![s],
            (None, Some(v)) => v,
            (None, None) => vec![0],
        };
        GridDomain::with_factors(factors, f.t, f.rho, f.t_bound, f.resolution)
    }
}

impl From<GridDomain> for DomainFile {
    fn from(d: GridDomain) -> Self {
        let (s, factors) = if d.factors.len() == 1 { (Some(d.factors[0]), None) } else { (None, Some(d.factors)) };
        DomainFile { s, factors, t: d.t, rho: d.rho, t_bound: d.t_bound, resolution: d.resolution }
    }
}

impl GridDomain {
    /// `Delta_rho^s x [-t_bound, t_bound]^t`.
    pub fn new(s: usize, t: usize, rho: f64, t_bound: f64, resolution: usize) -> Result<Self> {
        GridDomain::with_factors(vec![s], t, rho, t_bound, resolution)
    }

    pub fn with_factors(factors: Vec<usize>, t: usize, rho: f64, t_bound: f64, resolution: usize) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("domain needs at least one simplex factor".into()));
        }
        if factors.iter().sum::<usize>() + t == 0 {
            return Err(Error::InvalidArgument("domain has dimension zero".into()));
        }
        if resolution < 4 {
            return Err(Error::InvalidArgument(format!("resolution {resolution} is below 4")));
        }
        if !(rho > 0.0 && rho.is_finite()) || !(t_bound > 0.0 && t_bound.is_finite()) {
            return Err(Error::InvalidArgument("rho and t_bound must be positive".into()));
        }
        let d = GridDomain { factors, t, rho, t_bound, resolution };
        if d.estimated_points() > MAX_GRID_POINTS as f64 {
            return Err(Error::InvalidArgument(format!("grid would exceed {MAX_GRID_POINTS} points")));
        }
        Ok(d)
    }

    pub fn s(&self) -> usize {
        self.factors.iter().sum()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn t_bound(&self) -> f64 {
        self.t_bound
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Ambient dimension `s + t`.
    pub fn dim(&self) -> usize {
        self.s() + self.t
    }

    /// Grid spacing.
    pub fn step(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn with_resolution(&self, resolution: usize) -> Result<Self> {
        GridDomain::with_factors(self.factors.clone(), self.t, self.rho, self.t_bound, resolution)
    }

    /// Number of grid steps along a simplex edge.
    fn simplex_steps(&self) -> i64 {
        (self.rho * self.resolution as f64).round() as i64
    }

    fn t_steps(&self) -> i64 {
        (self.t_bound * self.resolution as f64).round() as i64
    }

    fn estimated_points(&self) -> f64 {
        let r = self.simplex_steps().max(0) as f64;
        let simplex: f64 = self
            .factors
            .iter()
            .map(|&s| (1..=s).fold(1.0, |acc, i| acc * (r + i as f64) / i as f64))
            .product();
        simplex * (2.0 * self.t_steps() as f64 + 1.0).powi(self.t as i32)
    }

    /// Euclidean diameter of the sampled domain.
    pub fn diameter(&self) -> f64 {
        let h = self.step();
        let simplex_sq: f64 = self.factors.iter().map(|&s| s as f64 * (self.simplex_steps() as f64 * h).powi(2)).sum();
        let t_sq = self.t as f64 * (2.0 * self.t_steps() as f64 * h).powi(2);
        (simplex_sq + t_sq).sqrt()
    }

    /// All grid points, simplex factors first, in lexicographic index order.
    pub fn grid(&self) -> Grid {
        let r = self.simplex_steps();
        let mut idx: Vec<Vec<i64>> = vec![Vec::new()];
        for &s in &self.factors {
            let tuples = sorted_tuples(s, r);
            idx = idx
                .into_iter()
                .flat_map(|p| {
                    tuples.iter().map(move |tu| {
                        let mut q = p.clone();
                        q.extend_from_slice(tu);
                        q
                    })
                })
                .collect();
        }
        let m = self.t_steps();
        for _ in 0..self.t {
            idx = idx.into_iter().flat_map(|p| (-m..=m).map(move |k| [p.as_slice(), &[k]].concat())).collect();
        }
        let h = self.step();
        let coords = idx.iter().map(|p| p.iter().map(|&k| k as f64 * h).collect()).collect();
        let lookup = idx.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        Grid { indices: idx, coords, lookup }
    }

    /// Faces of simplex factor `factor`, numbered `1..=s+1`: face `j` is
    /// where barycentric coordinate `j` vanishes. With
    /// `0 <= k_1 <= ... <= k_s <= R`: face `1` is `k_s = R`, face `j` for
    /// `2 <= j <= s` is `k_{s-j+2} - k_{s-j+1} <= 1` (the diagonal facet,
    /// within one step in Euclidean distance), face `s+1` is `k_1 = 0`.
    pub fn in_face_slice(&self, index: &[i64], factor: usize, face: usize) -> bool {
        let s = self.factors[factor];
        if s == 0 || face == 0 || face > s + 1 {
            return false;
        }
        let start: usize = self.factors[..factor].iter().sum();
        let k = &index[start..start + s];
        if face == 1 {
            k[s - 1] == self.simplex_steps()
        } else if face == s + 1 {
            k[0] == 0
        } else {
            k[s - face + 1] - k[s - face] <= 1
        }
    }

    /// Barycentric coordinates `lambda_1..lambda_{s+1}` of factor `factor`.
    pub fn barycentric(&self, point: &[f64], factor: usize) -> Vec<f64> {
        let s = self.factors[factor];
        let start: usize = self.factors[..factor].iter().sum();
        let x = &point[start..start + s];
        if s == 0 {
            return vec![1.0];
        }
        let mut out = Vec::with_capacity(s + 1);
        out.push((self.rho - x[s - 1]) / self.rho);
        for j in 2..=s {
            out.push((x[s - j + 1] - x[s - j]) / self.rho);
        }
        out.push(x[0] / self.rho);
        out
    }
}

/// Nondecreasing tuples `0 <= k_1 <= ... <= k_s <= r`, lexicographically.
fn sorted_tuples(s: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..s {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                let lo = p.last().copied().unwrap_or(0);
                (lo..=r).map(move |k| [p.as_slice(), &[k]].concat())
            })
            .collect();
    }
    out
}

/// Sampled points of a domain together with their integer indices.
#[derive(Debug, Clone)]
pub struct Grid {
    pub indices: Vec<Vec<i64>>,
    pub coords: Vec<Vec<f64>>,
    lookup: HashMap<Vec<i64>, usize>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Grid points differing by one step in a single index.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let p = &self.indices[i];
        let mut out = Vec::with_capacity(2 * p.len());
        let mut q = p.clone();
        for k in 0..p.len() {
            for delta in [-1, 1] {
                q[k] = p[k] + delta;
                if let Some(&j) = self.lookup.get(&q) {
                    out.push(j);
                }
            }
            q[k] = p[k];
        }
        out
    }

    /// Connected components of `mask` under face adjacency, each sorted,
    /// ordered by their first point.
    pub fn components(&self, mask: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if !mask[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(i) = stack.pop() {
                comp.push(i);
                for j in self.neighbors(i) {
                    if mask[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// An open box; `None` bounds are infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "BoxRepr", into = "BoxRepr")]
pub struct OpenBox {
    pub lo: Vec<Option<f64>>,
    pub hi: Vec<Option<f64>>,
}

type BoxRepr = (Vec<Option<f64>>, Vec<Option<f64>>);

impl From<BoxRepr> for OpenBox {
    fn from((lo, hi): BoxRepr) -> Self {
        OpenBox { lo, hi }
    }
}

impl From<OpenBox> for BoxRepr {
    fn from(b: OpenBox) -> Self {
        (b.lo, b.hi)
    }
}

impl OpenBox {
    pub fn new(lo: Vec<Option<f64>>, hi: Vec<Option<f64>>) -> Self {
        OpenBox { lo, hi }
    }

    /// A bounded box.
    pub fn bounded(lo: &[f64], hi: &[f64]) -> Self {
        OpenBox { lo: lo.iter().map(|v| Some(*v)).collect(), hi: hi.iter().map(|v| Some(*v)).collect() }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (lo, hi))| {
            lo.is_none_or(|l| *x > l) && hi.is_none_or(|h| *x < h)
        })
    }

    fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(Option::is_some)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub label: String,
    pub boxes: Vec<OpenBox>,
    /// For product domains: the face of each simplex factor this element
    /// is declared to miss (`None` for zero-dimensional factors).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub misses: Option<Vec<Option<usize>>>,
}

impl Element {
    pub fn new(label: impl Into<String>, boxes: Vec<OpenBox>) -> Self {
        Element { label: label.into(), boxes, misses: None }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub domain: GridDomain,
    pub elements: Vec<Element>,
}

impl Cover {
    pub fn new(domain: GridDomain, elements: Vec<Element>) -> Result<Self> {
        let c = Cover { domain, elements };
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Cover = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let dim = self.domain.dim();
        if self.elements.is_empty() {
            return Err(Error::InvalidArgument("cover has no elements".into()));
        }
        for e in &self.elements {
            for b in &e.boxes {
                if b.lo.len() != dim || b.hi.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: b.lo.len().max(b.hi.len()) });
                }
                if b.lo.iter().zip(&b.hi).any(|(l, h)| matches!((l, h), (Some(l), Some(h)) if l >= h)) {
                    return Err(Error::InvalidArgument(format!("element `{}` has an empty box", e.label)));
                }
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<String> {
        self.elements.iter().map(|e| e.label.clone()).collect()
    }
}

/// Membership of every grid point of a domain.
#[derive(Debug, Clone)]
pub struct Scan {
    pub domain: GridDomain,
    pub grid: Grid,
    /// Sorted element indices containing each point.
    pub members: Vec<Vec<usize>>,
}

impl Scan {
    pub fn multiplicity(&self, i: usize) -> usize {
        self.members[i].len()
    }

    /// Largest multiplicity and the first point attaining it.
    pub fn order(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, m) in self.members.iter().enumerate() {
            if m.len() > best.0 {
                best = (m.len(), i);
            }
        }
        best
    }

    /// Points contained in every element of `set`.
    pub fn intersection_mask(&self, set: &[usize]) -> Vec<bool> {
        self.members.iter().map(|m| set.iter().all(|e| m.contains(e))).collect()
    }

    /// CSV with the point coordinates and multiplicity.
    pub fn multiplicity_csv(&self) -> String {
        let s = self.domain.s();
        let mut header: Vec<String> = (1..=s).map(|i| format!("x_{i}")).collect();
        header.extend((1..=self.domain.t()).map(|i| format!("y_{i}")));
        header.push("multiplicity".into());
        let mut out = header.join(",");
        out.push('\n');
        for (p, m) in self.grid.coords.iter().zip(&self.members) {
            let mut cols: Vec<String> = p.iter().map(|v| format_sig(*v, 12)).collect();
            cols.push(m.len().to_string());
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        out
    }
}

/// Evaluates every element on the grid of `d`; fails on an uncovered point.
pub fn scan(c: &Cover, d: &GridDomain) -> Result<Scan> {
    if d.dim() != c.domain.dim() {
        return Err(Error::DimensionMismatch { expected: c.domain.dim(), found: d.dim() });
    }
    let grid = d.grid();
    let members: Vec<Vec<usize>> = grid
        .coords
        .par_iter()
        .map(|p| c.elements.iter().enumerate().filter(|(_, e)| e.contains(p)).map(|(i, _)| i).collect())
        .collect();
    if let Some(i) = members.iter().position(Vec::is_empty) {
        return Err(Error::NotACover { point: grid.coords[i].clone() });
    }
    Ok(Scan { domain: d.clone(), grid, members })
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    pub order: usize,
    pub witness: Vec<f64>,
    pub witness_elements: Vec<String>,
}

/// Largest multiplicity over the grid and a witness point.
pub fn cover_order(c: &Cover, d: &GridDomain) -> Result<OrderReport> {
    let sc = scan(c, d)?;
    let (order, i) = sc.order();
    Ok(OrderReport {
        order,
        witness: sc.grid.coords[i].clone(),
        witness_elements: sc.members[i].iter().map(|&e| c.elements[e].label.clone()).collect(),
    })
}

/// Largest element diameter: for an element made of boxes `B_a`, the
/// supremum of `|p - q|` over `p in B_a`, `q in B_b`, maximized over pairs.
pub fn cover_mesh(c: &Cover) -> Result<f64> {
    let mut mesh: f64 = 0.0;
    for e in &c.elements {
        if e.boxes.iter().any(|b| !b.is_bounded()) {
            return Err(Error::UnboundedElement(e.label.clone()));
        }
        for a in &e.boxes {
            for b in &e.boxes {
                let sq: f64 = (0..a.lo.len())
                    .map(|k| {
                        let (alo, ahi) = (a.lo[k].unwrap_or(0.0), a.hi[k].unwrap_or(0.0));
                        let (blo, bhi) = (b.lo[k].unwrap_or(0.0), b.hi[k].unwrap_or(0.0));
                        (ahi - blo).max(bhi - alo).powi(2)
                    })
                    .sum();
                mesh = mesh.max(sq.sqrt());
            }
        }
    }
    Ok(mesh)
}

/// Lebesgue number on the grid: the minimum over points `x` of the largest
/// radius of a ball about `x` (in the domain) that stays inside one element.
///
/// The radius for `x` in `E` is the distance to the nearest grid point
/// outside `E` minus half a step (the boundary lies between grid points),
/// capped at half the domain diameter, which is also the value when `E`
/// contains the whole grid.
pub fn cover_lebesgue(c: &Cover, d: &GridDomain) -> Result<f64> {
    let sc = scan(c, d)?;
    let cap = d.diameter() / 2.0;
    let half = d.step() / 2.0;
    let outside: Vec<Vec<usize>> = (0..c.elements.len())
        .map(|e| (0..sc.grid.len()).filter(|&i| !sc.members[i].contains(&e)).collect())
        .collect();
    let coords = &sc.grid.coords;
    let per_point: Vec<f64> = (0..sc.grid.len())
        .into_par_iter()
        .map(|i| {
            sc.members[i]
                .iter()
                .map(|&e| {
                    let nearest = outside[e].iter().map(|&j| dist(&coords[i], &coords[j])).fold(f64::INFINITY, f64::min);
                    (nearest - half).clamp(0.0, cap)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(per_point.into_iter().fold(f64::INFINITY, f64::min))
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Faces of the nerve as sorted index sets, by size then lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Nerve {
    pub faces: Vec<Vec<usize>>,
}

impl Nerve {
    /// One more than the largest face dimension, i.e. the largest face size.
    pub fn order(&self) -> usize {
        self.faces.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_dimension(&self) -> Option<usize> {
        self.order().checked_sub(1)
    }
}

/// Index sets whose elements share a grid point, closed under subsets.
pub fn nerve(c: &Cover, d: &GridDomain) -> Result<Nerve> {
    let sc = scan(c, d)?;
    let maximal: BTreeSet<Vec<usize>> = sc.members.iter().cloned().collect();
    let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for m in maximal {
        for mask in 1u64..(1u64 << m.len()) {
            faces.insert(m.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &e)| e).collect());
        }
    }
    let mut faces: Vec<Vec<usize>> = faces.into_iter().collect();
    faces.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(Nerve { faces })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_cover(intervals: &[(Option<f64>, Option<f64>)], s: usize, t: usize, t_bound: f64) -> Cover {
        let domain = GridDomain::new(s, t, 1.0, t_bound, 32).unwrap();
        let elements = intervals
            .iter()
            .enumerate()
            .map(|(i, (lo, hi))| Element::new(format!("E{i}"), vec![OpenBox::new(vec![*lo], vec![*hi])]))
            .collect();
        Cover::new(domain, elements).unwrap()
    }

    #[test]
    fn grid_shapes() {
        let d = GridDomain::new(2, 0, 1.0, 1.0, 4).unwrap();
        // {0 <= k1 <= k2 <= 4}: 15 points.
        assert_eq!(d.grid().len(), 15);
        let d = GridDomain::new(1, 1, 1.0, 1.0, 4).unwrap();
        assert_eq!(d.grid().len(), 5 * 9);
        let d = GridDomain::new(0, 1, 1.0, 2.0, 4).unwrap();
        let g = d.grid();
        assert_eq!(g.len(), 17);
        assert_eq!(g.coords[0], vec![-2.0]);
        assert_eq!(g.neighbors(0), vec![1]);
        assert!(GridDomain::new(0, 0, 1.0, 1.0, 32).is_err());
        assert!(GridDomain::new(1, 0, 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn faces_and_barycentric() {
        let d = GridDomain::new(2, 0, 1.0, 1.0, 4).unwrap();
        assert!(d.in_face_slice(&[0, 4], 0, 1));
        assert!(d.in_face_slice(&[2, 3], 0, 2));
        assert!(!d.in_face_slice(&[1, 3], 0, 2));
        assert!(d.in_face_slice(&[0, 2], 0, 3));
        let l = d.barycentric(&[0.25, 0.75], 0);
        assert_eq!(l, vec![0.25, 0.5, 0.25]);
        let d1 = GridDomain::new(1, 0, 1.0, 1.0, 4).unwrap();
        assert_eq!(d1.barycentric(&[0.25], 0), vec![0.75, 0.25]);
        assert!(d1.in_face_slice(&[4], 0, 1) && d1.in_face_slice(&[0], 0, 2));
    }

    #[test]
    fn domain_json_round_trip() {
        let d: GridDomain = serde_json::from_str(r#"{"s": 1, "t": 1, "t_bound": 2.0}"#).unwrap();
        assert_eq!((d.s(), d.t(), d.resolution()), (1, 1, 32));
        let back: GridDomain = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
        let p: GridDomain = serde_json::from_str(r#"{"factors": [1, 1]}"#).unwrap();
        assert_eq!(p.factors(), &[1, 1]);
        assert!(serde_json::from_str::<GridDomain>(r#"{"s": 1, "factors": [1]}"#).is_err());
    }

    #[test]
    fn order_of_interval_chains() {
        // Three consecutive overlapping intervals on [0, 1].
        let c = interval_cover(&[(None, Some(0.4)), (Some(0.3), Some(0.7)), (Some(0.6), None)], 1, 0, 1.0);
        let r = cover_order(&c, &c.domain).unwrap();
        assert_eq!(r.order, 2);
        assert_eq!(r.witness_elements, vec!["E0", "E1"]);
        let all = interval_cover(&[(None, None)], 1, 0, 1.0);
        assert_eq!(cover_order(&all, &all.domain).unwrap().order, 1);
        let gap = interval_cover(&[(None, Some(0.4)), (Some(0.6), None)], 1, 0, 1.0);
        assert!(matches!(cover_order(&gap, &gap.domain), Err(Error::NotACover { .. })));
    }

    #[test]
    fn mesh_examples() {
        let d = GridDomain::new(1, 1, 1.0, 1.0, 32).unwrap();
        let unit = Cover::new(d.clone(), vec![Element::new("u", vec![OpenBox::bounded(&[0.0, 0.0], &[1.0, 1.0])])]).unwrap();
        assert!((cover_mesh(&unit).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let two = Cover::new(
            d.clone(),
            vec![Element::new(
                "pair",
                vec![OpenBox::bounded(&[0.0, 0.0], &[1.0, 1.0]), OpenBox::bounded(&[3.0, 0.0], &[4.0, 1.0])],
            )],
        )
        .unwrap();
        assert!((cover_mesh(&two).unwrap() - 17f64.sqrt()).abs() < 1e-15);
        let open = Cover::new(d, vec![Element::new("half", vec![OpenBox::new(vec![None, Some(0.0)], vec![Some(1.0), Some(1.0)])])]).unwrap();
        assert!(matches!(cover_mesh(&open), Err(Error::UnboundedElement(l)) if l == "half"));
    }

    #[test]
    fn lebesgue_examples() {
        let c = interval_cover(&[(None, Some(0.6)), (Some(0.4), None)], 1, 0, 1.0);
        let l = cover_lebesgue(&c, &c.domain).unwrap();
        assert!((l - 0.1).abs() <= 1.0 / 32.0, "{l}");
        let all = interval_cover(&[(None, None)], 1, 0, 1.0);
        assert!((cover_lebesgue(&all, &all.domain).unwrap() - 0.5).abs() <= 1.0 / 32.0);
        let mut last = f64::INFINITY;
        for overlap in [0.3, 0.2, 0.1, 0.05] {
            let c = interval_cover(&[(None, Some(0.5 + overlap / 2.0)), (Some(0.5 - overlap / 2.0), None)], 1, 0, 1.0);
            let l = cover_lebesgue(&c, &c.domain).unwrap();
            assert!(l <= last);
            last = l;
        }
    }

    #[test]
    fn nerve_examples() {
        let c = interval_cover(&[(None, Some(0.6)), (Some(0.4), None)], 1, 0, 1.0);
        let n = nerve(&c, &c.domain).unwrap();
        assert_eq!(n.faces, vec![vec![0], vec![1], vec![0, 1]]);
        assert_eq!(n.order(), cover_order(&c, &c.domain).unwrap().order);
        let d = GridDomain::new(0, 1, 1.0, 1.0, 32).unwrap();
        let disjoint = Cover::new(
            d,
            vec![
                Element::new("a", vec![OpenBox::new(vec![None], vec![Some(0.01)])]),
                Element::new("b", vec![OpenBox::new(vec![Some(0.0)], vec![None])]),
            ],
        )
        .unwrap();
        assert_eq!(nerve(&disjoint, &disjoint.domain).unwrap().faces, vec![vec![0], vec![1]]);
    }

    #[test]
    fn multiplicity_csv_header() {
        let c = interval_cover(&[(None, None)], 0, 1, 1.0);
        let sc = scan(&c, &c.domain).unwrap();
        let csv = sc.multiplicity_csv();
        assert!(csv.starts_with("y_1,multiplicity\n-1,1\n"));
    }
}
