//! Grid certificates for the multiplicity theorem and its product form.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{dist, nerve, scan, Cover, Element, GridDomain, Scan};
use crate::error::{Error, Result};

/// Membership masks on the grid of a domain.
#[derive(Debug, Clone, Serialize)]
pub struct Separation {
    pub points: Vec<Vec<f64>>,
    /// `members[i][p]`: grid point `p` lies in `E_i`.
    pub members: Vec<Vec<bool>>,
}

/// `E_i = {x in G_i : d(x, F_i) < d(x, F \ F_i)}` with `F_i = G_i \ Z`
/// and `F = union F_i`, evaluated on the grid with Euclidean distances.
pub fn separate_components(g: &[Element], z: &Element, d: &GridDomain) -> Result<Separation> {
    let grid = d.grid();
    let inside: Vec<Vec<bool>> = g.iter().map(|e| grid.coords.iter().map(|p| e.contains(p)).collect()).collect();
    let in_z: Vec<bool> = grid.coords.iter().map(|p| z.contains(p)).collect();
    for p in 0..grid.len() {
        if in_z[p] {
            continue;
        }
        let hits: Vec<usize> = (0..g.len()).filter(|&i| inside[i][p]).collect();
        if hits.len() > 1 {
            return Err(Error::HypothesisViolated { i: hits[0], j: hits[1], point: grid.coords[p].clone() });
        }
    }
    // Owner of each point of F (points outside Z lie in at most one G_i).
    let owner: Vec<Option<usize>> =
        (0..grid.len()).map(|p| if in_z[p] { None } else { (0..g.len()).find(|&i| inside[i][p]) }).collect();
    let f_points: Vec<usize> = (0..grid.len()).filter(|&p| owner[p].is_some()).collect();
    let coords = &grid.coords;
    let members = (0..g.len())
        .map(|i| {
            (0..grid.len())
                .into_par_iter()
                .map(|p| {
                    if !inside[i][p] {
                        return false;
                    }
                    let (mut own, mut other) = (f64::INFINITY, f64::INFINITY);
                    for &q in &f_points {
                        let dq = dist(&coords[p], &coords[q]);
                        if owner[q] == Some(i) {
                            own = own.min(dq);
                        } else {
                            other = other.min(dq);
                        }
                    }
                    own < other
                })
                .collect()
        })
        .collect();
    Ok(Separation { points: grid.coords.clone(), members })
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyOptions {
    pub check_hypotheses: bool,
    /// `R` for hypothesis (ii); defaults to half of `t_bound`.
    pub affine_radius: Option<f64>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { check_hypotheses: true, affine_radius: None }
    }
}

/// A connected component of an element that meets every face slice.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentMiss {
    pub element: String,
    pub size: usize,
    pub first_point: Vec<f64>,
}

/// Affine fit of the `R^t` projection of one component of a `k`-fold
/// intersection.
#[derive(Debug, Clone, Serialize)]
pub struct AffineFit {
    pub elements: Vec<String>,
    pub k: usize,
    pub fit_dim: usize,
    pub points: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub s: usize,
    pub t: usize,
    pub resolution: usize,
    pub grid_points: usize,
    pub order: usize,
    pub required: usize,
    pub witness: Vec<f64>,
    pub witness_elements: Vec<String>,
    pub hyp_i_ok: Option<bool>,
    pub hyp_i_failures: Vec<ComponentMiss>,
    pub hyp_ii_ok: Option<bool>,
    pub affine_radius: Option<f64>,
    pub hyp_ii: Vec<AffineFit>,
    /// Order at most `s + t` although both hypotheses hold on the grid.
    pub violated: bool,
    pub caveat: String,
}

/// Multiplicity scan plus, optionally, grid checks of both hypotheses of
/// the covering theorem on a domain with a single simplex factor.
pub fn certify_multiplicity(u: &Cover, d: &GridDomain, opts: &CertifyOptions) -> Result<CertificateReport> {
    if d.factors().len() != 1 {
        return Err(Error::InvalidArgument("certification needs a single simplex factor; use kkm_check".into()));
    }
    let sc = scan(u, d)?;
    let (order, w) = sc.order();
    let (s, t) = (d.s(), d.t());
    let labels = u.labels();
    let mut report = CertificateReport {
        s,
        t,
        resolution: d.resolution(),
        grid_points: sc.grid.len(),
        order,
        required: s + t + 1,
        witness: sc.grid.coords[w].clone(),
        witness_elements: sc.members[w].iter().map(|&e| labels[e].clone()).collect(),
        hyp_i_ok: None,
        hyp_i_failures: Vec::new(),
        hyp_ii_ok: None,
        affine_radius: None,
        hyp_ii: Vec::new(),
        violated: false,
        caveat: format!("grid-certified at resolution {}", d.resolution()),
    };
    if !opts.check_hypotheses {
        return Ok(report);
    }

    for (e, label) in labels.iter().enumerate() {
        let mask: Vec<bool> = sc.members.iter().map(|m| m.contains(&e)).collect();
        for comp in sc.grid.components(&mask) {
            let misses_some = (1..=s + 1).any(|face| comp.iter().all(|&p| !d.in_face_slice(&sc.grid.indices[p], 0, face)));
            if s > 0 && !misses_some {
                report.hyp_i_failures.push(ComponentMiss {
                    element: label.clone(),
                    size: comp.len(),
                    first_point: sc.grid.coords[comp[0]].clone(),
                });
            }
        }
    }
    report.hyp_i_ok = Some(report.hyp_i_failures.is_empty());

    let radius = opts.affine_radius.unwrap_or(d.t_bound() / 2.0);
    report.affine_radius = Some(radius);
    let faces = nerve(u, d)?.faces;
    for face in faces.iter().filter(|f| f.len() <= s + t) {
        let k = face.len();
        let fit_dim = (s + t - k).min(t);
        let mask = sc.intersection_mask(face);
        for comp in sc.grid.components(&mask) {
            let residual = if fit_dim >= t { 0.0 } else { affine_residual(&sc, &comp, s, fit_dim) };
            report.hyp_ii.push(AffineFit {
                elements: face.iter().map(|&e| labels[e].clone()).collect(),
                k,
                fit_dim,
                points: comp.len(),
                residual,
            });
        }
    }
    report.hyp_ii_ok = Some(report.hyp_ii.iter().all(|f| f.residual <= radius));
    report.violated = order <= s + t && report.hyp_i_ok == Some(true) && report.hyp_ii_ok == Some(true);
    Ok(report)
}

/// Largest distance from the projected points to the best `fit_dim`
/// dimensional affine subspace (centered SVD).
fn affine_residual(sc: &Scan, comp: &[usize], s: usize, fit_dim: usize) -> f64 {
    let t = sc.domain.t();
    let n = comp.len();
    let mut centroid = vec![0.0; t];
    for &p in comp {
        for (c, v) in centroid.iter_mut().zip(&sc.grid.coords[p][s..]) {
            *c += v / n as f64;
        }
    }
    let m = DMatrix::from_fn(n, t, |r, c| sc.grid.coords[comp[r]][s + c] - centroid[c]);
    let dirs: Vec<Vec<f64>> = if fit_dim == 0 {
        Vec::new()
    } else {
        let svd = m.clone().svd(false, true);
        let v_t = svd.v_t.expect("v_t requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        order.into_iter().take(fit_dim).map(|k| v_t.row(k).iter().copied().collect()).collect()
    };
    (0..n)
        .map(|r| {
            let row: Vec<f64> = m.row(r).iter().copied().collect();
            crate::linalg::norm(&crate::linalg::orthogonal_residual(&row, &dirs))
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct KkmReport {
    pub factors: Vec<usize>,
    pub order: usize,
    pub required: usize,
    pub holds: bool,
    pub witness: Vec<f64>,
    pub witness_elements: Vec<String>,
    pub caveat: String,
}

/// Product form of the KKM theorem on `Delta_1 x ... x Delta_m`: checks on
/// the grid that every element misses its declared face of each factor,
/// then reports whether the order reaches `sum dim Delta_i + 1`.
pub fn kkm_check(u: &Cover, d: &GridDomain, face_misses: &[Vec<Option<usize>>]) -> Result<KkmReport> {
    if d.t() != 0 {
        return Err(Error::InvalidArgument("kkm_check needs a product of simplices (t = 0)".into()));
    }
    if face_misses.len() != u.elements.len() {
        return Err(Error::InvalidArgument("one face declaration per element is required".into()));
    }
    let sc = scan(u, d)?;
    for (e, decl) in face_misses.iter().enumerate() {
        if decl.len() != d.factors().len() {
            return Err(Error::InvalidArgument(format!("element `{}` needs one face per factor", u.elements[e].label)));
        }
        for (factor, face) in decl.iter().enumerate() {
            let dim = d.factors()[factor];
            let face = match (face, dim) {
                (None, 0) => continue,
                (Some(f), _) if dim > 0 && (1..=dim + 1).contains(f) => *f,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "element `{}`: face {:?} is not a face of factor {}",
                        u.elements[e].label,
                        face,
                        factor + 1
                    )))
                }
            };
            let meets = (0..sc.grid.len())
                .any(|p| sc.members[p].contains(&e) && d.in_face_slice(&sc.grid.indices[p], factor, face));
            if meets {
                return Err(Error::DeclarationFalse { element: u.elements[e].label.clone(), factor: factor + 1, face });
            }
        }
    }
    let (order, w) = sc.order();
    let required = d.s() + 1;
    Ok(KkmReport {
        factors: d.factors().to_vec(),
        order,
        required,
        holds: order >= required,
        witness: sc.grid.coords[w].clone(),
        witness_elements: sc.members[w].iter().map(|&e| u.elements[e].label.clone()).collect(),
        caveat: format!("grid-certified at resolution {}", d.resolution()),
    })
}

#[cfg(test)]
mod tests {
    use super::super::OpenBox;
    use super::*;

    fn line(lo: Option<f64>, hi: Option<f64>) -> OpenBox {
        OpenBox::new(vec![lo], vec![hi])
    }

    #[test]
    fn separation_of_two_intervals() {
        let d = GridDomain::new(0, 1, 1.0, 2.0, 16).unwrap();
        let g = vec![Element::new("a", vec![line(None, Some(0.5))]), Element::new("b", vec![line(Some(-0.5), None)])];
        let z = Element::new("z", vec![line(Some(-0.75), Some(0.75))]);
        let sep = separate_components(&g, &z, &d).unwrap();
        for p in 0..sep.points.len() {
            assert!(!(sep.members[0][p] && sep.members[1][p]));
            let x = sep.points[p][0];
            if x <= -0.75 {
                assert!(sep.members[0][p]);
            }
            if x >= 0.75 {
                assert!(sep.members[1][p]);
            }
            for i in 0..2 {
                if sep.members[i][p] {
                    assert!(g[i].contains(&sep.points[p]));
                }
            }
        }
        // Z outside the overlap breaks the hypothesis.
        let narrow = Element::new("z", vec![line(Some(-0.1), Some(0.1))]);
        assert!(matches!(separate_components(&g, &narrow, &d), Err(Error::HypothesisViolated { i: 0, j: 1, .. })));
        // Z containing everything leaves nothing to separate.
        let all = Element::new("z", vec![line(None, None)]);
        let sep = separate_components(&g, &all, &d).unwrap();
        assert!(sep.members.iter().flatten().all(|m| !m));
    }

    #[test]
    fn segment_kkm() {
        let d = GridDomain::new(1, 0, 1.0, 1.0, 32).unwrap();
        let c = Cover::new(
            d.clone(),
            vec![Element::new("a", vec![line(None, Some(0.55))]), Element::new("b", vec![line(Some(0.45), None)])],
        )
        .unwrap();
        let r = certify_multiplicity(&c, &d, &CertifyOptions::default()).unwrap();
        assert_eq!(r.order, 2);
        assert_eq!(r.hyp_i_ok, Some(true));
        assert!(!r.violated);
        let k = kkm_check(&c, &d, &[vec![Some(1)], vec![Some(2)]]).unwrap();
        assert!(k.holds);
        assert!(matches!(kkm_check(&c, &d, &[vec![Some(2)], vec![Some(2)]]), Err(Error::DeclarationFalse { .. })));
    }

    #[test]
    fn hypothesis_one_failure_is_reported() {
        // One element covering the whole segment meets both endpoints.
        let d = GridDomain::new(1, 0, 1.0, 1.0, 16).unwrap();
        let c = Cover::new(d.clone(), vec![Element::new("all", vec![line(None, None)])]).unwrap();
        let r = certify_multiplicity(&c, &d, &CertifyOptions::default()).unwrap();
        assert_eq!(r.order, 1);
        assert_eq!(r.hyp_i_ok, Some(false));
        assert_eq!(r.hyp_i_failures.len(), 1);
        assert!(!r.violated);
    }

    #[test]
    fn unbounded_strip_fails_hypothesis_two() {
        // s = 0, t = 1: a single element is a k = 1 component that must be bounded.
        let d = GridDomain::new(0, 1, 1.0, 4.0, 8).unwrap();
        let c = Cover::new(d.clone(), vec![Element::new("line", vec![line(None, None)])]).unwrap();
        let r = certify_multiplicity(&c, &d, &CertifyOptions::default()).unwrap();
        assert_eq!(r.hyp_ii_ok, Some(false));
        assert!((r.hyp_ii[0].residual - 4.0).abs() < 1e-12);
        assert!(!r.violated);
    }

    #[test]
    fn product_of_segments() {
        let d = GridDomain::with_factors(vec![1, 1], 0, 1.0, 1.0, 16).unwrap();
        let quad = |lo: [Option<f64>; 2], hi: [Option<f64>; 2]| vec![OpenBox::new(lo.to_vec(), hi.to_vec())];
        let c = Cover::new(
            d.clone(),
            vec![
                Element::new("ll", quad([None, None], [Some(0.6), Some(0.6)])),
                Element::new("lr", quad([None, Some(0.4)], [Some(0.6), None])),
                Element::new("rl", quad([Some(0.4), None], [None, Some(0.6)])),
                Element::new("rr", quad([Some(0.4), Some(0.4)], [None, None])),
            ],
        )
        .unwrap();
        let decl = vec![
            vec![Some(1), Some(1)],
            vec![Some(1), Some(2)],
            vec![Some(2), Some(1)],
            vec![Some(2), Some(2)],
        ];
        let r = kkm_check(&c, &d, &decl).unwrap();
        assert_eq!(r.required, 3);
        assert!(r.order >= 3);
        assert!(r.holds);
    }
}
