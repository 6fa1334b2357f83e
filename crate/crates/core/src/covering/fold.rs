//! The folding map onto the CFK simplex and pullback of covers along it.

use rayon::prelude::*;
use serde::Serialize;

use super::{Cover, GridDomain};
use crate::error::{Error, Result};

/// Triangle wave of period 2 followed by sorting: the quotient map of the
/// group generated by the facet reflections of `{0 <= x_1 <= ... <= x_s <= 1}`.
pub fn fold_to_cfk(x: &[f64]) -> Vec<f64> {
    let mut y: Vec<f64> = x
        .iter()
        .map(|u| {
            let m = u.rem_euclid(2.0);
            m.min(2.0 - m)
        })
        .collect();
    y.sort_by(f64::total_cmp);
    y
}

/// Folding onto `{0 <= x_1 <= ... <= x_s <= rho}`.
pub fn fold_to_cfk_scaled(x: &[f64], rho: f64) -> Vec<f64> {
    let scaled: Vec<f64> = x.iter().map(|v| v / rho).collect();
    fold_to_cfk(&scaled).into_iter().map(|v| v * rho).collect()
}

/// A pulled-back cover materialized on a window grid of `R^{s+t}`.
#[derive(Debug, Clone, Serialize)]
pub struct UnfoldedCover {
    pub window: f64,
    pub resolution: usize,
    pub labels: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub members: Vec<Vec<usize>>,
}

impl UnfoldedCover {
    pub fn order(&self) -> usize {
        self.members.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Pulls `u` (a cover of `Delta_rho x R^t`) back along
/// `(x, y) -> (fold(x), y)` onto `[-window, window]^s x [-L, L]^t`.
pub fn unfold_cover(u: &Cover, window: f64) -> Result<UnfoldedCover> {
    let d = &u.domain;
    if d.factors().len() != 1 {
        return Err(Error::InvalidArgument("unfolding needs a single simplex factor".into()));
    }
    if !(window >= d.rho()) {
        return Err(Error::WindowTooSmall(window));
    }
    let s = d.s();
    // A box grid: the `s` simplex coordinates range over the window.
    let res = d.resolution() as f64;
    let w = (window * res).round() as i64;
    let m = (d.t_bound() * res).round() as i64;
    let mut idx: Vec<Vec<i64>> = vec![Vec::new()];
    for k in 0..s + d.t() {
        let r = if k < s { w } else { m };
        idx = idx.into_iter().flat_map(|p| (-r..=r).map(move |v| [p.as_slice(), &[v]].concat())).collect();
    }
    let points: Vec<Vec<f64>> = idx.iter().map(|p| p.iter().map(|&k| k as f64 / res).collect()).collect();
    let members = points
        .par_iter()
        .map(|p| {
            let q = folded(p, s, d);
            u.elements.iter().enumerate().filter(|(_, e)| e.contains(&q)).map(|(i, _)| i).collect()
        })
        .collect();
    Ok(UnfoldedCover { window, resolution: d.resolution(), labels: u.labels(), points, members })
}

/// The image of an ambient point in `Delta_rho x R^t`.
pub(crate) fn folded(p: &[f64], s: usize, d: &GridDomain) -> Vec<f64> {
    let mut q = fold_to_cfk_scaled(&p[..s], d.rho());
    q.extend_from_slice(&p[s..]);
    q
}

#[cfg(test)]
mod tests {
    use super::super::{scan, Element, OpenBox};
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fold_examples() {
        assert!((fold_to_cfk(&[1.3])[0] - 0.7).abs() < 1e-15);
        assert_eq!(fold_to_cfk(&[0.9, 0.2]), vec![0.2, 0.9]);
        assert_eq!(fold_to_cfk(&[-0.5, 4.25]), vec![0.25, 0.5]);
        assert!((fold_to_cfk_scaled(&[2.6], 2.0)[0] - 1.4).abs() < 1e-15);
    }

    fn cover_1d() -> Cover {
        let d = GridDomain::new(1, 0, 1.0, 1.0, 8).unwrap();
        Cover::new(
            d,
            vec![
                Element::new("left", vec![OpenBox::new(vec![None], vec![Some(0.6)])]),
                Element::new("right", vec![OpenBox::new(vec![Some(0.3)], vec![None])]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn unfolded_cover_is_periodic() {
        let u = unfold_cover(&cover_1d(), 3.0).unwrap();
        // Grid step 1/8 on [-3, 3]; the pullback has period 2 and is even.
        let at = |x: f64| &u.members[((x + 3.0) * 8.0).round() as usize];
        for k in 0..=16 {
            let x = -1.0 + k as f64 / 8.0;
            assert_eq!(at(x), at(x + 2.0));
            assert_eq!(at(x), at(-x));
        }
        assert_eq!(u.order(), 2);
    }

    #[test]
    fn unfolded_multiplicity_matches_original() {
        let c = cover_1d();
        let u = unfold_cover(&c, 2.0).unwrap();
        let sc = scan(&c, &c.domain).unwrap();
        for (p, m) in u.points.iter().zip(&u.members) {
            let q = folded(p, 1, &c.domain);
            let i = sc.grid.coords.iter().position(|g| (g[0] - q[0]).abs() < 1e-12).unwrap();
            assert_eq!(m, &sc.members[i]);
        }
    }

    #[test]
    fn small_window_rejected() {
        assert!(matches!(unfold_cover(&cover_1d(), 0.5), Err(Error::WindowTooSmall(_))));
    }

    proptest! {
        #[test]
        fn fold_is_idempotent(x in prop::collection::vec(-10.0f64..10.0, 1..5)) {
            let y = fold_to_cfk(&x);
            prop_assert_eq!(fold_to_cfk(&y), y.clone());
            prop_assert!(y.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(y.iter().all(|v| (0.0..=1.0).contains(v)));
        }

        #[test]
        fn fold_is_invariant_under_generators(x in prop::collection::vec(-10.0f64..10.0, 1..5), k in 0usize..4) {
            let base = fold_to_cfk(&x);
            let s = x.len();
            let mut first = x.clone();
            first[0] = -first[0];
            let mut last = x.clone();
            last[s - 1] = 2.0 - last[s - 1];
            let mut swapped = x.clone();
            if s > 1 {
                swapped.swap(k % (s - 1), k % (s - 1) + 1);
            }
            for y in [first, last, swapped] {
                let f = fold_to_cfk(&y);
                for (a, b) in f.iter().zip(&base) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
            }
        }
    }
}
