use proptest::prelude::*;
use wellround::lattice::{
    alpha, cover_membership, dim_delta, independent_minima, is_generic_well_rounded, is_well_rounded, short_vectors,
    wr_transversality_rank,
};
use wellround::{DiagonalElement, Lattice};

fn lattice_strategy() -> impl Strategy<Value = Lattice> {
    (2usize..=4)
        .prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), n))
        .prop_filter_map("singular", |rows| {
            let x = Lattice::normalize(rows).ok()?;
            x.basis().iter().flatten().all(|v| v.abs() < 20.0).then_some(x)
        })
}

fn unimodular(n: usize, seed: &[i64]) -> Vec<Vec<f64>> {
    // Product of elementary matrices: row i += seed * row (i + 1).
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for (k, &c) in seed.iter().enumerate() {
        let (i, j) = (k % n, (k + 1) % n);
        let add: Vec<f64> = m[j].iter().map(|v| v * c as f64).collect();
        for (a, b) in m[i].iter_mut().zip(add) {
            *a += b;
        }
    }
    m
}

fn change_basis(x: &Lattice, u: &[Vec<f64>]) -> Lattice {
    let n = x.dim();
    let rows = (0..n)
        .map(|i| (0..n).map(|c| (0..n).map(|k| u[i][k] * x.basis()[k][c]).sum()).collect())
        .collect();
    Lattice::normalize(rows).unwrap()
}

#[test]
fn hexagonal_and_d4_kissing_numbers() {
    let hex = short_vectors(&Lattice::hexagonal(), 0.0).unwrap();
    assert_eq!(hex.minimal().count(), 3);
    let d4 = short_vectors(&Lattice::d4(), 0.0).unwrap();
    assert_eq!(d4.minimal().count(), 12);
    assert!(is_well_rounded(&Lattice::d4(), 1e-9).unwrap());
    // Both have more than n minimal pairs, so neither is generic.
    assert!(!is_generic_well_rounded(&Lattice::d4(), 1e-9).unwrap());
    assert!(!is_generic_well_rounded(&Lattice::hexagonal(), 1e-9).unwrap());
    let z = Lattice::standard(3).unwrap();
    assert!(is_generic_well_rounded(&z, 1e-9).unwrap());
}

#[test]
fn stretched_square_lattice() {
    let z = Lattice::standard(2).unwrap();
    let a = DiagonalElement::new(vec![0.2, -0.2]).unwrap();
    let y = a.apply(&z).unwrap();
    assert!((alpha(&y).unwrap() - (-0.2f64).exp()).abs() < 1e-12);
    assert_eq!(dim_delta(&y, 0.0).unwrap(), 1);
    // The second minimum sits at e^0.4 - 1.
    assert_eq!(dim_delta(&y, 0.49).unwrap(), 1);
    assert_eq!(dim_delta(&y, 0.5).unwrap(), 2);
    assert!(!is_well_rounded(&y, 1e-9).unwrap());
    assert_eq!(wr_transversality_rank(&z).unwrap(), 1);
}

#[test]
fn cover_membership_rejects_large_eps() {
    let z = Lattice::standard(3).unwrap();
    assert!(cover_membership(&z, &DiagonalElement::identity(3), 0.5).is_err());
    assert!(cover_membership(&z, &DiagonalElement::identity(3), 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minima_do_not_depend_on_basis(x in lattice_strategy(), seed in prop::collection::vec(-2i64..=2, 6)) {
        let y = change_basis(&x, &unimodular(x.dim(), &seed));
        prop_assert!(x.same_lattice(&y, 1e-8));
        let a = short_vectors(&x, 0.3).unwrap();
        let b = short_vectors(&y, 0.3).unwrap();
        prop_assert!((a.alpha - b.alpha).abs() <= 1e-9 * a.alpha);
        let mut na: Vec<f64> = a.vectors.iter().map(|v| v.iter().map(|c| c * c).sum::<f64>()).collect();
        let mut nb: Vec<f64> = b.vectors.iter().map(|v| v.iter().map(|c| c * c).sum::<f64>()).collect();
        na.sort_by(f64::total_cmp);
        nb.sort_by(f64::total_cmp);
        prop_assert_eq!(na.len(), nb.len());
        for (p, q) in na.iter().zip(&nb) {
            prop_assert!((p - q).abs() <= 1e-8 * p);
        }
    }

    #[test]
    fn dim_delta_is_monotone(x in lattice_strategy()) {
        let n = x.dim();
        let mut last = 1;
        for k in 0..=20 {
            let d = dim_delta(&x, k as f64 * 0.1).unwrap();
            prop_assert!(d >= last && d <= n);
            last = d;
        }
    }

    #[test]
    fn independent_minima_are_sorted_and_independent(x in lattice_strategy()) {
        let m = independent_minima(&x).unwrap();
        prop_assert_eq!(m.len(), x.dim());
        prop_assert!(m.windows(2).all(|w| w[0].norm <= w[1].norm * (1.0 + 1e-12)));
        prop_assert!((m[0].norm - alpha(&x).unwrap()).abs() <= 1e-12 * m[0].norm);
        let det = nalgebra::DMatrix::from_fn(x.dim(), x.dim(), |i, j| m[i].vector[j]).determinant();
        prop_assert!(det.abs() >= 1.0 - 1e-6);
    }

    #[test]
    fn diagonal_action_round_trips(x in lattice_strategy(), t in prop::collection::vec(-1.0f64..1.0, 4)) {
        let n = x.dim();
        let a = DiagonalElement::project(t[..n].to_vec());
        let y = a.apply(&x).unwrap();
        prop_assert!((y.det().abs() - 1.0).abs() < 1e-9);
        prop_assert!(a.inverse().apply(&y).unwrap().same_lattice(&x, 1e-8));
    }
}
