use wellround::orbit::{
    block_sum, compact_orbit_from_quadratic, fundamental_unit, search_well_rounded, spread, stabilizer_unit, OrbitPart,
    OrbitSpec, SearchOptions,
};
use wellround::{Error, Lattice};

fn squarefree(d: i64) -> bool {
    (2..).take_while(|p| p * p <= d).all(|p| d % (p * p) != 0)
}

#[test]
fn pell_equation_holds() {
    for d in (2..300).filter(|&d| squarefree(d)) {
        let u = fundamental_unit(d).unwrap();
        let (x, y) = (u.x as i128, u.y as i128);
        assert_eq!(x * x - d as i128 * y * y, u.norm as i128, "D = {d}");
        let s = stabilizer_unit(d).unwrap();
        assert_eq!(s.norm, 1);
    }
}

#[test]
fn non_squarefree_rejected() {
    assert!(matches!(fundamental_unit(12), Err(Error::NotSquarefree(_))));
    assert!(compact_orbit_from_quadratic(4).is_err());
}

#[test]
fn structures_validate() {
    for d in [2, 3, 5, 6, 7, 13, 94] {
        let (x, s) = compact_orbit_from_quadratic(d).unwrap();
        s.validate(&x).unwrap();
    }
    let (x, s) = block_sum(&[OrbitPart::Unit, OrbitPart::Unit, OrbitPart::Unit]).unwrap();
    s.validate(&x).unwrap();
    assert!(x.same_lattice(&Lattice::standard(3).unwrap(), 1e-12));
    assert_eq!((s.t1_dim, s.t2_dim), (2, 0));
}

#[test]
fn spec_file_builds_block_sum() {
    let spec = OrbitSpec::from_json(r#"{"blocks":[{"type":"unit"},{"type":"quadratic","D":5}]}"#).unwrap();
    let (x, s) = spec.build().unwrap();
    assert_eq!(x.dim(), 3);
    assert_eq!(s.blocks, vec![vec![1], vec![2, 3]]);
    s.validate(&x).unwrap();
}

#[test]
fn simplex_vertices_have_trace_zero() {
    let (_, s) = block_sum(&[OrbitPart::Unit, {
        let (x, s) = compact_orbit_from_quadratic(3).unwrap();
        OrbitPart::Planar(x, s)
    }])
    .unwrap();
    for i in 0..s.block_count() {
        let b = s.simplex_vertex(i, 2.0);
        assert!(b.iter().sum::<f64>().abs() < 1e-12);
    }
}

#[test]
fn search_reaches_well_rounded_point() {
    let (x, s) = compact_orbit_from_quadratic(5).unwrap();
    let r = search_well_rounded(&x, &s, &SearchOptions::default()).unwrap();
    assert!(r.spread - 1.0 <= 1e-9);
    assert!((spread(&r.lattice).unwrap() - r.spread).abs() < 1e-12);
    assert!(r.a_star.apply(&x).unwrap().same_lattice(&r.lattice, 1e-9));
}

#[test]
fn starved_search_reports_budget() {
    let (x, s) = block_sum(&[
        {
            let (x, s) = compact_orbit_from_quadratic(2).unwrap();
            OrbitPart::Planar(x, s)
        },
        {
            let (x, s) = compact_orbit_from_quadratic(3).unwrap();
            OrbitPart::Planar(x, s)
        },
    ])
    .unwrap();
    let opts = SearchOptions { budget: 100, tolerance: 1e-6, ..SearchOptions::default() };
    match search_well_rounded(&x, &s, &opts) {
        Err(Error::BudgetExhausted(best)) => assert!(best.evaluations <= 100 && best.spread >= 1.0),
        other => panic!("expected budget exhaustion, got {other:?}"),
    }
    let tiny = SearchOptions { budget: 50, ..SearchOptions::default() };
    assert!(search_well_rounded(&x, &s, &tiny).is_err());
}
