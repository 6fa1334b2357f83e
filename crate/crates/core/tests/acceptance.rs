//! Acceptance suite: one line per criterion, nonzero exit status on any failure.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wellround::covering::{certify_multiplicity, cover_lebesgue, fold_to_cfk, kkm_check, CertifyOptions, Cover};
use wellround::exterior::{chi, flag_codim_check, nested_multiindices, wedge_of_group, Flag, MultiIndex};
use wellround::lattice::{
    compactness_bound, cover_membership, dim_delta, is_generic_well_rounded, short_vectors, wr_transversality_rank,
};
use wellround::orbit::{block_sum, compact_orbit_from_quadratic, search_well_rounded, OrbitPart, SearchOptions};
use wellround::report::to_json;
use wellround::{DiagonalElement, Lattice};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn planar(d: i64) -> OrbitPart {
    let (x, s) = compact_orbit_from_quadratic(d).expect("squarefree");
    OrbitPart::Planar(x, s)
}

fn random_lattice(rng: &mut ChaCha8Rng, n: usize, bound: f64) -> Lattice {
    loop {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-bound..bound)).collect()).collect();
        if let Ok(x) = Lattice::normalize(rows) {
            // Keep the conditioning reasonable.
            if x.basis().iter().flatten().all(|v| v.abs() < 50.0) {
                return x;
            }
        }
    }
}

fn compact_orbits() -> Outcome {
    let mut parts = Vec::new();
    for d in [2, 3, 7] {
        let (x, s) = compact_orbit_from_quadratic(d).map_err(|e| e.to_string())?;
        let opts = SearchOptions { budget: 5_000, tolerance: 1e-6, ..SearchOptions::default() };
        let start = Instant::now();
        let r = search_well_rounded(&x, &s, &opts).map_err(|e| format!("D={d}: {e}"))?;
        let took = start.elapsed();
        check(r.spread - 1.0 <= 1e-6, || format!("D={d}: spread - 1 = {:e}", r.spread - 1.0))?;
        check(r.evaluations <= 5_000, || format!("D={d}: {} evaluations", r.evaluations))?;
        check(took < Duration::from_secs(5), || format!("D={d}: took {took:?}"))?;
        parts.push(format!("D={d}: {:.1e} in {} evals, {:.0?}", r.spread - 1.0, r.evaluations, took));
    }
    Ok(parts.join("; "))
}

fn closed_orbits() -> Outcome {
    let mut parts = Vec::new();
    for (name, blocks) in [("Z+disc2", vec![OrbitPart::Unit, planar(2)]), ("disc2+disc3", vec![planar(2), planar(3)])] {
        let (x, s) = block_sum(&blocks).map_err(|e| e.to_string())?;
        let opts = SearchOptions { budget: 100_000, tolerance: 1e-4, ..SearchOptions::default() };
        let start = Instant::now();
        let r = search_well_rounded(&x, &s, &opts).map_err(|e| format!("{name}: {e}"))?;
        let took = start.elapsed();
        check(r.spread - 1.0 <= 1e-4, || format!("{name}: spread - 1 = {:e}", r.spread - 1.0))?;
        check(took < Duration::from_secs(60), || format!("{name}: took {took:?}"))?;
        let alpha = wellround::lattice::alpha(&r.lattice).map_err(|e| e.to_string())?;
        check(alpha >= compactness_bound(x.dim()), || format!("{name}: alpha {alpha} below c(n)"))?;
        parts.push(format!("{name}: {:.1e} in {} evals, {:.1?}", r.spread - 1.0, r.evaluations, took));
    }
    Ok(parts.join("; "))
}

fn cover_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let eps = 0.04;
    let mut counts = [0usize; 9];
    for case in 0..100 {
        let n = rng.gen_range(2..=6);
        let x = random_lattice(&mut rng, n, 1.0);
        let a = DiagonalElement::project((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let m = cover_membership(&x, &a, eps).map_err(|e| format!("case {case}: {e}"))?;
        let j = m.first.ok_or_else(|| format!("case {case}: no j at n = {n}"))?;
        counts[j] += 1;
        let y = a.apply(&x).map_err(|e| e.to_string())?;
        let mut last = 0;
        for k in 0..=40 {
            let delta = k as f64 * 1.5 / 40.0;
            let dim = dim_delta(&y, delta).map_err(|e| e.to_string())?;
            check(dim >= last, || format!("case {case}: dim_delta drops at {delta}"))?;
            last = dim;
        }
        if j == n {
            let alpha = wellround::lattice::alpha(&y).map_err(|e| e.to_string())?;
            check(alpha >= 0.5 * compactness_bound(n), || format!("case {case}: alpha {alpha} too small"))?;
        }
    }
    Ok(format!("100/100 covered; j histogram {:?}", &counts[1..7]))
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

/// Laplace expansion, independent of the library's elimination.
fn laplace_det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    if n == 0 {
        return BigRational::one();
    }
    let mut total = BigRational::zero();
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigRational>> =
            m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, v)| v.clone()).collect()).collect();
        let term = &m[0][c] * laplace_det(&minor);
        if c % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn random_rational_flag(rng: &mut ChaCha8Rng) -> (usize, Vec<Vec<Vec<BigRational>>>) {
    let n = rng.gen_range(2..=6);
    loop {
        let rows: Vec<Vec<BigRational>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| if rng.gen_bool(0.4) { q(0, 1) } else { q(rng.gen_range(-3..=3), rng.gen_range(1..=4)) })
                    .collect()
            })
            .collect();
        if laplace_det(&rows).is_zero() {
            continue;
        }
        let dims: Vec<usize> = (1..n).filter(|_| rng.gen_bool(0.6)).collect();
        let dims = if dims.is_empty() { vec![rng.gen_range(1..n)] } else { dims };
        return (n, dims.iter().map(|&d| rows[..d].to_vec()).collect());
    }
}

fn exact_support_contains(basis: &[Vec<BigRational>], j: &MultiIndex) -> bool {
    let m: Vec<Vec<BigRational>> =
        basis.iter().map(|r| j.indices().iter().map(|&c| r[c - 1].clone()).collect()).collect();
    !laplace_det(&m).is_zero()
}

fn flags() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_k = 0;
    for case in 0..200 {
        let (n, bases) = random_rational_flag(&mut rng);
        let flag = Flag::rational(n, bases.clone()).map_err(|e| format!("case {case}: {e}"))?;
        let chain = nested_multiindices(&flag).map_err(|e| format!("case {case}: {e}"))?;
        check(chain.len() == n, || format!("case {case}: chain length {}", chain.len()))?;
        for (d, w) in chain.windows(2).enumerate() {
            check(w[0].order() == d + 1 && w[0].is_subset_of(&w[1]), || format!("case {case}: nesting broken"))?;
        }
        for b in &bases {
            let j = &chain[b.len() - 1];
            check(exact_support_contains(b, j), || format!("case {case}: J_{} not in supp", b.len()))?;
        }
        let c = flag_codim_check(&flag).map_err(|e| e.to_string())?;
        check(c.codim >= c.k, || format!("case {case}: codim {} < k {}", c.codim, c.k))?;
        max_k = max_k.max(c.k);
    }
    Ok(format!("200/200 flags, longest k = {max_k}"))
}

/// Gram determinant by Gaussian elimination with partial pivoting.
fn gram_det(v: &[Vec<f64>]) -> f64 {
    let d = v.len();
    let mut g: Vec<Vec<f64>> =
        (0..d).map(|i| (0..d).map(|j| v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum()).collect()).collect();
    let mut det = 1.0;
    for c in 0..d {
        let p = (c..d).max_by(|&a, &b| g[a][c].abs().total_cmp(&g[b][c].abs())).expect("nonempty");
        if p != c {
            g.swap(p, c);
            det = -det;
        }
        let pivot = g[c][c];
        if pivot == 0.0 {
            return 0.0;
        }
        det *= pivot;
        for r in c + 1..d {
            let f = g[r][c] / pivot;
            for k in c..d {
                g[r][k] -= f * g[c][k];
            }
        }
    }
    det
}

fn exterior_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_gram, mut worst_chi) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < 500 {
        let n = rng.gen_range(2..=6);
        let d = rng.gen_range(1..=n);
        let v: Vec<Vec<f64>> = (0..d).map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let g = gram_det(&v);
        if g < 1e-6 {
            continue;
        }
        let w = wedge_of_group(&v).map_err(|e| e.to_string())?;
        worst_gram = worst_gram.max((w.norm().powi(2) - g).abs() / g.max(1.0));

        let a = DiagonalElement::project((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let b = DiagonalElement::project((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let j = MultiIndex::all(n, d)[rng.gen_range(0..MultiIndex::all(n, d).len())].clone();
        let lhs = chi(&j, &a.compose(&b)).map_err(|e| e.to_string())?;
        let rhs = chi(&j, &a).map_err(|e| e.to_string())? * chi(&j, &b).map_err(|e| e.to_string())?;
        worst_chi = worst_chi.max((lhs - rhs).abs() / rhs);
        done += 1;
    }
    check(worst_gram <= 1e-9, || format!("gram error {worst_gram:e}"))?;
    check(worst_chi <= 1e-12, || format!("chi relative error {worst_chi:e}"))?;
    Ok(format!("500 inputs; max |w|^2 - Gram error {worst_gram:.1e}, max chi relative error {worst_chi:.1e}"))
}

fn standard_lattices() -> Outcome {
    for n in 2..=6 {
        let z = Lattice::standard(n).map_err(|e| e.to_string())?;
        check(is_generic_well_rounded(&z, 1e-9).map_err(|e| e.to_string())?, || format!("Z^{n} not generic"))?;
        let r = wr_transversality_rank(&z).map_err(|e| e.to_string())?;
        check(r == n - 1, || format!("Z^{n}: rank {r}"))?;
    }
    Ok("Z^2..Z^6 generic well-rounded with transversality rank n-1".into())
}

fn covers_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/covers")
}

fn load_cover(name: &str) -> Result<Cover, String> {
    let text = std::fs::read_to_string(covers_dir().join(name)).map_err(|e| e.to_string())?;
    Cover::from_json(&text).map_err(|e| e.to_string())
}

fn grid_certificates() -> Outcome {
    let mut parts = Vec::new();
    for (file, order) in [("kkm_simplex2.json", 3), ("tube_s1_t1.json", 3), ("intervals_s0_t1.json", 2)] {
        let c = load_cover(file)?;
        let d = c.domain.with_resolution(32).map_err(|e| e.to_string())?;
        let r = certify_multiplicity(&c, &d, &CertifyOptions::default()).map_err(|e| e.to_string())?;
        check(r.order == order, || format!("{file}: order {}", r.order))?;
        check(!r.violated, || format!("{file}: VIOLATED"))?;
        check(r.hyp_i_ok == Some(true) && r.hyp_ii_ok == Some(true), || format!("{file}: hypotheses fail"))?;
        parts.push(format!("{file} order {}", r.order));
    }
    let c = load_cover("kkm_product_1x1.json")?;
    let decl: Vec<Vec<Option<usize>>> = c.elements.iter().map(|e| e.misses.clone().unwrap_or_default()).collect();
    let k = kkm_check(&c, &c.domain, &decl).map_err(|e| e.to_string())?;
    check(k.holds, || "product KKM order too small".into())?;
    let c = load_cover("lebesgue_unit.json")?;
    let l = cover_lebesgue(&c, &c.domain).map_err(|e| e.to_string())?;
    check((l - 0.1).abs() <= 1.0 / 32.0, || format!("Lebesgue number {l}"))?;
    parts.push(format!("product order {}", k.order));
    parts.push(format!("Lebesgue number {l:.4}"));
    Ok(parts.join("; "))
}

fn fold_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = rng.gen_range(1..=6);
        let x: Vec<f64> = (0..s).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let base = fold_to_cfk(&x);
        check(fold_to_cfk(&base) == base, || format!("not idempotent at {x:?}"))?;
        let mut images = Vec::new();
        let mut y = x.clone();
        y[0] = -y[0];
        images.push(y);
        let mut y = x.clone();
        y[s - 1] = 2.0 - y[s - 1];
        images.push(y);
        for i in 0..s.saturating_sub(1) {
            let mut y = x.clone();
            y.swap(i, i + 1);
            images.push(y);
        }
        for y in images {
            for (a, b) in fold_to_cfk(&y).iter().zip(&base) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    check(worst <= 1e-12, || format!("generator error {worst:e}"))?;
    Ok(format!("1000 points; max generator deviation {worst:.1e}; idempotent"))
}

/// Every coefficient vector in the box bounded by `r |B^-1 e_i|`.
fn brute_force(x: &Lattice, radius: f64) -> Option<Vec<(Vec<i64>, f64)>> {
    let n = x.dim();
    let inv = x.matrix().try_inverse().expect("unimodular");
    let bounds: Vec<i64> = (0..n).map(|i| (radius * inv.column(i).norm()).floor() as i64).collect();
    if bounds.iter().map(|&b| (2 * b + 1) as f64).product::<f64>() > 2e6 {
        return None;
    }
    let mut out = Vec::new();
    let mut c = vec![0i64; n];
    fn rec(k: usize, c: &mut Vec<i64>, bounds: &[i64], x: &Lattice, out: &mut Vec<(Vec<i64>, f64)>) {
        if k == c.len() {
            let first = c.iter().find(|&&v| v != 0);
            if matches!(first, Some(v) if *v > 0) {
                let v = x.vector(c);
                out.push((c.clone(), v.iter().map(|a| a * a).sum::<f64>().sqrt()));
            }
            return;
        }
        for v in -bounds[k]..=bounds[k] {
            c[k] = v;
            rec(k + 1, c, bounds, x, out);
        }
    }
    rec(0, &mut c, &bounds, x, &mut out);
    Some(out)
}

fn brute_force_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let delta = 0.5;
    let (mut total, mut skipped) = (0, 0);
    let mut case = 0;
    while case < 50 {
        let n = rng.gen_range(2..=3);
        let x = random_lattice(&mut rng, n, 3.0);
        let shortest_row = x.basis().iter().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(f64::INFINITY, f64::min);
        let Some(all) = brute_force(&x, shortest_row * (1.0 + delta)) else {
            skipped += 1;
            continue;
        };
        let report = short_vectors(&x, delta).map_err(|e| e.to_string())?;
        let alpha = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        check((alpha - report.alpha).abs() <= 1e-12 * alpha, || format!("case {case}: alpha mismatch"))?;
        let expected: BTreeSet<Vec<i64>> = all
            .into_iter()
            .filter(|(_, norm)| *norm < (1.0 + delta) * alpha || *norm <= alpha * (1.0 + 1e-9))
            .map(|(c, _)| c)
            .collect();
        let got: BTreeSet<Vec<i64>> = report.coords.iter().cloned().collect();
        check(got == expected, || format!("case {case}: {got:?} != {expected:?}"))?;
        total += got.len();
        case += 1;
    }
    Ok(format!("50 lattices, {total} short vectors matched, {skipped} oversized boxes redrawn"))
}

fn determinism() -> Outcome {
    let run = || -> Result<(String, String, String), String> {
        let (x, s) = compact_orbit_from_quadratic(7).map_err(|e| e.to_string())?;
        let opts = SearchOptions { seed: 11, record_trace: true, ..SearchOptions::default() };
        let r = search_well_rounded(&x, &s, &opts).map_err(|e| e.to_string())?;
        let c = load_cover("tube_s1_t1.json")?;
        let cert = certify_multiplicity(&c, &c.domain, &CertifyOptions::default()).map_err(|e| e.to_string())?;
        Ok((to_json(&r).map_err(|e| e.to_string())?, r.trace_csv(12), to_json(&cert).map_err(|e| e.to_string())?))
    };
    let a = run()?;
    let b = run()?;
    check(a == b, || "reports differ between runs".into())?;
    Ok(format!("search JSON {} bytes, trace {} bytes, certificate {} bytes identical", a.0.len(), a.1.len(), a.2.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("compact orbits D = 2, 3, 7", compact_orbits),
        ("closed non-compact orbits n = 3, 4", closed_orbits),
        ("cover property and dim_delta monotonicity", cover_property),
        ("random rational flags", flags),
        ("exterior identities", exterior_identities),
        ("Z^n generic well-rounded", standard_lattices),
        ("grid certification of bundled covers", grid_certificates),
        ("fold invariance", fold_invariance),
        ("brute-force enumeration oracle", brute_force_oracle),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
