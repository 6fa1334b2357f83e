//! Subcommand implementations. Each returns the text for stdout plus the
//! files to place in the output directory.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use wellround::covering::{
    certify_multiplicity, kkm_check, scan, unfold_cover, CertificateReport, CertifyOptions, Cover, KkmReport,
    UnfoldedCover,
};
use wellround::exterior::{
    character_rank, flag_codim_check, nested_multiindices, stabilizer_subspace, Flag, MultiIndex, WedgeClass,
};
use wellround::lattice::{
    alpha, cover_membership, is_generic_well_rounded, is_well_rounded, short_vectors_with, wr_transversality_rank,
    EnumOptions, ShortVectorReport,
};
use wellround::linalg::{self, exact};
use wellround::orbit::{
    compact_orbit_from_quadratic, fundamental_unit, search_well_rounded, spread, stabilizer_unit, ClosedOrbitStructure,
    OrbitSpec, QuadraticUnit, SearchOptions, SearchResult,
};
use wellround::report::{format_sig, to_json, SIG_DIGITS};
use wellround::{DiagonalElement, Error, Lattice};

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    SearchBudget,
    Violated,
}

#[derive(Debug)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(String, String)>,
    pub status: Status,
}

impl Output {
    /// `name.json` always, `name.csv` when a table exists; stdout follows the
    /// configured format.
    fn new(cfg: &RunConfig, name: &str, json: String, csv: Option<String>) -> Self {
        let stdout = match (&cfg.format, &csv) {
            (Format::Csv, Some(c)) => c.clone(),
            _ => json.clone(),
        };
        let mut files = vec![(format!("{name}.json"), json)];
        if let Some(c) = csv {
            files.push((format!("{name}.csv"), c));
        }
        Output { stdout, files, status: Status::Ok }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_lattice(path: &Path) -> Result<Lattice> {
    Ok(Lattice::from_json(&read(path)?)?)
}

fn read_cover(path: &Path) -> Result<Cover> {
    Ok(Cover::from_json(&read(path)?)?)
}

fn num(v: f64) -> String {
    format_sig(v, SIG_DIGITS)
}

fn csv_table(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn enum_options(cfg: &RunConfig) -> EnumOptions {
    EnumOptions { rank_tol: cfg.tolerances.rank_tol, ..EnumOptions::default() }
}

pub fn svp(path: &Path, delta_max: f64, cfg: &RunConfig) -> Result<Output> {
    let x = read_lattice(path)?;
    let r = short_vectors_with(&x, delta_max, enum_options(cfg))?;
    Ok(Output::new(cfg, "svp", to_json(&r)?, Some(svp_csv(&r, x.dim()))))
}

fn svp_csv(r: &ShortVectorReport, n: usize) -> String {
    let mut header: Vec<String> = (1..=n).map(|i| format!("c_{i}")).collect();
    header.extend((1..=n).map(|i| format!("v_{i}")));
    header.extend(["norm".into(), "excess".into()]);
    let rows = r.coords.iter().zip(&r.vectors).map(|(c, v)| {
        let norm = linalg::norm(v);
        let mut row: Vec<String> = c.iter().map(i64::to_string).collect();
        row.extend(v.iter().map(|x| num(*x)));
        row.push(num(norm));
        row.push(num(norm / r.alpha - 1.0));
        row
    });
    csv_table(header, rows)
}

#[derive(Serialize)]
struct WrReport {
    dim: usize,
    alpha: f64,
    spread: f64,
    well_rounded: bool,
    generic: Option<bool>,
    transversality_rank: Option<usize>,
}

pub fn wr_check(path: &Path, cfg: &RunConfig) -> Result<Output> {
    let x = read_lattice(path)?;
    let tol = cfg.tolerances.geom_tol;
    let well_rounded = is_well_rounded(&x, tol)?;
    let generic = if well_rounded { Some(is_generic_well_rounded(&x, tol)?) } else { None };
    let transversality_rank = if generic == Some(true) { Some(wr_transversality_rank(&x)?) } else { None };
    let r = WrReport { dim: x.dim(), alpha: alpha(&x)?, spread: spread(&x)?, well_rounded, generic, transversality_rank };
    Ok(Output::new(cfg, "wr_check", to_json(&r)?, None))
}

#[derive(Serialize)]
struct DimRow {
    delta: f64,
    dim: usize,
}

pub fn dim_delta(path: &Path, deltas: &[f64], cfg: &RunConfig) -> Result<Output> {
    let x = read_lattice(path)?;
    let top = deltas.iter().copied().fold(0.0, f64::max);
    let r = short_vectors_with(&x, top, enum_options(cfg))?;
    let rows: Vec<DimRow> = deltas.iter().map(|&delta| DimRow { delta, dim: r.dim_at(delta) }).collect();
    let csv = csv_table(vec!["delta".into(), "dim".into()], rows.iter().map(|r| vec![num(r.delta), r.dim.to_string()]));
    Ok(Output::new(cfg, "dim_delta", to_json(&rows)?, Some(csv)))
}

#[derive(Serialize)]
struct MembershipReport {
    eps: f64,
    a: Vec<f64>,
    first: Option<usize>,
    all: Vec<usize>,
}

pub fn membership(path: &Path, a: &[f64], eps: f64, cfg: &RunConfig) -> Result<Output> {
    let x = read_lattice(path)?;
    let el = DiagonalElement::new(a.to_vec())?;
    let m = cover_membership(&x, &el, eps)?;
    let r = MembershipReport { eps, a: a.to_vec(), first: m.first, all: m.all };
    Ok(Output::new(cfg, "cover_membership", to_json(&r)?, None))
}

#[derive(Serialize)]
struct SearchReport<'a> {
    status: &'static str,
    seed: u64,
    budget: usize,
    tolerance: f64,
    #[serde(flatten)]
    result: &'a SearchResult,
}

pub fn orbit_search(path: &Path, cfg: &RunConfig) -> Result<Output> {
    let spec = OrbitSpec::from_json(&read(path)?)?;
    let (x, structure) = spec.build()?;
    let opts = SearchOptions {
        budget: cfg.budget,
        seed: cfg.seed,
        tolerance: cfg.tolerances.geom_tol,
        eta_margin: cfg.tolerances.eta_margin,
        record_trace: true,
    };
    let (result, status) = match search_well_rounded(&x, &structure, &opts) {
        Ok(r) => (r, Status::Ok),
        Err(Error::BudgetExhausted(best)) => (*best, Status::SearchBudget),
        Err(e) => return Err(e.into()),
    };
    let report = SearchReport {
        status: if status == Status::Ok { "converged" } else { "budget_exhausted" },
        seed: cfg.seed,
        budget: cfg.budget,
        tolerance: opts.tolerance,
        result: &result,
    };
    let json = to_json(&report)?;
    let trace = result.trace_csv(SIG_DIGITS);
    let stdout = if cfg.format == Format::Csv { trace.clone() } else { json.clone() };
    Ok(Output { stdout, files: vec![("search.json".into(), json), ("trace.csv".into(), trace)], status })
}

#[derive(Serialize)]
struct UnitReport {
    /// Decimal strings; the coordinates can exceed 64 bits.
    x: String,
    y: String,
    norm: i8,
    log: f64,
}

impl UnitReport {
    fn new(u: QuadraticUnit, d: i64) -> Self {
        UnitReport { x: u.x.to_string(), y: u.y.to_string(), norm: u.norm, log: u.log(d) }
    }
}

#[derive(Serialize)]
struct CompactReport {
    #[serde(rename = "D")]
    d: i64,
    fundamental_unit: UnitReport,
    stabilizer_unit: UnitReport,
    lattice: Lattice,
    structure: ClosedOrbitStructure,
}

pub fn orbit_compact(d: i64, cfg: &RunConfig) -> Result<Output> {
    let (lattice, structure) = compact_orbit_from_quadratic(d)?;
    let r = CompactReport {
        d,
        fundamental_unit: UnitReport::new(fundamental_unit(d)?, d),
        stabilizer_unit: UnitReport::new(stabilizer_unit(d)?, d),
        lattice,
        structure,
    };
    Ok(Output::new(cfg, "orbit_compact", to_json(&r)?, None))
}

/// Either a full-rank `matrix` whose first `d` rows span `L_d` (for each `d`
/// in `dims`, default `1..n-1`), or explicit `subspaces`. Entries may be
/// numbers or strings like `"3/4"`; strings or `"exact": true` switch to
/// exact rational arithmetic.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlagFile {
    n: usize,
    #[serde(default)]
    exact: bool,
    matrix: Option<Vec<Vec<Value>>>,
    dims: Option<Vec<usize>>,
    subspaces: Option<Vec<Vec<Vec<Value>>>>,
}

fn entry_rational(v: &Value) -> Result<exact::Rational> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => bail!("flag entries must be numbers or strings"),
    };
    exact::parse(&text).ok_or_else(|| anyhow!("cannot read `{text}` as a rational"))
}

fn entry_float(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| anyhow!("flag entry {v} is not a number"))
}

fn read_flag(path: &Path) -> Result<Flag> {
    let f: FlagFile = serde_json::from_str(&read(path)?).map_err(Error::from)?;
    let n = f.n;
    let subspaces: Vec<Vec<Vec<Value>>> = match (f.matrix, f.subspaces) {
        (Some(m), None) => {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                bail!("matrix must be {n} x {n}");
            }
            let dims = f.dims.unwrap_or_else(|| (1..n).collect());
            dims.iter().map(|&d| m[..d.min(n)].to_vec()).collect()
        }
        (None, Some(s)) => s,
        _ => bail!("give exactly one of `matrix` and `subspaces`"),
    };
    let exact_mode = f.exact || subspaces.iter().flatten().flatten().any(Value::is_string);
    let flag = if exact_mode {
        let q = subspaces
            .iter()
            .map(|b| b.iter().map(|r| r.iter().map(entry_rational).collect()).collect())
            .collect::<Result<Vec<Vec<Vec<_>>>>>()?;
        Flag::rational(n, q)?
    } else {
        let b = subspaces
            .iter()
            .map(|b| b.iter().map(|r| r.iter().map(entry_float).collect()).collect())
            .collect::<Result<Vec<Vec<Vec<_>>>>>()?;
        Flag::new(n, b)?
    };
    Ok(flag)
}

fn full_matrix_rank(path: &Path) -> Result<Option<(usize, usize)>> {
    let f: FlagFile = serde_json::from_str(&read(path)?).map_err(Error::from)?;
    let Some(m) = f.matrix else { return Ok(None) };
    let exact_mode = f.exact || m.iter().flatten().any(Value::is_string);
    let rank = if exact_mode {
        let q = m.iter().map(|r| r.iter().map(entry_rational).collect()).collect::<Result<Vec<Vec<_>>>>()?;
        exact::rank(&q)
    } else {
        let rows = m.iter().map(|r| r.iter().map(entry_float).collect()).collect::<Result<Vec<Vec<_>>>>()?;
        linalg::rank_of_rows(&rows, f.n)
    };
    Ok(Some((rank, f.n)))
}

#[derive(Serialize)]
struct FlagReport {
    n: usize,
    dims: Vec<usize>,
    exact: bool,
    multiindices: Vec<Vec<usize>>,
    codim: usize,
    k: usize,
    satisfies: bool,
}

pub fn flag(path: &Path, cfg: &RunConfig) -> Result<Output> {
    if let Some((rank, n)) = full_matrix_rank(path)? {
        if rank != n {
            return Err(Error::RankDeficient { rank, expected: n }.into());
        }
    }
    let flag = read_flag(path)?;
    let chain = nested_multiindices(&flag)?;
    let c = flag_codim_check(&flag)?;
    let r = FlagReport {
        n: flag.n(),
        dims: flag.dims(),
        exact: flag.is_rational(),
        multiindices: chain.iter().map(|j| j.indices().to_vec()).collect(),
        codim: c.codim,
        k: c.k,
        satisfies: c.satisfies,
    };
    Ok(Output::new(cfg, "flag", to_json(&r)?, None))
}

#[derive(Serialize)]
struct StabReport {
    n: usize,
    supports: Vec<Vec<usize>>,
    character_rank: usize,
    dimension: usize,
    basis: Vec<Vec<f64>>,
}

pub fn stab(n: Option<usize>, supports: &[String], wedge: Option<&Path>, cfg: &RunConfig) -> Result<Output> {
    let (n, supports) = match (wedge, n) {
        (Some(p), _) => {
            let w: WedgeClass = serde_json::from_str(&read(p)?).map_err(Error::from)?;
            (w.n(), w.support())
        }
        (None, Some(n)) => {
            let parsed = supports
                .iter()
                .map(|s| {
                    let idx = s
                        .split(',')
                        .map(|t| t.trim().parse::<usize>().map_err(|e| anyhow!("bad index `{t}`: {e}")))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(MultiIndex::new(idx, n)?)
                })
                .collect::<Result<Vec<_>>>()?;
            (n, parsed)
        }
        (None, None) => bail!("give --n with --support, or --wedge"),
    };
    let st = stabilizer_subspace(n, &supports)?;
    let r = StabReport {
        n,
        supports: supports.iter().map(|j| j.indices().to_vec()).collect(),
        character_rank: character_rank(n, &supports)?,
        dimension: st.dimension,
        basis: st.basis,
    };
    Ok(Output::new(cfg, "stab", to_json(&r)?, None))
}

#[derive(Serialize)]
#[serde(untagged)]
enum Certificate {
    Single(CertificateReport),
    Product(KkmReport),
}

pub fn cover_certify(
    path: &Path,
    resolution: Option<usize>,
    affine_radius: Option<f64>,
    skip_hypotheses: bool,
    cfg: &RunConfig,
) -> Result<Output> {
    let c = read_cover(path)?;
    let d = match resolution {
        Some(r) => c.domain.with_resolution(r)?,
        None => c.domain.clone(),
    };
    let report = if d.factors().len() == 1 {
        let opts = CertifyOptions { check_hypotheses: !skip_hypotheses, affine_radius };
        Certificate::Single(certify_multiplicity(&c, &d, &opts)?)
    } else {
        let decl = c
            .elements
            .iter()
            .map(|e| e.misses.clone().ok_or_else(|| anyhow!("element `{}` has no `misses` declaration", e.label)))
            .collect::<Result<Vec<_>>>()?;
        Certificate::Product(kkm_check(&c, &d, &decl)?)
    };
    let violated = match &report {
        Certificate::Single(r) => r.violated,
        Certificate::Product(r) => !r.holds,
    };
    let json = to_json(&report)?;
    let csv = scan(&c, &d)?.multiplicity_csv();
    let stdout = if cfg.format == Format::Csv { csv.clone() } else { json.clone() };
    Ok(Output {
        stdout,
        files: vec![("certificate.json".into(), json), ("multiplicity.csv".into(), csv)],
        status: if violated { Status::Violated } else { Status::Ok },
    })
}

fn unfold_csv(u: &UnfoldedCover) -> String {
    let dim = u.points.first().map_or(0, Vec::len);
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x_{i}")).collect();
    header.extend(["multiplicity".into(), "elements".into()]);
    let rows = u.points.iter().zip(&u.members).map(|(p, m)| {
        let mut row: Vec<String> = p.iter().map(|v| num(*v)).collect();
        row.push(m.len().to_string());
        row.push(m.iter().map(|&e| u.labels[e].as_str()).collect::<Vec<_>>().join(";"));
        row
    });
    csv_table(header, rows)
}

pub fn cover_unfold(path: &Path, window: f64, resolution: Option<usize>, cfg: &RunConfig) -> Result<Output> {
    let mut c = read_cover(path)?;
    if let Some(r) = resolution {
        c.domain = c.domain.with_resolution(r)?;
    }
    let u = unfold_cover(&c, window)?;
    Ok(Output::new(cfg, "unfold", to_json(&u)?, Some(unfold_csv(&u))))
}
