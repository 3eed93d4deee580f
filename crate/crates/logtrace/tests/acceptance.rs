//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Expected values come from small oracles written here (classical special
//! fibre data, divisor sums, brute-force lattice points), not from the
//! library's own formulas.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use logtrace::checks::oracle_degree_bound;
use logtrace::gen::{random_center, random_model, random_pushout_instance, random_rank2_cone};
use logtrace::report::points;
use logtrace::{analyze, AnalysisReport, ModelFile};
use logtrace_core::cone::dual_monoid;
use logtrace_core::fan::{is_snc, model_resolve, model_stellar_subdivide, DecoratedModel, FanPoint};
use logtrace_core::invariants::zeta_trace_crosscheck;
use logtrace_core::monoid::{cover_degree_bound, lemma33_oracle};
use logtrace_core::{Error, IntVec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed;
const RANDOM_MODELS: usize = 200;
const ORACLE_CASES: usize = 120;
const HILBERT_CONES: usize = 50;

type Check = Result<String, String>;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

fn fixture(name: &str) -> DecoratedModel {
    ModelFile::read(&fixture_path(name)).and_then(|f| f.into_model()).expect(name)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn prime_to(mut n: i64, p: i64) -> i64 {
    if p > 1 {
        while n % p == 0 {
            n /= p;
        }
    }
    n
}

/// Special fibre data `(s, χ)` of the height-one strata.
#[derive(Clone, Debug)]
struct Fibre {
    p: i64,
    strata: Vec<(i64, i64)>,
}

impl Fibre {
    fn of(points: &[FanPoint], p: u64) -> Self {
        Fibre {
            p: p as i64,
            strata: points
                .iter()
                .filter(|x| x.height == 1)
                .map(|x| (x.s.unwrap() as i64, x.chi))
                .collect(),
        }
    }

    fn volume(&self) -> i64 {
        self.strata.iter().filter(|s| s.0 == 1).map(|s| s.1).sum()
    }

    fn trace(&self, d: i64) -> i64 {
        self.strata
            .iter()
            .map(|&(s, chi)| (prime_to(s, self.p), chi))
            .filter(|&(sp, _)| d % sp == 0)
            .map(|(sp, chi)| sp * chi)
            .sum()
    }

    fn error_term(&self) -> i64 {
        self.strata
            .iter()
            .filter(|&&(s, _)| s > 1 && prime_to(s, self.p) == 1)
            .map(|s| s.1)
            .sum()
    }

    /// Exponents of `t^m - 1`.
    fn zeta(&self) -> BTreeMap<u64, i64> {
        let mut z = BTreeMap::new();
        for &(s, chi) in &self.strata {
            *z.entry(prime_to(s, self.p) as u64).or_insert(0) -= chi;
        }
        z.retain(|_, a| *a != 0);
        z
    }
}

/// `t ζ'/ζ = -sum_m m a_m sum_k t^{mk}`, so its `t^d` coefficient is
/// `-sum_{m | d} m a_m`.
fn log_derivative_coefficient(zeta: &BTreeMap<u64, i64>, d: u64) -> i64 {
    zeta.iter().filter(|(m, _)| d % **m == 0).map(|(m, a)| -(*m as i64) * a).sum()
}

fn report(model: &DecoratedModel, max_d: u64) -> Result<AnalysisReport, String> {
    analyze(model, Some(max_d)).map_err(|e| e.details())
}

/// Library report against the oracle, including the error term identity.
fn agree(r: &AnalysisReport, f: &Fibre, max_d: u64) -> Result<(), String> {
    r.check()?;
    if r.error_term != r.traces[&1] - r.volume {
        return Err("error term identity fails".into());
    }
    let want: BTreeMap<u64, i64> = (1..=max_d).map(|d| (d, f.trace(d as i64))).collect();
    if r.volume != f.volume() || r.traces != want || r.zeta_factors != f.zeta() || r.error_term != f.error_term() {
        return Err(format!("report {:?} disagrees with oracle {f:?}", (r.volume, &r.traces, &r.zeta_factors, r.error_term)));
    }
    for d in 1..=max_d {
        if log_derivative_coefficient(&r.zeta_factors, d) != r.traces[&d] {
            return Err(format!("divisor sum of zeta exponents differs from trace({d})"));
        }
    }
    Ok(())
}

struct Run {
    reports: usize,
    crosschecks: usize,
}

impl Run {
    /// Report, oracle comparison and series crosscheck for one model.
    fn full(&mut self, model: &DecoratedModel) -> Result<(AnalysisReport, Vec<FanPoint>), String> {
        let r = report(model, 12)?;
        let pts = points(model).map_err(|e| e.details())?;
        agree(&r, &Fibre::of(&pts, model.residue_char), 12)?;
        self.reports += 1;
        match zeta_trace_crosscheck(&pts, 20) {
            Ok(true) => self.crosschecks += 1,
            Ok(false) => return Err("zeta/trace crosscheck returned false".into()),
            Err(e) => return Err(format!("zeta/trace crosscheck: {e}")),
        }
        Ok((r, pts))
    }
}

fn blocks(r: &AnalysisReport) -> (i64, BTreeMap<u64, i64>, BTreeMap<u64, i64>, i64) {
    (r.volume, r.traces.clone(), r.zeta_factors.clone(), r.error_term)
}

/// `k × k` minors of a `k × n` matrix, `k <= 3`.
fn minors(rows: &[IntVec]) -> Vec<i64> {
    let n = rows[0].len();
    let k = rows.len();
    let det = |cols: &[usize]| -> i64 {
        let m = |i: usize, j: usize| rows[i][cols[j]];
        match k {
            1 => m(0, 0),
            2 => m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0),
            _ => {
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
        }
    };
    let mut out = Vec::new();
    let mut cols: Vec<usize> = (0..k).collect();
    loop {
        out.push(det(&cols));
        let Some(i) = (0..k).rev().find(|&i| cols[i] < n - k + i) else { break };
        cols[i] += 1;
        for j in i + 1..k {
            cols[j] = cols[j - 1] + 1;
        }
    }
    out
}

/// Every maximal cone is generated by part of a lattice basis.
fn unimodular(model: &DecoratedModel) -> bool {
    model.charts.iter().all(|c| {
        c.complex()
            .maximal_cones()
            .iter()
            .all(|cone| cone.rays().len() <= 3 && minors(cone.rays()).into_iter().fold(0, gcd) == 1)
    })
}

fn criterion_1() -> Check {
    let m = fixture("i0_star");
    let r = report(&m, 12)?;
    // Kodaira I0*: central component of multiplicity 2 and four reduced
    // ones, χ = 2 - 4 on the open central part and 2 - 1 on the others
    let classical = Fibre {
        p: 5,
        strata: vec![(2, -2), (1, 1), (1, 1), (1, 1), (1, 1)],
    };
    agree(&r, &classical, 12)?;
    let want = (4, 4, 0, BTreeMap::from([(1, -4), (2, 2)]), 0);
    let got = (r.volume, r.traces[&1], r.traces[&2], r.zeta_factors.clone(), r.error_term);
    if got != want {
        return Err(format!("got {got:?}"));
    }
    Ok(format!("volume {}, trace(1) {}, trace(2) {}, zeta {}, error term {}", got.0, got.1, got.2, r.zeta, got.4))
}

fn criterion_2() -> Check {
    let r = report(&fixture("i3"), 12)?;
    // a triangle of rational curves, each open part a torus
    agree(&r, &Fibre { p: 7, strata: vec![(1, 0); 3] }, 12)?;
    if r.volume != 0 || r.traces.values().any(|&t| t != 0) || !r.zeta_factors.is_empty() {
        return Err(format!("volume {}, traces {:?}, zeta {}", r.volume, r.traces, r.zeta));
    }
    Ok("volume 0, trace(d) = 0 for d <= 12, zeta 1".into())
}

struct RandomSummary {
    subdivisions: usize,
    skipped_centers: usize,
    max_resolution_steps: usize,
    cover_checks: usize,
    resolved: usize,
}

/// Criteria 3, 4, 6, 7 and 9 over the same random models.
fn random_models(run: &mut Run) -> Result<RandomSummary, (usize, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut s = RandomSummary {
        subdivisions: 0,
        skipped_centers: 0,
        max_resolution_steps: 0,
        cover_checks: 0,
        resolved: 0,
    };
    for i in 0..RANDOM_MODELS {
        let model = random_model(&mut rng);
        let fail = |e: String| (i, e);
        let (base, pts) = run.full(&model).map_err(fail)?;
        let p = model.residue_char;

        // cover degree bound against d and the s of the rays of each face
        for x in &pts {
            let e = model.charts[x.face.chart].e();
            let g = x.face.rays.iter().map(|r| r.iter().zip(e).map(|(a, b)| a * b).sum()).fold(0, gcd) as u64;
            for d in (1..=8u64).filter(|&d| p == 0 || gcd(d as i64, p as i64) == 1) {
                let b = cover_degree_bound(&x.stalk, &x.e_x, d, p).map_err(|e| fail(e.to_string()))?;
                if d % b != 0 || g % b != 0 {
                    return Err(fail(format!("{}: bound {b} vs d = {d}, gcd s = {g}", x.id)));
                }
                s.cover_checks += 1;
            }
        }

        // up to three legal subdivisions
        let mut m = model.clone();
        let mut applied = 0;
        for _ in 0..12 {
            if applied == 3 {
                break;
            }
            let Some((face, v)) = random_center(&mut rng, &m) else { break };
            let next = match model_stellar_subdivide(&m, &face, &v) {
                Ok(next) => next,
                Err(Error::BoundExceeded { .. }) => {
                    s.skipped_centers += 1;
                    continue;
                }
                Err(e) => return Err(fail(format!("subdivide at {v:?}: {e}"))),
            };
            match run.full(&next) {
                Ok((r, _)) => {
                    if blocks(&r) != blocks(&base) {
                        return Err(fail(format!("subdivision at {v:?} changed {:?} to {:?}", blocks(&base), blocks(&r))));
                    }
                }
                Err(e) if e.contains("bound exceeded") => {
                    s.skipped_centers += 1;
                    continue;
                }
                Err(e) => return Err(fail(e)),
            }
            m = next;
            applied += 1;
        }
        s.subdivisions += applied;

        // resolution of the original and of the subdivided model
        for start in [&model, &m] {
            let (resolved, trail) = model_resolve(start).map_err(|e| fail(format!("resolve: {e}")))?;
            s.max_resolution_steps = s.max_resolution_steps.max(trail.len());
            let (r, rpts) = run.full(&resolved).map_err(fail)?;
            if !is_snc(&rpts).snc || !unimodular(&resolved) {
                return Err(fail("resolution output is not SNC".into()));
            }
            if blocks(&r) != blocks(&base) {
                return Err(fail(format!("resolution changed {:?} to {:?}", blocks(&base), blocks(&r))));
            }
            s.resolved += 1;
        }
    }
    Ok(s)
}

fn criterion_4_fixture() -> Result<(), String> {
    let m = fixture("a1");
    let (resolved, trail) = model_resolve(&m).map_err(|e| e.to_string())?;
    let centers: Vec<&IntVec> = trail.iter().map(|(_, v)| v).collect();
    if centers != [&vec![1, 1]] {
        return Err(format!("A1 centers {centers:?}"));
    }
    let pts = points(&resolved).map_err(|e| e.details())?;
    let mut s: Vec<u64> = pts.iter().filter_map(|x| x.s).collect();
    s.sort_unstable();
    if s != [1, 2, 3] {
        return Err(format!("A1 multiplicities {s:?}"));
    }
    // e = (1, 1) paired with (1, 0), (1, 1), (1, 2)
    if !is_snc(&pts).snc {
        return Err("A1 resolution not SNC".into());
    }
    Ok(())
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut by_rank = BTreeMap::new();
    for i in 0..ORACLE_CASES {
        let inst = random_pushout_instance(&mut rng);
        let b = oracle_degree_bound(&inst)?;
        match lemma33_oracle(&inst.monoid, &inst.e, inst.d, b) {
            Ok(true) => *by_rank.entry(inst.monoid.ambient_rank()).or_insert(0) += 1,
            Ok(false) => return Err(format!("case {i}: false for {inst:?}")),
            Err(e) => return Err(format!("case {i}: {e}")),
        }
    }
    Ok(format!("{ORACLE_CASES} instances true (by rank {by_rank:?})"))
}

fn criterion_8() -> Check {
    let out = Command::new(env!("CARGO_BIN_EXE_logtrace"))
        .arg("analyze")
        .arg(fixture_path("violating"))
        .output()
        .map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&out.stderr);
    if out.status.code() != Some(2) || !stderr.contains("vanishing Euler characteristic") {
        return Err(format!("exit {:?}, stderr {stderr:?}", out.status.code()));
    }
    Ok("exit 2, message cites the vanishing of chi at p | s".into())
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut compared = 0;
    for i in 0..HILBERT_CONES {
        let cone = random_rank2_cone(&mut rng, 3);
        let span = cone.span_lattice().map_err(|e| e.to_string())?;
        let rays: Vec<IntVec> = cone.rays().iter().map(|r| span.coordinates(r).unwrap().unwrap()).collect();
        let monoid = dual_monoid(&cone).map_err(|e| e.to_string())?;
        // u is fixed by (a, b) = (<u, r1>, <u, r2>); grade by a + b
        let det = rays[0][0] * rays[1][1] - rays[0][1] * rays[1][0];
        let mut points = Vec::new();
        for a in 0..=6i64 {
            for b in 0..=6 - a {
                let (x, y) = (a * rays[1][1] - b * rays[0][1], b * rays[0][0] - a * rays[1][0]);
                if (a, b) != (0, 0) && x % det == 0 && y % det == 0 {
                    points.push((a + b, vec![x / det, y / det]));
                }
            }
        }
        let set: std::collections::BTreeSet<&IntVec> = points.iter().map(|p| &p.1).collect();
        let mut irreducible: Vec<IntVec> = points
            .iter()
            .filter(|(_, u)| {
                !points.iter().any(|(_, v)| {
                    let w: IntVec = u.iter().zip(v).map(|(p, q)| p - q).collect();
                    w != *u && w.iter().any(|&c| c != 0) && set.contains(&w)
                })
            })
            .map(|p| p.1.clone())
            .collect();
        irreducible.sort();
        let degree = |u: &IntVec| rays.iter().map(|r| r[0] * u[0] + r[1] * u[1]).sum::<i64>();
        let mut basis: Vec<IntVec> = monoid.minimal_generators().iter().filter(|h| degree(h) <= 6).cloned().collect();
        basis.sort();
        if basis != irreducible {
            return Err(format!("cone {i} {:?}: basis {basis:?}, brute force {irreducible:?}", cone.rays()));
        }
        for (_, u) in &points {
            if !monoid.contains(u).map_err(|e| e.to_string())? {
                return Err(format!("cone {i}: dual point {u:?} not generated"));
            }
        }
        compared += basis.len();
    }
    Ok(format!("{HILBERT_CONES} cones, {compared} basis elements of degree <= 6 matched"))
}

fn main() {
    let start = Instant::now();
    let mut lines: Vec<(u8, String, Check)> = Vec::new();
    lines.push((1, "I0* fixture".into(), criterion_1()));
    lines.push((2, "I3 fixture".into(), criterion_2()));

    let mut run = Run {
        reports: 0,
        crosschecks: 0,
    };
    let fixtures_ok: Result<(), String> = ["i0_star", "i3", "a1", "good_reduction", "saito_chain"]
        .iter()
        .try_for_each(|n| run.full(&fixture(n)).map(|_| ()).map_err(|e| format!("{n}: {e}")));
    let random = random_models(&mut run);
    let random_err = |k: &str| match &random {
        Ok(_) => None,
        Err((i, e)) => Some(Err(format!("{k}: random model {i}: {e}"))),
    };
    lines.push((
        3,
        "subdivision invariance".into(),
        random_err("subdivision").unwrap_or_else(|| {
            let s = random.as_ref().unwrap();
            Ok(format!(
                "{RANDOM_MODELS} models, {} legal subdivisions ({} out-of-bound centers redrawn)",
                s.subdivisions, s.skipped_centers
            ))
        }),
    ));
    lines.push((
        4,
        "resolution".into(),
        random_err("resolution").unwrap_or_else(|| {
            let s = random.as_ref().unwrap();
            criterion_4_fixture()
                .map(|()| format!("{} resolutions SNC and invariant (at most {} steps); A1 inserts (1,1), s = 1,2,3", s.resolved, s.max_resolution_steps))
        }),
    ));
    lines.push((5, "pushout saturation oracle".into(), criterion_5()));
    lines.push((
        6,
        "zeta/trace identity to order 20".into(),
        fixtures_ok
            .clone()
            .and_then(|()| random_err("crosscheck").unwrap_or(Ok(String::new())))
            .map(|_| format!("{} models (fixtures, random, subdivided, resolved)", run.crosschecks)),
    ));
    lines.push((
        7,
        "error term identity".into(),
        fixtures_ok
            .and_then(|()| random_err("error term").unwrap_or(Ok(String::new())))
            .map(|_| format!("asserted on {} reports", run.reports)),
    ));
    lines.push((8, "log smooth consistency gate".into(), criterion_8()));
    lines.push((
        9,
        "cover degree bound".into(),
        random_err("cover bound").unwrap_or_else(|| {
            Ok(format!("{} (point, d) pairs", random.as_ref().unwrap().cover_checks))
        }),
    ));
    lines.push((10, "Hilbert basis oracle".into(), criterion_10()));

    let mut failed = 0;
    for (n, name, r) in &lines {
        match r {
            Ok(detail) => println!("[PASS] criterion {n:>2}: {name}: {detail}"),
            Err(e) => {
                failed += 1;
                println!("[FAIL] criterion {n:>2}: {name}: {e}");
            }
        }
    }
    println!("acceptance: {} of {} criteria pass in {:.1?}", lines.len() - failed, lines.len(), start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
