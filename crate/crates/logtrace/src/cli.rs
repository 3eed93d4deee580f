//! Argument parsing and command execution.
//!
//! Exit codes: 0 success, 1 validation failure, 2 consistency violation,
//! 3 parse or usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use logtrace_core::fan::{log_smooth_consistency, model_resolve, model_stellar_subdivide, DecoratedModel};
use logtrace_core::Bounds;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::checks;
use crate::gen::{random_model, random_pushout_instance};
use crate::model::{face_by_indices, parse_indices, parse_vector, ModelError, ModelFile};
use crate::report::{analyze, points, AnalysisError};

pub const RANK_BOUND_VAR: &str = "LOGTRACE_RANK_BOUND";

/// Fixtures compiled into the binary for `selftest`.
pub const FIXTURES: &[(&str, &str)] = &[
    ("i0_star", include_str!("../fixtures/i0_star.json")),
    ("i3", include_str!("../fixtures/i3.json")),
    ("a1", include_str!("../fixtures/a1.json")),
    ("good_reduction", include_str!("../fixtures/good_reduction.json")),
    ("saito_chain", include_str!("../fixtures/saito_chain.json")),
    ("violating", include_str!("../fixtures/violating.json")),
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, PartialEq, Eq, Parser)]
#[command(name = "logtrace", version, about = "Invariants of decorated monoidal fans")]
pub struct CommandPlan {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Largest cone rank to dualize or enumerate (overrides LOGTRACE_RANK_BOUND)
    #[arg(long, global = true)]
    pub rank_bound: Option<usize>,
}

#[derive(Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check a model file
    Validate { model: PathBuf },
    /// Compute volume, traces, zeta function and error term
    Analyze {
        model: PathBuf,
        /// Largest d for trace(d); defaults to the lcm of the s' values, capped at 60
        #[arg(long)]
        max_d: Option<u64>,
    },
    /// Stellar subdivision at a primitive vector
    Subdivide {
        model: PathBuf,
        #[arg(long)]
        chart: String,
        /// Ray indices of the face expected to carry the vector
        #[arg(long)]
        point: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Subdivide until every stalk is free
    Resolve {
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the pushout saturation property on random monoids
    Oracle {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
    /// Built-in fixtures and a short randomized property run
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        cases: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: u8, stderr: String) -> Self {
        Outcome {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Parses arguments without the program name.
pub fn parse_args<I, T>(argv: I) -> Result<CommandPlan, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    CommandPlan::try_parse_from(std::iter::once("logtrace".into()).chain(argv.into_iter().map(Into::into)))
}

/// Parses and executes; usage errors exit with 3 (help and version with 0).
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(plan) => execute(&plan),
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome::ok(text),
                _ => Outcome::fail(3, text),
            }
        }
    }
}

fn rank_bound(plan: &CommandPlan) -> Result<usize, String> {
    if let Some(r) = plan.rank_bound {
        return Ok(r);
    }
    match std::env::var(RANK_BOUND_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| format!("{RANK_BOUND_VAR} must be a number, got {v:?}")),
        Err(_) => Ok(Bounds::DEFAULT_RANK),
    }
}

fn load(path: &Path) -> Result<DecoratedModel, Outcome> {
    let file = ModelFile::read(path).map_err(model_failure)?;
    file.into_model().map_err(model_failure)
}

fn model_failure(e: ModelError) -> Outcome {
    let code = match e {
        ModelError::Core(_) => 1,
        _ => 3,
    };
    Outcome::fail(code, format!("error: {e}\n"))
}

fn analysis_failure(e: AnalysisError) -> Outcome {
    Outcome::fail(e.exit_code(), e.details() + "\n")
}

fn write_model(model: &DecoratedModel, out: Option<&Path>, summary: String) -> Outcome {
    let text = ModelFile::from_model(model).to_json() + "\n";
    match out {
        None => Outcome {
            code: 0,
            stdout: text,
            stderr: summary,
        },
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => Outcome::ok(summary + &format!("wrote {}\n", path.display())),
            Err(e) => Outcome::fail(3, format!("error: cannot write {}: {e}\n", path.display())),
        },
    }
}

pub fn execute(plan: &CommandPlan) -> Outcome {
    match rank_bound(plan) {
        Ok(rank) => Bounds {
            rank,
            ..Bounds::default()
        }
        .install(),
        Err(e) => return Outcome::fail(3, format!("error: {e}\n")),
    }
    match execute_inner(plan) {
        Ok(o) | Err(o) => o,
    }
}

fn execute_inner(plan: &CommandPlan) -> Result<Outcome, Outcome> {
    let json = plan.format == Format::Json;
    match &plan.command {
        Command::Validate { model } => {
            let m = load(model)?;
            let pts = points(&m).map_err(analysis_failure)?;
            let consistency = log_smooth_consistency(&m, &pts);
            if !consistency.is_ok() {
                return Err(analysis_failure(AnalysisError::Inconsistent(consistency.violations)));
            }
            Ok(Outcome::ok(if json {
                json!({"valid": true, "points": pts.len()}).to_string() + "\n"
            } else {
                format!("valid: {} points\n", pts.len())
            }))
        }
        Command::Analyze { model, max_d } => {
            let m = load(model)?;
            if *max_d == Some(0) {
                return Err(Outcome::fail(3, "error: --max-d must be positive\n".into()));
            }
            let report = analyze(&m, *max_d).map_err(analysis_failure)?;
            let rendered = if json { report.to_json() } else { report.to_text() };
            rendered.map(Outcome::ok).map_err(|e| Outcome::fail(2, format!("error: {e}\n")))
        }
        Command::Subdivide {
            model,
            chart,
            point,
            vector,
            out,
        } => {
            let m = load(model)?;
            points(&m).map_err(analysis_failure)?;
            let v = parse_vector(vector).map_err(model_failure)?;
            let c = m
                .chart_index(chart)
                .ok_or_else(|| Outcome::fail(3, format!("error: unknown chart {chart:?}\n")))?;
            let complex = m.charts[c].complex();
            if v.len() != complex.ambient_rank() {
                return Err(Outcome::fail(
                    3,
                    format!("error: --vector has {} entries, chart {chart} has rank {}\n", v.len(), complex.ambient_rank()),
                ));
            }
            let carrier = complex
                .carrier(&v)
                .map_err(|e| Outcome::fail(1, format!("error: {e}\n")))?
                .ok_or_else(|| Outcome::fail(1, format!("error: {vector} lies outside chart {chart}\n")))?;
            let face = logtrace_core::fan::FaceRef::new(c, carrier.rays().to_vec());
            if let Some(p) = point {
                let given = face_by_indices(&m, chart, &parse_indices(p).map_err(model_failure)?).map_err(model_failure)?;
                if given != face {
                    return Err(Outcome::fail(
                        1,
                        format!("error: {vector} lies in the relative interior of {:?}, not of {:?}\n", face.rays, given.rays),
                    ));
                }
            }
            let sub = model_stellar_subdivide(&m, &face, &v).map_err(|e| Outcome::fail(1, format!("error: {e}\n")))?;
            Ok(write_model(&sub, out.as_deref(), format!("subdivided chart {chart} at ({vector})\n")))
        }
        Command::Resolve { model, out } => {
            let m = load(model)?;
            points(&m).map_err(analysis_failure)?;
            let (resolved, trail) = model_resolve(&m).map_err(|e| Outcome::fail(1, format!("error: {e}\n")))?;
            let mut summary = format!("{} subdivisions\n", trail.len());
            for (face, v) in &trail {
                let _ = writeln!(summary, "  chart {} at {:?}", resolved.charts[face.chart].id(), v);
            }
            Ok(write_model(&resolved, out.as_deref(), summary))
        }
        Command::Oracle { seed, cases } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut lines = String::new();
            let mut failed = 0;
            for i in 0..*cases {
                let inst = random_pushout_instance(&mut rng);
                let verdict = checks::oracle_case(&inst);
                if verdict != Ok(true) {
                    failed += 1;
                }
                if !json {
                    let _ = writeln!(
                        lines,
                        "case {i}: generators {:?}, e = {:?}, d = {}: {}",
                        inst.monoid.minimal_generators(),
                        inst.e,
                        inst.d,
                        match &verdict {
                            Ok(v) => v.to_string(),
                            Err(e) => format!("error: {e}"),
                        }
                    );
                }
            }
            let summary = if json {
                json!({"seed": seed, "cases": cases, "failed": failed}).to_string() + "\n"
            } else {
                lines + &format!("{} of {cases} cases hold\n", cases - failed)
            };
            Ok(Outcome {
                code: if failed == 0 { 0 } else { 2 },
                stdout: summary,
                stderr: String::new(),
            })
        }
        Command::Selftest { seed, cases } => {
            let results = selftest(*seed, *cases);
            let failed = results.iter().filter(|(_, r)| r.is_err()).count();
            let stdout = if json {
                let map: serde_json::Map<String, serde_json::Value> = results
                    .iter()
                    .map(|(name, r)| (name.clone(), json!(r.as_ref().map(|_| "pass").unwrap_or_else(|e| e.as_str()))))
                    .collect();
                serde_json::Value::Object(map).to_string() + "\n"
            } else {
                let mut s = String::new();
                for (name, r) in &results {
                    match r {
                        Ok(()) => {
                            let _ = writeln!(s, "pass  {name}");
                        }
                        Err(e) => {
                            let _ = writeln!(s, "FAIL  {name}: {e}");
                        }
                    }
                }
                s
            };
            Ok(Outcome {
                code: if failed == 0 { 0 } else { 2 },
                stdout,
                stderr: String::new(),
            })
        }
    }
}

fn fixture(name: &str) -> Result<DecoratedModel, String> {
    let text = FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or("no such fixture")?;
    ModelFile::parse(text).and_then(|f| f.into_model()).map_err(|e| e.to_string())
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, expected {want:?}"))
    }
}

/// Named checks; the fixtures first, then `cases` seeded random models.
pub fn selftest(seed: u64, cases: usize) -> Vec<(String, Result<(), String>)> {
    let mut out: Vec<(String, Result<(), String>)> = Vec::new();
    let run_fixture = |name: &str, f: &dyn Fn(&checks::Invariants) -> Result<(), String>| -> Result<(), String> {
        let m = fixture(name)?;
        let (pts, inv) = checks::invariants(&m)?;
        checks::crosscheck(&pts, 20)?;
        f(&inv)
    };
    out.push((
        "fixture i0_star".into(),
        run_fixture("i0_star", &|inv| {
            expect("volume", inv.volume, 4)?;
            expect("trace(1)", inv.traces[&1], 4)?;
            expect("trace(2)", inv.traces[&2], 0)?;
            expect("zeta", inv.zeta.clone(), [(1, -4), (2, 2)].into())?;
            expect("error term", inv.error_term, 0)
        }),
    ));
    out.push((
        "fixture i3".into(),
        run_fixture("i3", &|inv| {
            expect("volume", inv.volume, 0)?;
            expect("traces", inv.traces.values().all(|&t| t == 0), true)?;
            expect("zeta", inv.zeta.is_empty(), true)
        }),
    ));
    out.push((
        "fixture a1 resolves".into(),
        (|| {
            let m = fixture("a1")?;
            let resolved = checks::resolution_invariance(&m)?;
            let (pts, _) = checks::invariants(&resolved)?;
            let mut s: Vec<u64> = pts.iter().filter_map(|x| x.s).collect();
            s.sort_unstable();
            expect("multiplicities", s, vec![1, 2, 3])
        })(),
    ));
    out.push((
        "fixture violating exits 2".into(),
        (|| {
            let m = fixture("violating")?;
            match analyze(&m, None) {
                Err(e @ AnalysisError::Inconsistent(_)) => expect("exit code", e.exit_code(), 2),
                other => Err(format!("expected a consistency failure, got {other:?}")),
            }
        })(),
    ));
    for name in ["good_reduction", "saito_chain"] {
        out.push((
            format!("fixture {name} is consistent"),
            analyze(&fixture(name).unwrap_or_else(|e| panic!("{name}: {e}")), None)
                .map(|_| ())
                .map_err(|e| e.details()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..cases {
        let m = random_model(&mut rng);
        let r = (|| {
            let (pts, _) = checks::invariants(&m)?;
            checks::crosscheck(&pts, 20)?;
            checks::cover_bounds(&pts, m.residue_char, 8)?;
            checks::subdivision_invariance(&m, &mut rng, 3)?;
            checks::resolution_invariance(&m).map(|_| ())
        })();
        out.push((format!("random model {i} (seed {seed})"), r));
    }
    for i in 0..cases {
        let inst = random_pushout_instance(&mut rng);
        let r = checks::oracle_case(&inst).and_then(|ok| if ok { Ok(()) } else { Err("oracle returned false".into()) });
        out.push((format!("pushout instance {i} (seed {seed})"), r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plans() {
        let p = parse_args(["analyze", "model.json", "--max-d", "12"]).unwrap();
        assert_eq!(
            p.command,
            Command::Analyze {
                model: "model.json".into(),
                max_d: Some(12)
            }
        );
        let p = parse_args(["resolve", "model.json", "--out", "snc.json"]).unwrap();
        assert_eq!(
            p.command,
            Command::Resolve {
                model: "model.json".into(),
                out: Some("snc.json".into())
            }
        );
        let p = parse_args(["oracle", "--seed", "7", "--cases", "100"]).unwrap();
        assert_eq!(p.command, Command::Oracle { seed: 7, cases: 100 });
        let p = parse_args(["subdivide", "m.json", "--chart", "a", "--vector", "-1,2"]).unwrap();
        assert!(matches!(p.command, Command::Subdivide { ref vector, .. } if vector == "-1,2"));
    }

    #[test]
    fn usage_errors_exit_3() {
        assert_eq!(run(["analyze", "m.json", "--bogus"]).code, 3);
        assert_eq!(run(["oracle", "--max-d", "3"]).code, 3);
        assert_eq!(run(["frobnicate"]).code, 3);
        assert_eq!(run(Vec::<String>::new()).code, 3);
        assert_eq!(run(["--help"]).code, 0);
    }

    #[test]
    fn fixtures_parse() {
        for (name, _) in FIXTURES {
            fixture(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
