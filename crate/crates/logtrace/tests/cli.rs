use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use logtrace::AnalysisReport;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("logtrace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn logtrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logtrace"))
        .args(args)
        .env_remove("LOGTRACE_RANK_BOUND")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes() {
    let malformed = scratch("malformed.json");
    std::fs::write(&malformed, "{").unwrap();
    assert_eq!(code(&logtrace(&["analyze", path(&malformed)])), 3);

    let a1 = std::fs::read_to_string(fixture("a1")).unwrap();
    let invalid = scratch("invalid.json");
    std::fs::write(&invalid, a1.replace("\"e\": [1, 1]", "\"e\": [-1, 1]")).unwrap();
    assert_eq!(code(&logtrace(&["validate", path(&invalid)])), 1);
    assert_eq!(code(&logtrace(&["analyze", path(&invalid)])), 1);

    let violating = logtrace(&["analyze", path(&fixture("violating"))]);
    assert_eq!(code(&violating), 2);
    assert!(String::from_utf8_lossy(&violating.stderr).contains("vanishing Euler characteristic"));

    assert_eq!(code(&logtrace(&["frobnicate"])), 3);
    assert_eq!(code(&logtrace(&["analyze"])), 3);
    assert_eq!(code(&logtrace(&["analyze", "/nonexistent/model.json"])), 3);
    assert_eq!(code(&logtrace(&["--help"])), 0);
    for name in ["i0_star", "i3", "a1", "good_reduction", "saito_chain"] {
        assert_eq!(code(&logtrace(&["validate", path(&fixture(name))])), 0, "{name}");
    }
}

#[test]
fn json_reports_round_trip() {
    for name in ["i0_star", "i3", "a1", "good_reduction", "saito_chain"] {
        let o = logtrace(&["analyze", "--format", "json", path(&fixture(name))]);
        assert_eq!(code(&o), 0, "{name}");
        let text = stdout(&o);
        let report = AnalysisReport::parse(&text).unwrap();
        assert_eq!(report.to_json().unwrap(), text, "{name}");
    }
}

fn report(model: &Path) -> AnalysisReport {
    let o = logtrace(&["analyze", "--format", "json", "--max-d", "12", path(model)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    AnalysisReport::parse(&stdout(&o)).unwrap()
}

#[test]
fn resolve_keeps_invariants() {
    for name in ["i0_star", "i3", "a1", "saito_chain"] {
        let out = scratch(&format!("{name}_snc.json"));
        let o = logtrace(&["resolve", path(&fixture(name)), "--out", path(&out)]);
        assert_eq!(code(&o), 0, "{name}");
        let before = report(&fixture(name));
        let after = report(&out);
        assert!(after.snc, "{name}");
        assert_eq!(before.invariant_blocks(), after.invariant_blocks(), "{name}");
    }
}

#[test]
fn subdivide_a1() {
    let a1 = fixture("a1");
    let out = scratch("a1_sub.json");
    let o = logtrace(&["subdivide", path(&a1), "--chart", "a", "--point", "0,1", "--vector", "1,1", "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&a1).invariant_blocks(), report(&out).invariant_blocks());

    // stdout carries the model when no --out is given
    let o = logtrace(&["subdivide", path(&a1), "--chart", "a", "--vector", "1,1"]);
    assert_eq!(code(&o), 0);
    logtrace::ModelFile::parse(&stdout(&o)).unwrap();

    let wrong = logtrace(&["subdivide", path(&a1), "--chart", "a", "--point", "0", "--vector", "1,1"]);
    assert_eq!(code(&wrong), 1);
    let outside = logtrace(&["subdivide", path(&a1), "--chart", "a", "--vector", "-1,1"]);
    assert_eq!(code(&outside), 1);
    let nochart = logtrace(&["subdivide", path(&a1), "--chart", "zz", "--vector", "1,1"]);
    assert_ne!(code(&nochart), 0);
}

#[test]
fn oracle_is_reproducible() {
    let a = logtrace(&["oracle", "--seed", "7", "--cases", "10", "--format", "json"]);
    let b = logtrace(&["oracle", "--seed", "7", "--cases", "10", "--format", "json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn selftest_passes() {
    let o = logtrace(&["selftest", "--cases", "5"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn rank_bound_is_enforced() {
    let o = Command::new(env!("CARGO_BIN_EXE_logtrace"))
        .args(["analyze", path(&fixture("i0_star"))])
        .env("LOGTRACE_RANK_BOUND", "1")
        .output()
        .unwrap();
    assert_ne!(code(&o), 0);
    assert_eq!(code(&logtrace(&["analyze", "--rank-bound", "1", path(&fixture("i0_star"))])), code(&o));
}
