use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn psum(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psum"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_spec(dir: &Path, body: &str) -> String {
    let path = dir.join("spec.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SQUARE_LINE: &str = r#"{"schema": 1, "p": 3, "n": 2, "constraints": ["x1"], "target": "x2^2", "max_level": 4}"#;

#[test]
fn count_table_for_the_square_line() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SQUARE_LINE);
    let out = psum(&["count", "--spec", &spec], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/counts.csv")).unwrap();
    let n: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(n, ["1", "1", "3", "3", "9"]);
    assert!(!csv.contains('\r'));
}

#[test]
fn sps_verify_passes_and_mutations_fail() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SQUARE_LINE);
    let ok = psum(&["sps-verify", "--spec", &spec], &dir.path().join("a"));
    assert_eq!(ok.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a/sps.json")).unwrap()).unwrap();
    assert!(report["max_discrepancy"].as_f64().unwrap() < 1e-9);
    for mutation in ["gauss-scale", "zeta-coefficient"] {
        let bad = psum(&["sps-verify", "--spec", &spec, "--max-level", "3", "--mutate", mutation], &dir.path().join("b"));
        assert_eq!(bad.status.code(), Some(3), "{mutation}");
    }
    let bad = psum(&["delta-check", "--instance", "parabola", "--max-level", "7", "--mutate", "delta-norm"], &dir.path().join("c"));
    assert_eq!(bad.status.code(), Some(3));
    let bad = psum(&["poincare", "--spec", &spec, "--max-level", "8", "--mutate", "zeta-coefficient"], &dir.path().join("d"));
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn schema_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = write_spec(dir.path(), r#"{"schema": 1, "p": 3, "n": 2, "constraints": ["x1^"], "target": "x2"}"#);
    let out = psum(&["count", "--spec", &malformed], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position"));

    let unknown = write_spec(dir.path(), r#"{"schema": 1, "p": 3, "n": 2, "constraints": ["x1"], "target": "x2", "smooth": 1}"#);
    assert_eq!(psum(&["count", "--spec", &unknown], &dir.path().join("out")).status.code(), Some(1));

    let composite = write_spec(dir.path(), r#"{"schema": 1, "p": 9, "n": 2, "constraints": ["x1"], "target": "x2"}"#);
    assert_eq!(psum(&["count", "--spec", &composite], &dir.path().join("out")).status.code(), Some(1));
}

#[test]
fn budget_exhaustion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = psum(&["count", "--instance", "three-var", "--max-level", "6", "--budget", "100"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for run in ["a", "b"] {
        let out = psum(&["zeta", "--instance", "cube-line", "--max-level", "5"], &dir.path().join(run));
        assert_eq!(out.status.code(), Some(0));
    }
    for file in ["zeta_trivial.csv", "zeta_chi1.csv", "zeta.json", "run.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn candidate_poles_from_resolution_data() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        r#"{"schema": 1, "p": 3, "n": 2, "constraints": ["x1"], "target": "x2^3", "resolution_data": [[3, 1]]}"#,
    );
    let out = psum(&["zeta", "--spec", &spec, "--max-level", "12"], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/zeta.json")).unwrap()).unwrap();
    assert_eq!(report["candidate_check"]["divides"], true);
}

#[test]
fn bundled_corpus_regression() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["square-line", "cube-line", "linear-line", "parabola", "p2-curve"] {
        let out = psum(&["poincare", "--instance", name, "--max-level", "10"], &dir.path().join(name));
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = psum(&["smooth", "--instance", "bad-line", "--max-level", "4"], &dir.path().join("bad"));
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("bad/smooth.json")).unwrap()).unwrap();
    assert_eq!(report["level"], 2);
}
