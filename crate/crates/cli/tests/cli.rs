use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opmeasure::json::{from_json, read_matrix, to_json};
use opmeasure::measurable::ComplexMeasure;
use opmeasure::normed::BoundPair;
use opmeasure::operator_measure::{SeriesMeasure, SpectralMeasure};
use opmeasure::quantum::DensityOperator;
use opmeasure::verify::VerificationReport;
use tempfile::TempDir;

fn opmeasure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opmeasure")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, content: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn spectral_of_diagonal_has_two_atoms_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "t.json", "[[1,0],[0,2]]");
    let text = stdout(&opmeasure(&["spectral", "--input", p(&input)]));
    let e: SpectralMeasure = from_json(&text).unwrap();
    assert_eq!(e.eigenvalues().len(), 2);
    assert!(close(e.projections()[0][(0, 0)].re, 1.0));
    assert!(close(e.projections()[1][(1, 1)].re, 1.0));
    assert_eq!(to_json(&e).trim(), text.trim());
}

#[test]
fn spectral_of_identity_has_one_atom() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "i.json", "[[1,0,0],[0,1,0],[0,0,1]]");
    let e: SpectralMeasure = from_json(&stdout(&opmeasure(&["spectral", "--input", p(&input)]))).unwrap();
    assert_eq!(e.eigenvalues().len(), 1);
}

#[test]
fn nilpotent_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "n.json", "[[0,1],[0,0]]");
    for args in [vec!["spectral", "--input", p(&input)], vec!["calc", "--input", p(&input), "--function", "poly:[0,1]"]] {
        let out = opmeasure(&args);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("defect"));
    }
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "[[1,0],[0]]");
    let good = write(&dir, "good.json", "[[1,0],[0,4]]");
    assert_eq!(opmeasure(&["spectral", "--input", p(&bad)]).status.code(), Some(1));
    assert_eq!(opmeasure(&["spectral", "--input", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(opmeasure(&["calc", "--input", p(&good), "--function", "sin:1"]).status.code(), Some(1));
    assert_eq!(opmeasure(&["verify", "nosuch"]).status.code(), Some(1));
    assert_eq!(opmeasure(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn calc_maps_the_spectrum() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "t.json", "[[1,0],[0,4]]");
    let values = write(&dir, "sqrt.json", "[1,2]");
    let run = |f: &str| read_matrix(&stdout(&opmeasure(&["calc", "--input", p(&input), "--function", f]))).unwrap();
    for f in ["tab:[1,2]".to_string(), format!("tab:@{}", p(&values))] {
        let r = run(&f);
        assert!(close(r[(0, 0)].re, 1.0) && close(r[(1, 1)].re, 2.0) && r[(0, 1)].norm() == 0.0);
    }
    let t = run("poly:[0,1]");
    assert!(close(t[(1, 1)].re, 4.0));
    let one = run("poly:[1]");
    assert!(close(one[(0, 0)].re, 1.0) && close(one[(1, 1)].re, 1.0));
    let ind = run("indicator:[1]");
    assert!(close(ind[(0, 0)].re, 0.0) && close(ind[(1, 1)].re, 1.0));
}

#[test]
fn projective_povm_in_first_basis_state() {
    let dir = TempDir::new().unwrap();
    let povm = write(&dir, "p.json", r#"{"atoms":["a","b"],"effects":[[[1,0],[0,0]],[[0,0],[0,1]]]}"#);
    let pure = write(&dir, "x.json", r#"{"vector":[1,0]}"#);
    let mixed = write(&dir, "rho.json", "[[1,0],[0,0]]");
    for state in [&pure, &mixed] {
        let text = stdout(&opmeasure(&["povm", "--input", p(&povm), "--state", p(state)]));
        let probs: ComplexMeasure = from_json(&text).unwrap();
        assert_eq!(probs.weights()[0].re, 1.0);
        assert_eq!(probs.weights()[1].re, 0.0);
        assert_eq!(to_json(&probs).trim(), text.trim());
    }
}

#[test]
fn instrument_returns_the_selected_branch() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "e.json", r#"{"atoms":["0","1"],"kraus":[[[[1,0],[0,0]]],[[[0,0],[0,1]]]],"trace_preserving":true}"#);
    let rho = write(&dir, "rho.json", "[[0.5,0.5],[0.5,0.5]]");
    let text = stdout(&opmeasure(&["instrument", "--input", p(&inst), "--state", p(&rho), "--set", "1"]));
    let out: DensityOperator = from_json(&text).unwrap();
    assert!(close(out.trace(), 0.5));
    assert!(close(out.matrix()[(1, 1)].re, 0.5));
    let whole: DensityOperator = from_json(&stdout(&opmeasure(&["instrument", "--input", p(&inst), "--state", p(&rho)]))).unwrap();
    assert!(close(whole.trace(), 1.0));
    assert_eq!(opmeasure(&["instrument", "--input", p(&inst), "--state", p(&rho), "--set", "7"]).status.code(), Some(1));
}

#[test]
fn scalar_semivariation_is_total_variation() {
    let dir = TempDir::new().unwrap();
    let mu = write(
        &dir,
        "mu.json",
        r#"{"space":{"dim":1,"norm":"l2"},"measurable":{"atoms":["a","b","c"]},"atom_vectors":[[0.5],[[0,-1]],[-0.25]]}"#,
    );
    let b: BoundPair = from_json(&stdout(&opmeasure(&["semivar", "--input", p(&mu)]))).unwrap();
    assert!(close(b.lower, 1.75) && close(b.upper, 1.75));
    let part: BoundPair = from_json(&stdout(&opmeasure(&["semivar", "--input", p(&mu), "--set", "a,c"]))).unwrap();
    assert!(close(part.lower, 0.75) && close(part.upper, 0.75));
}

#[test]
fn series_output_round_trips() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "s.json",
        r#"{"lams":[{"space":{"atoms":["0","1"]},"weights":[0.5,0.5]},{"space":{"atoms":["0","1"]},"weights":[1,0]}],
            "xs":[[1,0],[0,1]]}"#,
    );
    let text = stdout(&opmeasure(&["series", "--input", p(&spec)]));
    let measure: SeriesMeasure = from_json(&text).unwrap();
    assert_eq!(to_json(&measure).trim(), text.trim());
    let SeriesMeasure::Vector(mu) = measure else { panic!("vector series expected") };
    assert!(close(mu.tail_norm_bound(), 0.25));
}

#[test]
fn verify_is_deterministic_and_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("rows.csv");
    let args = ["verify", "spectral", "--trials", "100", "--seed", "7"];
    let first = stdout(&opmeasure(&args));
    let second = stdout(&opmeasure(&args));
    assert_eq!(first, second);
    let report: VerificationReport = from_json(&first).unwrap();
    assert!(report.pass);
    assert_eq!(report.trials_run, 400);
    let out = opmeasure(&["verify", "lewis", "--trials", "2", "--csv", p(&csv)]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 2 * 48);
}

#[test]
fn verify_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "spec.json", r#"{"dims":[2],"atom_counts":[3],"trials":2}"#);
    let out = opmeasure(&["verify", "lewis", "--input", p(&spec), "--tol", "pairing=1e-300"]);
    assert_eq!(out.status.code(), Some(2));
    let report: VerificationReport = from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(!report.pass && !report.failures.is_empty());
    assert_eq!(opmeasure(&["verify", "lewis", "--input", p(&spec), "--tol", "nosuch=1"]).status.code(), Some(1));
}

#[test]
fn out_flag_writes_a_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "t.json", "[[2,0],[0,2]]");
    let out = dir.path().join("e.json");
    let run = opmeasure(&["spectral", "--input", p(&input), "--out", p(&out)]);
    assert!(run.status.success() && run.stdout.is_empty());
    let e: SpectralMeasure = from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(e.eigenvalues().len(), 1);
}
