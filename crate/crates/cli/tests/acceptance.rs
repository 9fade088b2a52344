//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use opmeasure::json::{from_json, read_matrix, to_json, write_matrix};
use opmeasure::measurable::ComplexMeasure;
use opmeasure::normed::{BoundPair, Norm};
use opmeasure::operator_measure::{SeriesMeasure, SpectralMeasure};
use opmeasure::quantum::DensityOperator;
use opmeasure::verify::{run_suite, Suite, Tolerances, TrialSpec, VerificationReport};

struct Verdict {
    pass: bool,
    detail: String,
}

fn criterion(id: usize, name: &str, limit: Option<Duration>, body: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = body();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = verdict.pass && in_time;
    let budget = limit.map(|l| format!(" (limit {:.0} s)", l.as_secs_f64())).unwrap_or_default();
    println!("[{}] {id}. {name}: {}; {:.2} s{budget}", if pass { "PASS" } else { "FAIL" }, verdict.detail, elapsed.as_secs_f64());
    pass
}

fn summarize(reports: &[VerificationReport]) -> Verdict {
    let pass = reports.iter().all(|r| r.pass && r.trials_run > 0);
    let detail = reports
        .iter()
        .map(|r| format!("{} {} trials, {} failed, max residual {:.3e}", r.suite, r.trials_run, r.failures.len(), r.max_residual))
        .collect::<Vec<_>>()
        .join("; ");
    for r in reports {
        for f in r.failures.iter().take(5) {
            println!("    {} trial {} {} seed {}: {}", r.suite, f.trial, f.cell, f.seed, f.detail);
        }
    }
    Verdict { pass, detail }
}

fn run(suite: Suite, spec: &TrialSpec) -> VerificationReport {
    run_suite(suite, spec).expect("acceptance specs are valid")
}

fn base(seed: u64, trials: usize) -> TrialSpec {
    TrialSpec {
        seed,
        dims: vec![2, 4, 8, 16],
        atom_counts: vec![3, 6, 12],
        norms: Norm::ALL.to_vec(),
        chain_len: 40,
        trials,
        tolerances: Tolerances::default(),
    }
}

fn cli(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_opmeasure")).args(args).output().expect("binary runs");
    (out.status.code(), String::from_utf8(out.stdout).expect("UTF-8 output"))
}

fn round_trips() -> Result<usize, String> {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let file = |name: &str, content: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, content).expect("temp file");
        path.to_str().expect("UTF-8 path").to_string()
    };
    let t = file("t.json", "[[2,[0,1]],[[0,-1],2]]");
    let povm = file("p.json", r#"{"atoms":["x","y"],"effects":[[[0.75,0],[0,0.25]],[[0.25,0],[0,0.75]]]}"#);
    let inst = file("i.json", r#"{"atoms":["0","1"],"kraus":[[[[1,0],[0,0]]],[[[0,0],[0,1]]]],"trace_preserving":true}"#);
    let rho = file("rho.json", "[[0.5,[0,0.25]],[[0,-0.25],0.5]]");
    let mu = file("mu.json", r#"{"space":{"dim":2,"norm":"linf"},"measurable":{"atoms":["a","b"]},"atom_vectors":[[1,[0,1]],[0.5,-1]]}"#);
    let series = file("s.json", r#"{"lams":[{"space":{"atoms":["0","1"]},"weights":[0.5,0.5]}],"Ts":[[[0,1],[1,0]]]}"#);

    let mut checked = 0;
    let mut check = |args: &[&str], reread: &dyn Fn(&str) -> Result<String, String>| -> Result<(), String> {
        let (code, text) = cli(args);
        if code != Some(0) {
            return Err(format!("{} exited with {code:?}", args[0]));
        }
        if reread(&text)?.trim() != text.trim() {
            return Err(format!("{} output changes on re-serialization", args[0]));
        }
        checked += 1;
        Ok(())
    };
    let e = |s: &str| -> Result<String, String> { from_json::<SpectralMeasure>(s).map(|v| to_json(&v)).map_err(|e| e.to_string()) };
    let m = |s: &str| -> Result<String, String> { read_matrix(s).map(|v| write_matrix(&v)).map_err(|e| e.to_string()) };
    let p = |s: &str| -> Result<String, String> { from_json::<ComplexMeasure>(s).map(|v| to_json(&v)).map_err(|e| e.to_string()) };
    let d = |s: &str| -> Result<String, String> { from_json::<DensityOperator>(s).map(|v| to_json(&v)).map_err(|e| e.to_string()) };
    let b = |s: &str| -> Result<String, String> { from_json::<BoundPair>(s).map(|v| to_json(&v)).map_err(|e| e.to_string()) };
    let s = |s: &str| -> Result<String, String> { from_json::<SeriesMeasure>(s).map(|v| to_json(&v)).map_err(|e| e.to_string()) };
    check(&["spectral", "--input", &t], &e)?;
    check(&["calc", "--input", &t, "--function", "exp:[0,1]"], &m)?;
    check(&["povm", "--input", &povm, "--state", &rho], &p)?;
    check(&["instrument", "--input", &inst, "--state", &rho, "--set", "1"], &d)?;
    check(&["semivar", "--input", &mu], &b)?;
    check(&["series", "--input", &series], &s)?;

    let nilpotent = file("n.json", "[[0,1],[0,0]]");
    if cli(&["spectral", "--input", &nilpotent]).0 != Some(2) {
        return Err("nilpotent input did not exit 2".into());
    }
    let verify = ["verify", "spectral", "--trials", "100", "--seed", "7"];
    let (code, first) = cli(&verify);
    if code != Some(0) || cli(&verify).1 != first {
        return Err("verify spectral --trials 100 --seed 7 is not a deterministic pass".into());
    }
    Ok(checked + 2)
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let mut all = true;

    all &= criterion(1, "pairing identity, 100 trials per norm and dimension", secs(10), || {
        let r = run(Suite::Lewis, &base(101, 100));
        let mut v = summarize(std::slice::from_ref(&r));
        v.pass &= r.max_residual <= 1e-11;
        v
    });

    all &=
        criterion(2, "spectral suite, 100 normal matrices per dimension", secs(30), || summarize(&[run(Suite::Spectral, &base(202, 100))]));

    all &= criterion(3, "semivariation brackets, subset bound and grid oracle", secs(60), || {
        let spec = TrialSpec { dims: vec![1, 2, 3, 4, 8], atom_counts: vec![1, 2, 3, 6, 12], ..base(303, 40) };
        summarize(&[run(Suite::Semivariation, &spec)])
    });

    all &= criterion(4, "convergence suites, 50 trials each", secs(30), || {
        let spec = base(404, 50);
        summarize(&[run(Suite::Mct, &spec), run(Suite::Dct, &spec), run(Suite::DctProper, &spec)])
    });

    all &= criterion(5, "series measures, N = 30 against N = 60", secs(5), || summarize(&[run(Suite::Series, &base(505, 10))]));

    all &= criterion(6, "quantum suite, POVMs, instruments and extension check", secs(20), || {
        let spec = TrialSpec { dims: vec![2, 4, 8], ..base(606, 100) };
        summarize(&[run(Suite::Quantum, &spec)])
    });

    all &= criterion(7, "boundedness suites", secs(10), || summarize(&[run(Suite::Boundedness, &base(707, 100))]));

    all &= criterion(8, "determinism and CLI round trips", None, || {
        let spec = TrialSpec { dims: vec![2, 3], atom_counts: vec![2, 4], ..base(808, 3) };
        let mut mismatched = Vec::new();
        for suite in Suite::ALL {
            let (a, b) = (run(suite, &spec), run(suite, &spec));
            if a.to_json() != b.to_json() || a.to_csv() != b.to_csv() {
                mismatched.push(suite.name());
            }
        }
        match round_trips() {
            Ok(n) if mismatched.is_empty() => {
                Verdict { pass: true, detail: format!("9 suites byte-identical across runs, {n} CLI round trips") }
            }
            Ok(_) => Verdict { pass: false, detail: format!("reports differ for {mismatched:?}") },
            Err(e) => Verdict { pass: false, detail: e },
        }
    });

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
