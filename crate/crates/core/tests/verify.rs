use opmeasure::verify::{cells, rerun, run_suite, Suite, TrialSpec};

fn small() -> TrialSpec {
    TrialSpec { dims: vec![1, 2, 3], atom_counts: vec![1, 3, 5], trials: 3, chain_len: 40, ..TrialSpec::default() }
}

#[test]
fn every_suite_passes_on_a_small_grid() {
    for suite in Suite::ALL {
        let report = run_suite(suite, &small()).unwrap();
        for f in &report.failures {
            eprintln!("{suite} {} trial {} seed {}: {}", f.cell, f.trial, f.seed, f.detail);
        }
        assert!(report.pass, "{suite} failed");
        assert_eq!(report.trials_run + report.rejected, cells(suite, &small()).len() * 3);
    }
}

#[test]
fn zero_trials_is_an_empty_pass() {
    let spec = TrialSpec { trials: 0, ..small() };
    for suite in Suite::ALL {
        let r = run_suite(suite, &spec).unwrap();
        assert!(r.pass);
        assert_eq!(r.trials_run, 0);
        assert!(r.rows.is_empty());
        assert_eq!(r.max_residual, 0.0);
    }
}

#[test]
fn reports_are_deterministic() {
    let a = run_suite(Suite::Lewis, &small()).unwrap();
    let b = run_suite(Suite::Lewis, &small()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv(), b.to_csv());
    let c = run_suite(Suite::Lewis, &TrialSpec { seed: 1, ..small() }).unwrap();
    assert_ne!(a.to_json(), c.to_json());
}

#[test]
fn rows_replay_in_isolation() {
    let spec = small();
    let report = run_suite(Suite::Spectral, &spec).unwrap();
    for row in report.rows.iter().take(4) {
        let o = rerun(Suite::Spectral, &spec, &row.cell, row.trial % spec.trials, row.seed);
        assert_eq!(o.residual, row.residual);
        assert_eq!(o.pass(), row.pass);
    }
}

#[test]
fn csv_has_one_row_per_trial() {
    let r = run_suite(Suite::Boundedness, &small()).unwrap();
    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("suite,trial,seed,cell,residual,pass,rejected"));
    assert_eq!(lines.count(), r.rows.len());
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(run_suite(Suite::Lewis, &TrialSpec { atom_counts: vec![21], ..small() }).is_err());
    assert!(run_suite(Suite::Lewis, &TrialSpec { dims: vec![], ..small() }).is_err());
    let mut spec = small();
    spec.tolerances.pairing = -1.0;
    assert!(run_suite(Suite::Lewis, &spec).is_err());
}

#[test]
fn degenerate_hermitian_spectrum_decomposes() {
    use opmeasure::normed::Norm;
    use opmeasure::verify::{Cell, CellKind};
    // repeated eigenvalues on which the strictest Schur deflation stalls
    let spec = TrialSpec { trials: 100, seed: 7, ..TrialSpec::default() };
    let cell = Cell { kind: CellKind::Operator, norm: Norm::L2, dim: 4, atoms: 4 };
    let o = rerun(Suite::Spectral, &spec, &cell, 18, 10100935328187739576);
    assert!(o.pass(), "{:?}", o.failed);
}
