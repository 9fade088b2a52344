//! Seeded randomized suites that exercise the measure, spectral and quantum
//! modules and report residuals per trial.
//!
//! Every trial draws from its own ChaCha stream seeded by
//! `instance_seed(spec.seed, suite, index)`, so trials can run in parallel and
//! any single trial can be replayed with [`rerun`]. Reports carry no timings
//! and are byte-identical for identical specs.

pub mod oracles;
mod suites;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C};
use crate::normed::Norm;

pub use suites::{dct_chain, mct_chain, vector_chain_residuals, ChainResiduals, EpsSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lewis,
    Mct,
    Dct,
    DctProper,
    Semivariation,
    Boundedness,
    Spectral,
    Series,
    Quantum,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Lewis,
        Suite::Mct,
        Suite::Dct,
        Suite::DctProper,
        Suite::Semivariation,
        Suite::Boundedness,
        Suite::Spectral,
        Suite::Series,
        Suite::Quantum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lewis => "lewis",
            Suite::Mct => "mct",
            Suite::Dct => "dct",
            Suite::DctProper => "dct-proper",
            Suite::Semivariation => "semivariation",
            Suite::Boundedness => "boundedness",
            Suite::Spectral => "spectral",
            Suite::Series => "series",
            Suite::Quantum => "quantum",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('_', "-");
        Suite::ALL.into_iter().find(|suite| suite.name() == key).ok_or_else(|| Error::InvalidInput(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual of pairing identities.
    pub pairing: f64,
    /// Final residual of convergence chains.
    pub convergence: f64,
    /// Allowed increase between consecutive terms of a monotone schedule.
    pub monotone_slack: f64,
    pub projection: f64,
    /// Relative reconstruction error ‖Σλ_jP_j − T‖/‖T‖.
    pub reconstruction: f64,
    /// Relative error of f(T) against the generator's U f(D) U†.
    pub calculus: f64,
    pub multiplicative: f64,
    pub uniqueness: f64,
    /// Phase step of the semivariation grid oracle and the widening of the bracket.
    pub grid_resolution: f64,
    /// Slack for bound comparisons that hold exactly in exact arithmetic.
    pub bound_slack: f64,
    pub probability: f64,
    pub positivity: f64,
    /// Trace-pairing contract of operation integrals.
    pub contract: f64,
    pub extension: f64,
    /// Relative gap between the series integral and its term-by-term closed form.
    pub series: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pairing: 1e-11,
            convergence: 1e-9,
            monotone_slack: 1e-12,
            projection: 1e-10,
            reconstruction: 1e-9,
            calculus: 1e-9,
            multiplicative: 1e-10,
            uniqueness: 1e-9,
            grid_resolution: 1e-3,
            bound_slack: 1e-12,
            probability: 1e-10,
            positivity: 1e-10,
            contract: 1e-11,
            extension: 1e-9,
            series: 1e-13,
        }
    }
}

impl Tolerances {
    fn all(&self) -> [(&'static str, f64); 15] {
        [
            ("pairing", self.pairing),
            ("convergence", self.convergence),
            ("monotone_slack", self.monotone_slack),
            ("projection", self.projection),
            ("reconstruction", self.reconstruction),
            ("calculus", self.calculus),
            ("multiplicative", self.multiplicative),
            ("uniqueness", self.uniqueness),
            ("grid_resolution", self.grid_resolution),
            ("bound_slack", self.bound_slack),
            ("probability", self.probability),
            ("positivity", self.positivity),
            ("contract", self.contract),
            ("extension", self.extension),
            ("series", self.series),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialSpec {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub atom_counts: Vec<usize>,
    pub norms: Vec<Norm>,
    /// Length of convergence chains.
    pub chain_len: usize,
    /// Trials per configuration cell.
    pub trials: usize,
    pub tolerances: Tolerances,
}

impl Default for TrialSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            dims: vec![2, 4, 8, 16],
            atom_counts: vec![3, 6, 12],
            norms: Norm::ALL.to_vec(),
            chain_len: 40,
            trials: 50,
            tolerances: Tolerances::default(),
        }
    }
}

impl TrialSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidInput("dims must be a non-empty list of positive sizes".into()));
        }
        if self.atom_counts.is_empty() || self.atom_counts.contains(&0) {
            return Err(Error::InvalidInput("atom_counts must be a non-empty list of positive counts".into()));
        }
        if let Some(&m) = self.atom_counts.iter().find(|&&m| m > 20) {
            return Err(Error::InvalidInput(format!("atom count {m} exceeds the 20 atoms subset oracles enumerate")));
        }
        if self.norms.is_empty() {
            return Err(Error::InvalidInput("norms must not be empty".into()));
        }
        if self.chain_len == 0 {
            return Err(Error::InvalidInput("chain_len must be positive".into()));
        }
        for (name, value) in self.tolerances.all() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidInput(format!("tolerance `{name}` must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellKind {
    Scalar,
    Vector,
    Operator,
}

/// One configuration of a suite; trials of a cell differ only in their seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub kind: CellKind,
    pub norm: Norm,
    pub dim: usize,
    pub atoms: usize,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            CellKind::Scalar => "scalar",
            CellKind::Vector => "vector",
            CellKind::Operator => "operator",
        };
        write!(f, "{kind}/{}/d={}/m={}", self.norm.tag(), self.dim, self.atoms)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub cell: Cell,
    pub residual: f64,
    pub pass: bool,
    pub rejected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub trial: usize,
    pub seed: u64,
    pub cell: Cell,
    pub digest: String,
    pub residual: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials_run: usize,
    pub rejected: usize,
    pub failures: Vec<Failure>,
    pub max_residual: f64,
    pub pass: bool,
    pub rows: Vec<TrialRow>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        crate::json::to_json(self)
    }

    /// One row per trial: suite, trial, seed, cell, residual, pass, rejected.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "trial", "seed", "cell", "residual", "pass", "rejected"]).expect("in-memory writer");
        for row in &self.rows {
            w.write_record([
                self.suite.name().to_string(),
                row.trial.to_string(),
                row.seed.to_string(),
                row.cell.to_string(),
                format!("{:e}", row.residual),
                row.pass.to_string(),
                row.rejected.to_string(),
            ])
            .expect("in-memory writer");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is UTF-8")
    }
}

/// Result of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub residual: f64,
    pub failed: Vec<String>,
    pub digest: String,
    pub rejected: bool,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.failed.is_empty()
    }
}

/// Accumulates named comparisons for one trial.
#[derive(Default)]
pub(crate) struct Checks {
    failed: Vec<String>,
    residual: f64,
}

impl Checks {
    /// Records `value ≤ limit`; NaN on either side fails.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn le(&mut self, name: &str, value: f64, limit: f64) {
        if !(value <= limit) {
            self.failed.push(format!("{name}: {value:e} > {limit:e}"));
        }
    }

    pub fn holds(&mut self, name: &str, ok: bool, detail: impl fmt::Display) {
        if !ok {
            self.failed.push(format!("{name}: {detail}"));
        }
    }

    /// Records the trial's headline residual (largest seen wins).
    pub fn residual(&mut self, value: f64) {
        self.residual = if value.is_nan() { f64::NAN } else { self.residual.max(value) };
    }

    pub fn finish(self, digest: InstanceDigest) -> Outcome {
        Outcome { residual: self.residual, failed: self.failed, digest: digest.finish(), rejected: false }
    }
}

/// SHA-256 over the generated inputs of one trial.
pub(crate) struct InstanceDigest(Sha256);

impl InstanceDigest {
    pub fn new(suite: Suite, cell: &Cell, seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(suite.name().as_bytes());
        h.update(cell.to_string().as_bytes());
        h.update(seed.to_le_bytes());
        Self(h)
    }

    pub fn scalars(&mut self, values: &[C]) {
        for v in values {
            self.0.update(v.re.to_le_bytes());
            self.0.update(v.im.to_le_bytes());
        }
    }

    pub fn vector(&mut self, v: &CVector) {
        self.scalars(v.as_slice());
    }

    pub fn matrix(&mut self, m: &CMatrix) {
        self.scalars(m.as_slice());
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` of `suite` under the spec seed.
pub fn instance_seed(seed: u64, suite: Suite, index: usize) -> u64 {
    let tag = Suite::ALL.iter().position(|s| *s == suite).expect("suite listed") as u64;
    splitmix64(splitmix64(seed ^ splitmix64(tag + 1)).wrapping_add(index as u64))
}

/// The cells a suite runs for a spec.
pub fn cells(suite: Suite, spec: &TrialSpec) -> Vec<Cell> {
    let vector_cells = || {
        let mut out = Vec::new();
        for &norm in &spec.norms {
            for &dim in &spec.dims {
                for &atoms in &spec.atom_counts {
                    out.push(Cell { kind: CellKind::Vector, norm, dim, atoms });
                }
            }
        }
        out
    };
    let operator_cells = || {
        let mut out = Vec::new();
        for &dim in &spec.dims {
            for &atoms in &spec.atom_counts {
                out.push(Cell { kind: CellKind::Operator, norm: Norm::L2, dim, atoms });
            }
        }
        out
    };
    match suite {
        Suite::Lewis | Suite::Mct | Suite::Dct | Suite::DctProper | Suite::Series => {
            let mut out = vector_cells();
            out.extend(operator_cells());
            out
        }
        Suite::Semivariation => vector_cells(),
        Suite::Quantum => operator_cells(),
        Suite::Spectral => spec.dims.iter().map(|&dim| Cell { kind: CellKind::Operator, norm: Norm::L2, dim, atoms: dim }).collect(),
        Suite::Boundedness => {
            spec.atom_counts.iter().map(|&atoms| Cell { kind: CellKind::Scalar, norm: spec.norms[0], dim: 1, atoms }).collect()
        }
    }
}

/// Re-runs one trial in isolation from the data in its row or failure record.
pub fn rerun(suite: Suite, spec: &TrialSpec, cell: &Cell, trial: usize, seed: u64) -> Outcome {
    suites::instance(suite, spec, cell, trial, seed)
}

/// Runs every trial of a suite; trials of cell c occupy indices c·trials .. (c+1)·trials.
pub fn run_suite(suite: Suite, spec: &TrialSpec) -> Result<VerificationReport> {
    spec.validate()?;
    let cells = cells(suite, spec);
    let total = cells.len() * spec.trials;
    let results: Vec<(TrialRow, Outcome)> = (0..total)
        .into_par_iter()
        .map(|index| {
            let cell = cells[index / spec.trials];
            let trial = index % spec.trials;
            let seed = instance_seed(spec.seed, suite, index);
            let outcome = suites::instance(suite, spec, &cell, trial, seed);
            let row = TrialRow { trial: index, seed, cell, residual: outcome.residual, pass: outcome.pass(), rejected: outcome.rejected };
            (row, outcome)
        })
        .collect();

    let mut failures = Vec::new();
    let mut rejected = 0;
    let mut max_residual = 0.0f64;
    for (row, outcome) in &results {
        if outcome.rejected {
            rejected += 1;
            continue;
        }
        max_residual = if outcome.residual.is_nan() { f64::NAN } else { max_residual.max(outcome.residual) };
        if !outcome.pass() {
            failures.push(Failure {
                trial: row.trial,
                seed: row.seed,
                cell: row.cell,
                digest: outcome.digest.clone(),
                residual: outcome.residual,
                detail: outcome.failed.join("; "),
            });
        }
    }
    Ok(VerificationReport {
        suite,
        seed: spec.seed,
        trials_run: total - rejected,
        rejected,
        pass: failures.is_empty(),
        failures,
        max_residual,
        rows: results.into_iter().map(|(row, _)| row).collect(),
    })
}

pub fn run_lewis(spec: &TrialSpec) -> Result<VerificationReport> {
    run_suite(Suite::Lewis, spec)
}

pub fn run_mct(spec: &TrialSpec) -> Result<VerificationReport> {
    run_suite(Suite::Mct, spec)
}

pub fn run_dct(spec: &TrialSpec) -> Result<VerificationReport> {
    run_suite(Suite::Dct, spec)
}

pub fn run_dct_proper(spec: &TrialSpec) -> Result<VerificationReport> {
    run_suite(Suite::DctProper, spec)
}

pub fn run_semivariation_suite(spec: &TrialSpec) -> Result<VerificationReport> {
    run_suite(Suite::Semivariation, spec)
}

pub fn run_boundedness_suite(spec: &TrialSpec) -> Result<VerificationReport> {
    run_suite(Suite::Boundedness, spec)
}

pub fn run_spectral_suite(spec: &TrialSpec) -> Result<VerificationReport> {
    run_suite(Suite::Spectral, spec)
}

pub fn run_series_suite(spec: &TrialSpec) -> Result<VerificationReport> {
    run_suite(Suite::Series, spec)
}

pub fn run_quantum_suite(spec: &TrialSpec) -> Result<VerificationReport> {
    run_suite(Suite::Quantum, spec)
}
