use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use opmeasure::json::{self, Cx};
use opmeasure::measurable::{MeasurableSet, SpaceRef};
use opmeasure::normed::Budget;
use opmeasure::operator_measure::{spectral_measure_of, SeriesSpec};
use opmeasure::quantum::{instrument_apply, povm_probabilities, pure_state, DensityOperator, Instrument, Povm};
use opmeasure::vector_measure::{family_of, semivariation, VectorMeasure};
use opmeasure::verify::{run_suite, Suite, TrialSpec};
use opmeasure::Error;

mod funcspec;

#[derive(Parser)]
#[command(name = "opmeasure", version, about = "Spectral measures, functional calculus, POVMs and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral measure of a normal matrix.
    Spectral {
        #[arg(long)]
        input: PathBuf,
        /// Eigenvalues closer than this share an atom (default 1e-8·‖T‖).
        #[arg(long)]
        cluster_tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// f(T) for a normal matrix T.
    Calc {
        #[arg(long)]
        input: PathBuf,
        /// poly:[..], exp:a, const:c, indicator:[..], tab:[..], tab:@file, abs:<f>, re:<f>
        #[arg(long)]
        function: String,
        #[arg(long)]
        cluster_tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Outcome distribution of a POVM in a state.
    Povm {
        #[arg(long)]
        input: PathBuf,
        /// Density matrix, or {"vector": [...]} for a pure state.
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Post-measurement state 𝓔(A)ρ of an instrument.
    Instrument {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated atom ids; the whole space when omitted.
        #[arg(long)]
        set: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Semivariation bracket of a vector measure on a set.
    Semivar {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = Budget::default().seed)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Truncated series measure Σ 2^{-n} λ_n x_n or Σ 2^{-n} λ_n T_n.
    Series {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Runs a verification suite; exit status 2 when any trial fails.
    Verify {
        suite: String,
        /// TrialSpec JSON; flags override its fields.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Tolerance override as name=value, repeatable.
        #[arg(long, value_name = "NAME=VALUE")]
        tol: Vec<String>,
        /// Also write one CSV row per trial here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

enum Status {
    Ok,
    CheckFailed,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    json::from_json(&read(path)?).with_context(|| format!("invalid input in {}", path.display()))
}

fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("cannot write {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct PureState {
    vector: Vec<Cx>,
}

/// A density matrix, or `{"vector": [...]}` for the pure state x x†.
fn read_state(path: &Path) -> Result<DensityOperator> {
    let text = read(path)?;
    let state = match json::from_json::<PureState>(&text) {
        Ok(pure) => pure_state(&json::vector_from_json(&pure.vector)),
        Err(_) => json::from_json::<DensityOperator>(&text),
    };
    state.with_context(|| format!("invalid state in {}", path.display()))
}

fn parse_set(space: &SpaceRef, set: Option<&str>) -> Result<MeasurableSet> {
    match set {
        None => Ok(MeasurableSet::all(space)),
        Some(list) => {
            let ids: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            Ok(MeasurableSet::new(space, ids)?)
        }
    }
}

fn apply_tolerance(spec: &mut TrialSpec, assignment: &str) -> Result<()> {
    let Some((name, value)) = assignment.split_once('=') else {
        bail!("tolerance override `{assignment}` is not name=value");
    };
    let value: f64 = value.trim().parse().with_context(|| format!("tolerance `{name}` is not a number"))?;
    let mut tolerances = serde_json::to_value(&spec.tolerances)?;
    let slot = tolerances.get_mut(name.trim()).with_context(|| format!("unknown tolerance `{name}`"))?;
    *slot = serde_json::Value::from(value);
    spec.tolerances = serde_json::from_value(tolerances)?;
    Ok(())
}

fn run(command: Command) -> Result<Status> {
    match command {
        Command::Spectral { input, cluster_tol, output } => {
            let t = json::read_matrix(&read(&input)?)?;
            emit(&output, &json::to_json(&spectral_measure_of(&t, cluster_tol)?))?;
        }
        Command::Calc { input, function, cluster_tol, output } => {
            let f = funcspec::parse(&function)?;
            let t = json::read_matrix(&read(&input)?)?;
            let e = spectral_measure_of(&t, cluster_tol)?;
            emit(&output, &json::write_matrix(&e.apply(&f)?))?;
        }
        Command::Povm { input, state, output } => {
            let povm: Povm = parse(&input)?;
            let rho = read_state(&state)?;
            emit(&output, &json::to_json(&povm_probabilities(&povm, &rho)?))?;
        }
        Command::Instrument { input, state, set, output } => {
            let inst: Instrument = parse(&input)?;
            let rho = read_state(&state)?;
            let set = parse_set(inst.measurable(), set.as_deref())?;
            emit(&output, &json::to_json(&instrument_apply(&inst, &set, &rho)?))?;
        }
        Command::Semivar { input, set, seed, output } => {
            let mu: VectorMeasure = parse(&input)?;
            let fam = family_of(&mu);
            let set = parse_set(fam.measurable(), set.as_deref())?;
            let budget = Budget { seed, ..Budget::default() };
            emit(&output, &json::to_json(&semivariation(&fam, &set, &budget)?))?;
        }
        Command::Series { input, output } => {
            let spec: SeriesSpec = parse(&input)?;
            emit(&output, &json::to_json(&spec.build()?))?;
        }
        Command::Verify { suite, input, seed, trials, tol, csv, output } => {
            let suite: Suite = suite.parse()?;
            let mut spec = match &input {
                Some(path) => parse::<TrialSpec>(path)?,
                None => TrialSpec::default(),
            };
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            if let Some(trials) = trials {
                spec.trials = trials;
            }
            for assignment in &tol {
                apply_tolerance(&mut spec, assignment)?;
            }
            let report = run_suite(suite, &spec)?;
            if let Some(path) = csv {
                fs::write(&path, report.to_csv()).with_context(|| format!("cannot write {}", path.display()))?;
            }
            emit(&output, &report.to_json())?;
            for failure in &report.failures {
                eprintln!("{suite}: trial {} ({}) seed {} failed: {}", failure.trial, failure.cell, failure.seed, failure.detail);
            }
            if !report.pass {
                return Ok(Status::CheckFailed);
            }
        }
    }
    Ok(Status::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::NotNormal { .. }) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
