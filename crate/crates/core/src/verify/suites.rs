//! Trial bodies for every suite.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracles;
use super::{Cell, CellKind, Checks, InstanceDigest, Outcome, Suite, TrialSpec};
use crate::error::{Error, Result};
use crate::linalg::{
    fro, gaussian_matrix, gaussian_vector, haar_unitary, min_hermitian_eigenvalue, op_norm, random_unit_vector, trace, CMatrix, CVector, C,
    ONE, ZERO,
};
use crate::measurable::{integrate_scalar, AtomicSpace, ComplexMeasure, FunctionSpec, MeasurableFunction, MeasurableSet, SpaceRef};
use crate::normed::{dual_ball_sample_with, norming_functional, pair, Budget, Functional, Norm, SampleConfig, SpaceDescriptor};
use crate::operator_measure::{
    check_multiplicative, integrate_operator, project_operator, series_operator_integral, series_operator_measure, slice_by_functional,
    slice_by_vector, spectral_measure_of, OperatorProjectionFamily,
};
use crate::quantum::{
    instrument_apply, mixed_state_extension_check, operation_integrate, operation_projection, povm_integrate, povm_probabilities,
    random_instrument, random_povm, random_state, trace_pair, DensityOperator, ExtensionMode, Instrument, Povm,
};
use crate::vector_measure::{
    family_of, integrate_vector, integrate_vector_certified, project, semivariation, series_integral, series_vector_measure,
    weighted_measure, VectorProjectionFamily,
};

pub const SERIES_TERMS: usize = 30;
pub const SERIES_REFERENCE_TERMS: usize = 60;

/// Functionals per chain residual, on top of the norming functional of the limit.
const CHAIN_FUNCTIONALS: usize = 16;
/// Unit vectors probing operator families.
const OPERATOR_PROBES: usize = 3;

pub(super) fn instance(suite: Suite, spec: &TrialSpec, cell: &Cell, trial: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digest = InstanceDigest::new(suite, cell, seed);
    let mut checks = Checks::default();
    let run = match suite {
        Suite::Lewis => lewis(spec, cell, &mut rng, &mut digest, &mut checks),
        Suite::Mct | Suite::Dct | Suite::DctProper => convergence(suite, spec, cell, &mut rng, &mut digest, &mut checks),
        Suite::Semivariation => semivariation_trial(spec, cell, &mut rng, &mut digest, &mut checks),
        Suite::Boundedness => boundedness(spec, cell, trial, &mut rng, &mut digest, &mut checks),
        Suite::Spectral => spectral(spec, cell, trial, &mut rng, &mut digest, &mut checks),
        Suite::Series => series(spec, cell, &mut rng, &mut digest, &mut checks),
        Suite::Quantum => quantum(spec, cell, &mut rng, &mut digest, &mut checks),
    };
    match run {
        Ok(Trial::Counted) => checks.finish(digest),
        Ok(Trial::Rejected(reason)) => Outcome { residual: 0.0, failed: vec![reason], digest: digest.finish(), rejected: true },
        Err(e) => {
            checks.holds("library call", false, e);
            checks.residual(f64::INFINITY);
            checks.finish(digest)
        }
    }
}

pub(super) enum Trial {
    Counted,
    Rejected(String),
}

fn space_of(cell: &Cell) -> SpaceDescriptor {
    SpaceDescriptor::new(cell.dim, cell.norm).expect("validated dims are positive")
}

fn unit_in(space: &SpaceDescriptor, rng: &mut ChaCha8Rng) -> CVector {
    loop {
        let v = gaussian_vector(rng, space.dim());
        let n = space.norm(&v);
        if n > 1e-12 {
            return v.unscale(n);
        }
    }
}

fn complex_values(rng: &mut ChaCha8Rng, m: usize, bound: f64) -> Vec<C> {
    (0..m).map(|_| C::from_polar(bound * rng.random::<f64>(), rng.random::<f64>() * std::f64::consts::TAU)).collect()
}

/// Gaussian kernels scaled so that Σ_ω ‖k_ω‖ = 1.
fn normalized_vector_family(
    rng: &mut ChaCha8Rng,
    space: &SpaceDescriptor,
    m: usize,
    digest: &mut InstanceDigest,
) -> VectorProjectionFamily {
    let raw: Vec<CVector> = (0..m).map(|_| gaussian_vector(rng, space.dim())).collect();
    let total: f64 = raw.iter().map(|k| space.norm(k)).sum();
    let kernel: Vec<CVector> = raw.into_iter().map(|k| k.unscale(total)).collect();
    kernel.iter().for_each(|k| digest.vector(k));
    VectorProjectionFamily::from_kernel(*space, &AtomicSpace::indexed(m), kernel, 0.0).expect("kernel matches space")
}

/// Gaussian kernels scaled so that Σ_ω ‖K_ω‖ = 1.
fn normalized_operator_family(rng: &mut ChaCha8Rng, d: usize, m: usize, digest: &mut InstanceDigest) -> OperatorProjectionFamily {
    let raw: Vec<CMatrix> = (0..m).map(|_| gaussian_matrix(rng, d, d)).collect();
    let total: f64 = raw.iter().map(op_norm).sum();
    let kernel: Vec<CMatrix> = raw.into_iter().map(|k| k.unscale(total)).collect();
    kernel.iter().for_each(|k| digest.matrix(k));
    OperatorProjectionFamily::from_kernel(d, &AtomicSpace::indexed(m), kernel, 0.0).expect("kernel matches dimension")
}

fn lewis(spec: &TrialSpec, cell: &Cell, rng: &mut ChaCha8Rng, digest: &mut InstanceDigest, checks: &mut Checks) -> Result<Trial> {
    let tol = spec.tolerances.pairing;
    let sp = AtomicSpace::indexed(cell.atoms);
    let f_values: Vec<C> = gaussian_vector(rng, cell.atoms).iter().copied().collect();
    digest.scalars(&f_values);
    let f = MeasurableFunction::tabulated(&sp, f_values.clone())?;
    match cell.kind {
        CellKind::Vector | CellKind::Scalar => {
            let space = space_of(cell);
            let kernel: Vec<CVector> = (0..cell.atoms).map(|_| gaussian_vector(rng, cell.dim)).collect();
            kernel.iter().for_each(|k| digest.vector(k));
            let fam = VectorProjectionFamily::from_kernel(space, &sp, kernel.clone(), 0.0)?;
            let l = Functional::new(gaussian_vector(rng, cell.dim));
            digest.vector(l.coeffs());
            let lhs = pair(&l, &integrate_vector(&f, &fam)?)?;
            let rhs = integrate_scalar(&f, &project(&fam, &l)?)?;
            let direct = oracles::lewis_double_sum(&f_values, &kernel, &l);
            let scale: f64 = f_values
                .iter()
                .zip(&kernel)
                .map(|(fw, k)| fw.norm() * l.coeffs().iter().zip(k.iter()).map(|(c, x)| c.norm() * x.norm()).sum::<f64>())
                .sum::<f64>()
                .max(f64::MIN_POSITIVE);
            let residual = (lhs - rhs).norm().max((lhs - direct).norm()) / scale;
            checks.residual(residual);
            checks.le("pairing identity", residual, tol);
        }
        CellKind::Operator => {
            let kernel: Vec<CMatrix> = (0..cell.atoms).map(|_| gaussian_matrix(rng, cell.dim, cell.dim)).collect();
            kernel.iter().for_each(|k| digest.matrix(k));
            let fam = OperatorProjectionFamily::from_kernel(cell.dim, &sp, kernel.clone(), 0.0)?;
            let l = Functional::new(gaussian_vector(rng, cell.dim));
            let x = gaussian_vector(rng, cell.dim);
            digest.vector(l.coeffs());
            digest.vector(&x);
            let m = integrate_operator(&f, &fam)?;
            let lhs = l.apply(&(&m * &x))?;
            let rhs = integrate_scalar(&f, &project_operator(&fam, &l, &x)?)?;
            let via_dual = integrate_scalar(&f, &project(&slice_by_functional(&fam, &l)?, &Functional::new(x.clone()))?)?;
            let abs = |v: &CVector| v.map(|c| C::new(c.norm(), 0.0));
            let scale: f64 = f_values
                .iter()
                .zip(&kernel)
                .map(|(fw, k)| fw.norm() * (abs(l.coeffs()).transpose() * k.map(|c| C::new(c.norm(), 0.0)) * abs(&x))[(0, 0)].re)
                .sum::<f64>()
                .max(f64::MIN_POSITIVE);
            let residual = (lhs - rhs).norm().max((lhs - via_dual).norm()) / scale;
            checks.residual(residual);
            checks.le("operator pairing identity", residual, tol);
        }
    }
    Ok(Trial::Counted)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsSchedule {
    /// ε_n = 2^{-n}
    Geometric,
    /// ε_n = 1/n
    Harmonic,
}

impl EpsSchedule {
    pub fn eps(self, n: usize) -> f64 {
        match self {
            EpsSchedule::Geometric => (-(n as f64)).exp2(),
            EpsSchedule::Harmonic => 1.0 / n as f64,
        }
    }
}

/// f_n = min(f, n·step)·(1 − damping·2^{-n}) for n = 1..=len, with step = 2·max f / len.
pub fn mct_chain(f: &[f64], len: usize, damping: f64) -> Vec<Vec<C>> {
    let top = f.iter().copied().fold(0.0, f64::max);
    let step = 2.0 * top / len as f64;
    (1..=len)
        .map(|n| {
            let factor = 1.0 - damping * (-(n as f64)).exp2();
            f.iter().map(|&v| C::new(v.min(n as f64 * step) * factor, 0.0)).collect()
        })
        .collect()
}

/// f_n = f + g·ε_n·s_n with independent random signs s_n ∈ {±1} per atom.
pub fn dct_chain<R: Rng + ?Sized>(f: &[C], g: &[f64], len: usize, schedule: EpsSchedule, rng: &mut R) -> Vec<Vec<C>> {
    (1..=len)
        .map(|n| {
            let eps = schedule.eps(n);
            f.iter()
                .zip(g)
                .map(|(fv, gv)| {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    fv + C::new(gv * eps * sign, 0.0)
                })
                .collect()
        })
        .collect()
}

fn dominated(chain: &[Vec<C>], g: &[f64]) -> bool {
    chain.iter().all(|fnv| fnv.iter().zip(g).all(|(v, gv)| v.norm() <= gv * (1.0 + 4.0 * f64::EPSILON)))
}

fn monotone(chain: &[Vec<C>]) -> bool {
    chain.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a.im == 0.0 && b.im == 0.0 && 0.0 <= a.re && a.re <= b.re))
}

/// Residual schedules of a chain f_n → f against a vector family.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChainResiduals {
    /// max_Λ |Λ(∫f_n) − Λ(∫f)| over the sampled functionals.
    pub pairing: Vec<f64>,
    /// max_Λ ∫|f_n − f| d|μ_Λ|, which dominates `pairing` and is monotone for monotone |f_n − f|.
    pub envelope: Vec<f64>,
    /// ‖∫f_n − ∫f‖ in the space norm.
    pub norm: Vec<f64>,
    /// Σ_ω |f_n − f|(ω)·‖k_ω‖, which dominates `norm`.
    pub holder: Vec<f64>,
}

pub fn vector_chain_residuals(
    fam: &VectorProjectionFamily,
    f: &[C],
    chain: &[Vec<C>],
    functionals: &[Functional],
) -> Result<ChainResiduals> {
    let sp = fam.measurable();
    let limit = integrate_vector(&MeasurableFunction::tabulated(sp, f.to_vec())?, fam)?;
    let norms: Vec<f64> = fam.kernel().iter().map(|k| fam.space().norm(k)).collect();
    let mut out = ChainResiduals::default();
    for fnv in chain {
        let term = integrate_vector(&MeasurableFunction::tabulated(sp, fnv.clone())?, fam)?;
        let diff = &term - &limit;
        let gap: Vec<f64> = fnv.iter().zip(f).map(|(a, b)| (a - b).norm()).collect();
        let mut pairing = 0.0f64;
        let mut envelope = 0.0f64;
        for l in functionals {
            pairing = pairing.max(l.apply(&diff)?.norm());
            let env: f64 = gap.iter().zip(fam.kernel()).map(|(gw, k)| gw * l.apply(k).map(|c| c.norm()).unwrap_or(0.0)).sum();
            envelope = envelope.max(env);
        }
        out.pairing.push(pairing);
        out.envelope.push(envelope);
        out.norm.push(fam.space().norm(&diff));
        out.holder.push(gap.iter().zip(&norms).map(|(a, b)| a * b).sum());
    }
    Ok(out)
}

fn chain_functionals(fam: &VectorProjectionFamily, f: &[C], seed: u64) -> Result<Vec<Functional>> {
    let config = SampleConfig { enumeration_cap: 64, ..SampleConfig::default() };
    let mut out = dual_ball_sample_with(fam.space(), CHAIN_FUNCTIONALS, seed, &config);
    let limit = integrate_vector(&MeasurableFunction::tabulated(fam.measurable(), f.to_vec())?, fam)?;
    if limit.iter().any(|c| *c != ZERO) {
        out.push(norming_functional(fam.space(), &limit));
    }
    Ok(out)
}

fn non_increasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Applies the convergence criteria of `suite` to one vector family and returns the headline residual.
pub(super) fn check_vector_chain(
    suite: Suite,
    spec: &TrialSpec,
    fam: &VectorProjectionFamily,
    f: &[C],
    chain: &[Vec<C>],
    seed: u64,
    checks: &mut Checks,
) -> Result<f64> {
    let tol = &spec.tolerances;
    let functionals = chain_functionals(fam, f, seed)?;
    let r = vector_chain_residuals(fam, f, chain, &functionals)?;
    let last = r.pairing.len() - 1;
    if suite == Suite::DctProper {
        checks.holds("holder envelope monotone", non_increasing(&r.holder, tol.monotone_slack), format!("{:?}", r.holder));
        let dominated = r.norm.iter().zip(&r.holder).all(|(a, b)| *a <= b + tol.monotone_slack);
        checks.holds("norm residual below envelope", dominated, "‖∫f_n − ∫f‖ exceeds Σ|f_n − f|‖k‖");
        checks.le("final norm residual", r.norm[last], tol.convergence);
        checks.le("final holder envelope", r.holder[last], tol.convergence);
        Ok(r.norm[last])
    } else {
        checks.holds("pairing envelope monotone", non_increasing(&r.envelope, tol.monotone_slack), format!("{:?}", r.envelope));
        let dominated = r.pairing.iter().zip(&r.envelope).all(|(a, b)| *a <= b + tol.monotone_slack);
        checks.holds("pairing residual below envelope", dominated, "pairing residual exceeds ∫|f_n − f| d|μ_Λ|");
        checks.le("final pairing residual", r.pairing[last], tol.convergence);
        checks.le("final pairing envelope", r.envelope[last], tol.convergence);
        Ok(r.pairing[last])
    }
}

/// Strong-operator schedule max_x ‖(∫f_n − ∫f)x‖ with envelope Σ|f_n − f|‖K_ω‖.
fn check_operator_norm_chain(
    spec: &TrialSpec,
    fam: &OperatorProjectionFamily,
    f: &[C],
    chain: &[Vec<C>],
    probes: &[CVector],
    checks: &mut Checks,
) -> Result<f64> {
    let tol = &spec.tolerances;
    let sp = fam.measurable();
    let limit = integrate_operator(&MeasurableFunction::tabulated(sp, f.to_vec())?, fam)?;
    let norms: Vec<f64> = fam.kernel().iter().map(op_norm).collect();
    let mut strong = Vec::with_capacity(chain.len());
    let mut envelope = Vec::with_capacity(chain.len());
    for fnv in chain {
        let diff = integrate_operator(&MeasurableFunction::tabulated(sp, fnv.clone())?, fam)? - &limit;
        strong.push(probes.iter().map(|x| (&diff * x).norm()).fold(0.0, f64::max));
        envelope.push(fnv.iter().zip(f).zip(&norms).map(|((a, b), n)| (a - b).norm() * n).sum::<f64>());
    }
    let last = strong.len() - 1;
    checks.holds("strong envelope monotone", non_increasing(&envelope, tol.monotone_slack), format!("{envelope:?}"));
    let dominated = strong.iter().zip(&envelope).all(|(a, b)| *a <= b + tol.monotone_slack);
    checks.holds("strong residual below envelope", dominated, "‖(∫f_n − ∫f)x‖ exceeds Σ|f_n − f|‖K‖");
    checks.le("final strong residual", strong[last], tol.convergence);
    Ok(strong[last])
}

fn convergence(
    suite: Suite,
    spec: &TrialSpec,
    cell: &Cell,
    rng: &mut ChaCha8Rng,
    digest: &mut InstanceDigest,
    checks: &mut Checks,
) -> Result<Trial> {
    let m = cell.atoms;
    let (f, chain) = if suite == Suite::Mct {
        let f: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let damping = rng.random::<f64>();
        let chain = mct_chain(&f, spec.chain_len, damping);
        if !monotone(&chain) {
            return Ok(Trial::Rejected("chain is not monotone".into()));
        }
        (f.into_iter().map(|v| C::new(v, 0.0)).collect::<Vec<_>>(), chain)
    } else {
        let f = complex_values(rng, m, 0.5);
        let g: Vec<f64> = f.iter().map(|v| v.norm() + 0.5).collect();
        let chain = dct_chain(&f, &g, spec.chain_len, EpsSchedule::Geometric, rng);
        if !dominated(&chain, &g) {
            return Ok(Trial::Rejected("domination |f_n| ≤ g fails".into()));
        }
        (f, chain)
    };
    digest.scalars(&f);
    chain.iter().for_each(|c| digest.scalars(c));
    let seed = rng.random::<u64>();

    let residual = match cell.kind {
        CellKind::Vector | CellKind::Scalar => {
            let fam = normalized_vector_family(rng, &space_of(cell), m, digest);
            check_vector_chain(suite, spec, &fam, &f, &chain, seed, checks)?
        }
        CellKind::Operator => {
            let fam = normalized_operator_family(rng, cell.dim, m, digest);
            let probes: Vec<CVector> = (0..OPERATOR_PROBES).map(|_| random_unit_vector(rng, cell.dim)).collect();
            if suite == Suite::DctProper {
                check_operator_norm_chain(spec, &fam, &f, &chain, &probes, checks)?
            } else {
                let mut worst = 0.0f64;
                for x in &probes {
                    worst = worst.max(check_vector_chain(suite, spec, &slice_by_vector(&fam, x)?, &f, &chain, seed, checks)?);
                }
                worst
            }
        }
    };
    checks.residual(residual);
    Ok(Trial::Counted)
}

fn semivariation_trial(
    spec: &TrialSpec,
    cell: &Cell,
    rng: &mut ChaCha8Rng,
    digest: &mut InstanceDigest,
    checks: &mut Checks,
) -> Result<Trial> {
    let tol = &spec.tolerances;
    let slack = tol.bound_slack;
    let space = space_of(cell);
    let m = cell.atoms;
    let fam = normalized_vector_family(rng, &space, m, digest);
    let all = MeasurableSet::all(fam.measurable());
    let budget = Budget { seed: rng.random(), ..Budget::default() };
    let b = semivariation(&fam, &all, &budget)?;
    let mut violation = 0.0f64;

    violation = violation.max(b.lower - b.upper);
    checks.le("lower ≤ upper", b.lower, b.upper + slack);
    let four_sup = 4.0 * oracles::subset_sup(fam.kernel(), &space);
    violation = violation.max(b.upper - four_sup);
    checks.le("upper ≤ 4·subset sup", b.upper, four_sup + slack);
    checks.le("upper ≤ Σ‖k‖", b.upper, 1.0 + slack);
    let largest = fam.kernel().iter().map(|k| space.norm(k)).fold(0.0, f64::max);
    let total = space.norm(&fam.kernel().iter().fold(CVector::zeros(cell.dim), |acc, k| acc + k));
    checks.le("lower ≥ max ‖k‖", largest, b.lower + slack);
    checks.le("lower ≥ ‖Σk‖", total, b.lower + slack);

    if cell.norm == Norm::L2 && m <= 3 && cell.dim <= 3 {
        let grid = oracles::phase_grid_sup_l2(fam.kernel(), tol.grid_resolution);
        let outside = (b.lower - grid).max(grid - b.upper).max(0.0);
        violation = violation.max(outside - tol.grid_resolution);
        checks.holds(
            "grid oracle inside widened bracket",
            b.contains(grid, tol.grid_resolution),
            format!("grid {grid} vs [{}, {}]", b.lower, b.upper),
        );
    }

    // first coordinate as a scalar measure: semivariation is its total variation
    let scalar_space = SpaceDescriptor::new(1, cell.norm)?;
    let scalar_kernel: Vec<CVector> = fam.kernel().iter().map(|k| CVector::from_element(1, k[0])).collect();
    let tv: f64 = scalar_kernel.iter().map(|k| k[0].norm()).sum();
    let scalar = VectorProjectionFamily::from_kernel(scalar_space, fam.measurable(), scalar_kernel, 0.0)?;
    let sb = semivariation(&scalar, &all, &budget)?;
    let scalar_gap = (sb.lower - tv).abs().max((sb.upper - tv).abs());
    checks.le("scalar semivariation = total variation", scalar_gap, 1e-12 * tv.max(f64::MIN_POSITIVE));

    // μ^g: sampled sup ∫|g| d|μ_Λ| ≤ upper and lower ≤ sup|g|·|μ|_SV
    let g_values = complex_values(rng, m, 1.0);
    digest.scalars(&g_values);
    let g = MeasurableFunction::tabulated(fam.measurable(), g_values.clone())?;
    let weighted = family_of(&weighted_measure(&g, &fam)?);
    let bg = semivariation(&weighted, &all, &budget)?;
    let config = SampleConfig { enumeration_cap: 256, ..SampleConfig::default() };
    let sampled = dual_ball_sample_with(&space, 32, rng.random(), &config)
        .iter()
        .map(|l| g_values.iter().zip(fam.kernel()).map(|(gw, k)| gw.norm() * l.apply(k).map(|c| c.norm()).unwrap_or(0.0)).sum::<f64>())
        .fold(0.0, f64::max);
    checks.le("sampled ∫|g| d|μ_Λ| ≤ upper(μ^g)", sampled, bg.upper + slack);
    checks.le("lower(μ^g) ≤ sup|g|·upper(μ)", bg.lower, g.sup_norm() * b.upper + slack);
    let unit = family_of(&weighted_measure(&MeasurableFunction::constant(fam.measurable(), ONE), &fam)?);
    let bu = semivariation(&unit, &all, &budget)?;
    checks.holds("g ≡ 1 reproduces the bounds", bu.lower == b.lower && bu.upper == b.upper, format!("{bu:?} vs {b:?}"));

    // geometric tail: k_n = 2^{-n}u_n on a truncated space, E_n = {n, …, m−1}
    let tail = (-(m as f64)).exp2();
    let ids: Vec<String> = (0..m).map(|i| i.to_string()).collect();
    let truncated = AtomicSpace::truncated(ids, None, tail)?;
    let geometric: Vec<CVector> = (0..m).map(|n| unit_in(&space, rng) * C::new((-(n as f64)).exp2(), 0.0)).collect();
    let gfam = VectorProjectionFamily::from_kernel(space, &truncated, geometric, tail)?;
    let mut uppers = Vec::with_capacity(m + 1);
    for n in 0..=m {
        let set = MeasurableSet::from_indices(&truncated, n..m)?;
        let bn = semivariation(&gfam, &set, &budget)?;
        let bound = (1.0 - n as f64).exp2();
        violation = violation.max(bn.upper - bound);
        checks.le("upper(E_n) ≤ 2·2^{-n}", bn.upper, bound + slack);
        uppers.push(bn.upper);
    }
    checks.holds("upper(E_n) non-increasing", non_increasing(&uppers, slack), format!("{uppers:?}"));
    checks.le("upper(∅) within the tail bound", uppers[m], tail);

    checks.residual(violation.max(0.0));
    Ok(Trial::Counted)
}

fn boundedness(
    spec: &TrialSpec,
    cell: &Cell,
    trial: usize,
    rng: &mut ChaCha8Rng,
    digest: &mut InstanceDigest,
    checks: &mut Checks,
) -> Result<Trial> {
    let slack = spec.tolerances.bound_slack;
    let m = cell.atoms;
    let sp = AtomicSpace::indexed(m);
    let identical = trial.is_multiple_of(4);
    let base: Vec<C> = gaussian_vector(rng, m).iter().copied().collect();
    let family: Vec<Vec<C>> =
        (0..6).map(|_| if identical { base.clone() } else { gaussian_vector(rng, m).iter().copied().collect() }).collect();
    family.iter().for_each(|w| digest.scalars(w));
    let measures = family.iter().map(|w| ComplexMeasure::from_weights(&sp, w.clone())).collect::<Result<Vec<_>>>()?;

    let atom_bound = family.iter().flatten().map(|w| w.norm()).fold(0.0, f64::max);
    let set_bound = family.iter().map(|w| oracles::scalar_subset_sup(w)).fold(0.0, f64::max);
    let sup_tv = measures.iter().map(|mu| mu.total_variation_all()).fold(0.0, f64::max);
    let mut violation = 0.0f64;
    violation = violation.max(sup_tv - 2.0 * m as f64 * atom_bound);
    checks.le("sup TV ≤ 2·m·B_atom", sup_tv, 2.0 * m as f64 * atom_bound + slack);
    violation = violation.max(sup_tv - 4.0 * set_bound);
    checks.le("sup TV ≤ 4·B_set", sup_tv, 4.0 * set_bound * (1.0 + 1e-12));
    if identical {
        checks.holds("identical family certificate", sup_tv == measures[0].total_variation_all(), "sup TV differs from TV");
    }

    let mu = &measures[0];
    let nu = ComplexMeasure::from_weights(&sp, gaussian_vector(rng, m).iter().copied().collect())?;
    let zero_f = trial.is_multiple_of(5);
    let f_values = if zero_f { vec![ZERO; m] } else { complex_values(rng, m, 1.0) };
    digest.scalars(&f_values);
    let f = MeasurableFunction::tabulated(&sp, f_values)?;
    let limit = mu.integrate(&f)?;
    let tv = mu.total_variation_all();
    for i in 1..=spec.chain_len {
        let r = C::new(1.0 / i as f64, 0.0);
        for (mu_i, expected_defect) in [(mu.add(&nu.add(&mu.scaled(-ONE))?.scaled(r))?, None), (mu.scaled(ONE - r), Some(tv / i as f64))] {
            let defect = mu_i.setwise_defect(mu)?;
            let gap = (mu_i.integrate(&f)? - limit).norm();
            let bound = f.sup_norm() * defect;
            violation = violation.max(gap - bound);
            checks.le("setwise lemma", gap, bound * (1.0 + 1e-12) + slack);
            if let Some(expected) = expected_defect {
                checks.le("defect of (1−1/i)μ", (defect - expected).abs(), 1e-12 * tv);
            }
            if zero_f {
                checks.holds("f ≡ 0 gives no gap", gap == 0.0, gap);
            }
        }
    }
    checks.residual(violation.max(0.0));
    Ok(Trial::Counted)
}

type ScalarFn = Box<dyn Fn(C) -> C + Send + Sync>;

/// Test functions for the calculus checks, each with an independent scalar evaluator.
fn calculus_functions() -> Vec<(FunctionSpec, ScalarFn)> {
    let p1 = vec![ONE, ONE];
    let p2 = vec![C::new(2.0, 0.0), C::new(-0.5, -0.5), ONE];
    let p3 = vec![ZERO, -ONE, ZERO, C::new(1.0 / 6.0, 0.0)];
    let (a1, a2) = (C::new(0.5, 0.0), C::new(0.0, -0.3));
    vec![
        (FunctionSpec::Poly(p1.clone()), Box::new(move |z| oracles::horner(&p1, z))),
        (FunctionSpec::Poly(p2.clone()), Box::new(move |z| oracles::horner(&p2, z))),
        (FunctionSpec::Poly(p3.clone()), Box::new(move |z| oracles::horner(&p3, z))),
        (FunctionSpec::Exp(a1), Box::new(move |z| (a1 * z).exp())),
        (FunctionSpec::Exp(a2), Box::new(move |z| (a2 * z).exp())),
    ]
}

/// Eigenvalues with the flavour of `trial`: real, unimodular or general; every other
/// block of three trials repeats values to force degenerate spectra.
fn spectrum(d: usize, trial: usize, rng: &mut ChaCha8Rng) -> (Vec<C>, usize) {
    let degenerate = (trial / 3).is_multiple_of(2);
    let distinct = if degenerate { rng.random_range(1..=d.saturating_sub(1).max(1)) } else { d };
    let values: Vec<C> = (0..distinct)
        .map(|_| match trial % 3 {
            0 => C::new(rng.random_range(-2.0..2.0), 0.0),
            1 => C::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU),
            _ => C::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
        })
        .collect();
    let mut eigs = values.clone();
    while eigs.len() < d {
        eigs.push(values[rng.random_range(0..distinct)]);
    }
    eigs.shuffle(rng);
    (eigs, distinct)
}

fn spectral(
    spec: &TrialSpec,
    cell: &Cell,
    trial: usize,
    rng: &mut ChaCha8Rng,
    digest: &mut InstanceDigest,
    checks: &mut Checks,
) -> Result<Trial> {
    let tol = &spec.tolerances;
    let d = cell.dim;
    let (eigs, distinct) = spectrum(d, trial, rng);
    let u = haar_unitary(rng, d);
    digest.scalars(&eigs);
    digest.matrix(&u);
    let t = oracles::conjugated_diagonal(&u, &eigs, |z| z);
    let scale = op_norm(&t).max(f64::MIN_POSITIVE);

    let e = spectral_measure_of(&t, None)?;
    checks.holds("cluster count", e.eigenvalues().len() == distinct, format!("{} clusters for {distinct} values", e.eigenvalues().len()));
    checks.le("projection invariants", e.defects().max(), tol.projection);
    let reconstruction = op_norm(&(e.reconstruct() - &t)) / scale;
    checks.le("reconstruction", reconstruction, tol.reconstruction);
    checks.residual(reconstruction);

    let functions = calculus_functions();
    let mut images = Vec::with_capacity(functions.len());
    for (spec_f, oracle_f) in &functions {
        let got = e.apply(spec_f)?;
        let oracle = oracles::conjugated_diagonal(&u, &eigs, oracle_f);
        let err = fro(&(&got - &oracle)) / fro(&oracle).max(1.0);
        checks.le(&format!("f(T) for {}", spec_f.name()), err, tol.calculus);
        images.push(got);
    }
    for (i, j) in [(0, 1), (1, 3), (3, 4), (2, 4)] {
        let scale = (fro(&images[i]) * fro(&images[j])).max(1.0);
        let r = check_multiplicative(&e, &functions[i].0, &functions[j].0)?;
        checks.le("multiplicativity", r, tol.multiplicative * scale);
    }

    // same operator assembled from permuted eigenvector columns
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    let u2 = CMatrix::from_fn(d, d, |r, c| u[(r, perm[c])]);
    let eigs2: Vec<C> = perm.iter().map(|&p| eigs[p]).collect();
    let e2 = spectral_measure_of(&oracles::conjugated_diagonal(&u2, &eigs2, |z| z), None)?;
    if e2.eigenvalues().len() != e.eigenvalues().len() {
        checks.holds("uniqueness", false, "cluster counts differ under column permutation");
    } else {
        let k = e.eigenvalues().len();
        let sets: Vec<Vec<usize>> = if k <= 10 {
            (1u32..(1 << k)).map(|mask| (0..k).filter(|j| mask & (1 << j) != 0).collect()).collect()
        } else {
            (0..k).map(|j| vec![j]).collect()
        };
        let mut worst = 0.0f64;
        for set in sets {
            let a = MeasurableSet::from_indices(e.measurable(), set.iter().copied())?;
            let b = MeasurableSet::from_indices(e2.measurable(), set)?;
            worst = worst.max(op_norm(&(e.measure_of(&a)? - e2.measure_of(&b)?)));
        }
        checks.le("uniqueness under column permutation", worst, tol.uniqueness);
    }

    // a nilpotent perturbation coupling the two most separated eigenvectors must be rejected;
    // for a scalar operator the defect is second order, so the coupling is made larger
    if d > 1 {
        let (mut i, mut j, mut gap) = (0, 1, 0.0f64);
        for a in 0..d {
            for b in 0..d {
                if (eigs[a] - eigs[b]).norm() > gap {
                    (i, j, gap) = (a, b, (eigs[a] - eigs[b]).norm());
                }
            }
        }
        let strength = if gap < 1e-3 * scale { 1e-4 } else { 1e-6 };
        let coupling = u.column(i) * u.column(j).adjoint() * C::new(strength * scale, 0.0);
        match spectral_measure_of(&(&t + coupling), None) {
            Err(Error::NotNormal { defect }) => checks.holds("non-normal defect reported", defect > 1e-10, defect),
            other => checks.holds("non-normal input rejected", false, format!("{:?}", other.map(|e| e.eigenvalues().to_vec()))),
        }
    }
    Ok(Trial::Counted)
}

fn probability_measures(rng: &mut ChaCha8Rng, sp: &SpaceRef, count: usize, digest: &mut InstanceDigest) -> Result<Vec<ComplexMeasure>> {
    (0..count)
        .map(|_| {
            let raw: Vec<f64> = (0..sp.len()).map(|_| rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum::<f64>().max(f64::MIN_POSITIVE);
            let weights: Vec<C> = raw.iter().map(|w| C::new(w / total, 0.0)).collect();
            digest.scalars(&weights);
            ComplexMeasure::from_weights(sp, weights)
        })
        .collect()
}

fn series(spec: &TrialSpec, cell: &Cell, rng: &mut ChaCha8Rng, digest: &mut InstanceDigest, checks: &mut Checks) -> Result<Trial> {
    let tol = &spec.tolerances;
    let (n, reference) = (SERIES_TERMS, SERIES_REFERENCE_TERMS);
    let tail = (-(n as f64)).exp2();
    let sp = AtomicSpace::indexed(cell.atoms);
    let lams = probability_measures(rng, &sp, reference, digest)?;
    let f_values = complex_values(rng, cell.atoms, 1.0);
    digest.scalars(&f_values);
    let f = MeasurableFunction::tabulated(&sp, f_values)?;
    let sup = f.sup_norm().max(f64::MIN_POSITIVE);
    let roundoff = 16.0 * f64::EPSILON;

    let gap = match cell.kind {
        CellKind::Vector | CellKind::Scalar => {
            let space = space_of(cell);
            let xs: Vec<CVector> = (0..reference).map(|_| unit_in(&space, rng)).collect();
            xs.iter().for_each(|x| digest.vector(x));
            let short = family_of(&series_vector_measure(&lams[..n], &xs[..n], space)?);
            let long = family_of(&series_vector_measure(&lams, &xs, space)?);
            let certified = integrate_vector_certified(&f, &short)?;
            let closed = series_integral(&f, &lams[..n], &xs[..n])?;
            let gap = space.norm(&(&certified.value - &closed)) / sup;
            checks.le("integral equals the closed form", gap, tol.series);
            let against_reference = space.norm(&(&certified.value - integrate_vector(&f, &long)?));
            checks.le("tail bound against reference run", against_reference, tail * f.sup_norm() + roundoff * sup);
            checks.holds("certified radius", certified.error_bound == f.sup_norm() * tail, certified.error_bound);
            let all = MeasurableSet::all(&sp);
            let mass_gap = space.norm(&(short.to_measure().measure_of(&all)? - long.to_measure().measure_of(&all)?));
            checks.le("μ(Ω) tail", mass_gap, tail + roundoff);
            gap
        }
        CellKind::Operator => {
            let ts: Vec<CMatrix> = (0..reference).map(|_| haar_unitary(rng, cell.dim)).collect();
            ts.iter().for_each(|t| digest.matrix(t));
            let x = random_unit_vector(rng, cell.dim);
            digest.vector(&x);
            let short = series_operator_measure(&lams[..n], &ts[..n])?;
            let long = series_operator_measure(&lams, &ts)?;
            let fam_short = crate::operator_measure::operator_family_of(&short);
            let fam_long = crate::operator_measure::operator_family_of(&long);
            let value = integrate_operator(&f, &fam_short)? * &x;
            let closed = series_operator_integral(&f, &lams[..n], &ts[..n], &x)?;
            let gap = (&value - &closed).norm() / sup;
            checks.le("integral equals the closed form", gap, tol.series);
            let against_reference = (&value - integrate_operator(&f, &fam_long)? * &x).norm();
            checks.le("tail bound against reference run", against_reference, tail * f.sup_norm() + roundoff * sup);
            gap
        }
    };
    checks.residual(gap);
    Ok(Trial::Counted)
}

fn quantum(spec: &TrialSpec, cell: &Cell, rng: &mut ChaCha8Rng, digest: &mut InstanceDigest, checks: &mut Checks) -> Result<Trial> {
    let tol = &spec.tolerances;
    let d = cell.dim;
    let m = cell.atoms;
    let povm: Povm = random_povm(rng, d, m);
    let rank = rng.random_range(1..=d);
    let rho: DensityOperator = random_state(rng, d, rank);
    povm.effects().iter().for_each(|p| digest.matrix(p));
    digest.matrix(rho.matrix());
    let sp = povm.measurable().clone();

    let probs = povm_probabilities(&povm, &rho)?;
    let min_p = probs.weights().iter().map(|w| w.re).fold(f64::INFINITY, f64::min);
    let imag = probs.weights().iter().map(|w| w.im.abs()).fold(0.0, f64::max);
    let total_defect = (probs.weights().iter().map(|w| w.re).sum::<f64>() - 1.0).abs();
    checks.le("probabilities non-negative", -min_p, 1e-12);
    checks.le("probabilities real", imag, tol.probability);
    checks.le("probabilities sum to one", total_defect, tol.probability);

    let f_pos: Vec<f64> = (0..m).map(|_| 3.0 * rng.random::<f64>()).collect();
    let integrated = povm_integrate(&MeasurableFunction::tabulated_real(&sp, &f_pos)?, &povm)?;
    checks.le("∫f dP ⪰ 0 for f ≥ 0", -min_hermitian_eigenvalue(&integrated), tol.positivity);

    let inst: Instrument = random_instrument(rng, d, m, 2);
    let isp = inst.measurable().clone();
    let f_values: Vec<C> = gaussian_vector(rng, m).iter().copied().collect();
    digest.scalars(&f_values);
    let f = MeasurableFunction::tabulated(&isp, f_values.clone())?;
    let t = gaussian_matrix(rng, d, d);
    let s = operation_integrate(&f, &inst)?;
    let lhs = trace(&(&t * s.apply(rho.matrix())?));
    let projected = operation_projection(&inst, &t, &rho)?;
    let rhs = projected.integrate(&f)?;
    let scale = f_values.iter().zip(projected.weights()).map(|(a, b)| a.norm() * b.norm()).sum::<f64>().max(1.0);
    let contract = (lhs - rhs).norm() / scale;
    checks.le("trace-pairing contract", contract, tol.contract);

    let out = instrument_apply(&inst, &MeasurableSet::all(&isp), &rho)?;
    checks.le("trace preserved on Ω", (out.trace() - rho.trace()).abs(), tol.probability);
    let subset = MeasurableSet::from_indices(&isp, (0..m).filter(|_| rng.random::<bool>()))?;
    let partial = instrument_apply(&inst, &subset, &rho)?;
    checks.le("trace not increased on A", partial.trace() - rho.trace(), tol.probability);

    // bilinearity of (T, ρ) ↦ 𝓔_{T,ρ}(A)
    let (a, b) = (C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), C::new(rng.random_range(-1.0..1.0), 0.5));
    let t2 = gaussian_matrix(rng, d, d);
    let rho2 = random_state(rng, d, d);
    let (alpha, beta) = (rng.random::<f64>(), rng.random::<f64>());
    let mixed = DensityOperator::new(rho.matrix() * C::new(alpha, 0.0) + rho2.matrix() * C::new(beta, 0.0))?;
    let combo_t = operation_projection(&inst, &(&t * a + &t2 * b), &rho)?.measure_of(&subset)?;
    let split_t =
        operation_projection(&inst, &t, &rho)?.measure_of(&subset)? * a + operation_projection(&inst, &t2, &rho)?.measure_of(&subset)? * b;
    let combo_r = operation_projection(&inst, &t, &mixed)?.measure_of(&subset)?;
    let split_r = operation_projection(&inst, &t, &rho)?.measure_of(&subset)? * alpha
        + operation_projection(&inst, &t, &rho2)?.measure_of(&subset)? * beta;
    let bilinear_scale = (fro(&t) + fro(&t2)).max(1.0);
    let bilinear = (combo_t - split_t).norm().max((combo_r - split_r).norm()) / bilinear_scale;
    checks.le("bilinearity in (T, ρ)", bilinear, tol.contract);
    checks.le(
        "pairing with I is the trace",
        (trace_pair(&crate::linalg::identity(d), &rho)? - C::new(rho.trace(), 0.0)).norm(),
        tol.probability,
    );

    let u = haar_unitary(rng, d);
    let basis: Vec<CVector> = (0..d).map(|k| u.column(k).into_owned()).collect();
    let projective = Povm::projective(&basis)?;
    let luders = Instrument::luders(&projective)?;
    let report = mixed_state_extension_check(&projective, &luders, &basis, ExtensionMode::StateEmbedding)?;
    checks.le("Lüders extension", report.max_residual, tol.extension);

    checks.residual(total_defect.max(contract).max(report.max_residual));
    Ok(Trial::Counted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normed::dual_ball_sample;

    fn family(d: usize, m: usize, seed: u64) -> VectorProjectionFamily {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cell = Cell { kind: CellKind::Vector, norm: Norm::L2, dim: d, atoms: m };
        let mut digest = InstanceDigest::new(Suite::Mct, &cell, seed);
        normalized_vector_family(&mut rng, &space_of(&cell), m, &mut digest)
    }

    #[test]
    fn constant_chain_has_zero_residual() {
        let fam = family(3, 4, 1);
        let f: Vec<C> = (0..4).map(|i| C::new(i as f64, 0.0)).collect();
        let chain = vec![f.clone(); 5];
        let ls = dual_ball_sample(fam.space(), 8, 2);
        let r = vector_chain_residuals(&fam, &f, &chain, &ls).unwrap();
        assert_eq!(r.pairing[0], 0.0);
        assert_eq!(r.norm[0], 0.0);
    }

    #[test]
    fn scaled_chain_decays_geometrically() {
        // f_n = (1 − 2^{-n}) f: |Λ(∫f_n − ∫f)| = 2^{-n}|Λ(∫f)| ≤ 2^{-n}‖∫f‖
        let fam = family(3, 5, 3);
        let f: Vec<C> = (0..5).map(|i| C::new(0.2 * i as f64, 0.0)).collect();
        let chain: Vec<Vec<C>> = (1..=20).map(|n| f.iter().map(|v| v * (1.0 - 0.5f64.powi(n))).collect()).collect();
        let ls = dual_ball_sample(fam.space(), 8, 4);
        let r = vector_chain_residuals(&fam, &f, &chain, &ls).unwrap();
        let whole =
            fam.space().norm(&integrate_vector(&MeasurableFunction::tabulated(fam.measurable(), f.clone()).unwrap(), &fam).unwrap());
        for (n, p) in r.pairing.iter().enumerate() {
            assert!(*p <= 0.5f64.powi(n as i32 + 1) * whole * (1.0 + 1e-12));
        }
        assert!((r.norm[19] - 0.5f64.powi(20) * whole).abs() <= 1e-15);
    }

    #[test]
    fn harmonic_dct_chain_residual() {
        // ε_n = 1/n, g ≡ 1, f = 0: envelope ≤ (1/n)·Σ‖k‖ = 1/n
        let fam = family(2, 6, 5);
        let f = vec![ZERO; 6];
        let g = vec![1.0; 6];
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let chain = dct_chain(&f, &g, 30, EpsSchedule::Harmonic, &mut rng);
        assert!(dominated(&chain, &g));
        let ls = dual_ball_sample(fam.space(), 8, 7);
        let r = vector_chain_residuals(&fam, &f, &chain, &ls).unwrap();
        for (n, e) in r.envelope.iter().enumerate() {
            assert!(*e <= 1.0 / (n + 1) as f64 + 1e-15);
            assert!(r.pairing[n] <= *e + 1e-15);
        }
    }

    #[test]
    fn exact_dct_chain_is_zero() {
        let fam = family(2, 3, 8);
        let f = vec![C::new(0.1, 0.2); 3];
        let chain = vec![f.clone(); 4];
        let ls = dual_ball_sample(fam.space(), 4, 9);
        let r = vector_chain_residuals(&fam, &f, &chain, &ls).unwrap();
        assert!(r.norm.iter().chain(&r.pairing).all(|v| *v == 0.0));
    }

    #[test]
    fn domination_violation_is_detected() {
        let f = vec![C::new(0.4, 0.0); 3];
        let g = vec![0.2; 3];
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let chain = dct_chain(&f, &g, 5, EpsSchedule::Geometric, &mut rng);
        assert!(!dominated(&chain, &g));
    }

    #[test]
    fn mct_chain_is_monotone_and_saturates() {
        let f = [0.3, 0.9, 0.0, 0.5];
        let chain = mct_chain(&f, 40, 0.7);
        assert!(monotone(&chain));
        let last = chain.last().unwrap();
        for (a, b) in last.iter().zip(f) {
            assert!((a.re - b).abs() <= b * 1e-12);
        }
    }

    #[test]
    fn spectra_cover_degenerate_and_flavours() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (eigs, distinct) = spectrum(6, 0, &mut rng);
        assert!(distinct < 6 && eigs.iter().all(|e| e.im == 0.0));
        let (eigs, distinct) = spectrum(6, 4, &mut rng);
        assert_eq!(distinct, 6);
        assert!(eigs.iter().all(|e| (e.norm() - 1.0).abs() < 1e-15));
    }
}
