//! Finite-dimensional complex normed spaces ℂ^d under ℓ¹, ℓ² or ℓ^∞, their
//! duals under the bilinear pairing Λ(x) = Σ c_k x_k, and the dual-ball
//! optimizer behind semivariation bounds.
//!
//! The space is reflexive, so the canonical injection into the bidual is the
//! identity in these coordinates and is not represented separately.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, complex_gaussian, CVector, C, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    #[serde(rename = "l1")]
    L1,
    #[serde(rename = "l2")]
    L2,
    #[serde(rename = "linf")]
    LInf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::LInf];

    /// Conjugate exponent.
    pub fn dual(self) -> Norm {
        match self {
            Norm::L1 => Norm::LInf,
            Norm::L2 => Norm::L2,
            Norm::LInf => Norm::L1,
        }
    }

    pub fn of<'a>(self, x: impl IntoIterator<Item = &'a C>) -> f64 {
        let moduli = x.into_iter().map(|c| c.norm());
        match self {
            Norm::L1 => moduli.sum(),
            Norm::L2 => moduli.map(|m| m * m).sum::<f64>().sqrt(),
            Norm::LInf => moduli.fold(0.0, f64::max),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::LInf => "linf",
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::LInf),
            other => Err(Error::InvalidInput(format!("unknown norm `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDescriptorJson", into = "SpaceDescriptorJson")]
pub struct SpaceDescriptor {
    dim: usize,
    norm: Norm,
}

#[derive(Serialize, Deserialize)]
struct SpaceDescriptorJson {
    dim: usize,
    norm: Norm,
}

impl TryFrom<SpaceDescriptorJson> for SpaceDescriptor {
    type Error = Error;

    fn try_from(json: SpaceDescriptorJson) -> Result<Self> {
        SpaceDescriptor::new(json.dim, json.norm)
    }
}

impl From<SpaceDescriptor> for SpaceDescriptorJson {
    fn from(s: SpaceDescriptor) -> Self {
        SpaceDescriptorJson { dim: s.dim, norm: s.norm }
    }
}

impl SpaceDescriptor {
    pub fn new(dim: usize, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Ok(Self { dim, norm })
    }

    pub fn hilbert(dim: usize) -> Result<Self> {
        Self::new(dim, Norm::L2)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_kind(&self) -> Norm {
        self.norm
    }

    pub fn norm(&self, x: &CVector) -> f64 {
        self.norm.of(x.iter())
    }

    pub fn dual_norm(&self, coeffs: &CVector) -> f64 {
        self.norm.dual().of(coeffs.iter())
    }

    /// The dual space X*, whose dual is X again.
    pub fn dual(&self) -> SpaceDescriptor {
        SpaceDescriptor { dim: self.dim, norm: self.norm.dual() }
    }

    pub fn check(&self, x: &CVector) -> Result<()> {
        check_dim(self.dim, x.len())
    }
}

/// A continuous linear functional Λ ∈ X* acting by Λ(x) = Σ c_k x_k.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    coeffs: CVector,
}

impl Functional {
    pub fn new(coeffs: CVector) -> Self {
        Self { coeffs }
    }

    pub fn from_slice(coeffs: &[C]) -> Self {
        Self::new(CVector::from_column_slice(coeffs))
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(CVector::zeros(dim))
    }

    /// The k-th dual basis functional e_k*.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        let mut c = CVector::zeros(dim);
        c[k] = ONE;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &CVector {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn apply(&self, x: &CVector) -> Result<C> {
        check_dim(self.coeffs.len(), x.len())?;
        Ok(self.coeffs.iter().zip(x.iter()).map(|(c, x)| c * x).sum())
    }

    pub fn norm_in(&self, space: &SpaceDescriptor) -> f64 {
        space.dual_norm(&self.coeffs)
    }

    pub fn scaled(&self, a: C) -> Self {
        Self::new(&self.coeffs * a)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self::new(&self.coeffs + &other.coeffs))
    }
}

pub fn pair(functional: &Functional, x: &CVector) -> Result<C> {
    functional.apply(x)
}

fn unit_phase(z: C) -> C {
    let r = z.norm();
    if r > 0.0 {
        z / r
    } else {
        ONE
    }
}

/// A functional of dual norm at most one with Λ(w) = ‖w‖.
pub fn norming_functional(space: &SpaceDescriptor, w: &CVector) -> Functional {
    let d = w.len();
    let coeffs = match space.norm {
        Norm::L2 => {
            let n = w.norm();
            if n > 0.0 {
                w.map(|z| z.conj() / n)
            } else {
                CVector::zeros(d)
            }
        }
        Norm::L1 => w.map(|z| unit_phase(z).conj()),
        Norm::LInf => {
            let mut c = CVector::zeros(d);
            if let Some((k, z)) = w.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())) {
                c[k] = unit_phase(*z).conj();
            }
            c
        }
    };
    Functional::new(coeffs)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleConfig {
    /// Angles per coordinate when enumerating extreme points of polytope dual balls.
    pub phases: usize,
    /// Enumeration is skipped when it would produce more functionals than this.
    pub enumeration_cap: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { phases: 8, enumeration_cap: 4096 }
    }
}

pub fn dual_ball_sample(space: &SpaceDescriptor, count: usize, seed: u64) -> Vec<Functional> {
    dual_ball_sample_with(space, count, seed, &SampleConfig::default())
}

/// Points of the dual unit ball: phase-quantized extreme points where the dual
/// ball is a polytope and the enumeration fits the cap, followed by `count`
/// random points. Deterministic in `seed`.
pub fn dual_ball_sample_with(space: &SpaceDescriptor, count: usize, seed: u64, config: &SampleConfig) -> Vec<Functional> {
    let d = space.dim;
    let phases = config.phases.max(1);
    let roots: Vec<C> = (0..phases).map(|k| C::from_polar(1.0, TAU * k as f64 / phases as f64)).collect();
    let mut out = Vec::new();

    match space.norm.dual() {
        Norm::LInf => {
            // extreme points of the polydisc: unimodular vectors
            let total = (phases as f64).powi(d as i32);
            if total <= config.enumeration_cap as f64 {
                let total = total as usize;
                for mut code in 0..total {
                    let c = CVector::from_fn(d, |_, _| {
                        let r = roots[code % phases];
                        code /= phases;
                        r
                    });
                    out.push(Functional::new(c));
                }
            }
        }
        Norm::L1 => {
            if d * phases <= config.enumeration_cap {
                for k in 0..d {
                    for r in &roots {
                        let mut c = CVector::zeros(d);
                        c[k] = *r;
                        out.push(Functional::new(c));
                    }
                }
            }
        }
        Norm::L2 => {
            for k in 0..d {
                out.push(Functional::coordinate(d, k));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let c = match space.norm.dual() {
            Norm::LInf => CVector::from_fn(d, |_, _| C::from_polar(1.0, rng.random::<f64>() * TAU)),
            dual => {
                let g = CVector::from_fn(d, |_, _| complex_gaussian(&mut rng));
                let n = dual.of(g.iter());
                if n > 0.0 {
                    g.unscale(n)
                } else {
                    CVector::zeros(d)
                }
            }
        };
        out.push(Functional::new(c));
    }
    out
}

/// Certified bracket `lower ≤ value ≤ upper` for a quantity defined as a supremum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub method: String,
}

impl BoundPair {
    pub fn exact(value: f64, method: impl Into<String>) -> Self {
        Self { lower: value, upper: value, method: method.into() }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        self.lower - slack <= value && value <= self.upper + slack
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Budget {
    pub samples: usize,
    /// Best sampled functionals refined by phase-alignment ascent.
    pub starts: usize,
    pub ascent_iters: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub sampling: SampleConfig,
    pub max_subset_atoms: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            samples: 64,
            starts: 8,
            ascent_iters: 50,
            rel_tol: 1e-12,
            seed: 0x5eed,
            sampling: SampleConfig::default(),
            max_subset_atoms: 20,
        }
    }
}

/// Σ_ω |Λ(v_ω)|.
pub fn abs_sum(functional: &Functional, vectors: &[CVector]) -> f64 {
    vectors.iter().map(|v| functional.coeffs.iter().zip(v.iter()).map(|(c, x)| c * x).sum::<C>().norm()).sum()
}

/// Objective values along the phase-alignment ascent started at `start`.
///
/// Each step rotates every Λ(v_ω) onto the positive real axis, folds the
/// rotations into w = Σ e^{iθ_ω} v_ω, and moves to the norming functional of w.
/// The objective can only grow: Σ|Λ'(v_ω)| ≥ Λ'(w) = ‖w‖ ≥ Σ|Λ(v_ω)|.
pub fn phase_ascent_trace(
    vectors: &[CVector],
    space: &SpaceDescriptor,
    start: &Functional,
    iters: usize,
    rel_tol: f64,
) -> (Vec<f64>, Functional) {
    let mut current = start.clone();
    let mut value = abs_sum(&current, vectors);
    let mut trace = vec![value];
    for _ in 0..iters {
        let mut w = CVector::zeros(space.dim);
        for v in vectors {
            let phase = unit_phase(current.apply(v).unwrap_or(ZERO)).conj();
            w.axpy(phase, v, ONE);
        }
        let next = norming_functional(space, &w);
        let next_value = abs_sum(&next, vectors);
        trace.push(next_value);
        let improved = next_value > value * (1.0 + rel_tol);
        if next_value >= value {
            current = next;
            value = next_value;
        }
        if !improved {
            break;
        }
    }
    (trace, current)
}

/// Largest ‖Σ_{ω∈F} v_ω‖ over all subsets F, by depth-first enumeration.
pub fn max_subset_norm(vectors: &[CVector], space: &SpaceDescriptor) -> f64 {
    fn walk(vectors: &[CVector], space: &SpaceDescriptor, acc: &CVector, best: &mut f64) {
        match vectors.split_first() {
            None => *best = best.max(space.norm(acc)),
            Some((head, rest)) => {
                walk(rest, space, acc, best);
                walk(rest, space, &(acc + head), best);
            }
        }
    }
    let mut best = 0.0;
    walk(vectors, space, &CVector::zeros(space.dim), &mut best);
    best
}

/// Brackets sup_{‖Λ‖≤1} Σ_ω |Λ(v_ω)|, the semivariation of the atomic vector
/// measure with atoms `vectors`.
///
/// The lower bound is the best sampled functional after phase-alignment ascent.
/// The upper bound is the smaller of the termwise Hölder bound Σ‖v_ω‖ and four
/// times the largest subset-sum norm; the latter needs 2^m subsets and is only
/// attempted for m ≤ `budget.max_subset_atoms`.
pub fn abs_sum_dual_sup(vectors: &[CVector], space: &SpaceDescriptor, budget: &Budget) -> Result<BoundPair> {
    for v in vectors {
        space.check(v)?;
    }
    let nonzero: Vec<CVector> = vectors.iter().filter(|v| v.iter().any(|c| *c != ZERO)).cloned().collect();
    if nonzero.is_empty() {
        return Ok(BoundPair::exact(0.0, "zero"));
    }

    let mut candidates = dual_ball_sample_with(space, budget.samples, budget.seed, &budget.sampling);
    candidates.extend(nonzero.iter().map(|v| norming_functional(space, v)));
    let total: CVector = nonzero.iter().fold(CVector::zeros(space.dim), |acc, v| acc + v);
    candidates.push(norming_functional(space, &total));

    let mut scored: Vec<(f64, usize)> =
        candidates.iter().enumerate().map(|(i, f)| (abs_sum(f, &nonzero) / f.norm_in(space).max(1.0), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut lower = scored[0].0;
    for &(_, i) in scored.iter().take(budget.starts.max(1)) {
        let (_, best) = phase_ascent_trace(&nonzero, space, &candidates[i], budget.ascent_iters, budget.rel_tol);
        lower = lower.max(abs_sum(&best, &nonzero) / best.norm_in(space).max(1.0));
    }

    let holder: f64 = nonzero.iter().map(|v| space.norm(v)).sum();
    let (upper, method) = if nonzero.len() <= budget.max_subset_atoms {
        let four_sup = 4.0 * max_subset_norm(&nonzero, space);
        if four_sup < holder {
            (four_sup, "phase-ascent/four-subset-sup")
        } else {
            (holder, "phase-ascent/holder")
        }
    } else {
        (holder, "phase-ascent/holder (subset enumeration refused)")
    };

    Ok(BoundPair { lower: lower.min(upper), upper, method: method.to_string() })
}
