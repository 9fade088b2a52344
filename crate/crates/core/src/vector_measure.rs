//! Vector measures on atomic spaces and the projection families they generate.
//!
//! A [`VectorProjectionFamily`] stores one kernel vector k_ω per atom and
//! realizes the family {μ_Λ} through μ_Λ({ω}) = Λ(k_ω). In finite dimension
//! every such family is generated by the vector measure with the same atoms,
//! and every bounded function is properly integrable, so the integral is
//! returned as a vector of X rather than an element of X**.
//!
//! Tail bounds (`tail_norm_bound`, `tail_bound`) bound the semivariation of the
//! part of the true measure that the listed atoms do not carry, whether it
//! comes from omitted atoms or from omitted terms of a series. They dominate
//! ‖μ(F)‖ for every F and become error radii of integrals.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{vector_from_json, vector_json, Cx};
use crate::linalg::{CVector, C, ZERO};
use crate::measurable::{same_space, AtomicSpace, Certified, ComplexMeasure, MeasurableFunction, MeasurableSet, SpaceRef};
use crate::normed::{abs_sum_dual_sup, BoundPair, Budget, Functional, SpaceDescriptor};

fn check_tail(tail: f64) -> Result<()> {
    if tail.is_finite() && tail >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("tail bound {tail} must be finite and non-negative")))
    }
}

fn check_vectors(space: &SpaceDescriptor, measurable: &AtomicSpace, vectors: &[CVector]) -> Result<()> {
    if vectors.len() != measurable.len() {
        return Err(Error::DimensionMismatch { expected: measurable.len(), found: vectors.len() });
    }
    vectors.iter().try_for_each(|v| space.check(v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorMeasureJson", into = "VectorMeasureJson")]
pub struct VectorMeasure {
    space: SpaceDescriptor,
    measurable: SpaceRef,
    atom_vectors: Vec<CVector>,
    tail_norm_bound: f64,
}

impl VectorMeasure {
    pub fn new(space: SpaceDescriptor, measurable: &SpaceRef, atom_vectors: Vec<CVector>, tail_norm_bound: f64) -> Result<Self> {
        check_vectors(&space, measurable, &atom_vectors)?;
        check_tail(tail_norm_bound)?;
        Ok(Self { space, measurable: measurable.clone(), atom_vectors, tail_norm_bound })
    }

    pub fn zero(space: SpaceDescriptor, measurable: &SpaceRef) -> Self {
        let atom_vectors = vec![CVector::zeros(space.dim()); measurable.len()];
        Self { space, measurable: measurable.clone(), atom_vectors, tail_norm_bound: 0.0 }
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn measurable(&self) -> &SpaceRef {
        &self.measurable
    }

    pub fn atom_vectors(&self) -> &[CVector] {
        &self.atom_vectors
    }

    pub fn tail_norm_bound(&self) -> f64 {
        self.tail_norm_bound
    }

    /// μ(E) = Σ_{ω∈E} μ({ω}).
    pub fn measure_of(&self, set: &MeasurableSet) -> Result<CVector> {
        set.check_space(&self.measurable)?;
        Ok(set.indices().fold(CVector::zeros(self.space.dim()), |acc, i| acc + &self.atom_vectors[i]))
    }
}

#[derive(Serialize, Deserialize)]
struct VectorMeasureJson {
    space: SpaceDescriptor,
    measurable: AtomicSpace,
    atom_vectors: Vec<Vec<Cx>>,
    #[serde(default)]
    tail_norm_bound: f64,
}

impl TryFrom<VectorMeasureJson> for VectorMeasure {
    type Error = Error;

    fn try_from(json: VectorMeasureJson) -> Result<Self> {
        let vectors = json.atom_vectors.iter().map(|v| vector_from_json(v)).collect();
        VectorMeasure::new(json.space, &Arc::new(json.measurable), vectors, json.tail_norm_bound)
    }
}

impl From<VectorMeasure> for VectorMeasureJson {
    fn from(mu: VectorMeasure) -> Self {
        VectorMeasureJson {
            space: mu.space,
            measurable: (*mu.measurable).clone(),
            atom_vectors: mu.atom_vectors.iter().map(vector_json).collect(),
            tail_norm_bound: mu.tail_norm_bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorProjectionFamily {
    space: SpaceDescriptor,
    measurable: SpaceRef,
    kernel: Vec<CVector>,
    tail_bound: f64,
}

impl VectorProjectionFamily {
    pub fn from_kernel(space: SpaceDescriptor, measurable: &SpaceRef, kernel: Vec<CVector>, tail_bound: f64) -> Result<Self> {
        check_vectors(&space, measurable, &kernel)?;
        check_tail(tail_bound)?;
        Ok(Self { space, measurable: measurable.clone(), kernel, tail_bound })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn measurable(&self) -> &SpaceRef {
        &self.measurable
    }

    pub fn kernel(&self) -> &[CVector] {
        &self.kernel
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// The generating vector measure.
    pub fn to_measure(&self) -> VectorMeasure {
        VectorMeasure {
            space: self.space,
            measurable: self.measurable.clone(),
            atom_vectors: self.kernel.clone(),
            tail_norm_bound: self.tail_bound,
        }
    }

    fn kernel_on(&self, set: &MeasurableSet) -> Result<Vec<CVector>> {
        set.check_space(&self.measurable)?;
        Ok(set.indices().map(|i| self.kernel[i].clone()).collect())
    }
}

pub fn family_of(mu: &VectorMeasure) -> VectorProjectionFamily {
    VectorProjectionFamily {
        space: mu.space,
        measurable: mu.measurable.clone(),
        kernel: mu.atom_vectors.clone(),
        tail_bound: mu.tail_norm_bound,
    }
}

/// The scalar measure μ_Λ with weights Λ(k_ω); its tail variation is at most ‖Λ‖·tail.
pub fn project(fam: &VectorProjectionFamily, functional: &Functional) -> Result<ComplexMeasure> {
    let weights = fam.kernel.iter().map(|k| functional.apply(k)).collect::<Result<Vec<C>>>()?;
    ComplexMeasure::new(&fam.measurable, weights, functional.norm_in(&fam.space) * fam.tail_bound)
}

/// ∫ f dμ = Σ_ω f(ω)·k_ω, the vector whose pairing with every Λ is ∫ f dμ_Λ.
pub fn integrate_vector(f: &MeasurableFunction, fam: &VectorProjectionFamily) -> Result<CVector> {
    integrate_vector_certified(f, fam).map(|c| c.value)
}

/// The integral with norm error radius sup|f|·tail.
pub fn integrate_vector_certified(f: &MeasurableFunction, fam: &VectorProjectionFamily) -> Result<Certified<CVector>> {
    f.check_space(&fam.measurable)?;
    f.ensure_integrable()?;
    let mut acc = CVector::zeros(fam.space.dim());
    for (value, k) in f.values().iter().zip(&fam.kernel) {
        if *value != ZERO {
            acc.axpy(*value, k, C::new(1.0, 0.0));
        }
    }
    Ok(Certified { value: acc, error_bound: f.sup_norm() * fam.tail_bound })
}

/// E is null iff every kernel vector on E vanishes.
pub fn is_null(fam: &VectorProjectionFamily, set: &MeasurableSet) -> Result<bool> {
    Ok(fam.kernel_on(set)?.iter().all(|k| k.iter().all(|c| *c == ZERO)))
}

/// Brackets sup_{‖Λ‖≤1} |μ_Λ|_TV(A) over the listed atoms of A.
pub fn semivariation(fam: &VectorProjectionFamily, set: &MeasurableSet, budget: &Budget) -> Result<BoundPair> {
    abs_sum_dual_sup(&fam.kernel_on(set)?, &fam.space, budget)
}

/// μ^g(E) = ∫_E g dμ, with atoms g(ω)·k_ω.
pub fn weighted_measure(g: &MeasurableFunction, fam: &VectorProjectionFamily) -> Result<VectorMeasure> {
    g.check_space(&fam.measurable)?;
    g.ensure_integrable()?;
    let atom_vectors = g.values().iter().zip(&fam.kernel).map(|(gv, k)| k * *gv).collect();
    Ok(VectorMeasure { space: fam.space, measurable: fam.measurable.clone(), atom_vectors, tail_norm_bound: g.sup_norm() * fam.tail_bound })
}

pub(crate) fn check_series_inputs(lams: &[ComplexMeasure], count: usize) -> Result<SpaceRef> {
    if lams.len() != count {
        return Err(Error::DimensionMismatch { expected: lams.len(), found: count });
    }
    let Some(first) = lams.first() else {
        return Err(Error::InvalidInput("series needs at least one term".into()));
    };
    for (n, lam) in lams.iter().enumerate() {
        if !same_space(lam.space(), first.space()) {
            return Err(Error::SpaceMismatch);
        }
        lam.check_probability(1e-12).map_err(|reason| Error::NotProbability { index: n, reason })?;
    }
    Ok(first.space().clone())
}

/// Truncation of μ(E) = Σ_n 2^{-n} λ_n(E) x_n after the given terms.
///
/// Every omitted term has semivariation at most 2^{-n}, so the tail bound is 2^{-N}.
pub fn series_vector_measure(lams: &[ComplexMeasure], xs: &[CVector], space: SpaceDescriptor) -> Result<VectorMeasure> {
    let measurable = check_series_inputs(lams, xs.len())?;
    for (n, x) in xs.iter().enumerate() {
        space.check(x)?;
        let norm = space.norm(x);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitNorm { index: n, norm });
        }
    }
    let mut atom_vectors = vec![CVector::zeros(space.dim()); measurable.len()];
    for (n, (lam, x)) in lams.iter().zip(xs).enumerate() {
        let coeff = (-(n as i32 + 1) as f64).exp2();
        for (atom, w) in atom_vectors.iter_mut().zip(lam.weights()) {
            atom.axpy(*w * coeff, x, C::new(1.0, 0.0));
        }
    }
    let tail = (-(xs.len() as f64)).exp2();
    VectorMeasure::new(space, &measurable, atom_vectors, tail)
}

/// Σ_n 2^{-n} (∫ f dλ_n) x_n, computed term by term.
pub fn series_integral(f: &MeasurableFunction, lams: &[ComplexMeasure], xs: &[CVector]) -> Result<CVector> {
    let Some(first) = xs.first() else {
        return Err(Error::InvalidInput("series needs at least one term".into()));
    };
    if lams.len() != xs.len() {
        return Err(Error::DimensionMismatch { expected: lams.len(), found: xs.len() });
    }
    let mut acc = CVector::zeros(first.len());
    for (n, (lam, x)) in lams.iter().zip(xs).enumerate() {
        let coeff = (-(n as i32 + 1) as f64).exp2();
        acc.axpy(lam.integrate(f)? * coeff, x, C::new(1.0, 0.0));
    }
    Ok(acc)
}
