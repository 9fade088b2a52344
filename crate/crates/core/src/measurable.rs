//! Atomic measurable spaces, complex measures on them and scalar integration.
//!
//! The σ-algebra of an [`AtomicSpace`] is the power set of its listed atoms, so
//! every partition supremum is attained on singletons and the total variation
//! of a measure is the sum of the moduli of its weights. Countable spaces are
//! carried as a finite truncation plus a caller-certified tail bound, which is
//! propagated through every integral as an explicit error radius.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{cx_vec, from_cx_vec, Cx};
use crate::linalg::{C, ZERO};

pub type SpaceRef = Arc<AtomicSpace>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    Finite,
    TruncatedCountable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AtomicSpaceJson", into = "AtomicSpaceJson")]
pub struct AtomicSpace {
    atoms: IndexSet<String>,
    labels: Option<Vec<C>>,
    kind: SpaceKind,
    tail_bound: f64,
}

impl AtomicSpace {
    pub fn new<I, S>(atoms: I, labels: Option<Vec<C>>, kind: SpaceKind, tail_bound: f64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = IndexSet::new();
        for id in atoms {
            let id = id.into();
            if !set.insert(id.clone()) {
                return Err(Error::InvalidSpace(format!("duplicate atom `{id}`")));
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != set.len() {
                return Err(Error::InvalidSpace(format!("{} labels for {} atoms", labels.len(), set.len())));
            }
        }
        if !(tail_bound.is_finite() && tail_bound >= 0.0) {
            return Err(Error::InvalidSpace(format!("tail bound {tail_bound} must be finite and non-negative")));
        }
        if kind == SpaceKind::Finite && tail_bound != 0.0 {
            return Err(Error::InvalidSpace("finite spaces carry no tail".into()));
        }
        Ok(Self { atoms: set, labels, kind, tail_bound })
    }

    pub fn finite<I, S>(atoms: I) -> Result<SpaceRef>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(atoms, None, SpaceKind::Finite, 0.0).map(Arc::new)
    }

    pub fn labeled<I, S>(atoms: I, labels: Vec<C>) -> Result<SpaceRef>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(atoms, Some(labels), SpaceKind::Finite, 0.0).map(Arc::new)
    }

    pub fn truncated<I, S>(atoms: I, labels: Option<Vec<C>>, tail_bound: f64) -> Result<SpaceRef>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(atoms, labels, SpaceKind::TruncatedCountable, tail_bound).map(Arc::new)
    }

    /// Finite space with atoms `"0"`, …, `"n-1"`.
    pub fn indexed(n: usize) -> SpaceRef {
        Arc::new(Self { atoms: (0..n).map(|i| i.to_string()).collect(), labels: None, kind: SpaceKind::Finite, tail_bound: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.atoms.iter().map(String::as_str)
    }

    pub fn atom(&self, index: usize) -> &str {
        &self.atoms[index]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.atoms.get_index_of(id).ok_or_else(|| Error::UnknownAtom(id.to_string()))
    }

    /// The point an atom stands for; atoms without explicit labels sit at their index.
    pub fn label(&self, index: usize) -> C {
        match &self.labels {
            Some(labels) => labels[index],
            None => C::new(index as f64, 0.0),
        }
    }

    pub fn labels(&self) -> Vec<C> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }

    pub fn has_labels(&self) -> bool {
        self.labels.is_some()
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn is_finite(&self) -> bool {
        self.kind == SpaceKind::Finite
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }
}

pub fn same_space(a: &SpaceRef, b: &SpaceRef) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

fn ensure_same(a: &SpaceRef, b: &SpaceRef) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AtomId {
    Text(String),
    Int(i64),
}

impl From<AtomId> for String {
    fn from(id: AtomId) -> Self {
        match id {
            AtomId::Text(s) => s,
            AtomId::Int(i) => i.to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AtomicSpaceJson {
    #[serde(serialize_with = "serialize_ids")]
    atoms: Vec<AtomIdOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<Cx>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<SpaceKind>,
    #[serde(default)]
    tail_bound: f64,
}

struct AtomIdOut(String);

impl<'de> Deserialize<'de> for AtomIdOut {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        AtomId::deserialize(d).map(|id| AtomIdOut(id.into()))
    }
}

fn serialize_ids<S: serde::Serializer>(ids: &[AtomIdOut], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(ids.iter().map(|id| id.0.as_str()))
}

/// Atom identifiers as written in JSON: strings or integers, read back as strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomIds(pub Vec<String>);

impl Serialize for AtomIds {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AtomIds {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<AtomIdOut>::deserialize(d)?;
        Ok(AtomIds(ids.into_iter().map(|id| id.0).collect()))
    }
}

impl TryFrom<AtomicSpaceJson> for AtomicSpace {
    type Error = Error;

    fn try_from(json: AtomicSpaceJson) -> Result<Self> {
        let kind = json.kind.unwrap_or(if json.tail_bound > 0.0 { SpaceKind::TruncatedCountable } else { SpaceKind::Finite });
        AtomicSpace::new(json.atoms.into_iter().map(|a| a.0), json.labels.map(|l| from_cx_vec(&l)), kind, json.tail_bound)
    }
}

impl From<AtomicSpace> for AtomicSpaceJson {
    fn from(space: AtomicSpace) -> Self {
        AtomicSpaceJson {
            atoms: space.atoms.into_iter().map(AtomIdOut).collect(),
            labels: space.labels.map(|l| cx_vec(&l)),
            kind: Some(space.kind),
            tail_bound: space.tail_bound,
        }
    }
}

/// A subset of the listed atoms of a space.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurableSet {
    space: SpaceRef,
    members: BTreeSet<usize>,
}

impl MeasurableSet {
    pub fn new<I, S>(space: &SpaceRef, ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let members = ids.into_iter().map(|id| space.index_of(id.as_ref())).collect::<Result<_>>()?;
        Ok(Self { space: space.clone(), members })
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(space: &SpaceRef, indices: I) -> Result<Self> {
        let members: BTreeSet<usize> = indices.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&i| i >= space.len()) {
            return Err(Error::UnknownAtom(format!("#{bad}")));
        }
        Ok(Self { space: space.clone(), members })
    }

    pub fn all(space: &SpaceRef) -> Self {
        Self { space: space.clone(), members: (0..space.len()).collect() }
    }

    pub fn empty(space: &SpaceRef) -> Self {
        Self { space: space.clone(), members: BTreeSet::new() }
    }

    pub fn singleton(space: &SpaceRef, index: usize) -> Result<Self> {
        Self::from_indices(space, [index])
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.indices().map(|i| self.space.atom(i)).collect()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.contains(&index)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        ensure_same(&self.space, &other.space)?;
        Ok(Self { space: self.space.clone(), members: &self.members | &other.members })
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        ensure_same(&self.space, &other.space)?;
        Ok(Self { space: self.space.clone(), members: &self.members & &other.members })
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        ensure_same(&self.space, &other.space)?;
        Ok(Self { space: self.space.clone(), members: &self.members - &other.members })
    }

    pub fn complement(&self) -> Self {
        Self { space: self.space.clone(), members: (0..self.space.len()).filter(|i| !self.members.contains(i)).collect() }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.members.is_disjoint(&other.members)
    }

    pub(crate) fn check_space(&self, space: &SpaceRef) -> Result<()> {
        ensure_same(&self.space, space)
    }
}

/// A value together with a certified bound on its distance to the untruncated result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certified<T> {
    pub value: T,
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMeasureJson", into = "ComplexMeasureJson")]
pub struct ComplexMeasure {
    space: SpaceRef,
    weights: Vec<C>,
    tail_tv_bound: f64,
}

impl ComplexMeasure {
    pub fn new(space: &SpaceRef, weights: Vec<C>, tail_tv_bound: f64) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), found: weights.len() });
        }
        if !(tail_tv_bound.is_finite() && tail_tv_bound >= 0.0) {
            return Err(Error::InvalidInput(format!("tail variation bound {tail_tv_bound} must be finite and non-negative")));
        }
        if weights.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite measure weight".into()));
        }
        Ok(Self { space: space.clone(), weights, tail_tv_bound })
    }

    pub fn from_weights(space: &SpaceRef, weights: Vec<C>) -> Result<Self> {
        Self::new(space, weights, 0.0)
    }

    pub fn zero(space: &SpaceRef) -> Self {
        Self { space: space.clone(), weights: vec![ZERO; space.len()], tail_tv_bound: 0.0 }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn weights(&self) -> &[C] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> C {
        self.weights[index]
    }

    pub fn tail_tv_bound(&self) -> f64 {
        self.tail_tv_bound
    }

    pub fn measure_of(&self, set: &MeasurableSet) -> Result<C> {
        set.check_space(&self.space)?;
        Ok(set.indices().map(|i| self.weights[i]).sum())
    }

    /// Exact on listed atoms: singletons attain the partition supremum.
    pub fn total_variation(&self, set: &MeasurableSet) -> Result<f64> {
        set.check_space(&self.space)?;
        Ok(set.indices().map(|i| self.weights[i].norm()).sum())
    }

    pub fn total_variation_all(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).sum()
    }

    /// Upper bound on |μ|_TV(Ω) including the omitted atoms.
    pub fn total_variation_bound(&self) -> f64 {
        self.total_variation_all() + self.tail_tv_bound
    }

    /// Total variation of the difference on listed atoms; dominates sup_E |μ₁(E) − μ₂(E)|.
    pub fn setwise_defect(&self, other: &Self) -> Result<f64> {
        ensure_same(&self.space, &other.space)?;
        Ok(self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).norm()).sum())
    }

    pub fn integrate(&self, f: &MeasurableFunction) -> Result<C> {
        integrate_scalar(f, self)
    }

    pub fn scaled(&self, c: C) -> Self {
        Self {
            space: self.space.clone(),
            weights: self.weights.iter().map(|w| w * c).collect(),
            tail_tv_bound: self.tail_tv_bound * c.norm(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_same(&self.space, &other.space)?;
        Ok(Self {
            space: self.space.clone(),
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect(),
            tail_tv_bound: self.tail_tv_bound + other.tail_tv_bound,
        })
    }

    /// Non-negative real weights summing to one (on listed atoms, with no tail mass).
    pub fn check_probability(&self, tol: f64) -> std::result::Result<(), String> {
        if let Some(w) = self.weights.iter().find(|w| w.im.abs() > tol || w.re < -tol) {
            return Err(format!("weight {w} is not a non-negative real"));
        }
        let total: f64 = self.weights.iter().map(|w| w.re).sum();
        if (total - 1.0).abs() > tol {
            return Err(format!("total mass {total} differs from 1"));
        }
        if self.tail_tv_bound > tol {
            return Err(format!("tail mass bound {} leaves the total unsettled", self.tail_tv_bound));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexMeasureJson {
    space: AtomicSpace,
    weights: Vec<Cx>,
    #[serde(default)]
    tail_tv_bound: f64,
}

impl TryFrom<ComplexMeasureJson> for ComplexMeasure {
    type Error = Error;

    fn try_from(json: ComplexMeasureJson) -> Result<Self> {
        ComplexMeasure::new(&Arc::new(json.space), from_cx_vec(&json.weights), json.tail_tv_bound)
    }
}

impl From<ComplexMeasure> for ComplexMeasureJson {
    fn from(mu: ComplexMeasure) -> Self {
        ComplexMeasureJson { space: (*mu.space).clone(), weights: cx_vec(&mu.weights), tail_tv_bound: mu.tail_tv_bound }
    }
}

/// Σ_ω f(ω)·μ({ω}) over listed atoms.
pub fn integrate_scalar(f: &MeasurableFunction, mu: &ComplexMeasure) -> Result<C> {
    integrate_scalar_certified(f, mu).map(|c| c.value)
}

/// The scalar integral with its truncation radius sup|f|·(tail variation).
pub fn integrate_scalar_certified(f: &MeasurableFunction, mu: &ComplexMeasure) -> Result<Certified<C>> {
    ensure_same(&f.space, &mu.space)?;
    f.ensure_integrable()?;
    let value = f.values.iter().zip(&mu.weights).map(|(v, w)| v * w).sum();
    Ok(Certified { value, error_bound: f.sup_norm * mu.tail_tv_bound })
}

/// A function description independent of any space.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    /// One value per atom, in atom order.
    Tabulated(Vec<C>),
    Constant(C),
    Indicator(Vec<String>),
    /// Σ_k c_k λᵏ in the atom label λ.
    Poly(Vec<C>),
    /// exp(a·λ) in the atom label λ.
    Exp(C),
    Modulus(Box<FunctionSpec>),
    RealPart(Box<FunctionSpec>),
}

impl FunctionSpec {
    pub fn identity() -> Self {
        FunctionSpec::Poly(vec![ZERO, C::new(1.0, 0.0)])
    }

    pub fn poly_real(coeffs: &[f64]) -> Self {
        FunctionSpec::Poly(coeffs.iter().map(|&c| C::new(c, 0.0)).collect())
    }

    pub fn name(&self) -> &'static str {
        match self {
            FunctionSpec::Tabulated(_) => "tabulated",
            FunctionSpec::Constant(_) => "constant",
            FunctionSpec::Indicator(_) => "indicator",
            FunctionSpec::Poly(_) => "poly",
            FunctionSpec::Exp(_) => "exp",
            FunctionSpec::Modulus(_) => "modulus",
            FunctionSpec::RealPart(_) => "real",
        }
    }

    /// Whether the form is bounded on every atom of the space, including omitted ones.
    pub fn is_bounded_on(&self, space: &AtomicSpace) -> bool {
        match self {
            FunctionSpec::Tabulated(_) | FunctionSpec::Constant(_) | FunctionSpec::Indicator(_) => true,
            FunctionSpec::Poly(c) => space.is_finite() || c.iter().skip(1).all(|c| *c == ZERO),
            FunctionSpec::Exp(a) => space.is_finite() || *a == ZERO,
            FunctionSpec::Modulus(inner) | FunctionSpec::RealPart(inner) => inner.is_bounded_on(space),
        }
    }

    fn evaluator<'a>(&'a self, space: &'a AtomicSpace) -> Result<Box<dyn Fn(usize) -> C + 'a>> {
        Ok(match self {
            FunctionSpec::Tabulated(values) => {
                if values.len() != space.len() {
                    return Err(Error::DimensionMismatch { expected: space.len(), found: values.len() });
                }
                Box::new(move |i| values[i])
            }
            FunctionSpec::Constant(c) => Box::new(move |_| *c),
            FunctionSpec::Indicator(ids) => {
                let members: BTreeSet<usize> = ids.iter().map(|id| space.index_of(id)).collect::<Result<_>>()?;
                Box::new(move |i| if members.contains(&i) { C::new(1.0, 0.0) } else { ZERO })
            }
            FunctionSpec::Poly(coeffs) => Box::new(move |i| horner(coeffs, space.label(i))),
            FunctionSpec::Exp(a) => Box::new(move |i| (a * space.label(i)).exp()),
            FunctionSpec::Modulus(inner) => {
                let f = inner.evaluator(space)?;
                Box::new(move |i| C::new(f(i).norm(), 0.0))
            }
            FunctionSpec::RealPart(inner) => {
                let f = inner.evaluator(space)?;
                Box::new(move |i| C::new(f(i).re, 0.0))
            }
        })
    }

    pub fn bind(&self, space: &SpaceRef) -> Result<MeasurableFunction> {
        MeasurableFunction::bind(self.clone(), space)
    }
}

fn horner(coeffs: &[C], x: C) -> C {
    coeffs.iter().rev().fold(ZERO, |acc, c| acc * x + c)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FunctionSpecJson {
    Tabulated { tabulated: Vec<Cx> },
    Named(NamedForm),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
enum NamedForm {
    Constant { value: Cx },
    Indicator { atoms: Vec<String> },
    Poly { coeffs: Vec<Cx> },
    Exp { scale: Cx },
    Modulus { of: Box<FunctionSpecJson> },
    Real { of: Box<FunctionSpecJson> },
}

impl From<FunctionSpecJson> for FunctionSpec {
    fn from(json: FunctionSpecJson) -> Self {
        match json {
            FunctionSpecJson::Tabulated { tabulated } => FunctionSpec::Tabulated(from_cx_vec(&tabulated)),
            FunctionSpecJson::Named(form) => match form {
                NamedForm::Constant { value } => FunctionSpec::Constant(value.0),
                NamedForm::Indicator { atoms } => FunctionSpec::Indicator(atoms),
                NamedForm::Poly { coeffs } => FunctionSpec::Poly(from_cx_vec(&coeffs)),
                NamedForm::Exp { scale } => FunctionSpec::Exp(scale.0),
                NamedForm::Modulus { of } => FunctionSpec::Modulus(Box::new((*of).into())),
                NamedForm::Real { of } => FunctionSpec::RealPart(Box::new((*of).into())),
            },
        }
    }
}

impl From<&FunctionSpec> for FunctionSpecJson {
    fn from(spec: &FunctionSpec) -> Self {
        match spec {
            FunctionSpec::Tabulated(v) => FunctionSpecJson::Tabulated { tabulated: cx_vec(v) },
            FunctionSpec::Constant(c) => FunctionSpecJson::Named(NamedForm::Constant { value: Cx(*c) }),
            FunctionSpec::Indicator(a) => FunctionSpecJson::Named(NamedForm::Indicator { atoms: a.clone() }),
            FunctionSpec::Poly(c) => FunctionSpecJson::Named(NamedForm::Poly { coeffs: cx_vec(c) }),
            FunctionSpec::Exp(a) => FunctionSpecJson::Named(NamedForm::Exp { scale: Cx(*a) }),
            FunctionSpec::Modulus(inner) => FunctionSpecJson::Named(NamedForm::Modulus { of: Box::new(inner.as_ref().into()) }),
            FunctionSpec::RealPart(inner) => FunctionSpecJson::Named(NamedForm::Real { of: Box::new(inner.as_ref().into()) }),
        }
    }
}

impl Serialize for FunctionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FunctionSpecJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FunctionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        FunctionSpecJson::deserialize(d).map(Into::into)
    }
}

/// A function bound to a space, evaluated at every listed atom.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurableFunction {
    space: SpaceRef,
    spec: FunctionSpec,
    values: Vec<C>,
    sup_norm: f64,
    bounded: bool,
}

impl MeasurableFunction {
    pub fn bind(spec: FunctionSpec, space: &SpaceRef) -> Result<Self> {
        let values: Vec<C> = {
            let f = spec.evaluator(space)?;
            (0..space.len()).map(f).collect()
        };
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput(format!("{} form is not finite on every atom", spec.name())));
        }
        let bounded = spec.is_bounded_on(space);
        let sup_norm = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(Self { space: space.clone(), spec, values, sup_norm, bounded })
    }

    pub fn tabulated(space: &SpaceRef, values: Vec<C>) -> Result<Self> {
        Self::bind(FunctionSpec::Tabulated(values), space)
    }

    pub fn tabulated_real(space: &SpaceRef, values: &[f64]) -> Result<Self> {
        Self::tabulated(space, values.iter().map(|&v| C::new(v, 0.0)).collect())
    }

    pub fn constant(space: &SpaceRef, c: C) -> Self {
        Self::bind(FunctionSpec::Constant(c), space).expect("constants bind everywhere")
    }

    pub fn indicator(set: &MeasurableSet) -> Self {
        let ids = set.ids().into_iter().map(str::to_string).collect();
        Self::bind(FunctionSpec::Indicator(ids), &set.space).expect("set atoms belong to the space")
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    pub fn values(&self) -> &[C] {
        &self.values
    }

    pub fn value(&self, index: usize) -> C {
        self.values[index]
    }

    /// Supremum of |f| over listed atoms.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub(crate) fn ensure_integrable(&self) -> Result<()> {
        if self.bounded {
            Ok(())
        } else {
            Err(Error::UnboundedFunction(self.spec.name().to_string()))
        }
    }

    pub(crate) fn check_space(&self, space: &SpaceRef) -> Result<()> {
        ensure_same(&self.space, space)
    }

    fn map_values(&self, f: impl Fn(C) -> C) -> Self {
        let values: Vec<C> = self.values.iter().map(|&v| f(v)).collect();
        let sup_norm = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Self { space: self.space.clone(), spec: FunctionSpec::Tabulated(values.clone()), values, sup_norm, bounded: self.bounded }
    }

    pub fn modulus(&self) -> Self {
        let mut out = self.map_values(|v| C::new(v.norm(), 0.0));
        out.spec = FunctionSpec::Modulus(Box::new(self.spec.clone()));
        out
    }

    pub fn real_part(&self) -> Self {
        let mut out = self.map_values(|v| C::new(v.re, 0.0));
        out.spec = FunctionSpec::RealPart(Box::new(self.spec.clone()));
        out
    }

    pub fn scaled(&self, c: C) -> Self {
        self.map_values(|v| v * c)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(C, C) -> C) -> Result<Self> {
        ensure_same(&self.space, &other.space)?;
        let values: Vec<C> = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect();
        let sup_norm = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(Self {
            space: self.space.clone(),
            spec: FunctionSpec::Tabulated(values.clone()),
            values,
            sup_norm,
            bounded: self.bounded && other.bounded,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Simple function obtained by rounding real and imaginary parts to the grid `step·ℤ`;
    /// pointwise error at most `step/√2`.
    pub fn quantized(&self, step: f64) -> Self {
        assert!(step > 0.0, "quantization step must be positive");
        self.map_values(|v| C::new((v.re / step).round() * step, (v.im / step).round() * step))
    }
}

impl fmt::Display for AtomicSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} atoms ({:?}, tail {})", self.len(), self.kind, self.tail_bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn abc() -> SpaceRef {
        AtomicSpace::finite(["a", "b", "c"]).unwrap()
    }

    #[test]
    fn measure_of_examples() {
        let s = abc();
        let mu = ComplexMeasure::from_weights(&s, vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.0)]).unwrap();
        let e = MeasurableSet::new(&s, ["a", "c"]).unwrap();
        assert_eq!(mu.measure_of(&e).unwrap(), c(0.0, 0.0));
        assert_eq!(mu.measure_of(&MeasurableSet::empty(&s)).unwrap(), c(0.0, 0.0));

        let ab = AtomicSpace::finite(["a", "b"]).unwrap();
        let p = ComplexMeasure::from_weights(&ab, vec![c(0.5, 0.0), c(0.5, 0.0)]).unwrap();
        assert_eq!(p.measure_of(&MeasurableSet::all(&ab)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn total_variation_examples() {
        let s = abc();
        let mu = ComplexMeasure::from_weights(&s, vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert_eq!(mu.total_variation(&MeasurableSet::all(&s)).unwrap(), 3.0);
        assert_eq!(mu.total_variation(&MeasurableSet::empty(&s)).unwrap(), 0.0);

        let one = AtomicSpace::finite(["x"]).unwrap();
        let nu = ComplexMeasure::from_weights(&one, vec![c(3.0, -4.0)]).unwrap();
        assert_eq!(nu.total_variation_all(), 5.0);
    }

    #[test]
    fn integrate_scalar_examples() {
        let ab = AtomicSpace::labeled(["a", "b"], vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let p = ComplexMeasure::from_weights(&ab, vec![c(0.5, 0.0), c(0.5, 0.0)]).unwrap();
        let one = MeasurableFunction::constant(&ab, c(1.0, 0.0));
        assert_eq!(integrate_scalar(&one, &p).unwrap(), c(1.0, 0.0));

        let e = MeasurableSet::new(&ab, ["b"]).unwrap();
        let ind = MeasurableFunction::indicator(&e);
        assert_eq!(integrate_scalar(&ind, &p).unwrap(), p.measure_of(&e).unwrap());

        // f(λ) = λ: brute force ½·1 + ½·2
        let id = FunctionSpec::identity().bind(&ab).unwrap();
        let brute: C = (0..2).map(|i| ab.label(i) * p.weight(i)).sum();
        assert_eq!(brute, c(1.5, 0.0));
        assert!((integrate_scalar(&id, &p).unwrap() - brute).norm() < 1e-15);
    }

    #[test]
    fn setwise_defect_examples() {
        let ab = AtomicSpace::finite(["a", "b"]).unwrap();
        let m1 = ComplexMeasure::from_weights(&ab, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let m2 = ComplexMeasure::from_weights(&ab, vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(m1.setwise_defect(&m1).unwrap(), 0.0);
        assert_eq!(m1.setwise_defect(&m2).unwrap(), 2.0);
        let eps = 1e-3;
        let m3 = ComplexMeasure::from_weights(&ab, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let m4 = ComplexMeasure::from_weights(&ab, vec![c(1.0, 0.0), c(1.0 + eps, 0.0)]).unwrap();
        assert!((m3.setwise_defect(&m4).unwrap() - eps).abs() < 1e-15);
    }

    #[test]
    fn space_mismatch_is_reported() {
        let s = abc();
        let t = AtomicSpace::finite(["x", "y", "z"]).unwrap();
        let mu = ComplexMeasure::zero(&s);
        let nu = ComplexMeasure::zero(&t);
        assert_eq!(mu.measure_of(&MeasurableSet::all(&t)), Err(Error::SpaceMismatch));
        assert_eq!(mu.setwise_defect(&nu), Err(Error::SpaceMismatch));
        let f = MeasurableFunction::constant(&t, c(1.0, 0.0));
        assert_eq!(integrate_scalar(&f, &mu), Err(Error::SpaceMismatch));
        // structurally equal spaces are the same space
        let s2 = abc();
        assert!(mu.measure_of(&MeasurableSet::all(&s2)).is_ok());
    }

    #[test]
    fn space_invariants() {
        assert!(AtomicSpace::finite(["a", "a"]).is_err());
        assert!(AtomicSpace::new(["a"], None, SpaceKind::Finite, 0.5).is_err());
        assert!(AtomicSpace::truncated(["a"], None, -1.0).is_err());
        assert!(AtomicSpace::labeled(["a"], vec![]).is_err());
        assert!(MeasurableSet::new(&abc(), ["q"]).is_err());
    }

    #[test]
    fn unbounded_named_form_on_truncated_space() {
        let s = AtomicSpace::truncated(["0", "1", "2"], None, 0.25).unwrap();
        let mu = ComplexMeasure::new(&s, vec![c(0.5, 0.0), c(0.25, 0.0), c(0.125, 0.0)], 0.125).unwrap();
        let poly = FunctionSpec::identity().bind(&s).unwrap();
        assert!(!poly.is_bounded());
        assert_eq!(integrate_scalar(&poly, &mu), Err(Error::UnboundedFunction("poly".into())));

        let tab = MeasurableFunction::tabulated_real(&s, &[0.0, 1.0, 2.0]).unwrap();
        let cert = integrate_scalar_certified(&tab, &mu).unwrap();
        assert_eq!(cert.value, c(0.5, 0.0));
        assert_eq!(cert.error_bound, 2.0 * 0.125);
        // constant polynomial is bounded everywhere
        assert!(FunctionSpec::poly_real(&[3.0]).bind(&s).unwrap().is_bounded());
    }

    #[test]
    fn named_forms_evaluate_at_labels() {
        let s = AtomicSpace::labeled(["p", "q"], vec![c(0.0, 0.0), c(0.0, std::f64::consts::PI)]).unwrap();
        let e = FunctionSpec::Exp(c(1.0, 0.0)).bind(&s).unwrap();
        assert!((e.value(1) - c(-1.0, 0.0)).norm() < 1e-15);
        let m = FunctionSpec::Modulus(Box::new(FunctionSpec::identity())).bind(&s).unwrap();
        assert!((m.value(1).re - std::f64::consts::PI).abs() < 1e-15);
        let r = FunctionSpec::RealPart(Box::new(FunctionSpec::Exp(c(0.5, 0.0)))).bind(&s).unwrap();
        assert!(r.value(1).im == 0.0 && r.value(1).re.abs() < 1e-15);
        assert_eq!(m.sup_norm(), std::f64::consts::PI);
    }

    #[test]
    fn function_json_forms() {
        let spec: FunctionSpec = serde_json::from_str(r#"{"form":"poly","coeffs":[1,[0,2]]}"#).unwrap();
        assert_eq!(spec, FunctionSpec::Poly(vec![c(1.0, 0.0), c(0.0, 2.0)]));
        let tab: FunctionSpec = serde_json::from_str(r#"{"tabulated":[[1,0],2]}"#).unwrap();
        assert_eq!(tab, FunctionSpec::Tabulated(vec![c(1.0, 0.0), c(2.0, 0.0)]));
        let nested: FunctionSpec = serde_json::from_str(r#"{"form":"modulus","of":{"form":"indicator","atoms":["a"]}}"#).unwrap();
        let back: FunctionSpec = serde_json::from_str(&serde_json::to_string(&nested).unwrap()).unwrap();
        assert_eq!(back, nested);
    }

    #[test]
    fn measure_json_round_trip() {
        let s = AtomicSpace::truncated(["a", "b"], Some(vec![c(1.0, 0.0), c(2.0, 1.0)]), 0.5).unwrap();
        let mu = ComplexMeasure::new(&s, vec![c(0.25, -1.0), c(0.0, 3.0)], 0.5).unwrap();
        let text = serde_json::to_string(&mu).unwrap();
        let back: ComplexMeasure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mu);
        let numeric: AtomicSpace = serde_json::from_str(r#"{"atoms":[1,2],"tail_bound":0}"#).unwrap();
        assert_eq!(numeric.atom(1), "2");
        assert!(numeric.is_finite());
    }

    #[test]
    fn quantization_error_is_bounded() {
        let s = AtomicSpace::indexed(3);
        let f = MeasurableFunction::tabulated(&s, vec![c(0.33, -0.71), c(1.26, 0.04), c(-2.0, 0.5)]).unwrap();
        let q = f.quantized(0.1);
        for i in 0..3 {
            assert!((f.value(i) - q.value(i)).norm() <= 0.1 / 2f64.sqrt() + 1e-15);
        }
    }
}
