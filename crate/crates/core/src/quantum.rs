//! Density operators, POVMs and instruments.
//!
//! Superoperators act on column-stacked matrices, so the Kraus term ρ ↦ MρM†
//! is the d²×d² matrix conj(M) ⊗ M.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{square_matrix_from_json, MatrixJson};
use crate::linalg::{
    check_dim, check_square, fro, gaussian_matrix, hermitian_map, hermitian_part, identity, kron, min_hermitian_eigenvalue, op_norm,
    orthonormality_defect, outer, random_unit_vector, trace, trace_product, unvectorize, vectorize, CMatrix, CVector, C, ZERO,
};
use crate::measurable::{same_space, AtomIds, AtomicSpace, ComplexMeasure, MeasurableFunction, MeasurableSet, SpaceRef};

pub const STATE_TOL: f64 = 1e-10;
pub const EXTENSION_TOL: f64 = 1e-9;

fn psd_violation(m: &CMatrix) -> Option<String> {
    let herm = op_norm(&(m - m.adjoint()));
    if herm > STATE_TOL {
        return Some(format!("not Hermitian (defect {herm:.3e})"));
    }
    let min = min_hermitian_eigenvalue(m);
    if min < -STATE_TOL {
        return Some(format!("negative eigenvalue {min:.3e}"));
    }
    None
}

/// Non-negative Hermitian operator; `normalized` records unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    trace: f64,
    normalized: bool,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        check_square(&matrix, d)?;
        if d == 0 {
            return Err(Error::InvalidState("empty matrix".into()));
        }
        if let Some(reason) = psd_violation(&matrix) {
            return Err(Error::InvalidState(reason));
        }
        let tr = trace(&matrix).re;
        Ok(Self { matrix, trace: tr, normalized: (tr - 1.0).abs() <= STATE_TOL })
    }

    /// A state whose trace is one within [`STATE_TOL`].
    pub fn normalized(matrix: CMatrix) -> Result<Self> {
        let rho = Self::new(matrix)?;
        if !rho.normalized {
            return Err(Error::InvalidState(format!("trace {} is not one", rho.trace)));
        }
        Ok(rho)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new(identity(d).unscale(d as f64)).expect("I/d is a state")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(&self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = square_matrix_from_json(MatrixJson::deserialize(d)?).map_err(serde::de::Error::custom)?;
        DensityOperator::new(m).map_err(serde::de::Error::custom)
    }
}

/// ρ_x = x x†, of trace ‖x‖².
pub fn pure_state(x: &CVector) -> Result<DensityOperator> {
    if x.iter().all(|c| *c == ZERO) {
        return Err(Error::InvalidState("pure state of the zero vector".into()));
    }
    let m = outer(x, x);
    Ok(DensityOperator { trace: trace(&m).re, normalized: (x.norm_squared() - 1.0).abs() <= STATE_TOL, matrix: m })
}

/// tr(Tρ).
pub fn trace_pair(t: &CMatrix, rho: &DensityOperator) -> Result<C> {
    check_square(t, rho.dim())?;
    Ok(trace_product(t, &rho.matrix))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmJson", into = "PovmJson")]
pub struct Povm {
    measurable: SpaceRef,
    effects: Vec<CMatrix>,
}

impl Povm {
    /// Effects must be PSD and sum to the identity within [`STATE_TOL`].
    pub fn new(measurable: &SpaceRef, effects: Vec<CMatrix>) -> Result<Self> {
        if effects.len() != measurable.len() {
            return Err(Error::DimensionMismatch { expected: measurable.len(), found: effects.len() });
        }
        let Some(first) = effects.first() else {
            return Err(Error::InvalidPovm("no effects".into()));
        };
        let d = first.nrows();
        for (i, p) in effects.iter().enumerate() {
            check_square(p, d)?;
            if let Some(reason) = psd_violation(p) {
                return Err(Error::InvalidPovm(format!("effect `{}`: {reason}", measurable.atom(i))));
            }
        }
        let total = effects.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + p);
        let defect = op_norm(&(total - identity(d)));
        if defect > STATE_TOL {
            return Err(Error::InvalidPovm(format!("effects sum to identity only within {defect:.3e}")));
        }
        Ok(Self { measurable: measurable.clone(), effects })
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(basis: &[CVector]) -> Result<Self> {
        let defect = orthonormality_defect(basis)?;
        if defect > STATE_TOL {
            return Err(Error::NotOrthonormal { defect });
        }
        Self::new(&AtomicSpace::indexed(basis.len()), basis.iter().map(|e| outer(e, e)).collect())
    }

    pub fn measurable(&self) -> &SpaceRef {
        &self.measurable
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn measure_of(&self, set: &MeasurableSet) -> Result<CMatrix> {
        set.check_space(&self.measurable)?;
        let d = self.dim();
        Ok(set.indices().fold(CMatrix::zeros(d, d), |acc, i| acc + &self.effects[i]))
    }
}

#[derive(Serialize, Deserialize)]
struct PovmJson {
    atoms: AtomIds,
    effects: Vec<MatrixJson>,
}

impl TryFrom<PovmJson> for Povm {
    type Error = Error;

    fn try_from(json: PovmJson) -> Result<Self> {
        let space = AtomicSpace::finite(json.atoms.0)?;
        let effects = json.effects.into_iter().map(square_matrix_from_json).collect::<Result<Vec<_>>>()?;
        Povm::new(&space, effects)
    }
}

impl From<Povm> for PovmJson {
    fn from(p: Povm) -> Self {
        PovmJson {
            atoms: AtomIds(p.measurable.atoms().map(str::to_string).collect()),
            effects: p.effects.iter().map(MatrixJson::from).collect(),
        }
    }
}

/// p_ω = tr(P_ω ρ) for a unit-trace state.
pub fn povm_probabilities(p: &Povm, rho: &DensityOperator) -> Result<ComplexMeasure> {
    if !rho.is_normalized() {
        return Err(Error::InvalidState(format!("trace {} is not one", rho.trace())));
    }
    let weights = p.effects.iter().map(|e| trace_pair(e, rho)).collect::<Result<Vec<_>>>()?;
    ComplexMeasure::from_weights(&p.measurable, weights)
}

/// Σ_ω f(ω) P_ω.
pub fn povm_integrate(f: &MeasurableFunction, p: &Povm) -> Result<CMatrix> {
    if !same_space(f.space(), &p.measurable) {
        return Err(Error::SpaceMismatch);
    }
    let d = p.dim();
    Ok(f.values().iter().zip(&p.effects).fold(CMatrix::zeros(d, d), |acc, (v, e)| acc + e * *v))
}

/// A linear map on d×d matrices acting on column-stacked vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        check_square(&matrix, dim * dim)?;
        Ok(Self { dim, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::zeros(dim * dim, dim * dim) }
    }

    /// Σ_k conj(M_k) ⊗ M_k.
    pub fn from_kraus(dim: usize, kraus: &[CMatrix]) -> Result<Self> {
        let mut s = Self::zero(dim);
        for m in kraus {
            check_square(m, dim)?;
            s.matrix += kron(&m.conjugate(), m);
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        check_square(rho, self.dim)?;
        Ok(unvectorize(&(&self.matrix * vectorize(rho)), self.dim))
    }

    /// The Heisenberg-picture image of the identity, Φ*(I); equals I exactly when Φ preserves trace.
    pub fn dual_identity(&self) -> CMatrix {
        unvectorize(&(self.matrix.adjoint() * vectorize(&identity(self.dim))), self.dim)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operation {
    Kraus(Vec<CMatrix>),
    Super(Superoperator),
}

impl Operation {
    fn superoperator(&self, dim: usize) -> Result<Superoperator> {
        match self {
            Operation::Kraus(ks) => Superoperator::from_kraus(dim, ks),
            Operation::Super(s) => Ok(s.clone()),
        }
    }

    fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        match self {
            Operation::Kraus(ks) => {
                let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
                for m in ks {
                    out += m * rho * m.adjoint();
                }
                Ok(hermitian_part(&out))
            }
            Operation::Super(s) => s.apply(rho),
        }
    }
}

/// Sampled positivity check: the map sends random pure states and the basis projectors to PSD matrices.
fn sampled_positivity(s: &Superoperator, seed: u64) -> Option<String> {
    let d = s.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes: Vec<CVector> = (0..d).map(|i| identity(d).column(i).into_owned()).collect();
    probes.extend((0..32).map(|_| random_unit_vector(&mut rng, d)));
    for x in probes {
        let image = s.apply(&outer(&x, &x)).expect("probe has the map's dimension");
        if let Some(reason) = psd_violation(&image) {
            return Some(reason);
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstrumentJson", into = "InstrumentJson")]
pub struct Instrument {
    measurable: SpaceRef,
    dim: usize,
    operations: Vec<Operation>,
    trace_preserving: bool,
}

impl Instrument {
    /// Per-atom operations; when `trace_preserving` is asserted, Σ 𝓔({ω})*(I) = I within [`STATE_TOL`].
    pub fn new(measurable: &SpaceRef, dim: usize, operations: Vec<Operation>, trace_preserving: bool) -> Result<Self> {
        if operations.len() != measurable.len() {
            return Err(Error::DimensionMismatch { expected: measurable.len(), found: operations.len() });
        }
        if dim == 0 {
            return Err(Error::InvalidInstrument("dimension must be positive".into()));
        }
        let mut total = Superoperator::zero(dim);
        for (i, op) in operations.iter().enumerate() {
            let s = op.superoperator(dim)?;
            if let Operation::Super(raw) = op {
                if let Some(reason) = sampled_positivity(raw, i as u64) {
                    return Err(Error::InvalidInstrument(format!("operation `{}` is not positive: {reason}", measurable.atom(i))));
                }
            }
            total.matrix += s.matrix;
        }
        if trace_preserving {
            let defect = op_norm(&(total.dual_identity() - identity(dim)));
            if defect > STATE_TOL {
                return Err(Error::InvalidInstrument(format!("not trace preserving (defect {defect:.3e})")));
            }
        }
        Ok(Self { measurable: measurable.clone(), dim, operations, trace_preserving })
    }

    pub fn from_kraus(measurable: &SpaceRef, dim: usize, kraus: Vec<Vec<CMatrix>>, trace_preserving: bool) -> Result<Self> {
        Self::new(measurable, dim, kraus.into_iter().map(Operation::Kraus).collect(), trace_preserving)
    }

    /// Lüders instrument ρ ↦ P_ω ρ P_ω of a projective measurement.
    pub fn luders(p: &Povm) -> Result<Self> {
        Self::from_kraus(&p.measurable, p.dim(), p.effects.iter().map(|e| vec![e.clone()]).collect(), true)
    }

    pub fn measurable(&self) -> &SpaceRef {
        &self.measurable
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operations(&self) -> &[Operation] {
        &self.operations
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// 𝓔({ω}) as a superoperator.
    pub fn atom_superoperator(&self, index: usize) -> Superoperator {
        self.operations[index].superoperator(self.dim).expect("validated at construction")
    }
}

#[derive(Serialize, Deserialize)]
struct InstrumentJson {
    atoms: AtomIds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kraus: Option<Vec<Vec<MatrixJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    superoperators: Option<Vec<MatrixJson>>,
    #[serde(default)]
    trace_preserving: bool,
}

fn dim_of_super(m: &CMatrix) -> Result<usize> {
    let d = (m.nrows() as f64).sqrt().round() as usize;
    if d * d != m.nrows() {
        return Err(Error::InvalidInstrument(format!("superoperator size {} is not a square number", m.nrows())));
    }
    Ok(d)
}

impl TryFrom<InstrumentJson> for Instrument {
    type Error = Error;

    fn try_from(json: InstrumentJson) -> Result<Self> {
        let space = AtomicSpace::finite(json.atoms.0)?;
        let (dim, ops) = match (json.kraus, json.superoperators) {
            (Some(kraus), None) => {
                let kraus = kraus
                    .into_iter()
                    .map(|list| list.into_iter().map(square_matrix_from_json).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                let dim = kraus
                    .iter()
                    .flatten()
                    .next()
                    .map(|m| m.nrows())
                    .ok_or_else(|| Error::InvalidInstrument("no Kraus operators".into()))?;
                (dim, kraus.into_iter().map(Operation::Kraus).collect::<Vec<_>>())
            }
            (None, Some(supers)) => {
                let supers = supers.into_iter().map(square_matrix_from_json).collect::<Result<Vec<_>>>()?;
                let first = supers.first().ok_or_else(|| Error::InvalidInstrument("no operations".into()))?;
                let dim = dim_of_super(first)?;
                let ops = supers.into_iter().map(|m| Superoperator::new(dim, m).map(Operation::Super)).collect::<Result<Vec<_>>>()?;
                (dim, ops)
            }
            _ => return Err(Error::InvalidInstrument("exactly one of `kraus` or `superoperators` is required".into())),
        };
        Instrument::new(&space, dim, ops, json.trace_preserving)
    }
}

impl From<Instrument> for InstrumentJson {
    fn from(e: Instrument) -> Self {
        let atoms = AtomIds(e.measurable.atoms().map(str::to_string).collect());
        let all_kraus = e.operations.iter().all(|op| matches!(op, Operation::Kraus(_)));
        let (kraus, superoperators) = if all_kraus {
            let lists = e
                .operations
                .iter()
                .map(|op| match op {
                    Operation::Kraus(ks) => ks.iter().map(MatrixJson::from).collect(),
                    Operation::Super(_) => unreachable!(),
                })
                .collect();
            (Some(lists), None)
        } else {
            let supers = (0..e.operations.len()).map(|i| MatrixJson::from(e.atom_superoperator(i).matrix())).collect();
            (None, Some(supers))
        };
        InstrumentJson { atoms, kraus, superoperators, trace_preserving: e.trace_preserving }
    }
}

/// 𝓔(A)(ρ) = Σ_{ω∈A} 𝓔({ω})(ρ).
pub fn instrument_apply(e: &Instrument, set: &MeasurableSet, rho: &DensityOperator) -> Result<DensityOperator> {
    set.check_space(&e.measurable)?;
    check_dim(e.dim, rho.dim())?;
    let mut out = CMatrix::zeros(e.dim, e.dim);
    for i in set.indices() {
        out += e.operations[i].apply(&rho.matrix)?;
    }
    DensityOperator::new(out)
}

/// 𝓔_{T,ρ}({ω}) = tr(T 𝓔({ω})(ρ)).
pub fn operation_projection(e: &Instrument, t: &CMatrix, rho: &DensityOperator) -> Result<ComplexMeasure> {
    check_square(t, e.dim)?;
    check_dim(e.dim, rho.dim())?;
    let weights = e.operations.iter().map(|op| Ok(trace_product(t, &op.apply(&rho.matrix)?))).collect::<Result<Vec<_>>>()?;
    ComplexMeasure::from_weights(&e.measurable, weights)
}

/// ∫ f d𝓔 = Σ_ω f(ω) 𝓔({ω}) as a superoperator.
pub fn operation_integrate(f: &MeasurableFunction, e: &Instrument) -> Result<Superoperator> {
    if !same_space(f.space(), &e.measurable) {
        return Err(Error::SpaceMismatch);
    }
    let mut s = Superoperator::zero(e.dim);
    for (i, v) in f.values().iter().enumerate() {
        if *v != ZERO {
            s.matrix += e.atom_superoperator(i).matrix * *v;
        }
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionMode {
    /// ‖𝓔({ω})(ρ_{e_i}) − ρ_{𝒫({ω})e_i}‖: the vector side is mapped into states by x ↦ x x†.
    #[default]
    StateEmbedding,
    /// ‖𝓔({ω})(ρ_{e_i}) − 𝒫({ω})ρ_{e_i}‖: agreement of every expectation tr(T·) against ⟨𝒫({ω})e_i, T†e_i⟩.
    Expectation,
}

impl ExtensionMode {
    pub fn interpretation(self) -> &'static str {
        match self {
            ExtensionMode::StateEmbedding => {
                "E({w})(rho_{e_i}) is compared with rho_{P({w})e_i} = (P({w})e_i)(P({w})e_i)^*, \
                 i.e. the vector P({w})e_i is embedded as a pure state; this reading is an interpretation"
            }
            ExtensionMode::Expectation => {
                "E({w})(rho_{e_i}) is compared with P({w}) rho_{e_i}, i.e. tr(T E({w})(rho_{e_i})) = \
                 <P({w})e_i, T^* e_i> for every T; this reading is an interpretation"
            }
        }
    }
}

impl std::str::FromStr for ExtensionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "state-embedding" | "state" => Ok(ExtensionMode::StateEmbedding),
            "expectation" => Ok(ExtensionMode::Expectation),
            other => Err(Error::InvalidInput(format!("unknown extension mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionResidual {
    pub atom: String,
    pub basis_index: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub mode: ExtensionMode,
    pub interpretation: String,
    pub tolerance: f64,
    pub max_residual: f64,
    pub per_atom: Vec<ExtensionResidual>,
    pub pass: bool,
}

/// Checks whether 𝓔 extends 𝒫 to mixed states on every basis vector and singleton.
pub fn mixed_state_extension_check(p: &Povm, e: &Instrument, basis: &[CVector], mode: ExtensionMode) -> Result<ExtensionReport> {
    if !same_space(&p.measurable, &e.measurable) {
        return Err(Error::SpaceMismatch);
    }
    check_dim(p.dim(), e.dim)?;
    let defect = orthonormality_defect(basis)?;
    if defect > STATE_TOL {
        return Err(Error::NotOrthonormal { defect });
    }
    let mut per_atom = Vec::with_capacity(basis.len() * p.effects.len());
    for (i, basis_vector) in basis.iter().enumerate() {
        check_dim(p.dim(), basis_vector.len())?;
        let rho = outer(basis_vector, basis_vector);
        for (w, (effect, op)) in p.effects.iter().zip(&e.operations).enumerate() {
            let lhs = op.apply(&rho)?;
            let rhs = match mode {
                ExtensionMode::StateEmbedding => {
                    let y = effect * basis_vector;
                    outer(&y, &y)
                }
                ExtensionMode::Expectation => effect * &rho,
            };
            per_atom.push(ExtensionResidual { atom: p.measurable.atom(w).to_string(), basis_index: i, residual: fro(&(lhs - rhs)) });
        }
    }
    let max_residual = per_atom.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(ExtensionReport {
        mode,
        interpretation: mode.interpretation().to_string(),
        tolerance: EXTENSION_TOL,
        max_residual,
        pass: max_residual <= EXTENSION_TOL,
        per_atom,
    })
}

/// Random state of the given rank: G G† / tr for a d×rank Gaussian G.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> DensityOperator {
    let g = gaussian_matrix(rng, d, rank.max(1));
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    DensityOperator::new(hermitian_part(&m.unscale(tr))).expect("Gram matrices are states")
}

/// Random POVM: P_ω = S^{-1/2} A_ω†A_ω S^{-1/2} with S = Σ A_ω†A_ω.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Povm {
    let raw: Vec<CMatrix> = (0..m)
        .map(|_| {
            let a = gaussian_matrix(rng, d, d);
            a.adjoint() * a
        })
        .collect();
    let s = raw.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + p);
    let inv_sqrt = hermitian_map(&s, |v| 1.0 / v.sqrt());
    let effects = raw.iter().map(|p| hermitian_part(&(&inv_sqrt * p * &inv_sqrt))).collect();
    Povm::new(&AtomicSpace::indexed(m), effects).expect("normalized Gram family is a POVM")
}

/// Random trace-preserving instrument: the Kraus operators are the d×d blocks of a random isometry.
pub fn random_instrument<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize, kraus_per_atom: usize) -> Instrument {
    let blocks = m * kraus_per_atom;
    let qr = gaussian_matrix(rng, blocks * d, d).qr();
    let v = qr.q();
    let kraus = (0..m).map(|w| (0..kraus_per_atom).map(|k| v.rows((w * kraus_per_atom + k) * d, d).into_owned()).collect()).collect();
    Instrument::from_kraus(&AtomicSpace::indexed(m), d, kraus, true).expect("isometry blocks are trace preserving")
}
