//! Operator measures, operator projection families and spectral measures.
//!
//! Operators act on ℂ^d with the Euclidean norm; operator norms and tail
//! bounds are spectral norms. The family μ_{Λ,x}({ω}) = Λ(K_ω x) is stored by
//! its kernel matrices K_ω.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{square_matrix_from_json, vector_from_json, Cx, MatrixJson};
use crate::linalg::{
    check_dim, check_square, fro, identity, normality_defect, op_norm, orthonormality_defect, CMatrix, CVector, C, ONE, ZERO,
};
use crate::measurable::{AtomicSpace, Certified, ComplexMeasure, FunctionSpec, MeasurableFunction, MeasurableSet, SpaceRef};
use crate::normed::{Functional, Norm, SpaceDescriptor};
use crate::vector_measure::{check_series_inputs, series_vector_measure, VectorMeasure, VectorProjectionFamily};

pub const NORMALIZATION_TOL: f64 = 1e-10;
pub const NORMALITY_TOL: f64 = 1e-10;
pub const PROJECTION_TOL: f64 = 1e-10;

fn check_operators(d: usize, measurable: &AtomicSpace, ops: &[CMatrix]) -> Result<()> {
    if ops.len() != measurable.len() {
        return Err(Error::DimensionMismatch { expected: measurable.len(), found: ops.len() });
    }
    ops.iter().try_for_each(|m| check_square(m, d))
}

fn check_tail(tail: f64) -> Result<()> {
    if tail.is_finite() && tail >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("tail bound {tail} must be finite and non-negative")))
    }
}

fn sum_over(d: usize, ops: &[CMatrix], set: &MeasurableSet) -> CMatrix {
    set.indices().fold(CMatrix::zeros(d, d), |acc, i| acc + &ops[i])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorMeasureJson", into = "OperatorMeasureJson")]
pub struct OperatorMeasure {
    dim: usize,
    measurable: SpaceRef,
    atom_operators: Vec<CMatrix>,
    normalized: bool,
    tail_bound: f64,
}

impl OperatorMeasure {
    pub fn new(dim: usize, measurable: &SpaceRef, atom_operators: Vec<CMatrix>, tail_bound: f64) -> Result<Self> {
        check_operators(dim, measurable, &atom_operators)?;
        check_tail(tail_bound)?;
        Ok(Self { dim, measurable: measurable.clone(), atom_operators, normalized: false, tail_bound })
    }

    /// A measure with μ(Ω) = I, checked to [`NORMALIZATION_TOL`] in operator norm.
    pub fn normalized(dim: usize, measurable: &SpaceRef, atom_operators: Vec<CMatrix>) -> Result<Self> {
        let mut mu = Self::new(dim, measurable, atom_operators, 0.0)?;
        let defect = mu.normalization_defect();
        if defect > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { defect });
        }
        mu.normalized = true;
        Ok(mu)
    }

    pub fn zero(dim: usize, measurable: &SpaceRef) -> Self {
        Self {
            dim,
            measurable: measurable.clone(),
            atom_operators: vec![CMatrix::zeros(dim, dim); measurable.len()],
            normalized: false,
            tail_bound: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn measurable(&self) -> &SpaceRef {
        &self.measurable
    }

    pub fn atom_operators(&self) -> &[CMatrix] {
        &self.atom_operators
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn measure_of(&self, set: &MeasurableSet) -> Result<CMatrix> {
        set.check_space(&self.measurable)?;
        Ok(sum_over(self.dim, &self.atom_operators, set))
    }

    /// ‖μ(Ω) − I‖ over the listed atoms.
    pub fn normalization_defect(&self) -> f64 {
        let total = sum_over(self.dim, &self.atom_operators, &MeasurableSet::all(&self.measurable));
        op_norm(&(total - identity(self.dim)))
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorMeasureJson {
    dim: usize,
    measurable: AtomicSpace,
    atom_operators: Vec<MatrixJson>,
    #[serde(default)]
    normalized: bool,
    #[serde(default)]
    tail_bound: f64,
}

impl TryFrom<OperatorMeasureJson> for OperatorMeasure {
    type Error = Error;

    fn try_from(json: OperatorMeasureJson) -> Result<Self> {
        let ops = json.atom_operators.into_iter().map(square_matrix_from_json).collect::<Result<Vec<_>>>()?;
        let space = Arc::new(json.measurable);
        if json.normalized {
            if json.tail_bound != 0.0 {
                return Err(Error::InvalidInput("a normalized measure cannot carry a tail".into()));
            }
            OperatorMeasure::normalized(json.dim, &space, ops)
        } else {
            OperatorMeasure::new(json.dim, &space, ops, json.tail_bound)
        }
    }
}

impl From<OperatorMeasure> for OperatorMeasureJson {
    fn from(mu: OperatorMeasure) -> Self {
        OperatorMeasureJson {
            dim: mu.dim,
            measurable: (*mu.measurable).clone(),
            atom_operators: mu.atom_operators.iter().map(MatrixJson::from).collect(),
            normalized: mu.normalized,
            tail_bound: mu.tail_bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorProjectionFamily {
    dim: usize,
    measurable: SpaceRef,
    kernel: Vec<CMatrix>,
    tail_bound: f64,
}

impl OperatorProjectionFamily {
    pub fn from_kernel(dim: usize, measurable: &SpaceRef, kernel: Vec<CMatrix>, tail_bound: f64) -> Result<Self> {
        check_operators(dim, measurable, &kernel)?;
        check_tail(tail_bound)?;
        Ok(Self { dim, measurable: measurable.clone(), kernel, tail_bound })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn measurable(&self) -> &SpaceRef {
        &self.measurable
    }

    pub fn kernel(&self) -> &[CMatrix] {
        &self.kernel
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn to_measure(&self) -> OperatorMeasure {
        OperatorMeasure {
            dim: self.dim,
            measurable: self.measurable.clone(),
            atom_operators: self.kernel.clone(),
            normalized: false,
            tail_bound: self.tail_bound,
        }
    }

    fn space(&self) -> SpaceDescriptor {
        SpaceDescriptor::new(self.dim, Norm::L2).expect("operator families have positive dimension")
    }
}

pub fn operator_family_of(mu: &OperatorMeasure) -> OperatorProjectionFamily {
    OperatorProjectionFamily {
        dim: mu.dim,
        measurable: mu.measurable.clone(),
        kernel: mu.atom_operators.clone(),
        tail_bound: mu.tail_bound,
    }
}

/// μ_{Λ,x} with weights Λ(K_ω x).
pub fn project_operator(fam: &OperatorProjectionFamily, functional: &Functional, x: &CVector) -> Result<ComplexMeasure> {
    check_dim(fam.dim, x.len())?;
    check_dim(fam.dim, functional.dim())?;
    let weights = fam.kernel.iter().map(|k| functional.apply(&(k * x))).collect::<Result<Vec<C>>>()?;
    let tail = functional.norm_in(&fam.space()) * x.norm() * fam.tail_bound;
    ComplexMeasure::new(&fam.measurable, weights, tail)
}

/// The family μ(x) = {μ_{Λ,x}}_Λ, a vector projection family on X with kernel K_ω x.
pub fn slice_by_vector(fam: &OperatorProjectionFamily, x: &CVector) -> Result<VectorProjectionFamily> {
    check_dim(fam.dim, x.len())?;
    let kernel = fam.kernel.iter().map(|k| k * x).collect();
    VectorProjectionFamily::from_kernel(fam.space(), &fam.measurable, kernel, x.norm() * fam.tail_bound)
}

/// The family Λ(μ) = {μ_{Λ,x}}_x, a vector projection family on X* with kernel K_ωᵀ c.
///
/// Projecting it with the coordinates of x gives xᵀ K_ωᵀ c = Λ(K_ω x).
pub fn slice_by_functional(fam: &OperatorProjectionFamily, functional: &Functional) -> Result<VectorProjectionFamily> {
    check_dim(fam.dim, functional.dim())?;
    let space = fam.space().dual();
    let kernel = fam.kernel.iter().map(|k| k.transpose() * functional.coeffs()).collect();
    let tail = functional.norm_in(&fam.space()) * fam.tail_bound;
    VectorProjectionFamily::from_kernel(space, &fam.measurable, kernel, tail)
}

/// M = Σ_ω f(ω) K_ω, so that Λ(M x) = ∫ f dμ_{Λ,x}.
pub fn integrate_operator(f: &MeasurableFunction, fam: &OperatorProjectionFamily) -> Result<CMatrix> {
    integrate_operator_certified(f, fam).map(|c| c.value)
}

/// The integral with operator-norm error radius sup|f|·tail.
pub fn integrate_operator_certified(f: &MeasurableFunction, fam: &OperatorProjectionFamily) -> Result<Certified<CMatrix>> {
    f.check_space(&fam.measurable)?;
    f.ensure_integrable()?;
    let mut acc = CMatrix::zeros(fam.dim, fam.dim);
    for (value, k) in f.values().iter().zip(&fam.kernel) {
        if *value != ZERO {
            acc += k * *value;
        }
    }
    Ok(Certified { value: acc, error_bound: f.sup_norm() * fam.tail_bound })
}

/// The integral viewed as a bilinear form (Λ, x) ↦ Λ(M x).
pub fn integral_bilinear(m: &CMatrix, functional: &Functional, x: &CVector) -> Result<C> {
    check_dim(m.ncols(), x.len())?;
    functional.apply(&(m * x))
}

/// The integral viewed as an operator on X*: Λ ↦ Λ ∘ M.
pub fn integral_dual_action(m: &CMatrix, functional: &Functional) -> Result<Functional> {
    check_dim(m.nrows(), functional.dim())?;
    Ok(Functional::new(m.transpose() * functional.coeffs()))
}

/// μ_{x,y}(A) = ⟨μ(A)x, y⟩ = y† μ(A) x.
pub fn hilbert_measure(fam: &OperatorProjectionFamily, x: &CVector, y: &CVector) -> Result<ComplexMeasure> {
    check_dim(fam.dim, x.len())?;
    check_dim(fam.dim, y.len())?;
    let weights = fam.kernel.iter().map(|k| y.dotc(&(k * x))).collect();
    ComplexMeasure::new(&fam.measurable, weights, x.norm() * y.norm() * fam.tail_bound)
}

/// Σ_i (∫ f dμ_{x,e_i}) e_i over an orthonormal basis.
pub fn basis_reconstruction(fam: &OperatorProjectionFamily, f: &MeasurableFunction, x: &CVector, basis: &[CVector]) -> Result<CVector> {
    let defect = orthonormality_defect(basis)?;
    if defect > PROJECTION_TOL {
        return Err(Error::NotOrthonormal { defect });
    }
    check_dim(fam.dim, basis.len())?;
    let mut acc = CVector::zeros(fam.dim);
    for e in basis {
        let coeff = hilbert_measure(fam, x, e)?.integrate(f)?;
        acc.axpy(coeff, e, ONE);
    }
    Ok(acc)
}

/// Residuals of the projection-valued measure axioms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralDefects {
    pub self_adjoint: f64,
    pub idempotent: f64,
    pub orthogonal: f64,
    pub complete: f64,
}

impl SpectralDefects {
    pub fn max(&self) -> f64 {
        self.self_adjoint.max(self.idempotent).max(self.orthogonal).max(self.complete)
    }
}

fn projection_defects(d: usize, projections: &[CMatrix]) -> SpectralDefects {
    let mut out = SpectralDefects { self_adjoint: 0.0, idempotent: 0.0, orthogonal: 0.0, complete: 0.0 };
    for (j, p) in projections.iter().enumerate() {
        out.self_adjoint = out.self_adjoint.max(op_norm(&(p - p.adjoint())));
        out.idempotent = out.idempotent.max(op_norm(&(p * p - p)));
        for q in &projections[j + 1..] {
            out.orthogonal = out.orthogonal.max(op_norm(&(p * q)));
        }
    }
    let total = projections.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + p);
    out.complete = op_norm(&(total - identity(d)));
    out
}

/// Projection-valued measure on the eigenvalue atoms of a normal matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectralMeasureJson", into = "SpectralMeasureJson")]
pub struct SpectralMeasure {
    dim: usize,
    space: SpaceRef,
    projections: Vec<CMatrix>,
}

impl SpectralMeasure {
    /// Validates every projection-valued measure invariant at [`PROJECTION_TOL`].
    pub fn new(eigenvalues: Vec<C>, projections: Vec<CMatrix>) -> Result<Self> {
        if eigenvalues.len() != projections.len() {
            return Err(Error::DimensionMismatch { expected: eigenvalues.len(), found: projections.len() });
        }
        let Some(first) = projections.first() else {
            return Err(Error::InvalidSpectralMeasure("no projections".into()));
        };
        let dim = first.nrows();
        projections.iter().try_for_each(|p| check_square(p, dim))?;
        let defects = projection_defects(dim, &projections);
        if defects.max() > PROJECTION_TOL {
            return Err(Error::InvalidSpectralMeasure(format!(
                "defects self-adjoint {:.3e}, idempotent {:.3e}, orthogonal {:.3e}, complete {:.3e}",
                defects.self_adjoint, defects.idempotent, defects.orthogonal, defects.complete
            )));
        }
        let ids = (0..eigenvalues.len()).map(|i| i.to_string());
        let space = AtomicSpace::labeled(ids, eigenvalues)?;
        Ok(Self { dim, space, projections })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn measurable(&self) -> &SpaceRef {
        &self.space
    }

    pub fn eigenvalues(&self) -> Vec<C> {
        self.space.labels()
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    pub fn defects(&self) -> SpectralDefects {
        projection_defects(self.dim, &self.projections)
    }

    /// E(A) = Σ_{λ_j ∈ A} P_j.
    pub fn measure_of(&self, set: &MeasurableSet) -> Result<CMatrix> {
        set.check_space(&self.space)?;
        Ok(sum_over(self.dim, &self.projections, set))
    }

    /// ∫ f dE = Σ_j f(λ_j) P_j.
    pub fn integrate(&self, f: &MeasurableFunction) -> Result<CMatrix> {
        integrate_operator(f, &operator_family_of(&self.to_operator_measure()))
    }

    pub fn apply(&self, f: &FunctionSpec) -> Result<CMatrix> {
        self.integrate(&f.bind(&self.space)?)
    }

    /// Σ_j λ_j P_j.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply(&FunctionSpec::identity()).expect("identity binds on eigenvalue labels")
    }

    pub fn to_operator_measure(&self) -> OperatorMeasure {
        OperatorMeasure {
            dim: self.dim,
            measurable: self.space.clone(),
            atom_operators: self.projections.clone(),
            normalized: true,
            tail_bound: 0.0,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SpectralMeasureJson {
    eigenvalues: Vec<Cx>,
    projections: Vec<MatrixJson>,
}

impl TryFrom<SpectralMeasureJson> for SpectralMeasure {
    type Error = Error;

    fn try_from(json: SpectralMeasureJson) -> Result<Self> {
        let projections = json.projections.into_iter().map(square_matrix_from_json).collect::<Result<Vec<_>>>()?;
        SpectralMeasure::new(json.eigenvalues.iter().map(|c| c.0).collect(), projections)
    }
}

impl From<SpectralMeasure> for SpectralMeasureJson {
    fn from(e: SpectralMeasure) -> Self {
        SpectralMeasureJson {
            eigenvalues: e.eigenvalues().into_iter().map(Cx).collect(),
            projections: e.projections.iter().map(MatrixJson::from).collect(),
        }
    }
}

/// Single-linkage groups of indices whose eigenvalues lie within `tol` of each other.
fn cluster(values: &[C], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn lexicographic(a: &C, b: &C) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Spectral measure of a normal matrix.
///
/// Eigenvalues closer than `cluster_tol` (default 1e-8·‖T‖) share an atom labelled
/// by their mean; atoms are ordered by ascending (Re, Im).
pub fn spectral_measure_of(t: &CMatrix, cluster_tol: Option<f64>) -> Result<SpectralMeasure> {
    let d = t.nrows();
    if d == 0 || t.ncols() != d {
        return Err(Error::InvalidInput(format!("expected a non-empty square matrix, got {}x{}", t.nrows(), t.ncols())));
    }
    if t.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let defect = normality_defect(t);
    if defect > NORMALITY_TOL {
        return Err(Error::NotNormal { defect });
    }
    let tol = cluster_tol.unwrap_or(1e-8 * op_norm(t));
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidInput(format!("cluster tolerance {tol} must be finite and non-negative")));
    }
    // the strictest deflation threshold stalls on some repeated eigenvalues
    let schur = [1.0, 16.0, 256.0]
        .into_iter()
        .find_map(|k| t.clone().try_schur(k * f64::EPSILON, 100 * d.max(10)))
        .ok_or_else(|| Error::InvalidInput("Schur iteration did not converge".into()))?;
    let (q, s) = schur.unpack();
    let values: Vec<C> = (0..d).map(|i| s[(i, i)]).collect();

    let mut atoms: Vec<(C, CMatrix)> = cluster(&values, tol)
        .into_iter()
        .map(|members| {
            let mean = members.iter().map(|&i| values[i]).sum::<C>() / members.len() as f64;
            let cols = CMatrix::from_columns(&members.iter().map(|&i| q.column(i).into_owned()).collect::<Vec<_>>());
            (mean, &cols * cols.adjoint())
        })
        .collect();
    atoms.sort_by(|a, b| lexicographic(&a.0, &b.0));
    let (eigenvalues, projections) = atoms.into_iter().unzip();
    SpectralMeasure::new(eigenvalues, projections)
}

/// f(T) = Σ_j f(λ_j) P_j.
pub fn functional_calculus(f: &FunctionSpec, t: &CMatrix, cluster_tol: Option<f64>) -> Result<CMatrix> {
    spectral_measure_of(t, cluster_tol)?.apply(f)
}

/// ‖(∫f dE)(∫g dE) − ∫fg dE‖_F.
pub fn check_multiplicative(e: &SpectralMeasure, f: &FunctionSpec, g: &FunctionSpec) -> Result<f64> {
    let fb = f.bind(e.measurable())?;
    let gb = g.bind(e.measurable())?;
    let lhs = e.integrate(&fb)? * e.integrate(&gb)?;
    let rhs = e.integrate(&fb.product(&gb)?)?;
    Ok(fro(&(lhs - rhs)))
}

/// Truncation of μ(E) = Σ_n 2^{-n} λ_n(E) T_n; each T_n has operator norm one.
pub fn series_operator_measure(lams: &[ComplexMeasure], ts: &[CMatrix]) -> Result<OperatorMeasure> {
    let measurable = check_series_inputs(lams, ts.len())?;
    let d = ts[0].nrows();
    for (n, t) in ts.iter().enumerate() {
        check_square(t, d)?;
        let norm = op_norm(t);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnitNorm { index: n, norm });
        }
    }
    let mut ops = vec![CMatrix::zeros(d, d); measurable.len()];
    for (n, (lam, t)) in lams.iter().zip(ts).enumerate() {
        let coeff = (-(n as i32 + 1) as f64).exp2();
        for (op, w) in ops.iter_mut().zip(lam.weights()) {
            *op += t * (*w * coeff);
        }
    }
    OperatorMeasure::new(d, &measurable, ops, (-(ts.len() as f64)).exp2())
}

/// Σ_n 2^{-n} (∫ f dλ_n) T_n x, computed term by term.
pub fn series_operator_integral(f: &MeasurableFunction, lams: &[ComplexMeasure], ts: &[CMatrix], x: &CVector) -> Result<CVector> {
    if lams.len() != ts.len() {
        return Err(Error::DimensionMismatch { expected: lams.len(), found: ts.len() });
    }
    let mut acc = CVector::zeros(x.len());
    for (n, (lam, t)) in lams.iter().zip(ts).enumerate() {
        check_square(t, x.len())?;
        let coeff = (-(n as i32 + 1) as f64).exp2();
        acc.axpy(lam.integrate(f)? * coeff, &(t * x), ONE);
    }
    Ok(acc)
}

/// Series input: probability measures with either unit vectors `xs` or unit-norm operators `Ts`,
/// truncated to the first `N` terms when given.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub lams: Vec<ComplexMeasure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xs: Option<Vec<Vec<Cx>>>,
    #[serde(default, rename = "Ts", skip_serializing_if = "Option::is_none")]
    pub ts: Option<Vec<MatrixJson>>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<Norm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeriesMeasure {
    Vector(VectorMeasure),
    Operator(OperatorMeasure),
}

impl SeriesSpec {
    fn terms(&self, available: usize) -> Result<usize> {
        let n = self.n.unwrap_or(available);
        if n > available || n > self.lams.len() {
            return Err(Error::InvalidInput(format!("N = {n} exceeds the {available} terms supplied")));
        }
        Ok(n)
    }

    pub fn build(&self) -> Result<SeriesMeasure> {
        match (&self.xs, &self.ts) {
            (Some(xs), None) => {
                let n = self.terms(xs.len())?;
                let xs: Vec<CVector> = xs[..n].iter().map(|x| vector_from_json(x)).collect();
                let dim = xs.first().map_or(0, |x| x.len());
                let space = SpaceDescriptor::new(dim, self.norm.unwrap_or(Norm::L2))?;
                Ok(SeriesMeasure::Vector(series_vector_measure(&self.lams[..n], &xs, space)?))
            }
            (None, Some(ts)) => {
                let n = self.terms(ts.len())?;
                let ts = ts[..n].iter().cloned().map(square_matrix_from_json).collect::<Result<Vec<_>>>()?;
                Ok(SeriesMeasure::Operator(series_operator_measure(&self.lams[..n], &ts)?))
            }
            _ => Err(Error::InvalidInput("series needs exactly one of `xs` or `Ts`".into())),
        }
    }
}
