//! Dense complex linear algebra shared by the measure modules.
//!
//! Matrices and vectors are plain `nalgebra` dynamic types over `Complex64`.
//! Residuals are measured in the Frobenius norm unless stated otherwise, which
//! dominates the spectral norm and so gives conservative checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C = Complex64;
pub type CVector = DVector<C>;
pub type CMatrix = DMatrix<C>;

pub const ZERO: C = C::new(0.0, 0.0);
pub const ONE: C = C::new(1.0, 0.0);

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(d: usize) -> CMatrix {
    CMatrix::zeros(d, d)
}

pub fn fro(m: &CMatrix) -> f64 {
    m.norm()
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    fro(&(m - m.adjoint()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).unscale(2.0)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = m.nrows();
    if d == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// `f` applied to the spectrum of the Hermitian part of `m`.
pub fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let d = m.nrows();
    let mapped = CMatrix::from_diagonal(&CVector::from_iterator(d, values.iter().map(|&v| C::new(f(v), 0.0))));
    &vectors * mapped * vectors.adjoint()
}

/// Relative normality defect ‖TT† − T†T‖ / ‖T‖² in operator norm, zero for the zero matrix.
pub fn normality_defect(t: &CMatrix) -> f64 {
    let scale = op_norm(t);
    if scale == 0.0 {
        return 0.0;
    }
    let td = t.adjoint();
    op_norm(&(t * &td - &td * t)) / (scale * scale)
}

/// ‖B†B − I‖ for the matrix whose columns are the given vectors.
pub fn orthonormality_defect(basis: &[CVector]) -> Result<f64> {
    let Some(first) = basis.first() else {
        return Ok(0.0);
    };
    let d = first.len();
    for v in basis {
        check_dim(d, v.len())?;
    }
    let b = CMatrix::from_columns(basis);
    Ok(fro(&(b.adjoint() * &b - identity(basis.len()))))
}

pub fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn check_square(m: &CMatrix, d: usize) -> Result<()> {
    check_dim(d, m.nrows())?;
    check_dim(d, m.ncols())
}

pub fn trace(m: &CMatrix) -> C {
    m.diagonal().sum()
}

/// tr(AB) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn outer(x: &CVector, y: &CVector) -> CMatrix {
    x * y.adjoint()
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(re, im) / std::f64::consts::SQRT_2
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVector {
    CVector::from_fn(d, |_, _| complex_gaussian(rng))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal folded back into Q.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = gaussian_matrix(rng, d, d).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVector {
    loop {
        let v = gaussian_vector(rng, d);
        let n = v.norm();
        if n > 1e-12 {
            return v.unscale(n);
        }
    }
}
