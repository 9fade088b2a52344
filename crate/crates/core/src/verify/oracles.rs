//! Brute-force references used by the suites. Each one recomputes its quantity
//! by a route that shares no code with the library routine it checks.

use crate::linalg::{CMatrix, CVector, C, ZERO};
use crate::normed::{Functional, SpaceDescriptor};

/// max over all 2^m subsets F of ‖Σ_{ω∈F} v_ω‖, by bitmask enumeration.
pub fn subset_sup(vectors: &[CVector], space: &SpaceDescriptor) -> f64 {
    let m = vectors.len();
    assert!(m <= 24, "subset enumeration over {m} atoms");
    let d = space.dim();
    let mut best = 0.0f64;
    let mut acc = vec![ZERO; d];
    for mask in 1u32..(1u32 << m) {
        acc.iter_mut().for_each(|a| *a = ZERO);
        for (j, v) in vectors.iter().enumerate() {
            if mask & (1 << j) != 0 {
                for (a, x) in acc.iter_mut().zip(v.iter()) {
                    *a += x;
                }
            }
        }
        best = best.max(space.norm_kind().of(acc.iter()));
    }
    best
}

/// max over subsets of |Σ_{ω∈F} w_ω|.
pub fn scalar_subset_sup(weights: &[C]) -> f64 {
    let m = weights.len();
    assert!(m <= 24, "subset enumeration over {m} atoms");
    (0u32..(1u32 << m))
        .map(|mask| weights.iter().enumerate().filter(|(j, _)| mask & (1 << j) != 0).map(|(_, w)| *w).sum::<C>().norm())
        .fold(0.0, f64::max)
}

/// sup_θ ‖Σ_j e^{iθ_j} v_j‖₂ on a phase grid of the given step.
///
/// θ_1 = 0 by symmetry; θ_2 … θ_{m-1} run over the grid and the last phase is
/// maximized in closed form, max_θ ‖a + e^{iθ}b‖² = ‖a‖² + ‖b‖² + 2|⟨a,b⟩|.
/// The result is within Σ_j ‖v_j‖·step/2 below the supremum.
pub fn phase_grid_sup_l2(vectors: &[CVector], step: f64) -> f64 {
    let m = vectors.len();
    match m {
        0 => return 0.0,
        1 => return vectors[0].norm(),
        _ => {}
    }
    let points = (std::f64::consts::TAU / step).ceil() as usize;
    let grid_dims = m - 2;
    let last = &vectors[m - 1];
    let mut best = 0.0f64;
    let mut index = vec![0usize; grid_dims];
    loop {
        let mut a = vectors[0].clone();
        for (j, &k) in index.iter().enumerate() {
            let theta = k as f64 * std::f64::consts::TAU / points as f64;
            a.axpy(C::from_polar(1.0, theta), &vectors[j + 1], C::new(1.0, 0.0));
        }
        let value = (a.norm_squared() + last.norm_squared() + 2.0 * a.dotc(last).norm()).sqrt();
        best = best.max(value);
        let mut carry = true;
        for k in index.iter_mut() {
            if !carry {
                break;
            }
            *k += 1;
            carry = *k == points;
            if carry {
                *k = 0;
            }
        }
        if carry {
            break;
        }
    }
    best
}

pub fn horner(coeffs: &[C], z: C) -> C {
    coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
}

/// U diag(f(λ)) U† from the generator's own factors.
pub fn conjugated_diagonal(u: &CMatrix, eigenvalues: &[C], f: impl Fn(C) -> C) -> CMatrix {
    let mut scaled = u.clone();
    for (j, lambda) in eigenvalues.iter().enumerate() {
        let fj = f(*lambda);
        for i in 0..u.nrows() {
            scaled[(i, j)] *= fj;
        }
    }
    scaled * u.adjoint()
}

/// Σ_ω Σ_j f_ω c_j k_{ω,j} as a plain double loop.
pub fn lewis_double_sum(f: &[C], kernel: &[CVector], functional: &Functional) -> C {
    let mut acc = ZERO;
    for (fw, k) in f.iter().zip(kernel) {
        for (c, x) in functional.coeffs().iter().zip(k.iter()) {
            acc += fw * c * x;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normed::Norm;

    fn cv(xs: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(xs.len(), xs.iter().map(|&(a, b)| C::new(a, b)))
    }

    #[test]
    fn grid_on_orthonormal_pair() {
        let e = [cv(&[(1.0, 0.0), (0.0, 0.0)]), cv(&[(0.0, 0.0), (1.0, 0.0)])];
        assert!((phase_grid_sup_l2(&e, 1e-3) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn grid_on_three_vectors_matches_aligned_value() {
        // all three on the same ray: the supremum is the sum of the norms
        let v = [cv(&[(1.0, 0.0), (0.0, 0.0)]), cv(&[(0.0, 2.0), (0.0, 0.0)]), cv(&[(-0.5, 0.0), (0.0, 0.0)])];
        assert!((phase_grid_sup_l2(&v, 1e-3) - 3.5).abs() < 1e-5);
    }

    #[test]
    fn subset_sups() {
        let s = SpaceDescriptor::new(1, Norm::L2).unwrap();
        let v = [cv(&[(1.0, 0.0)]), cv(&[(-1.0, 0.0)]), cv(&[(2.0, 0.0)])];
        assert_eq!(subset_sup(&v, &s), 3.0);
        assert_eq!(scalar_subset_sup(&[C::new(1.0, 0.0), C::new(-1.0, 0.0), C::new(2.0, 0.0)]), 3.0);
    }

    #[test]
    fn horner_evaluates() {
        let p = [C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(2.0, 0.0)];
        let z = C::new(0.5, -1.0);
        assert!((horner(&p, z) - (p[0] + p[1] * z + p[2] * z * z)).norm() < 1e-15);
    }
}
