//! Dense complex matrix arithmetic and the decompositions every other module
//! relies on.

mod hermitian;
mod matrix;
mod schur;
mod svd;
mod tolerances;

use serde::{Deserialize, Serialize};

pub use hermitian::{herm_eig, psd_sqrt, HermEig};
pub(crate) use hermitian::check_psd;
pub use matrix::{c64, commutator_norm, inner, normalize, vec_norm, ComplexMatrix, C64, MAX_DIM};
pub use schur::{eig, eigenvalues, schur, Eig, Schur};
pub use svd::{svd, Svd};
pub use tolerances::{min_gap, Tolerances};

/// Relative commutator `||AB - BA||_F / (||A||_F ||B||_F)`; zero when either factor vanishes.
pub fn relative_commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let scale = a.frobenius_norm() * b.frobenius_norm();
    if scale == 0.0 {
        return 0.0;
    }
    a.matmul(b).distance(&b.matmul(a)) / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralFlags {
    pub is_psd: bool,
    pub is_unitary: bool,
    pub is_involution: bool,
    pub is_self_adjoint: bool,
    pub is_weighted_permutation: bool,
}

pub fn is_self_adjoint(a: &ComplexMatrix, tol: &Tolerances) -> bool {
    a.skew_norm() <= tol.eps_comm * a.frobenius_norm()
}

/// Hermitian within `eps_comm` and `λ_min >= -eps_psd·||A||_2`.
pub fn is_psd(a: &ComplexMatrix, tol: &Tolerances) -> bool {
    match herm_eig(a, tol) {
        Ok(e) => check_psd(&e, tol).is_ok(),
        Err(_) => false,
    }
}

pub fn is_unitary(a: &ComplexMatrix, tol: &Tolerances) -> bool {
    a.gram().distance_to_identity() <= tol.eps_cert
}

pub fn is_involution(a: &ComplexMatrix, tol: &Tolerances) -> bool {
    let f = a.frobenius_norm();
    a.square().distance_to_identity() <= tol.eps_cert * (f * f).max(1.0)
}

/// Exactly one significant entry (modulus above `eps_cert·max|a_ij|`) in every row and column.
pub fn is_weighted_permutation(a: &ComplexMatrix, tol: &Tolerances) -> bool {
    let n = a.n();
    let thr = tol.eps_cert * a.max_abs();
    if a.max_abs() == 0.0 {
        return false;
    }
    let mut col_count = vec![0usize; n];
    for i in 0..n {
        let mut row_count = 0;
        for (j, cc) in col_count.iter_mut().enumerate() {
            if a.get(i, j).norm() > thr {
                row_count += 1;
                *cc += 1;
            }
        }
        if row_count != 1 {
            return false;
        }
    }
    col_count.iter().all(|&c| c == 1)
}

pub fn structural_tests(a: &ComplexMatrix, tol: &Tolerances) -> StructuralFlags {
    StructuralFlags {
        is_psd: is_psd(a, tol),
        is_unitary: is_unitary(a, tol),
        is_involution: is_involution(a, tol),
        is_self_adjoint: is_self_adjoint(a, tol),
        is_weighted_permutation: is_weighted_permutation(a, tol),
    }
}
