//! Polar decomposition and the Duggal and Aluthge transforms.

use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};
use crate::kernel::{commutator_norm, psd_sqrt, svd, ComplexMatrix, Svd, Tolerances};

/// How the partial isometry of `T = U|T|` is fixed on `ker |T|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PolarMode {
    /// `U` vanishes on `ker |T|` (the unique partial isometry).
    #[default]
    Canonical,
    /// `U = W V*` from the SVD; always unitary, not unique on the kernel.
    UnitaryExtension,
}

/// Factors of `T = U · P` with `P = |T|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarParts {
    pub u: ComplexMatrix,
    pub p: ComplexMatrix,
    /// `P^{1/2}`, taken from the same SVD.
    pub sqrt_p: ComplexMatrix,
    pub u_unitary: bool,
    pub u_self_adjoint: bool,
    pub mode: PolarMode,
    /// Number of singular values kept by the canonical isometry.
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Singular values at or below `eps_gap · σ_max` are treated as zero.
fn rank_threshold(s: &Svd, tol: &Tolerances) -> f64 {
    tol.eps_gap * s.sigma[0]
}

pub fn polar(t: &ComplexMatrix, mode: PolarMode, tol: &Tolerances) -> Result<PolarParts> {
    let s = svd(t)?;
    let thr = rank_threshold(&s, tol);
    let rank = s.sigma.iter().filter(|&&x| x > thr).count();
    let u = match mode {
        PolarMode::Canonical => s.partial_isometry(|_, sigma| sigma > thr),
        PolarMode::UnitaryExtension => s.partial_isometry(|_, _| true),
    };
    let p = s.right_function(|x| x);
    let sqrt_p = s.right_function(f64::sqrt);
    let u_unitary = u.gram().distance_to_identity() <= tol.eps_cert;
    let u_self_adjoint = u.skew_norm() <= tol.eps_cert * u.frobenius_norm().max(1.0);
    Ok(PolarParts {
        u,
        p,
        sqrt_p,
        u_unitary,
        u_self_adjoint,
        mode,
        rank,
        singular_values: s.sigma,
    })
}

/// `T̂ = |T| U` from the canonical polar factors.
pub fn duggal(t: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let parts = polar(t, PolarMode::Canonical, tol)?;
    Ok(parts.p.matmul(&parts.u))
}

/// `T̃ = |T|^{1/2} U |T|^{1/2}` from the canonical polar factors.
pub fn aluthge(t: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let parts = polar(t, PolarMode::Canonical, tol)?;
    Ok(aluthge_from_parts(&parts))
}

pub fn aluthge_from_parts(parts: &PolarParts) -> ComplexMatrix {
    parts.sqrt_p.matmul(&parts.u).matmul(&parts.sqrt_p)
}

pub const MAX_ITERATE_DEPTH: usize = 16;

/// `[T̃, T̃̃, …]`, `depth` entries.
pub fn aluthge_iterates(t: &ComplexMatrix, depth: usize, tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    if depth == 0 || depth > MAX_ITERATE_DEPTH {
        return Err(OpError::InvalidArgument(format!(
            "iterate depth must be in 1..={MAX_ITERATE_DEPTH}, got {depth}"
        )));
    }
    let mut out = Vec::with_capacity(depth);
    let mut cur = t.clone();
    for _ in 0..depth {
        cur = aluthge(&cur, tol)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// `|T̂| = (T̂* T̂)^{1/2}`, computed directly from the Duggal transform.
pub fn duggal_modulus(t: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    psd_sqrt(&duggal(t, tol)?.gram(), tol)
}

/// Frobenius residuals of the polar-factor identities for `T²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquarePolarResiduals {
    /// `||T² − U² |T²|||`
    pub r1: f64,
    /// `|||T²| − |T| |T̂|||`
    pub r2: f64,
    /// `||[|T|, |T̂|]||`
    pub r3: f64,
}

impl SquarePolarResiduals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }
}

pub fn square_polar_identity(t: &ComplexMatrix, mode: PolarMode, tol: &Tolerances) -> Result<SquarePolarResiduals> {
    let parts = polar(t, mode, tol)?;
    let t2 = t.square();
    let abs_t2 = svd(&t2)?.right_function(|x| x);
    let dug = parts.p.matmul(&parts.u);
    let abs_dug = psd_sqrt(&dug.gram(), tol)?;
    let u2 = parts.u.square();
    Ok(SquarePolarResiduals {
        r1: t2.distance(&u2.matmul(&abs_t2)),
        r2: abs_t2.distance(&parts.p.matmul(&abs_dug)),
        r3: commutator_norm(&parts.p, &abs_dug)?,
    })
}

/// `|det T| > eps_gap · ||T||_2^n`, evaluated as a product of singular values.
pub fn is_invertible(t: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    let s = svd(t)?;
    let smax = s.sigma[0];
    if smax == 0.0 {
        return Ok(false);
    }
    let rel: f64 = s.sigma.iter().map(|&x| x / smax).product();
    Ok(rel > tol.eps_gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{c64, relative_commutator};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn nilpotent() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]])
    }

    #[test]
    fn unitary_polar_is_trivial() {
        let s = 0.5f64.sqrt();
        let t = ComplexMatrix::new(2, vec![c64(s, 0.0), c64(0.0, s), c64(0.0, s), c64(s, 0.0)]).unwrap();
        for mode in [PolarMode::Canonical, PolarMode::UnitaryExtension] {
            let p = polar(&t, mode, &tol()).unwrap();
            assert!(p.u.distance(&t) < 1e-14);
            assert!(p.p.distance_to_identity() < 1e-14);
            assert!(p.u_unitary);
        }
    }

    #[test]
    fn psd_polar() {
        let t = ComplexMatrix::from_real_rows(&[[2.0, 1.0], [1.0, 2.0]]);
        let p = polar(&t, PolarMode::Canonical, &tol()).unwrap();
        assert!(p.p.distance(&t) < 1e-14);
        assert!(p.u.distance_to_identity() < 1e-14);
        assert!(p.u_self_adjoint);
        // Singular PSD: canonical U is the range projection.
        let t = ComplexMatrix::real_diagonal(&[3.0, 0.0]);
        let p = polar(&t, PolarMode::Canonical, &tol()).unwrap();
        assert!(p.u.distance(&ComplexMatrix::real_diagonal(&[1.0, 0.0])) < 1e-15);
        assert!(!p.u_unitary);
        assert_eq!(p.rank, 1);
    }

    #[test]
    fn nilpotent_polar() {
        let t = nilpotent();
        let p = polar(&t, PolarMode::Canonical, &tol()).unwrap();
        assert!(p.u.distance(&t) < 1e-15);
        assert!(p.p.distance(&ComplexMatrix::real_diagonal(&[0.0, 1.0])) < 1e-15);
        assert!(!p.u_unitary);
        let e = polar(&t, PolarMode::UnitaryExtension, &tol()).unwrap();
        assert!(e.u_unitary);
        assert!(e.u.matmul(&e.p).distance(&t) < 1e-15);
    }

    #[test]
    fn duggal_examples() {
        assert!(duggal(&nilpotent(), &tol()).unwrap().is_zero());
        let normal = ComplexMatrix::diagonal(&[c64(1.0, 2.0), c64(-3.0, 0.5), c64(0.0, 0.0)]);
        assert!(duggal(&normal, &tol()).unwrap().distance(&normal) < 1e-14);
        let rot = ComplexMatrix::from_real_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        assert!(duggal(&rot, &tol()).unwrap().distance(&rot) < 1e-15);
    }

    #[test]
    fn aluthge_examples() {
        assert!(aluthge(&nilpotent(), &tol()).unwrap().frobenius_norm() < 1e-15);
        let normal = ComplexMatrix::diagonal(&[c64(1.0, 2.0), c64(-3.0, 0.5)]);
        assert!(aluthge(&normal, &tol()).unwrap().distance(&normal) < 1e-14);
        let t = ComplexMatrix::from_real_rows(&[[0.0, 1.0, 1.0], [0.0, 1.0, -1.0], [1.0, 0.0, 0.0]]);
        assert!(relative_commutator(&t.gram(), &t.cogram()) == 0.0);
        let al = aluthge(&t, &tol()).unwrap();
        assert!(relative_commutator(&al.gram(), &al.cogram()) > 1e-3);
    }

    #[test]
    fn iterates() {
        let z = aluthge_iterates(&nilpotent(), 3, &tol()).unwrap();
        assert_eq!(z.len(), 3);
        assert!(z.iter().all(|m| m.frobenius_norm() < 1e-15));
        let normal = ComplexMatrix::diagonal(&[c64(2.0, 0.0), c64(0.0, -1.0)]);
        for it in aluthge_iterates(&normal, 4, &tol()).unwrap() {
            assert!(it.distance(&normal) < 1e-14);
        }
        let inv = ComplexMatrix::from_real_rows(&[[0.0, 2.0], [0.5, 0.0]]);
        for it in aluthge_iterates(&inv, 2, &tol()).unwrap() {
            assert!(relative_commutator(&it.gram(), &it.cogram()) < 1e-12);
        }
        assert!(aluthge_iterates(&normal, 0, &tol()).is_err());
        assert!(aluthge_iterates(&normal, 17, &tol()).is_err());
    }

    #[test]
    fn square_polar_identity_examples() {
        let rot = ComplexMatrix::from_real_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        assert!(square_polar_identity(&rot, PolarMode::Canonical, &tol()).unwrap().max() < 1e-14);
        let w = ComplexMatrix::from_real_rows(&[[0.0, 2.0], [0.5, 0.0]]);
        assert!(square_polar_identity(&w, PolarMode::Canonical, &tol()).unwrap().max() < 1e-13);
        let e = ComplexMatrix::from_real_rows(&[[-1.0, 0.0, -1.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        let r = square_polar_identity(&e, PolarMode::Canonical, &tol()).unwrap();
        assert!(r.max() < 1e-8 * e.frobenius_norm().powi(2), "{r:?}");
    }

    #[test]
    fn invertibility_screen() {
        assert!(is_invertible(&ComplexMatrix::identity(3), &tol()).unwrap());
        assert!(!is_invertible(&nilpotent(), &tol()).unwrap());
        assert!(!is_invertible(&ComplexMatrix::zeros(2), &tol()).unwrap());
    }
}
