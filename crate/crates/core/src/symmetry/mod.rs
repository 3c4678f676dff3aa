//! Complex symmetry: conjugations, refutation screens and the certifying oracle.

mod oracle;
mod screens;

use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};
use crate::kernel::{ComplexMatrix, Tolerances, C64};

pub use oracle::{
    objective, objective_gradient, oracle_find_conjugation, oracle_search, unitary_exp, OracleConfig, OracleRun,
};
pub use screens::{screen_eigen_angle, screen_modulus_angle, ScreenId, ScreenOutcome};

/// Antilinear map `x ↦ J·conj(x)` with `J` symmetric and unitary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjugation {
    j: ComplexMatrix,
}

impl Conjugation {
    pub fn new(j: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let unitary = j.cogram().distance_to_identity();
        if unitary > tol.eps_cert {
            return Err(OpError::InvalidConjugation(format!("||JJ* - I|| = {unitary:.3e}")));
        }
        let sym = j.distance(&j.transpose());
        if sym > tol.eps_cert {
            return Err(OpError::InvalidConjugation(format!("||J - J^T|| = {sym:.3e}")));
        }
        Ok(Self { j })
    }

    /// Entrywise complex conjugation (`J = I`).
    pub fn standard(n: usize) -> Self {
        Self {
            j: ComplexMatrix::identity(n),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.j
    }

    pub fn n(&self) -> usize {
        self.j.n()
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let cx: Vec<C64> = x.iter().map(|z| z.conj()).collect();
        self.j.matvec(&cx)
    }

    /// Matrix of the linear map `C·M·C`, i.e. `J·conj(M)·J*`.
    pub fn sandwich(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.j.matmul(&m.conj()).matmul(&self.j.adjoint())
    }

    /// `J' = V J Vᵀ`, the conjugation carried along `T ↦ V T V*`.
    pub fn transported(&self, v: &ComplexMatrix) -> ComplexMatrix {
        v.matmul(&self.j).matmul(&v.transpose())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CSVerdict {
    CertifiedCs { conjugation: Conjugation, residual: f64 },
    CertifiedNotCs { screen: ScreenId, margin: f64 },
    Inconclusive { best_residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    CertifiedCs,
    CertifiedNotCs,
    Inconclusive,
}

impl CSVerdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            CSVerdict::CertifiedCs { .. } => VerdictKind::CertifiedCs,
            CSVerdict::CertifiedNotCs { .. } => VerdictKind::CertifiedNotCs,
            CSVerdict::Inconclusive { .. } => VerdictKind::Inconclusive,
        }
    }

    pub fn is_cs(&self) -> bool {
        matches!(self, CSVerdict::CertifiedCs { .. })
    }

    pub fn is_not_cs(&self) -> bool {
        matches!(self, CSVerdict::CertifiedNotCs { .. })
    }

    /// `Some(true)` / `Some(false)` when decided.
    pub fn decided(&self) -> Option<bool> {
        match self {
            CSVerdict::CertifiedCs { .. } => Some(true),
            CSVerdict::CertifiedNotCs { .. } => Some(false),
            CSVerdict::Inconclusive { .. } => None,
        }
    }

    pub fn conjugation(&self) -> Option<&Conjugation> {
        match self {
            CSVerdict::CertifiedCs { conjugation, .. } => Some(conjugation),
            _ => None,
        }
    }
}

/// Largest absolute residual accepted as a certificate for `T`.
pub fn certificate_threshold(t: &ComplexMatrix, tol: &Tolerances) -> f64 {
    tol.eps_cert * t.frobenius_norm().max(1.0)
}

fn check_dims(t: &ComplexMatrix, c: &Conjugation) -> Result<()> {
    if t.n() != c.n() {
        return Err(OpError::DimensionMismatch {
            left: t.n(),
            right: c.n(),
        });
    }
    Ok(())
}

/// `||J·conj(T)·J* − T*||_F`.
pub fn conjugation_residual(t: &ComplexMatrix, c: &Conjugation) -> Result<f64> {
    check_dims(t, c)?;
    Ok(c.sandwich(t).distance(&t.adjoint()))
}

/// `||C·M·C − M||_F` for `M = T T* T* T`.
pub fn conjugation_commutes_with(t: &ComplexMatrix, c: &Conjugation) -> Result<f64> {
    check_dims(t, c)?;
    let m = t.cogram().matmul(&t.gram());
    Ok(c.sandwich(&m).distance(&m))
}

/// Re-checks a certificate from scratch: conjugation invariants plus residual.
pub fn verify_certificate(t: &ComplexMatrix, j: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let c = Conjugation::new(j.clone(), tol)?;
    let r = conjugation_residual(t, &c)?;
    if r > certificate_threshold(t, tol) {
        return Err(OpError::InvalidConjugation(format!("residual {r:.3e} above threshold")));
    }
    Ok(r)
}

/// Screens first (any refutation is final), then the oracle.
pub fn classify_cs(t: &ComplexMatrix, tol: &Tolerances, cfg: &OracleConfig) -> CSVerdict {
    for (id, outcome) in [
        (ScreenId::EigenAngle, screen_eigen_angle(t, tol)),
        (ScreenId::ModulusAngle, screen_modulus_angle(t, tol)),
    ] {
        if let ScreenOutcome::Refuted { margin } = outcome {
            return CSVerdict::CertifiedNotCs { screen: id, margin };
        }
    }
    oracle_find_conjugation(t, tol, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::c64;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn symmetric_matrix_with_standard_conjugation() {
        let t = ComplexMatrix::new(2, vec![c64(1.0, 2.0), c64(0.5, -1.0), c64(0.5, -1.0), c64(-3.0, 0.0)]).unwrap();
        assert!(conjugation_residual(&t, &Conjugation::standard(2)).unwrap() < 1e-15);
        let h = ComplexMatrix::real_diagonal(&[1.0, -2.0, 5.0]);
        assert_eq!(conjugation_residual(&h, &Conjugation::standard(3)).unwrap(), 0.0);
        assert!(conjugation_commutes_with(&h, &Conjugation::standard(3)).unwrap() == 0.0);
    }

    #[test]
    fn rejects_bad_conjugations() {
        let not_unitary = ComplexMatrix::real_diagonal(&[1.0, 2.0]);
        assert!(matches!(Conjugation::new(not_unitary, &tol()), Err(OpError::InvalidConjugation(_))));
        let s = 0.5f64.sqrt();
        let not_symmetric = ComplexMatrix::from_real_rows(&[[s, -s], [s, s]]);
        assert!(matches!(Conjugation::new(not_symmetric, &tol()), Err(OpError::InvalidConjugation(_))));
        let swap = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let c = Conjugation::new(swap, &tol()).unwrap();
        let x = vec![c64(1.0, 1.0), c64(2.0, -3.0)];
        assert_eq!(c.apply(&c.apply(&x)), x);
        assert!(matches!(
            conjugation_residual(&ComplexMatrix::identity(3), &c),
            Err(OpError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_is_certified() {
        let v = classify_cs(&ComplexMatrix::identity(3), &tol(), &OracleConfig::default());
        assert!(v.is_cs(), "{v:?}");
    }
}
