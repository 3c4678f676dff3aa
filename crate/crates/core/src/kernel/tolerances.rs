use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};

/// Numeric thresholds shared by every decision procedure.
///
/// All comparisons are relative to a natural scale of the quantity under
/// test (documented at each use site); `eps_screen` must exceed `eps_cert`
/// so that a certificate and a refutation can never both be issued.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative commutator tolerance (normality-type checks, Hermitian precondition).
    pub eps_comm: f64,
    /// Relative eigenvalue negativity slack for positive semidefiniteness.
    pub eps_psd: f64,
    /// Certificate residual bound.
    pub eps_cert: f64,
    /// Minimum margin for a refutation.
    pub eps_screen: f64,
    /// Relative gap for calling eigenvalues or singular values distinct.
    pub eps_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_comm: 1e-10,
            eps_psd: 1e-10,
            eps_cert: 1e-8,
            eps_screen: 1e-6,
            eps_gap: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("eps_comm", self.eps_comm),
            ("eps_psd", self.eps_psd),
            ("eps_cert", self.eps_cert),
            ("eps_screen", self.eps_screen),
            ("eps_gap", self.eps_gap),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(OpError::InvalidTolerances(format!("{name} must be positive, got {v}")));
            }
        }
        if self.eps_screen <= self.eps_cert {
            return Err(OpError::InvalidTolerances(format!(
                "eps_screen ({}) must exceed eps_cert ({})",
                self.eps_screen, self.eps_cert
            )));
        }
        Ok(())
    }

    /// Sorted values `v` (any order) are pairwise distinct when every gap
    /// exceeds `eps_gap` times the spread `max |v|`.
    pub fn all_distinct(&self, values: &[f64]) -> bool {
        min_gap(values) > self.eps_gap * values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE)
    }
}

/// Smallest pairwise distance among real values (infinity for fewer than two).
pub fn min_gap(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}
