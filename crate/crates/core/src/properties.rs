//! Normal, quasinormal, binormal, hyponormal, paranormal and centered checks,
//! each with the numeric witness that decided it.

use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};
use crate::kernel::{herm_eig, relative_commutator, structural_tests, svd, ComplexMatrix, StructuralFlags, Tolerances, C64};
use crate::symmetry::{classify_cs, CSVerdict, OracleConfig};

pub const DEFAULT_CENTERED_DEPTH: usize = 4;
pub const MAX_CENTERED_DEPTH: usize = 8;
pub const PARANORMAL_DEFINITION: &str = "||Tx||^2 <= ||T^2 x|| ||x|| for all x";
pub const SUBNORMAL_NOTE: &str = "subnormal coincides with normal in finite dimensions";

/// Flag plus the relative commutator that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witnessed {
    pub holds: bool,
    pub witness: f64,
}

fn commuting(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerances) -> Witnessed {
    let w = relative_commutator(a, b);
    Witnessed {
        holds: w <= tol.eps_comm,
        witness: w,
    }
}

/// `T^k`, with entries flushed to zero when `||T^k||_F <= eps_gap · ||T||_F^k`.
///
/// Powers of nilpotent matrices come out as rounding noise, and a relative
/// commutator of noise is meaningless.
pub fn flushed_power(t: &ComplexMatrix, k: u32, tol: &Tolerances) -> ComplexMatrix {
    flush_negligible(t.pow(k), t.frobenius_norm().powi(k as i32), tol)
}

/// Zero when `||m||_F <= eps_gap · scale`, else `m` unchanged.
pub fn flush_negligible(m: ComplexMatrix, scale: f64, tol: &Tolerances) -> ComplexMatrix {
    if m.frobenius_norm() <= tol.eps_gap * scale {
        ComplexMatrix::zeros(m.n())
    } else {
        m
    }
}

pub fn is_normal(t: &ComplexMatrix, tol: &Tolerances) -> Witnessed {
    commuting(t, &t.adjoint(), tol)
}

pub fn is_quasinormal(t: &ComplexMatrix, tol: &Tolerances) -> Witnessed {
    commuting(t, &t.gram(), tol)
}

pub fn is_binormal(t: &ComplexMatrix, tol: &Tolerances) -> Witnessed {
    commuting(&t.gram(), &t.cogram(), tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyponormalCheck {
    pub holds: bool,
    /// Smallest eigenvalue of `T*T − TT*`.
    pub min_eig: f64,
    pub vector: Vec<C64>,
}

pub fn is_hyponormal(t: &ComplexMatrix, tol: &Tolerances) -> Result<HyponormalCheck> {
    let d = (&t.gram() - &t.cogram()).hermitian_part();
    let e = herm_eig(&d, tol)?;
    let smax = svd(t)?.sigma[0];
    let min_eig = e.values[0];
    Ok(HyponormalCheck {
        holds: min_eig >= -tol.eps_psd * smax * smax,
        min_eig,
        vector: e.vectors.column(0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Paranormal {
    /// Minimum over the λ-grid of `λ_min(M(λ))` for `T / ||T||_2`.
    Yes { grid_min: f64 },
    /// Unit `x` with `||Tx||² − ||T²x|| = gap` (in units of `||T||_2²`).
    No { witness: Vec<C64>, gap: f64 },
    Inconclusive { grid_min: f64 },
}

impl Paranormal {
    pub fn decided(&self) -> Option<bool> {
        match self {
            Paranormal::Yes { .. } => Some(true),
            Paranormal::No { .. } => Some(false),
            Paranormal::Inconclusive { .. } => None,
        }
    }
}

const GRID_PER_DECADE: usize = 8;

struct ParanormalFamily {
    t: ComplexMatrix,
    g: ComplexMatrix,
    a2: ComplexMatrix,
}

impl ParanormalFamily {
    /// `M(λ) = T*²T² − 2λ T*T + λ² I`.
    fn min_eig(&self, lambda: f64, tol: &Tolerances) -> Result<(f64, Vec<C64>)> {
        let n = self.t.n();
        let m = ComplexMatrix::from_fn(n, |i, j| {
            let mut z = self.a2.get(i, j) - self.g.get(i, j) * (2.0 * lambda);
            if i == j {
                z += lambda * lambda;
            }
            z
        });
        let e = herm_eig(&m.hermitian_part(), tol)?;
        Ok((e.values[0], e.vectors.column(0)))
    }

    fn gap(&self, x: &[C64]) -> f64 {
        let tx = self.t.matvec(x);
        let ttx = self.t.matvec(&tx);
        let a: f64 = tx.iter().map(|z| z.norm_sqr()).sum();
        let b: f64 = ttx.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        a - b
    }
}

/// Decides `||Tx||² <= ||T²x||·||x||` through PSD-ness of the family `M(λ)`.
pub fn is_paranormal(t: &ComplexMatrix, tol: &Tolerances) -> Result<Paranormal> {
    let smax = svd(t)?.sigma[0];
    if smax == 0.0 {
        return Ok(Paranormal::Yes { grid_min: 0.0 });
    }
    let tn = t.scale_real(1.0 / smax);
    let t2 = tn.square();
    let fam = ParanormalFamily {
        g: tn.gram(),
        a2: t2.gram(),
        t: tn,
    };
    let lo = tol.eps_gap.log10();
    let hi = -lo;
    let steps = ((hi - lo) * GRID_PER_DECADE as f64).round() as usize;
    let mut best = (f64::INFINITY, 0.0, Vec::new());
    let mut best_idx = 0;
    for k in 0..=steps {
        let lambda = 10f64.powf(lo + (hi - lo) * k as f64 / steps as f64);
        let (v, x) = fam.min_eig(lambda, tol)?;
        if v < best.0 {
            best = (v, lambda, x);
            best_idx = k;
        }
    }
    // Golden-section refinement in log λ between the neighbouring grid points.
    let at = |k: usize| lo + (hi - lo) * k as f64 / steps as f64;
    let (mut a, mut b) = (at(best_idx.saturating_sub(1)), at((best_idx + 1).min(steps)));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..40 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        let (fc, xc) = fam.min_eig(10f64.powf(c), tol)?;
        let (fd, xd) = fam.min_eig(10f64.powf(d), tol)?;
        if fc < best.0 {
            best = (fc, 10f64.powf(c), xc);
        }
        if fd < best.0 {
            best = (fd, 10f64.powf(d), xd);
        }
        if fc < fd {
            b = d;
        } else {
            a = c;
        }
    }
    // Alternate λ = ||Tx||² with the minimising eigenvector at λ.
    let mut x = best.2.clone();
    for _ in 0..20 {
        let tx = fam.t.matvec(&x);
        let lambda: f64 = tx.iter().map(|z| z.norm_sqr()).sum();
        if lambda <= 0.0 {
            break;
        }
        let (v, y) = fam.min_eig(lambda, tol)?;
        if v < best.0 {
            best = (v, lambda, y.clone());
        }
        x = y;
    }
    let grid_min = best.0;
    if grid_min >= -tol.eps_cert {
        return Ok(Paranormal::Yes { grid_min });
    }
    let candidates = [best.2.clone(), x];
    let (gap, witness) = candidates
        .into_iter()
        .map(|v| (fam.gap(&v), v))
        .max_by(|p, q| p.0.total_cmp(&q.0))
        .expect("two candidates");
    if gap >= tol.eps_screen {
        Ok(Paranormal::No { witness, gap })
    } else {
        Ok(Paranormal::Inconclusive { grid_min })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenteredCheck {
    pub depth: usize,
    pub holds: bool,
    /// Largest relative commutator within the family.
    pub worst: f64,
}

/// Mutual commutation of `{(T^k)*T^k, T^k(T^k)* : 1 <= k <= depth}`.
pub fn is_centered(t: &ComplexMatrix, depth: usize, tol: &Tolerances) -> Result<CenteredCheck> {
    if depth == 0 || depth > MAX_CENTERED_DEPTH {
        return Err(OpError::InvalidArgument(format!(
            "centered depth must be in 1..={MAX_CENTERED_DEPTH}, got {depth}"
        )));
    }
    let smax = svd(t)?.sigma[0];
    let tn = if smax > 0.0 { t.scale_real(1.0 / smax) } else { t.clone() };
    let mut family = Vec::with_capacity(2 * depth);
    for k in 1..=depth as u32 {
        let p = flushed_power(&tn, k, tol);
        family.push(p.gram());
        family.push(p.cogram());
    }
    let mut worst = 0.0f64;
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            worst = worst.max(relative_commutator(&family[i], &family[j]));
        }
    }
    Ok(CenteredCheck {
        depth,
        holds: worst <= tol.eps_comm,
        worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub n: usize,
    pub normal: Witnessed,
    pub quasinormal: Witnessed,
    pub hyponormal: HyponormalCheck,
    pub binormal: Witnessed,
    pub subnormal: bool,
    pub subnormal_note: String,
    pub paranormal: Paranormal,
    pub paranormal_definition: String,
    pub centered: CenteredCheck,
    pub structure: StructuralFlags,
    pub cs: CSVerdict,
}

impl PropertyReport {
    /// Rejects flag combinations that contradict the implication lattice.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(OpError::InconsistentReport(m.to_string()));
        if self.normal.holds && !self.quasinormal.holds {
            return fail("normal but not quasinormal");
        }
        if self.quasinormal.holds && !self.hyponormal.holds {
            return fail("quasinormal but not hyponormal");
        }
        if self.normal.holds && !self.binormal.holds {
            return fail("normal but not binormal");
        }
        if self.quasinormal.holds && !self.binormal.holds {
            return fail("quasinormal but not binormal");
        }
        if self.subnormal != self.normal.holds {
            return fail("subnormal differs from normal");
        }
        if self.hyponormal.holds && self.paranormal.decided() == Some(false) {
            return fail("hyponormal but not paranormal");
        }
        if self.normal.holds && self.cs.is_not_cs() {
            return fail("normal but refuted as complex symmetric");
        }
        Ok(())
    }
}

pub fn property_report(
    t: &ComplexMatrix,
    centered_depth: usize,
    tol: &Tolerances,
    oracle: &OracleConfig,
) -> Result<PropertyReport> {
    let normal = is_normal(t, tol);
    let report = PropertyReport {
        n: t.n(),
        normal,
        quasinormal: is_quasinormal(t, tol),
        hyponormal: is_hyponormal(t, tol)?,
        binormal: is_binormal(t, tol),
        subnormal: normal.holds,
        subnormal_note: SUBNORMAL_NOTE.to_string(),
        paranormal: is_paranormal(t, tol)?,
        paranormal_definition: PARANORMAL_DEFINITION.to_string(),
        centered: is_centered(t, centered_depth, tol)?,
        structure: structural_tests(t, tol),
        cs: classify_cs(t, tol, oracle),
    };
    report.validate()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::c64;
    use crate::transforms::aluthge;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn example() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[-1.0, 0.0, -1.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    }

    #[test]
    fn diagonal_is_everything() {
        let t = ComplexMatrix::diagonal(&[c64(1.0, 1.0), c64(-2.0, 0.0), c64(0.0, 3.0)]);
        assert!(is_normal(&t, &tol()).holds);
        assert!(is_quasinormal(&t, &tol()).holds);
        assert!(is_binormal(&t, &tol()).holds);
        assert!(is_hyponormal(&t, &tol()).unwrap().holds);
        assert!(matches!(is_paranormal(&t, &tol()).unwrap(), Paranormal::Yes { .. }));
        assert!(is_centered(&t, 4, &tol()).unwrap().holds);
    }

    #[test]
    fn binormal_example_and_its_square() {
        let t = example();
        assert!(is_binormal(&t, &tol()).holds);
        assert!(!is_binormal(&t.square(), &tol()).holds);
        assert!(!is_normal(&t, &tol()).holds);
    }

    #[test]
    fn shifts_are_not_hyponormal() {
        let up = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        let h = is_hyponormal(&up, &tol()).unwrap();
        assert!(!h.holds);
        assert!((h.min_eig + 1.0).abs() < 1e-15);
        let down = up.transpose();
        assert!(!is_hyponormal(&down, &tol()).unwrap().holds);
    }

    #[test]
    fn nilpotent_is_not_paranormal() {
        let up = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        match is_paranormal(&up, &tol()).unwrap() {
            Paranormal::No { witness, gap } => {
                assert!((gap - 1.0).abs() < 1e-12);
                assert!(witness[0].norm() < 1e-12);
                assert!((witness[1].norm() - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn centered_examples() {
        let inv = ComplexMatrix::from_real_rows(&[[0.0, 2.0], [0.5, 0.0]]);
        for d in 1..=8 {
            assert!(is_centered(&inv, d, &tol()).unwrap().holds);
        }
        let c3 = ComplexMatrix::from_real_rows(&[[0.0, 1.0, 1.0], [0.0, 1.0, -1.0], [1.0, 0.0, 0.0]]);
        assert!(is_binormal(&c3, &tol()).holds);
        assert!(!is_binormal(&aluthge(&c3, &tol()).unwrap(), &tol()).holds);
        assert!(is_centered(&c3, 1, &tol()).unwrap().holds);
        assert!(!is_centered(&c3, 4, &tol()).unwrap().holds);
        assert!(is_centered(&c3, 0, &tol()).is_err());
        assert!(is_centered(&c3, 9, &tol()).is_err());
    }

    #[test]
    fn report_is_consistent() {
        let r = property_report(&ComplexMatrix::identity(2), 4, &tol(), &OracleConfig::default()).unwrap();
        assert!(r.normal.holds && r.subnormal && r.cs.is_cs());
        let mut bad = r.clone();
        bad.quasinormal.holds = false;
        assert!(matches!(bad.validate(), Err(OpError::InconsistentReport(_))));
        let e = property_report(&example(), 4, &tol(), &OracleConfig::default()).unwrap();
        assert!(e.binormal.holds && e.cs.is_cs() && !e.normal.holds);
    }
}
