//! Necessary conditions for complex symmetry. A screen can only refute.

use serde::{Deserialize, Serialize};

use crate::kernel::{eig, inner, normalize, svd, ComplexMatrix, Tolerances, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreenId {
    EigenAngle,
    ModulusAngle,
}

impl ScreenId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScreenId::EigenAngle => "eigen_angle",
            ScreenId::ModulusAngle => "modulus_angle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ScreenOutcome {
    Refuted { margin: f64 },
    Pass { violation: f64 },
    NotApplicable,
}

/// Rounding allowance is this multiple of `EPS · condition / relative gap`.
const ALLOWANCE_FACTOR: f64 = 1e3;

fn decide(violation: f64, allowance: f64, tol: &Tolerances) -> ScreenOutcome {
    if violation - allowance >= tol.eps_screen {
        ScreenOutcome::Refuted { margin: violation }
    } else {
        ScreenOutcome::Pass { violation }
    }
}

/// Largest violation of `|g_ij| = |h_ij|` and of the cyclic triple products
/// `g_ji g_kj g_ik = h_ij h_jk h_ki` over a pair of Gram-type tables.
fn angle_violation(g: &[Vec<C64>], h: &[Vec<C64>]) -> f64 {
    let n = g.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((g[i][j].norm() - h[i][j].norm()).abs());
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let lhs = g[j][i] * g[k][j] * g[i][k];
                let rhs = h[i][j] * h[j][k] * h[k][i];
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    worst
}

fn min_pairwise_gap(values: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

/// With unit eigenvectors `x_i` of `T` and `y_i` of `T*`, a conjugation maps
/// `x_i` to a unimodular multiple of `y_i`, so `|<x_i,x_j>| = |<y_i,y_j>|` and
/// the phase-free triple products agree. Needs `n` distinct eigenvalues.
pub fn screen_eigen_angle(t: &ComplexMatrix, tol: &Tolerances) -> ScreenOutcome {
    let n = t.n();
    if n == 1 {
        return ScreenOutcome::Pass { violation: 0.0 };
    }
    let Ok(e) = eig(t) else {
        return ScreenOutcome::NotApplicable;
    };
    let scale = e.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let gap = min_pairwise_gap(&e.values);
    if scale == 0.0 || gap <= tol.eps_gap * scale {
        return ScreenOutcome::NotApplicable;
    }
    let x = &e.vectors;
    let Ok(xinv) = x.inverse() else {
        return ScreenOutcome::NotApplicable;
    };
    // Rows of X⁻¹ are left eigenvectors; their conjugates are eigenvectors of T*.
    let ys: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let mut y: Vec<C64> = (0..n).map(|j| xinv.get(i, j).conj()).collect();
            normalize(&mut y);
            y
        })
        .collect();
    let xs: Vec<Vec<C64>> = (0..n).map(|j| x.column(j)).collect();
    let gx: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| inner(&xs[i], &xs[j])).collect()).collect();
    let gy: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| inner(&ys[i], &ys[j])).collect()).collect();
    let cond = x.frobenius_norm() * xinv.frobenius_norm();
    let allowance = ALLOWANCE_FACTOR * f64::EPSILON * cond * t.frobenius_norm() / gap;
    decide(angle_violation(&gx, &gy), allowance, tol)
}

/// With `|T| v_i = σ_i v_i` and left singular vectors `w_i`, a conjugation maps
/// `v_i` to a unimodular multiple of `w_i`; hence `G_ij = <w_j, v_i>` satisfies
/// `|G_ij| = |G_ji|` plus the cyclic triple identity. Needs `n` distinct σ.
pub fn screen_modulus_angle(t: &ComplexMatrix, tol: &Tolerances) -> ScreenOutcome {
    let n = t.n();
    if n == 1 {
        return ScreenOutcome::Pass { violation: 0.0 };
    }
    let Ok(s) = svd(t) else {
        return ScreenOutcome::NotApplicable;
    };
    let smax = s.sigma[0];
    let gap = s.sigma.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    if smax == 0.0 || gap <= tol.eps_gap * smax {
        return ScreenOutcome::NotApplicable;
    }
    let vs: Vec<Vec<C64>> = (0..n).map(|j| s.v.column(j)).collect();
    let ws: Vec<Vec<C64>> = (0..n).map(|j| s.w.column(j)).collect();
    let g: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| inner(&ws[j], &vs[i])).collect()).collect();
    let mut violation = triple_only(&g);
    for i in 0..n {
        for j in (i + 1)..n {
            violation = violation.max((g[i][j].norm() - g[j][i].norm()).abs());
        }
    }
    let allowance = ALLOWANCE_FACTOR * f64::EPSILON * smax / gap;
    decide(violation, allowance, tol)
}

/// `G_ij G_jk G_ki = G_ji G_kj G_ik` over `i < j < k`.
fn triple_only(g: &[Vec<C64>]) -> f64 {
    let n = g.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let lhs = g[i][j] * g[j][k] * g[k][i];
                let rhs = g[j][i] * g[k][j] * g[i][k];
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    worst
}
