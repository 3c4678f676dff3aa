//! Cyclic Jacobi eigensolver for Hermitian matrices and the PSD square root
//! built on it.

use super::matrix::{c64, ComplexMatrix, C64};
use super::tolerances::Tolerances;
use crate::error::{OpError, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(values) V*` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermEig {
    /// Rebuilds `V diag(f(λ)) V*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| v.get(i, k) * fv[k] * v.get(j, k).conj()).sum()
        })
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Hermitian eigen-decomposition by cyclic complex Jacobi rotations.
///
/// Requires `||A - A*||_F <= eps_comm * ||A||_F`; the Hermitian part is used.
pub fn herm_eig(a: &ComplexMatrix, tol: &Tolerances) -> Result<HermEig> {
    let frob = a.frobenius_norm();
    let skew = a.skew_norm();
    if skew > tol.eps_comm * frob {
        return Err(OpError::NotHermitian {
            skew: if frob > 0.0 { skew / frob } else { skew },
        });
    }
    jacobi(&a.hermitian_part())
}

fn jacobi(a: &ComplexMatrix) -> Result<HermEig> {
    let n = a.n();
    let mut m = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let frob = m.frobenius_norm();
    let floor = frob * 1e-18;

    let mut converged = n == 1 || frob == 0.0;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(OpError::NoConvergence { iterations: sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let b = m[(p, q)];
                let bn = b.norm();
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if bn <= floor || bn <= 0.5 * f64::EPSILON * (app.abs() * aqq.abs()).sqrt() {
                    continue;
                }
                rotated = true;
                rotate(&mut m, &mut v, p, q, app, aqq, b, bn);
            }
        }
        converged = !rotated;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| v.get(i, order[j]));
    Ok(HermEig { values, vectors })
}

/// Applies `M <- G* M G`, `V <- V G` with `G = diag(1, e^{-iφ}) R(θ)` chosen to
/// annihilate `M[p][q]`.
#[allow(clippy::too_many_arguments)]
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, app: f64, aqq: f64, b: C64, bn: f64) {
    let n = m.n();
    let phase = b / bn; // e^{iφ}
    let theta = (aqq - app) / (2.0 * bn);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
        sgn / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let em = phase.conj(); // e^{-iφ}

    // Columns: (x_p, x_q) <- (c x_p - s e^{-iφ} x_q, s x_p + c e^{-iφ} x_q)
    for k in 0..n {
        let xp = m[(k, p)];
        let xq = m[(k, q)];
        m[(k, p)] = xp * c - xq * em * s;
        m[(k, q)] = xp * s + xq * em * c;
        let vp = v[(k, p)];
        let vq = v[(k, q)];
        v[(k, p)] = vp * c - vq * em * s;
        v[(k, q)] = vp * s + vq * em * c;
    }
    // Rows: (r_p, r_q) <- (c r_p - s e^{iφ} r_q, s r_p + c e^{iφ} r_q)
    for k in 0..n {
        let rp = m[(p, k)];
        let rq = m[(q, k)];
        m[(p, k)] = rp * c - rq * phase * s;
        m[(q, k)] = rp * s + rq * phase * c;
    }
    m[(p, q)] = c64(0.0, 0.0);
    m[(q, p)] = c64(0.0, 0.0);
    m[(p, p)] = c64(m[(p, p)].re, 0.0);
    m[(q, q)] = c64(m[(q, q)].re, 0.0);
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-eps_psd·||A||_2, 0)` are clamped to zero.
pub fn psd_sqrt(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = herm_eig(a, tol)?;
    check_psd(&eig, tol)?;
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()))
}

pub(crate) fn check_psd(eig: &HermEig, tol: &Tolerances) -> Result<()> {
    let scale = eig.max_abs();
    if eig.min() < -tol.eps_psd * scale {
        return Err(OpError::NotPsd { min_eig: eig.min() });
    }
    Ok(())
}
