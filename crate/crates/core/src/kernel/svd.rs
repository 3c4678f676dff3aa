//! One-sided (Hestenes) Jacobi singular value decomposition.

use super::matrix::{c64, inner, normalize, vec_norm, ComplexMatrix, C64};
use crate::error::{OpError, Result};

const MAX_SWEEPS: usize = 100;

/// `T = W · diag(sigma) · V*` with `sigma` non-negative and descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub w: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.sigma.len();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.w.get(i, k) * self.sigma[k] * self.v.get(j, k).conj())
                .sum()
        })
    }

    /// `V · diag(f(σ)) · V*`, e.g. `|T|` for `f = id`.
    pub fn right_function(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.sigma.len();
        let fs: Vec<f64> = self.sigma.iter().map(|&s| f(s)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| self.v.get(i, k) * fs[k] * self.v.get(j, k).conj()).sum()
        })
    }

    /// `W · diag(mask) · V*` for a 0/1 mask over singular indices.
    pub fn partial_isometry(&self, keep: impl Fn(usize, f64) -> bool) -> ComplexMatrix {
        let n = self.sigma.len();
        let m: Vec<f64> = self
            .sigma
            .iter()
            .enumerate()
            .map(|(k, &s)| if keep(k, s) { 1.0 } else { 0.0 })
            .collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .filter(|&k| m[k] != 0.0)
                .map(|k| self.w.get(i, k) * self.v.get(j, k).conj())
                .sum()
        })
    }
}

pub fn svd(t: &ComplexMatrix) -> Result<Svd> {
    let n = t.n();
    let mut g: Vec<Vec<C64>> = (0..n).map(|j| t.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) }).collect())
        .collect();
    let frob = t.frobenius_norm();
    let floor = (frob * 1e-18) * frob;
    // Inner products carry about n·eps relative error; a tighter threshold
    // can leave a pair whose rotation rounds to the identity.
    let orth = n as f64 * f64::EPSILON;

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in (i + 1)..n {
                let alpha: f64 = g[i].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = g[j].iter().map(|z| z.norm_sqr()).sum();
                let gamma = inner(&g[i], &g[j]);
                let gn = gamma.norm();
                if gn <= floor || gn <= orth * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let em = (gamma / gn).conj();
                let zeta = (beta - alpha) / (2.0 * gn);
                let tt = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    let sgn = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + tt * tt).sqrt();
                let s = tt * c;
                for k in 0..n {
                    let a = g[i][k];
                    let b = g[j][k] * em;
                    g[i][k] = a * c - b * s;
                    g[j][k] = a * s + b * c;
                    let a = v[i][k];
                    let b = v[j][k] * em;
                    v[i][k] = a * c - b * s;
                    v[j][k] = a * s + b * c;
                }
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == MAX_SWEEPS {
            return Err(OpError::NoConvergence { iterations: sweeps });
        }
    }

    let norms: Vec<f64> = g.iter().map(|c| vec_norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let sigma: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let smax = sigma[0];
    let noise = n as f64 * f64::EPSILON * smax;

    let mut wcols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for (pos, &k) in order.iter().enumerate() {
        if sigma[pos] > noise && sigma[pos] > 0.0 {
            let mut c = g[k].clone();
            normalize(&mut c);
            wcols.push(c);
        } else {
            wcols.push(complete_basis(&wcols, n));
        }
    }
    let vcols: Vec<Vec<C64>> = order.iter().map(|&k| v[k].clone()).collect();
    Ok(Svd {
        w: ComplexMatrix::from_columns(&wcols),
        sigma,
        v: ComplexMatrix::from_columns(&vcols),
    })
}

/// A unit vector orthogonal to every column in `basis`.
pub(crate) fn complete_basis(basis: &[Vec<C64>], n: usize) -> Vec<C64> {
    let mut best: Option<(f64, Vec<C64>)> = None;
    for e in 0..n {
        let mut x: Vec<C64> = (0..n).map(|i| if i == e { c64(1.0, 0.0) } else { c64(0.0, 0.0) }).collect();
        for _ in 0..2 {
            for b in basis {
                let p = inner(b, &x);
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi -= p * bi;
                }
            }
        }
        let nrm = vec_norm(&x);
        if best.as_ref().is_none_or(|(bn, _)| nrm > *bn) {
            best = Some((nrm, x));
        }
        if nrm > 0.5 {
            break;
        }
    }
    let mut x = best.expect("n >= 1").1;
    normalize(&mut x);
    x
}
