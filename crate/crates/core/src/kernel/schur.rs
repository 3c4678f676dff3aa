//! Complex Schur decomposition (Householder Hessenberg reduction followed by
//! shifted QR) and eigenvectors of general square matrices.

use super::matrix::{c64, normalize, ComplexMatrix, C64};
use crate::error::{OpError, Result};

const MAX_ITER_PER_EIGENVALUE: usize = 60;

/// `A = Z R Z*` with `Z` unitary and `R` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub z: ComplexMatrix,
    pub r: ComplexMatrix,
}

/// Eigenvalues and unit right eigenvectors (column `k` pairs with `values[k]`).
#[derive(Debug, Clone)]
pub struct Eig {
    pub values: Vec<C64>,
    pub vectors: ComplexMatrix,
}

pub fn schur(a: &ComplexMatrix) -> Result<Schur> {
    let (mut h, mut z) = hessenberg(a);
    shifted_qr(&mut h, &mut z)?;
    // Clean the strictly lower part; it is at rounding level after deflation.
    let n = h.n();
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = c64(0.0, 0.0);
        }
    }
    Ok(Schur { z, r: h })
}

pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    let s = schur(a)?;
    Ok((0..a.n()).map(|i| s.r.get(i, i)).collect())
}

/// Eigenvalues with unit eigenvectors from back-substitution on the Schur form.
pub fn eig(a: &ComplexMatrix) -> Result<Eig> {
    let n = a.n();
    let s = schur(a)?;
    let r = &s.r;
    let values: Vec<C64> = (0..n).map(|i| r.get(i, i)).collect();
    let small = f64::EPSILON * r.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let lam = values[k];
        let mut y = vec![c64(0.0, 0.0); n];
        y[k] = c64(1.0, 0.0);
        for i in (0..k).rev() {
            let s: C64 = ((i + 1)..=k).map(|m| r.get(i, m) * y[m]).sum();
            let mut d = r.get(i, i) - lam;
            if d.norm() < small {
                d = c64(small, 0.0);
            }
            y[i] = -s / d;
        }
        let mut x = s.z.matvec(&y);
        normalize(&mut x);
        cols.push(x);
    }
    Ok(Eig {
        values,
        vectors: ComplexMatrix::from_columns(&cols),
    })
}

/// Householder reduction to upper Hessenberg form: returns (H, Q) with A = Q H Q*.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.n();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { c64(1.0, 0.0) };
        // v = x + phase * alpha * e1, reflector P = I - 2 v v* / (v* v)
        let mut v = x;
        v[0] += phase * alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // H <- P H
        for j in 0..n {
            let s: C64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * h[(k + 1 + t, j)]).sum();
            let s = s * beta;
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= vi * s;
            }
        }
        // H <- H P, Q <- Q P
        for i in 0..n {
            let s: C64 = v.iter().enumerate().map(|(t, vi)| h[(i, k + 1 + t)] * vi).sum();
            let s = s * beta;
            for (t, vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= s * vi.conj();
            }
            let s: C64 = v.iter().enumerate().map(|(t, vi)| q[(i, k + 1 + t)] * vi).sum();
            let s = s * beta;
            for (t, vi) in v.iter().enumerate() {
                q[(i, k + 1 + t)] -= s * vi.conj();
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = c64(0.0, 0.0);
        }
    }
    (h, q)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr_half = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, c64(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

fn shifted_qr(h: &mut ComplexMatrix, z: &mut ComplexMatrix) -> Result<()> {
    let n = h.n();
    if n == 1 {
        return Ok(());
    }
    let norm = h.frobenius_norm();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // Find the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let scale = if diag > 0.0 { diag } else { norm };
            if sub <= f64::EPSILON * scale || sub <= f64::MIN_POSITIVE * 1e3 {
                h[(lo, lo - 1)] = c64(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > MAX_ITER_PER_EIGENVALUE {
            return Err(OpError::NoConvergence { iterations: total });
        }

        let mu = if iter.is_multiple_of(11) {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + c64(h[(hi, hi - 1)].norm() * 0.75, h[(hi, hi - 1)].norm() * 0.25)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            h[(k + 1, k)] = c64(0.0, 0.0);
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            let top = (k + 2).min(hi);
            for i in 0..=top {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = -a * s + b * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_by_re_im(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn triangular_eigenvalues_are_diagonal() {
        let a = ComplexMatrix::from_real_rows(&[[1.0, 5.0, 2.0], [0.0, 2.0, 7.0], [0.0, 0.0, 3.0]]);
        let ev = sorted_by_re_im(eigenvalues(&a).unwrap());
        for (k, z) in ev.iter().enumerate() {
            assert!((z - c64(k as f64 + 1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let a = ComplexMatrix::from_real_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        let ev = sorted_by_re_im(eigenvalues(&a).unwrap());
        assert!((ev[0] - c64(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - c64(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        let a = ComplexMatrix::from_real_rows(&[
            [-2.0, -1.0, 2.0, 2.0],
            [1.0, 0.0, 0.0, 2.0],
            [0.0, -2.0, 2.0, -1.0],
            [0.0, -2.0, -1.0, 0.0],
        ]);
        let e = eig(&a).unwrap();
        for k in 0..4 {
            let x = e.vectors.column(k);
            let ax = a.matvec(&x);
            let res: f64 = ax.iter().zip(&x).map(|(p, q)| (p - q * e.values[k]).norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-12, "residual {res}");
        }
        let s = schur(&a).unwrap();
        assert!(s.z.matmul(&s.r).matmul(&s.z.adjoint()).distance(&a) < 1e-12);
    }

    #[test]
    fn nilpotent_jordan_block() {
        let a = ComplexMatrix::from_real_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]);
        let ev = eigenvalues(&a).unwrap();
        assert!(ev.iter().all(|z| z.norm() < 1e-12));
    }
}
