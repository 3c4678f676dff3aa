//! Search for a conjugation `J = Q Qᵀ` minimising `||J conj(T) − T* J||_F`.
//!
//! The unitary `Q` is updated multiplicatively, `Q ← Q·exp(iS)` with `S` real
//! symmetric; those `n(n+1)/2` directions are exactly the ones that move `J`
//! (real orthogonal factors leave `Q Qᵀ` unchanged). Each restart runs a
//! Levenberg–Marquardt iteration on the real and imaginary parts of the
//! residual.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{certificate_threshold, CSVerdict, Conjugation};
use crate::kernel::{c64, herm_eig, ComplexMatrix, Tolerances, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iterations: 500,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub j: ComplexMatrix,
    /// Absolute residual `||J conj(T) J* − T*||_F` of the best restart.
    pub best_residual: f64,
    pub restarts_used: usize,
}

/// Residual level (relative to `||T||_F`) at which a restart stops refining.
const CONVERGED: f64 = 1e-14;
const STALL_WINDOW: usize = 25;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// `exp(iH)` for Hermitian `H`, through its eigendecomposition.
pub fn unitary_exp(h: &ComplexMatrix) -> ComplexMatrix {
    let tol = Tolerances::default();
    let e = herm_eig(&h.hermitian_part(), &tol).expect("Hermitian eigensolver on a Hermitian matrix");
    let n = h.n();
    let phases: Vec<C64> = e.values.iter().map(|&t| c64(t.cos(), t.sin())).collect();
    ComplexMatrix::from_fn(n, |i, j| {
        (0..n)
            .map(|k| e.vectors.get(i, k) * phases[k] * e.vectors.get(j, k).conj())
            .sum()
    })
}

fn symmetric_from_params(n: usize, p: &[f64]) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(n);
    let mut idx = 0;
    for a in 0..n {
        for b in a..n {
            s[(a, b)] = c64(p[idx], 0.0);
            s[(b, a)] = c64(p[idx], 0.0);
            idx += 1;
        }
    }
    s
}

fn takagi(q: &ComplexMatrix) -> ComplexMatrix {
    let j = q.matmul(&q.transpose());
    ComplexMatrix::from_fn(j.n(), |a, b| (j.get(a, b) + j.get(b, a)) * 0.5)
}

fn residual(j: &ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &j.matmul(a) - &b.matmul(j)
}

/// `f(Q) = ||J conj(T) − T* J||_F²` with `J = Q Qᵀ`.
pub fn objective(t: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    let r = residual(&takagi(q), &t.conj(), &t.adjoint());
    let f = r.frobenius_norm();
    f * f
}

/// Real symmetric `G` with `d/dε f(Q exp(iεK))|₀ = Σ G_ab K_ab` for real symmetric `K`.
pub fn objective_gradient(t: &ComplexMatrix, q: &ComplexMatrix) -> Vec<Vec<f64>> {
    let a = t.conj();
    let b = t.adjoint();
    let r = residual(&takagi(q), &a, &b);
    let rs = r.adjoint();
    let m = &a.matmul(&rs) - &rs.matmul(&b);
    let h = q.transpose().matmul(&m).matmul(q);
    let n = t.n();
    (0..n)
        .map(|i| (0..n).map(|j| -2.0 * (h.get(i, j) + h.get(j, i)).im).collect())
        .collect()
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, |_, _| {
        c64(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    unitary_exp(&g.hermitian_part())
}

/// Cholesky solve of the symmetric positive definite system `m x = rhs`.
fn spd_solve(m: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let k = rhs.len();
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = m[i * k + j];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    let mut y = vec![0.0; k];
    for i in 0..k {
        let mut s = rhs[i];
        for p in 0..i {
            s -= l[i * k + p] * y[p];
        }
        y[i] = s / l[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = y[i];
        for p in (i + 1)..k {
            s -= l[p * k + i] * x[p];
        }
        x[i] = s / l[i * k + i];
    }
    Some(x)
}

fn pack(r: &ComplexMatrix) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * r.entries().len());
    v.extend(r.entries().iter().map(|z| z.re));
    v.extend(r.entries().iter().map(|z| z.im));
    v
}

/// Jacobian of the packed residual with respect to the symmetric parameters.
fn jacobian(q: &ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> Vec<Vec<f64>> {
    let n = q.n();
    let qa = q.transpose().matmul(a); // row k is q_kᵀ A
    let bq = b.matmul(q); // column k is B q_k
    let two_i = c64(0.0, 2.0);
    let mut cols = Vec::with_capacity(n * (n + 1) / 2);
    for p in 0..n {
        for s in p..n {
            let d = ComplexMatrix::from_fn(n, |i, j| {
                let mut z = q.get(i, p) * qa.get(s, j) - bq.get(i, p) * q.get(j, s);
                if s != p {
                    z += q.get(i, s) * qa.get(p, j) - bq.get(i, s) * q.get(j, p);
                }
                two_i * z
            });
            cols.push(pack(&d));
        }
    }
    cols
}

/// One Levenberg–Marquardt descent from `q`; returns the final `Q` and `||R||_F`.
fn descend(q0: ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix, max_iterations: usize) -> (ComplexMatrix, f64) {
    let n = q0.n();
    let m = n * (n + 1) / 2;
    let mut q = q0;
    let mut r = pack(&residual(&takagi(&q), a, b));
    let mut cost: f64 = r.iter().map(|x| x * x).sum();
    let mut mu = -1.0;
    let mut history = Vec::with_capacity(max_iterations);
    for _ in 0..max_iterations {
        if cost.sqrt() <= CONVERGED {
            break;
        }
        history.push(cost);
        if history.len() > STALL_WINDOW && cost > 0.999 * history[history.len() - 1 - STALL_WINDOW] {
            break;
        }
        let jac = jacobian(&q, a, b);
        let mut jtj = vec![0.0; m * m];
        let mut g = vec![0.0; m];
        for i in 0..m {
            g[i] = jac[i].iter().zip(&r).map(|(x, y)| x * y).sum();
            for j in 0..=i {
                let v: f64 = jac[i].iter().zip(&jac[j]).map(|(x, y)| x * y).sum();
                jtj[i * m + j] = v;
                jtj[j * m + i] = v;
            }
        }
        if mu < 0.0 {
            let dmax = (0..m).map(|i| jtj[i * m + i]).fold(0.0, f64::max);
            mu = 1e-3 * dmax.max(f64::MIN_POSITIVE);
        }
        let mut accepted = false;
        for _ in 0..40 {
            let mut sys = jtj.clone();
            for i in 0..m {
                sys[i * m + i] += mu;
            }
            let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
            let Some(step) = spd_solve(&sys, &neg_g) else {
                mu *= 4.0;
                continue;
            };
            let q_new = q.matmul(&unitary_exp(&symmetric_from_params(n, &step)));
            let r_new = pack(&residual(&takagi(&q_new), a, b));
            let cost_new: f64 = r_new.iter().map(|x| x * x).sum();
            if cost_new < cost {
                q = q_new;
                r = r_new;
                cost = cost_new;
                mu = (mu / 3.0).max(1e-300);
                accepted = true;
                break;
            }
            mu *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    (q, cost.sqrt())
}

/// Multi-start search; restarts run in seed order and stop at the first
/// residual within the certificate threshold, so the outcome is a pure
/// function of `(T, cfg)`.
pub fn oracle_search(t: &ComplexMatrix, tol: &Tolerances, cfg: &OracleConfig) -> OracleRun {
    let n = t.n();
    let norm = t.frobenius_norm();
    if norm == 0.0 {
        return OracleRun {
            j: ComplexMatrix::identity(n),
            best_residual: 0.0,
            restarts_used: 0,
        };
    }
    let tn = t.scale_real(1.0 / norm);
    let a = tn.conj();
    let b = tn.adjoint();
    let threshold = certificate_threshold(t, tol);
    let base = splitmix(cfg.seed ^ splitmix(t.content_hash()));
    let mut best: Option<(f64, ComplexMatrix)> = None;
    let mut used = 0;
    for k in 0..cfg.restarts.max(1) {
        used = k + 1;
        let q0 = if k == 0 {
            ComplexMatrix::identity(n)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix(base.wrapping_add(k as u64)));
            random_unitary(n, &mut rng)
        };
        let (q, _) = descend(q0, &a, &b, cfg.max_iterations);
        let j = takagi(&q);
        let res = j.matmul(&t.conj()).matmul(&j.adjoint()).distance(&t.adjoint());
        if best.as_ref().is_none_or(|(r, _)| res < *r) {
            best = Some((res, j));
        }
        if res <= threshold {
            break;
        }
    }
    let (best_residual, j) = best.expect("at least one restart");
    OracleRun {
        j,
        best_residual,
        restarts_used: used,
    }
}

/// Certificate or `Inconclusive`; never a refutation.
pub fn oracle_find_conjugation(t: &ComplexMatrix, tol: &Tolerances, cfg: &OracleConfig) -> CSVerdict {
    let run = oracle_search(t, tol, cfg);
    if run.best_residual <= certificate_threshold(t, tol) {
        if let Ok(conjugation) = Conjugation::new(run.j, tol) {
            return CSVerdict::CertifiedCs {
                conjugation,
                residual: run.best_residual,
            };
        }
    }
    CSVerdict::Inconclusive {
        best_residual: run.best_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::conjugation_residual;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn unitary_exp_is_unitary() {
        let h = ComplexMatrix::from_fn(3, |i, j| c64((i + 2 * j) as f64, i as f64 - j as f64)).hermitian_part();
        let u = unitary_exp(&h);
        assert!(u.gram().distance_to_identity() < 1e-13);
    }

    #[test]
    fn symmetric_input_certifies_at_first_restart() {
        let t = ComplexMatrix::new(2, vec![c64(1.0, 1.0), c64(2.0, 0.0), c64(2.0, 0.0), c64(0.0, -1.0)]).unwrap();
        let run = oracle_search(&t, &tol(), &OracleConfig::default());
        assert_eq!(run.restarts_used, 1);
        assert!(run.best_residual < 1e-13);
    }

    #[test]
    fn binormal_cs_example_certifies() {
        let e = ComplexMatrix::from_real_rows(&[[-1.0, 0.0, -1.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        let v = oracle_find_conjugation(&e, &tol(), &OracleConfig::default());
        let c = v.conjugation().expect("certified");
        assert!(conjugation_residual(&e, c).unwrap() <= 1e-8);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let t = ComplexMatrix::from_fn(3, |i, j| c64((i * 3 + j) as f64 * 0.3 - 1.0, (i as f64 - 2.0 * j as f64) * 0.2));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = random_unitary(3, &mut rng);
        let g = objective_gradient(&t, &q);
        let k = symmetric_from_params(3, &[0.3, -0.2, 0.7, 0.1, -0.5, 0.4]);
        let h = 1e-5;
        let fp = objective(&t, &q.matmul(&unitary_exp(&k.scale_real(h))));
        let fm = objective(&t, &q.matmul(&unitary_exp(&k.scale_real(-h))));
        let fd = (fp - fm) / (2.0 * h);
        let an: f64 = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).map(|(a, b)| g[a][b] * k.get(a, b).re).sum();
        assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-8), "fd {fd} analytic {an}");
    }
}
