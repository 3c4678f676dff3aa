//! Seeded matrix ensembles and counterexample hunting.

mod hunt;
mod target;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};
use crate::kernel::{c64, inner, is_involution, is_weighted_permutation, svd, ComplexMatrix, Tolerances, C64, MAX_DIM};
use crate::properties::{flushed_power, is_normal};

pub use hunt::{hunt, reverify as reverify_hunt, HuntConfig, HuntMatch, HuntOutcome};
pub use target::{Atom, Target};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    IntegerDense,
    GaussianDense,
    Involution,
    WeightedInvolutivePermutation,
    Nilpotent2,
    Normal,
    SquareNormal,
    UnitaryConjugate(Box<Family>),
}

impl Family {
    /// Families exercised by the theorem acceptance run.
    pub fn suite_families() -> Vec<Family> {
        vec![
            Family::IntegerDense,
            Family::Involution,
            Family::WeightedInvolutivePermutation,
            Family::Nilpotent2,
            Family::SquareNormal,
            Family::UnitaryConjugate(Box::new(Family::IntegerDense)),
        ]
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::IntegerDense => f.write_str("integer_dense"),
            Family::GaussianDense => f.write_str("gaussian_dense"),
            Family::Involution => f.write_str("involution"),
            Family::WeightedInvolutivePermutation => f.write_str("weighted_involutive_permutation"),
            Family::Nilpotent2 => f.write_str("nilpotent2"),
            Family::Normal => f.write_str("normal"),
            Family::SquareNormal => f.write_str("square_normal"),
            Family::UnitaryConjugate(inner) => write!(f, "unitary_conjugate({inner})"),
        }
    }
}

impl FromStr for Family {
    type Err = OpError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("unitary_conjugate") {
            let rest = rest.trim();
            if rest.is_empty() {
                return Ok(Family::UnitaryConjugate(Box::new(Family::IntegerDense)));
            }
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| OpError::UnknownGenerator(s.to_string()))?;
            return Ok(Family::UnitaryConjugate(Box::new(inner.parse()?)));
        }
        match s {
            "integer_dense" => Ok(Family::IntegerDense),
            "gaussian_dense" => Ok(Family::GaussianDense),
            "involution" => Ok(Family::Involution),
            "weighted_involutive_permutation" => Ok(Family::WeightedInvolutivePermutation),
            "nilpotent2" => Ok(Family::Nilpotent2),
            "normal" => Ok(Family::Normal),
            "square_normal" => Ok(Family::SquareNormal),
            _ => Err(OpError::UnknownGenerator(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub family: Family,
    pub n: usize,
    pub entry_bound: i64,
    pub seed: u64,
    pub count: usize,
}

impl fmt::Display for RandomSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={} bound={} seed={}", self.family, self.n, self.entry_bound, self.seed)
    }
}

impl RandomSpec {
    pub fn new(family: Family, n: usize, seed: u64, count: usize) -> Self {
        Self {
            family,
            n,
            entry_bound: 2,
            seed,
            count,
        }
    }

    pub fn with_bound(mut self, entry_bound: i64) -> Self {
        self.entry_bound = entry_bound;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.entry_bound < 1 {
            return Err(OpError::InvalidSpec(format!("entry_bound must be >= 1, got {}", self.entry_bound)));
        }
        if self.count < 1 {
            return Err(OpError::InvalidSpec("count must be >= 1".into()));
        }
        if self.n < 1 || self.n > MAX_DIM {
            return Err(OpError::InvalidSpec(format!("n must be in 1..={MAX_DIM}, got {}", self.n)));
        }
        Ok(())
    }

    /// Seed of instance `index`, derived rather than drawn from a shared stream.
    pub fn instance_seed(&self, index: usize) -> u64 {
        let mut h = splitmix(self.seed);
        h = splitmix(h ^ fnv(self.family.to_string().as_bytes()));
        h = splitmix(h ^ self.n as u64);
        h = splitmix(h ^ self.entry_bound as u64);
        splitmix(h ^ index as u64)
    }
}

pub(crate) fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Instance `index` of `spec`, with the family contract re-checked.
pub fn generate(spec: &RandomSpec, index: usize) -> Result<ComplexMatrix> {
    spec.validate()?;
    if index >= spec.count {
        return Err(OpError::InvalidSpec(format!("index {index} out of range for count {}", spec.count)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.instance_seed(index));
    let t = draw(&spec.family, spec.n, spec.entry_bound, &mut rng);
    check_contract(&spec.family, &t)?;
    Ok(t)
}

fn draw(family: &Family, n: usize, bound: i64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    match family {
        Family::IntegerDense => integer_dense(n, bound, rng),
        Family::GaussianDense => ComplexMatrix::from_fn(n, |_, _| gaussian(rng) * std::f64::consts::FRAC_1_SQRT_2),
        Family::Involution => involution(n, bound, rng),
        Family::WeightedInvolutivePermutation => weighted_involutive_permutation(n, bound, rng),
        Family::Nilpotent2 => nilpotent2(n, bound, rng),
        Family::Normal => normal(n, rng),
        Family::SquareNormal => square_normal(n, bound, rng),
        Family::UnitaryConjugate(inner) => {
            let t = draw(inner, n, bound, rng);
            let v = random_unitary(n, rng);
            v.matmul(&t).matmul(&v.adjoint())
        }
    }
}

fn check_contract(family: &Family, t: &ComplexMatrix) -> Result<()> {
    let tol = Tolerances::default();
    let ok = match family {
        Family::IntegerDense | Family::GaussianDense => true,
        Family::Involution => is_involution(t, &tol),
        Family::WeightedInvolutivePermutation => {
            is_involution(t, &tol)
                && is_weighted_permutation(t, &tol)
                && svd(t).map(|s| tol.all_distinct(&s.sigma)).unwrap_or(false)
        }
        Family::Nilpotent2 => t.square().frobenius_norm() <= tol.eps_cert * t.frobenius_norm().powi(2),
        Family::Normal => is_normal(t, &tol).holds,
        Family::SquareNormal => is_normal(&flushed_power(t, 2, &tol), &tol).holds,
        // The inner draw is consumed before the conjugation; a unitary
        // similarity preserves every contract above up to rounding.
        Family::UnitaryConjugate(inner) => match inner.as_ref() {
            Family::WeightedInvolutivePermutation => is_involution(t, &tol),
            Family::IntegerDense | Family::GaussianDense => true,
            other => return check_contract(other, t),
        },
    };
    if ok {
        Ok(())
    } else {
        Err(OpError::InvalidSpec(format!("generated matrix violates the {family} contract")))
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    c64(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn int_in(rng: &mut ChaCha8Rng, bound: i64) -> f64 {
    rng.random_range(-bound..=bound) as f64
}

fn integer_dense(n: usize, bound: i64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| c64(int_in(rng, bound), 0.0))
}

/// Haar-distributed unitary: Gram–Schmidt on complex Gaussian columns.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        for _ in 0..2 {
            for c in &cols {
                let p = inner(c, &v);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= p * ci;
                }
            }
        }
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / nrm).collect());
        }
    }
    ComplexMatrix::from_columns(&cols)
}

fn permute(t: &ComplexMatrix, perm: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(t.n(), |i, j| t.get(perm[i], perm[j]))
}

fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// `X D X⁻¹` with `D = diag(±1)` and `X` unit upper triangular with entries
/// in `{−1, 0, 1}` (the bound is capped at 1 to keep `T` well conditioned),
/// conjugated by a random permutation. Every arithmetic step is exact, so
/// `T² = I` holds exactly.
fn involution(n: usize, bound: i64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let b = bound.min(1);
    let mut x = vec![vec![0.0f64; n]; n];
    for (i, row) in x.iter_mut().enumerate() {
        row[i] = 1.0;
        for v in row.iter_mut().skip(i + 1) {
            *v = if rng.random_bool(0.5) { int_in(rng, b) } else { 0.0 };
        }
    }
    // Inverse of a unit upper triangular matrix by back substitution.
    let mut xi = vec![vec![0.0f64; n]; n];
    for c in 0..n {
        for i in (0..n).rev() {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in (i + 1)..n {
                s -= x[i][k] * xi[k][c];
            }
            xi[i][c] = s;
        }
    }
    let d: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    let t = ComplexMatrix::from_fn(n, |i, j| c64((0..n).map(|k| x[i][k] * d[k] * xi[k][j]).sum(), 0.0));
    permute(&t, &random_perm(n, rng))
}

/// 2-cycles carry weights `(s·w, s/w)` with distinct `w > 1`; at most one
/// fixed point, so the singular values are distinct.
fn weighted_involutive_permutation(n: usize, bound: i64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let perm = random_perm(n, rng);
    let mut pool: Vec<i64> = (2..=(2 + bound + n as i64)).collect();
    pool.shuffle(rng);
    let mut t = ComplexMatrix::zeros(n);
    for (k, pair) in perm.chunks(2).enumerate() {
        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        match *pair {
            [i, j] => {
                let w = pool[k] as f64;
                t[(i, j)] = c64(s * w, 0.0);
                t[(j, i)] = c64(s / w, 0.0);
            }
            [i] => t[(i, i)] = c64(s, 0.0),
            _ => unreachable!(),
        }
    }
    t
}

/// `[[0, B], [0, 0]]` in a random coordinate order.
fn nilpotent2(n: usize, bound: i64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    if n == 1 {
        return ComplexMatrix::zeros(1);
    }
    let k = rng.random_range(1..n);
    let mut t = ComplexMatrix::zeros(n);
    for i in 0..k {
        for j in k..n {
            t[(i, j)] = c64(int_in(rng, bound), 0.0);
        }
    }
    if t.is_zero() {
        t[(0, k)] = c64(1.0, 0.0);
    }
    permute(&t, &random_perm(n, rng))
}

fn normal(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let d: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    let v = random_unitary(n, rng);
    v.matmul(&ComplexMatrix::diagonal(&d)).matmul(&v.adjoint())
}

/// Direct sums of `[[a, c], [0, −a]]` blocks and scalars; the square is diagonal.
fn anti_trace_blocks(n: usize, bound: i64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut t = ComplexMatrix::zeros(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && rng.random_bool(0.7) {
            let a = int_in(rng, bound);
            let c = int_in(rng, bound);
            t[(i, i)] = c64(a, 0.0);
            t[(i, i + 1)] = c64(c, 0.0);
            t[(i + 1, i + 1)] = c64(-a, 0.0);
            i += 2;
        } else {
            t[(i, i)] = c64(int_in(rng, bound), 0.0);
            i += 1;
        }
    }
    permute(&t, &random_perm(n, rng))
}

fn square_normal(n: usize, bound: i64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let t = match rng.random_range(0..4) {
        0 => involution(n, bound, rng),
        1 => nilpotent2(n, bound, rng),
        2 => normal(n, rng),
        _ => anti_trace_blocks(n, bound, rng),
    };
    if rng.random_bool(0.5) {
        let v = random_unitary(n, rng);
        v.matmul(&t).matmul(&v.adjoint())
    } else {
        t
    }
}
