use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{OpError, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 64;

pub type C64 = Complex64;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// Square dense complex matrix in row-major storage.
///
/// Entry `(i, j)` lives at `data[i * n + j]`. Construction validates that the
/// dimension is in `1..=64` and that every entry is finite; arithmetic
/// between matrices of different dimension is a programming error and panics.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(n: usize, data: Vec<C64>) -> Result<Self> {
        check_dim(n)?;
        if data.len() != n * n {
            return Err(OpError::EntryCount {
                expected: n * n,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(OpError::NonFinite {
                row: pos / n,
                col: pos % n,
            });
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        Self::new(n, data.iter().map(|&x| c64(x, 0.0)).collect())
    }

    /// Builds a real matrix from nested rows. Panics on ragged input; meant for
    /// literals in tests and fixtures.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), n, "ragged rows");
            data.extend(r.iter().map(|&x| c64(x, 0.0)));
        }
        Self::new(n, data).expect("invalid literal matrix")
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension {n} out of range");
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) })
    }

    pub fn diagonal(d: &[C64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { c64(0.0, 0.0) })
    }

    pub fn real_diagonal(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { c64(d[i], 0.0) } else { c64(0.0, 0.0) })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let n = cols.len();
        Self::from_fn(n, |i, j| cols[j][i])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = vec![c64(0.0, 0.0); n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self { n, data: out }
    }

    /// `self * v` for a column vector.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Integer power `self^k` (k = 0 gives the identity).
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.n);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    pub fn square(&self) -> Self {
        self.matmul(self)
    }

    /// `self* · self`
    pub fn gram(&self) -> Self {
        self.adjoint().matmul(self)
    }

    /// `self · self*`
    pub fn cogram(&self) -> Self {
        self.matmul(&self.adjoint())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance `||self - other||_F`.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `||self - I||_F`
    pub fn distance_to_identity(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let z = self.get(i, j) - if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) };
                s += z.norm_sqr();
            }
        }
        s.sqrt()
    }

    /// `||self - self*||_F`
    pub fn skew_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += (self.get(i, j) - self.get(j, i).conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Hermitian part `(self + self*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5)
    }

    /// Symmetric part `(self + selfᵀ) / 2`.
    pub fn symmetric_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| (self.get(i, j) + self.get(j, i)) * 0.5)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// LU factorization with partial pivoting; returns (packed LU, pivots, sign).
    fn lu(&self) -> (Vec<C64>, Vec<usize>, f64, bool) {
        let n = self.n;
        let mut a = self.data.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                for j in (k + 1)..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
            }
        }
        (a, piv, sign, singular)
    }

    pub fn determinant(&self) -> C64 {
        let (lu, _, sign, singular) = self.lu();
        if singular {
            return c64(0.0, 0.0);
        }
        (0..self.n).map(|i| lu[i * self.n + i]).product::<C64>() * sign
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let (lu, piv, _, singular) = self.lu();
        if singular {
            return Err(OpError::Singular);
        }
        let mut inv = Self::zeros(n);
        for col in 0..n {
            // Solve L U x = P e_col.
            let mut x: Vec<C64> = (0..n)
                .map(|i| if piv[i] == col { c64(1.0, 0.0) } else { c64(0.0, 0.0) })
                .collect();
            for i in 0..n {
                let mut s = x[i];
                for k in 0..i {
                    s -= lu[i * n + k] * x[k];
                }
                x[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[i];
                for k in (i + 1)..n {
                    s -= lu[i * n + k] * x[k];
                }
                x[i] = s / lu[i * n + i];
            }
            inv.set_column(col, &x);
        }
        Ok(inv)
    }

    /// Stable 64-bit hash of the entry bit patterns (FNV-1a).
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        feed(self.n as u64);
        for z in &self.data {
            // Normalize -0.0 so that equal matrices hash equally.
            feed((z.re + 0.0).to_bits());
            feed((z.im + 0.0).to_bits());
        }
        h
    }
}

fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(OpError::InvalidDimension(n))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "add dimension mismatch");
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "sub dimension mismatch");
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl fmt::Display for ComplexMatrix {
    /// One bracketed row per line, six decimals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "  [")?;
            for j in 0..self.n {
                let z = self.get(i, j);
                if j > 0 {
                    write!(f, ", ")?;
                }
                if z.im == 0.0 {
                    write!(f, "{:.6}", z.re)?;
                } else {
                    write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
                }
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.n, self.n)?;
        fmt::Display::fmt(self, f)
    }
}

/// `||AB - BA||_F`.
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.n() != b.n() {
        return Err(OpError::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(a.matmul(b).distance(&b.matmul(a)))
}

// Vector helpers.

/// `⟨u, v⟩ = u* v` (conjugate-linear in the first slot).
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut [C64]) -> f64 {
    let nrm = vec_norm(v);
    if nrm > 0.0 {
        for z in v.iter_mut() {
            *z /= nrm;
        }
    }
    nrm
}

#[derive(serde::Serialize, serde::Deserialize)]
struct MatrixRepr {
    n: usize,
    entries: Vec<[f64; 2]>,
}

impl serde::Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            n: self.n,
            entries: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        ComplexMatrix::new(r.n, r.entries.iter().map(|&[re, im]| c64(re, im)).collect())
            .map_err(serde::de::Error::custom)
    }
}
