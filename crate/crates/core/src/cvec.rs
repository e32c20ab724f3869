//! Points of complex n-space and small dense Hermitian matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of complex n-space, n >= 1, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Invalid("a point needs at least one coordinate".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("non-finite coordinate".into()));
        }
        Ok(Self { entries })
    }

    /// 1-dimensional point from a complex scalar.
    pub fn scalar(z: Complex64) -> Self {
        Self { entries: vec![z] }
    }

    /// 1-dimensional point from a real scalar.
    pub fn from_re(x: f64) -> Self {
        Self::scalar(Complex64::new(x, 0.0))
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: vec![Complex64::new(0.0, 0.0); n.max(1)] }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, j: usize) -> Result<Complex64> {
        self.entries.get(j).copied().ok_or(Error::DimensionMismatch {
            expected: j + 1,
            got: self.entries.len(),
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn dist(&self, other: &ComplexVector) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, other: &ComplexVector) -> ComplexVector {
        ComplexVector {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &ComplexVector) -> ComplexVector {
        ComplexVector {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> ComplexVector {
        ComplexVector { entries: self.entries.iter().map(|a| a * s).collect() }
    }

    /// Flattens to interleaved reals `[re_1, im_1, re_2, im_2, ...]`.
    pub fn to_reals(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for z in &self.entries {
            out.push(z.re);
            out.push(z.im);
        }
        out
    }

    /// Inverse of [`Self::to_reals`].
    pub fn from_reals(reals: &[f64]) -> Result<Self> {
        if reals.is_empty() || !reals.len().is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "interleaved real vector must have even positive length, got {}",
                reals.len()
            )));
        }
        let entries = reals.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        Self::new(entries)
    }
}

/// Dense complex n-by-n matrix, row-major. Used for complex Hessians
/// `H[j][k] = d^2 u / dz_j dzbar_k`, which are Hermitian for real-valued u.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            m.set(j, j, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.data[j * self.n + k]
    }

    pub fn set(&mut self, j: usize, k: usize, v: Complex64) {
        self.data[j * self.n + k] = v;
    }

    pub fn add_assign(&mut self, other: &CMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &CMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
    }

    pub fn scale_assign(&mut self, s: f64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    /// `H += w * g g^H`, the rank-one update with weight `w`.
    pub fn rank_one_add(&mut self, g: &[Complex64], w: f64) {
        for j in 0..self.n {
            for k in 0..self.n {
                let v = g[j] * g[k].conj() * w;
                self.data[j * self.n + k] += v;
            }
        }
    }

    /// Levi form `Re( sum_{j,k} H[j][k] v_j conj(v_k) )`; real when H is Hermitian.
    pub fn levi(&self, v: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.n {
            for k in 0..self.n {
                acc += self.get(j, k) * v[j] * v[k].conj();
            }
        }
        acc.re
    }

    /// Hessian of `z -> u(A z + b)` from the Hessian of `u` at `A z + b`:
    /// `H_out[j][k] = sum_{m,l} A[m][j] conj(A[l][k]) H[m][l]`.
    /// `a` has `self.dim()` rows of length `n_in`.
    pub fn precompose_affine(&self, a: &[Vec<Complex64>], n_in: usize) -> CMatrix {
        let n_out = self.n;
        let mut result = CMatrix::zeros(n_in);
        // Two-pass contraction keeps this O(n^3) instead of O(n^4).
        // tmp[m][k] = sum_l conj(A[l][k]) H[m][l]
        let mut tmp = vec![Complex64::new(0.0, 0.0); n_out * n_in];
        for m in 0..n_out {
            for k in 0..n_in {
                let mut s = Complex64::new(0.0, 0.0);
                for (l, row) in a.iter().enumerate().take(n_out) {
                    s += row[k].conj() * self.get(m, l);
                }
                tmp[m * n_in + k] = s;
            }
        }
        for j in 0..n_in {
            for k in 0..n_in {
                let mut s = Complex64::new(0.0, 0.0);
                for (m, row) in a.iter().enumerate().take(n_out) {
                    s += row[j] * tmp[m * n_in + k];
                }
                result.set(j, k, s);
            }
        }
        result
    }
}
