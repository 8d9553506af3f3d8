use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::{Error, Result};

const MAX_DIM: usize = 4;

/// Dense square complex matrix of dimension 2 or 4.
///
/// Storage is a fixed 4×4 array; entries outside `dim × dim` are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [[C64; MAX_DIM]; MAX_DIM],
}

fn assert_dim(dim: usize) {
    assert!(
        dim == 2 || dim == 4,
        "matrix dimension must be 2 or 4, got {dim}"
    );
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert_dim(dim);
        ComplexMatrix {
            dim,
            data: [[C64::new(0.0, 0.0); MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i][j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major real entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self::from_fn(dim, |i, j| C64::new(entries[i * dim + j], 0.0))
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_complex(dim: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self::from_fn(dim, |i, j| entries[i * dim + j])
    }

    pub fn diag(entries: &[f64]) -> Self {
        let dim = entries.len();
        Self::from_fn(dim, |i, j| {
            if i == j {
                C64::new(entries[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Outer product `|v><v|`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_y() -> Self {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        Self::from_complex(2, &[z, -i, i, z])
    }

    pub fn pauli_z() -> Self {
        Self::diag(&[1.0, -1.0])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.data[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.data[i][j] = v;
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.data[j][i].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(self.dim, |i, j| self.data[i][j] * s)
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self::from_fn(self.dim, |i, j| self.data[i][j] * s)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i][i]).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.data[i][j] - other.data[i][j]).norm());
            }
        }
        worst
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Self::identity(self.dim))
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.dagger()).scale(0.5)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.data[i][j] * v[j]).sum())
            .collect()
    }

    /// `self · m · self†`.
    pub fn conjugate(&self, m: &Self) -> Self {
        *self * *m * self.dagger()
    }

    /// Row-major vectorization, index `dim * i + j` holds entry `(i, j)`.
    pub fn vectorize(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                v.push(self.data[i][j]);
            }
        }
        v
    }

    pub fn unvectorize(dim: usize, v: &[C64]) -> Self {
        assert_eq!(v.len(), dim * dim);
        Self::from_fn(dim, |i, j| v[dim * i + j])
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self::from_fn(self.dim, |i, j| self.data[i][j] + rhs.data[i][j])
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self::from_fn(self.dim, |i, j| self.data[i][j] - rhs.data[i][j])
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        Self::from_fn(n, |i, j| {
            (0..n).map(|k| self.data[i][k] * rhs.data[k][j]).sum()
        })
    }
}

/// Computational basis ket `|idx>` of the given dimension.
pub fn basis_ket(dim: usize, idx: usize) -> Vec<C64> {
    assert!(idx < dim);
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[idx] = C64::new(1.0, 0.0);
    v
}

/// Kronecker product `a ⊗ b`; block `(i, j)` equals `a[i, j] · b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da * db;
    if dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(ComplexMatrix::from_fn(dim, |r, c| {
        a.get(r / db, c / db) * b.get(r % db, c % db)
    }))
}

/// Kronecker product of two kets.
pub fn tensor_ket(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
    }

    #[test]
    fn projector_tensor() {
        let p = ComplexMatrix::diag(&[1.0, 0.0]);
        assert_eq!(
            tensor(&p, &p).unwrap(),
            ComplexMatrix::diag(&[1.0, 0.0, 0.0, 0.0])
        );
    }

    #[test]
    fn xx_flips_both_qubits() {
        let xx = tensor(&ComplexMatrix::pauli_x(), &ComplexMatrix::pauli_x()).unwrap();
        // |HH> = e0 -> |VV> = e3
        let out = xx.apply(&basis_ket(4, 0));
        assert_eq!(out, vec![c(0.0), c(0.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn tensor_beyond_four_is_rejected() {
        let i4 = ComplexMatrix::identity(4);
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i4, &i2), Err(Error::UnsupportedDimension(8)));
    }

    #[test]
    fn tensor_block_structure() {
        let a = ComplexMatrix::from_complex(2, &[c(1.0), C64::new(0.0, 2.0), c(-3.0), c(4.0)]);
        let b = ComplexMatrix::pauli_y();
        let t = tensor(&a, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert_eq!(t.get(2 * i + k, 2 * j + l), a.get(i, j) * b.get(k, l));
                    }
                }
            }
        }
    }

    #[test]
    fn vectorize_roundtrip() {
        let m = ComplexMatrix::from_fn(2, |i, j| C64::new(i as f64, j as f64 + 1.0));
        assert_eq!(ComplexMatrix::unvectorize(2, &m.vectorize()), m);
    }

    #[test]
    #[should_panic]
    fn dimension_three_panics() {
        let _ = ComplexMatrix::zeros(3);
    }
}
