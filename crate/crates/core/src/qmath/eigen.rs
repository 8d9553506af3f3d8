//! Cyclic Jacobi eigensolvers for the small matrices used throughout the crate.

use num_complex::Complex64 as C64;

use super::ComplexMatrix;
use crate::{tol, Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Eigensystem {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.dim())
            .map(|i| self.vectors.get(i, k))
            .collect()
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.vectors * ComplexMatrix::diag(&self.values) * self.vectors.dagger()
    }

    /// Applies `f` to the spectrum: `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mapped: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        self.vectors * ComplexMatrix::diag(&mapped) * self.vectors.dagger()
    }
}

fn off_diagonal_norm_sq(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += a.get(p, q).norm_sqr();
        }
    }
    s
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
///
/// Degenerate spectra still return an orthonormal basis because every update is
/// a unitary rotation accumulated onto the identity.
pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Eigensystem> {
    let defect = m.hermiticity_defect();
    if defect > tol::EIGEN_INPUT {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let frob_sq: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a.get(i, j).norm_sqr())
        .sum();
    let stop = (f64::EPSILON * 1e-2).powi(2) * frob_sq.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm_sq(&a) <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let h = a.get(p, q);
                let habs = h.norm();
                if habs <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase_conj = (h / habs).conj();
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * habs);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                let mut j = ComplexMatrix::identity(n);
                j.set(p, p, C64::new(c, 0.0));
                j.set(p, q, C64::new(s, 0.0));
                j.set(q, p, phase_conj * (-s));
                j.set(q, q, phase_conj * c);

                a = j.dagger() * a * j;
                // Clean the annihilated pair and keep the diagonal real.
                a.set(p, q, C64::new(0.0, 0.0));
                a.set(q, p, C64::new(0.0, 0.0));
                for k in 0..n {
                    let d = a.get(k, k);
                    a.set(k, k, C64::new(d.re, 0.0));
                }
                v = v * j;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a.get(x, x).re.total_cmp(&a.get(y, y).re));
    let values = order.iter().map(|&k| a.get(k, k).re).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, col| v.get(i, order[col]));
    Ok(Eigensystem { values, vectors })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigensystem(m)?.values)
}

/// Real symmetric Jacobi eigen-decomposition.
///
/// Returns ascending eigenvalues and eigenvectors as columns (`vecs[i][k]` is
/// component `i` of eigenvector `k`).
pub fn symmetric_eigensystem<const N: usize>(m: [[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut a = m;
    for i in 0..N {
        for j in (i + 1)..N {
            let avg = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = avg;
            a[j][i] = avg;
        }
    }
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let frob_sq: f64 = a.iter().flatten().map(|x| x * x).sum();
    let stop = (f64::EPSILON * 1e-2).powi(2) * frob_sq.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..N)
            .flat_map(|p| ((p + 1)..N).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off <= stop {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- Jᵀ A J with J_pp = J_qq = c, J_pq = s, J_qp = -s.
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: [usize; N] = [0; N];
    for (k, o) in order.iter_mut().enumerate() {
        *o = k;
    }
    order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let mut values = [0.0; N];
    let mut vecs = [[0.0; N]; N];
    for (col, &k) in order.iter().enumerate() {
        values[col] = a[k][k];
        for i in 0..N {
            vecs[i][col] = v[i][k];
        }
    }
    (values, vecs)
}

/// Singular values and right singular vectors of a real square matrix,
/// computed with one-sided (Hestenes) Jacobi rotations.
///
/// Singular values are ascending; `right[i][k]` is component `i` of the
/// right singular vector belonging to `values[k]`.
pub fn singular_values<const N: usize>(m: [[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut u = m;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..N {
            for q in (p + 1)..N {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for row in u.iter() {
                    alpha += row[p] * row[p];
                    beta += row[q] * row[q];
                    gamma += row[p] * row[q];
                }
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for row in u.iter_mut() {
                    let (up, uq) = (row[p], row[q]);
                    row[p] = c * up - s * uq;
                    row[q] = s * up + c * uq;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut norms = [0.0; N];
    for (k, n) in norms.iter_mut().enumerate() {
        *n = u.iter().map(|row| row[k] * row[k]).sum::<f64>().sqrt();
    }
    let mut order: [usize; N] = [0; N];
    for (k, o) in order.iter_mut().enumerate() {
        *o = k;
    }
    order.sort_by(|&x, &y| norms[x].total_cmp(&norms[y]));
    let mut values = [0.0; N];
    let mut right = [[0.0; N]; N];
    for (col, &k) in order.iter().enumerate() {
        values[col] = norms[k];
        for i in 0..N {
            right[i][col] = v[i][k];
        }
    }
    (values, right)
}
