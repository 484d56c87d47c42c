//! Dense square matrices and a pivoted Cholesky factorization for
//! covariance work.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, sqrt};

use crate::error::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| fabs(self.get(i, j) - self.get(j, i)) <= tol))
    }

    pub fn has_unit_diagonal(&self, tol: f64) -> bool {
        (0..self.n).all(|i| fabs(self.get(i, i) - 1.0) <= tol)
    }

    /// Symmetric with unit diagonal and entries in `[-1, 1]`, to within
    /// `tol`.
    pub fn check_correlation(&self, tol: f64) -> Result<()> {
        if self.data.iter().any(|v| v.is_nan() || fabs(*v) > 1.0 + tol) {
            return Err(Error::Precondition("matrix has entries outside [-1, 1]"));
        }
        if !self.is_symmetric(tol) {
            return Err(Error::Precondition("matrix is not symmetric"));
        }
        if !self.has_unit_diagonal(tol) {
            return Err(Error::Precondition("matrix does not have a unit diagonal"));
        }
        Ok(())
    }
}

/// `P A P^T = L L^T` with `L` of size `n x rank`, from diagonal pivoting.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    n: usize,
    rank: usize,
    /// `perm[k]` is the original index placed at position `k`.
    perm: Vec<usize>,
    /// row-major `n x n`, only the first `rank` columns are used
    l: Vec<f64>,
}

impl PivotedCholesky {
    /// Factorizes a symmetric positive semidefinite matrix. Remaining
    /// Schur-complement entries below `negative_tol` in magnitude are treated
    /// as zero (rank deficiency); anything more negative is rejected.
    pub fn new(a: &Matrix, negative_tol: f64) -> Result<Self> {
        let n = a.dim();
        let mut work = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut l = vec![0.0; n * n];
        let stop = 1e-12;
        let mut rank = n;

        for k in 0..n {
            let (piv, dmax) = (k..n)
                .map(|i| (i, work[i * n + i]))
                .fold((k, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
            if dmax <= stop {
                // The remaining Schur complement must be numerically zero.
                for i in k..n {
                    for j in k..n {
                        let v = work[i * n + j];
                        if (i == j && v < -negative_tol) || fabs(v) > negative_tol {
                            return Err(Error::NotPositiveSemidefinite { pivot: v });
                        }
                    }
                }
                rank = k;
                break;
            }
            if piv != k {
                perm.swap(k, piv);
                for j in 0..n {
                    work.swap(k * n + j, piv * n + j);
                }
                for i in 0..n {
                    work.swap(i * n + k, i * n + piv);
                }
                for j in 0..k {
                    l.swap(k * n + j, piv * n + j);
                }
            }
            let d = sqrt(dmax);
            l[k * n + k] = d;
            for i in k + 1..n {
                l[i * n + k] = work[i * n + k] / d;
            }
            for i in k + 1..n {
                let lik = l[i * n + k];
                for j in k + 1..=i {
                    let v = work[i * n + j] - lik * l[j * n + k];
                    work[i * n + j] = v;
                    work[j * n + i] = v;
                }
            }
        }
        Ok(PivotedCholesky { n, rank, perm, l })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Writes `L z` (in original index order) into `out`; `z` needs `rank`
    /// entries.
    pub fn mul_into(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let row = &self.l[k * n..k * n + self.rank.min(k + 1)];
            out[self.perm[k]] = row.iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }

    /// Reconstructs `L L^T` in original order.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.n;
        let mut m = Matrix::zeros(n);
        for a in 0..n {
            for b in 0..n {
                let v: f64 = (0..self.rank.min(a + 1).min(b + 1))
                    .map(|k| self.l[a * n + k] * self.l[b * n + k])
                    .sum();
                m.set(self.perm[a], self.perm[b], v);
            }
        }
        m
    }
}
