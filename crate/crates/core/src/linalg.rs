//! Dense symmetric-matrix helpers: a clipping Cholesky factorization and a
//! symmetric eigen-decomposition wrapper.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Relative threshold below which negative pivots are treated as round-off.
pub const PSD_TOL: f64 = 1e-10;

/// Dense symmetric matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: alloc::vec![0.0; n * n] }
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle.
    pub fn from_fn<F: FnMut(usize, usize) -> Result<f64>>(n: usize, mut f: F) -> Result<Self> {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j)?;
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order and the matching unit eigenvectors
    /// (column `k` of the returned row-major matrix).
    pub fn eigen(&self) -> (Vec<f64>, Vec<f64>) {
        let m = DMatrix::from_row_slice(self.n, self.n, &self.data);
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vecs = alloc::vec![0.0; self.n * self.n];
        for (c, &k) in order.iter().enumerate() {
            for r in 0..self.n {
                vecs[r * self.n + c] = eig.eigenvectors[(r, k)];
            }
        }
        (vals, vecs)
    }

    /// `min eigenvalue / max |eigenvalue|` (0 for the zero matrix).
    pub fn min_eigen_ratio(&self) -> f64 {
        let (vals, _) = self.eigen();
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            0.0
        } else {
            vals[0] / scale
        }
    }

    /// Positive semidefinite within `PSD_TOL` relative to the spectral radius.
    pub fn is_psd(&self) -> bool {
        self.min_eigen_ratio() >= -PSD_TOL
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Cholesky {
    pub n: usize,
    pub l: Vec<f64>,
}

impl Cholesky {
    /// Factorizes a positive semidefinite matrix.
    ///
    /// Pivots in `[-PSD_TOL * max_diag, 0]` are clipped to zero and their
    /// column is zeroed (a degenerate direction, e.g. a process pinned at
    /// `t = 0`). More negative pivots are an error.
    pub fn factor(a: &SymMatrix) -> Result<Self> {
        let n = a.n;
        let thr = PSD_TOL * a.max_diag();
        let mut l = alloc::vec![0.0; n * n];
        for j in 0..n {
            let row_j = &l[j * n..j * n + j];
            let d = a.get(j, j) - row_j.iter().map(|x| x * x).sum::<f64>();
            if d < -thr {
                return Err(Error::NotPositiveSemidefinite { index: j, value: d });
            }
            if d <= thr * 1e-6 || d <= 0.0 {
                continue;
            }
            let ljj = libm::sqrt(d);
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { n, l })
    }

    /// `out = L z`.
    pub fn mul_into(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i + 1];
            out[i] = row.iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }
}
