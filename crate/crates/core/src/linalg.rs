//! Dense small-matrix utilities.
//!
//! Everything here targets the desk scale of the analysis (n <= 64):
//! row-major `Vec<f64>` storage, cyclic Jacobi for symmetric eigenproblems,
//! PSD-tolerant Cholesky and a partial-pivoting linear solve. No attempt is
//! made at cache blocking or sparsity.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::Error;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, Error> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = entries[i];
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut s = 0.0;
            for j in 0..self.cols {
                s += self[(i, j)] * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, c: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(math::abs(x)))
    }

    pub fn trace(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// (A + A^T) / 2.
    pub fn symmetrize(&self) -> Mat {
        assert_eq!(self.rows, self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..i {
                let s = 0.5 * (self[(i, j)] + self[(j, i)]);
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    /// Relative asymmetry: max |A - A^T| / max(1, max |A|).
    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs().max(1.0);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max(math::abs(self[(i, j)] - self[(j, i)]));
            }
        }
        worst / scale
    }

    /// Submatrix copy, rows [r0, r0+nr), cols [c0, c0+nc).
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Mat {
        let mut out = Mat::zeros(nr, nc);
        for i in 0..nr {
            for j in 0..nc {
                out[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        out
    }

    /// Writes `src` into self starting at (r0, c0).
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Mat) {
        for i in 0..src.rows {
            for j in 0..src.cols {
                self[(r0 + i, c0 + j)] = src[(i, j)];
            }
        }
    }

    /// Eigenvalues of a symmetric matrix via cyclic Jacobi, ascending.
    pub fn sym_eigenvalues(&self) -> Vec<f64> {
        let (vals, _) = self.sym_eigen();
        vals
    }

    /// Full symmetric eigendecomposition: (eigenvalues ascending, columns of
    /// the returned matrix are the matching eigenvectors).
    pub fn sym_eigen(&self) -> (Vec<f64>, Mat) {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.symmetrize();
        let mut q = Mat::identity(n);
        // Cyclic Jacobi sweeps until off-diagonal mass is negligible.
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            if off <= 1e-30 * (1.0 + a.max_abs() * a.max_abs()) {
                break;
            }
            for p in 0..n {
                for r in (p + 1)..n {
                    let apq = a[(p, r)];
                    if math::abs(apq) < 1e-300 {
                        continue;
                    }
                    let theta = (a[(r, r)] - a[(p, p)]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + math::sqrt(1.0 + theta * theta))
                    } else {
                        -1.0 / (-theta + math::sqrt(1.0 + theta * theta))
                    };
                    let c = 1.0 / math::sqrt(1.0 + t * t);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, r)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, r)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(r, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(r, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let qkp = q[(k, p)];
                        let qkq = q[(k, r)];
                        q[(k, p)] = c * qkp - s * qkq;
                        q[(k, r)] = s * qkp + c * qkq;
                    }
                }
            }
        }
        let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)], i)).collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut vecs = Mat::zeros(n, n);
        for (newcol, &(_, oldcol)) in pairs.iter().enumerate() {
            for k in 0..n {
                vecs[(k, newcol)] = q[(k, oldcol)];
            }
        }
        (vals, vecs)
    }

    /// Lower Cholesky factor of a symmetric PSD matrix, tolerating zero
    /// pivots (semidefinite rank deficiency) up to `jitter` on the diagonal.
    pub fn cholesky_psd(&self, jitter: f64) -> Result<Mat, Error> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let scale = self.max_abs().max(1.0);
        let tol = jitter.max(1e-14 * scale);
        let mut l = Mat::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d < -tol {
                return Err(Error::InvalidArgument(format!(
                    "matrix not positive semidefinite: pivot {d} at column {j}"
                )));
            }
            if d <= tol {
                // Rank-deficient direction: zero column.
                l[(j, j)] = 0.0;
                continue;
            }
            let ljj = math::sqrt(d);
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(l)
    }

    /// Solves `self * x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, Error> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut a = self.data.clone();
        let mut x: Vec<f64> = b.to_vec();
        for col in 0..n {
            let mut piv = col;
            let mut best = math::abs(a[col * n + col]);
            for r in (col + 1)..n {
                let v = math::abs(a[r * n + col]);
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "singular matrix in solve at column {col}"
                )));
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let d = a[col * n + col];
            for r in (col + 1)..n {
                let f = a[r * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                a[r * n + col] = 0.0;
                for j in (col + 1)..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
                x[r] -= f * x[col];
            }
        }
        for col in (0..n).rev() {
            let mut s = x[col];
            for j in (col + 1)..n {
                s -= a[col * n + j] * x[j];
            }
            x[col] = s / a[col * n + col];
        }
        Ok(x)
    }

    /// Kronecker product, row-major convention:
    /// `(A (x) B)[i*p + k, j*q + l] = A[i,j] * B[k,l]`.
    pub fn kron(&self, other: &Mat) -> Mat {
        let (m, n) = (self.rows, self.cols);
        let (p, q) = (other.rows, other.cols);
        let mut out = Mat::zeros(m * p, n * q);
        for i in 0..m {
            for j in 0..n {
                let a = self[(i, j)];
                if a == 0.0 {
                    continue;
                }
                for k in 0..p {
                    for l in 0..q {
                        out[(i * p + k, j * q + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Row-major vectorization (concatenated rows).
    pub fn vec_rows(&self) -> Vec<f64> {
        self.data.clone()
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

// Free-standing vector helpers; iterates are plain `Vec<f64>`.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm, scaled to stay exact across the full exponent range
/// (naive sum-of-squares underflows once entries drop below ~1e-162, which
/// deterministic trajectories routinely do).
pub fn norm(a: &[f64]) -> f64 {
    let m = a.iter().fold(0.0f64, |acc, v| math::abs(*v).max(acc));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: f64 = a.iter().map(|v| (v / m) * (v / m)).sum();
    m * math::sqrt(s)
}

pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Outer product a b^T.
pub fn outer(a: &[f64], b: &[f64]) -> Mat {
    let mut m = Mat::zeros(a.len(), b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            m[(i, j)] = a[i] * b[j];
        }
    }
    m
}
