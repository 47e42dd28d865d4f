//! Dense row-major matrix and vector kernels.
//!
//! The networks in this crate are small (hundreds of weights), so the
//! kernels are written in-repo: plain loops over contiguous rows, no
//! external numerics dependency. That keeps every derivative and filter
//! update auditable down to the summation order — which matters, because
//! the crate promises bit-identical results for identical seeds.

use crate::error::{Error, Result};

/// Dot product of two equal-length slices, accumulated left to right.
///
/// The fixed accumulation order is part of the crate's determinism
/// contract; do not replace with a reassociating reduction.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Adds `scale * src` into `dst` elementwise.
pub fn axpy(dst: &mut [f64], src: &[f64], scale: f64) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d += scale * s;
    }
}

/// Dense row-major matrix of doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds from a row-major buffer. Fails if the length is inconsistent.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "matrix buffer has {} elements, expected {}x{}={}",
                data.len(),
                rows,
                cols,
                rows * cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// `scale * I` of size `n`.
    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = scale;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    /// Borrow row `i` as a contiguous slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        debug_assert!(i < self.rows);
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Mutable borrow of row `i`.
    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        debug_assert!(i < self.rows);
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Whole buffer, row-major.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Whole buffer, row-major, mutable.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `A * x` for a vector `x` of length `cols`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A^T * x` for a vector `x` of length `rows`.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            axpy(&mut out, self.row(i), xi);
        }
        out
    }

    /// `A += scale * a ⊗ b` (outer product accumulation).
    pub fn add_outer(&mut self, a: &[f64], b: &[f64], scale: f64) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(b.len(), self.cols);
        for (i, &ai) in a.iter().enumerate() {
            axpy(self.row_mut(i), b, scale * ai);
        }
    }

    /// Returns the transpose as a new matrix.
    pub fn transposed(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Replaces `A` with `(A + A^T) / 2`. Square matrices only.
    pub fn symmetrize(&mut self) {
        debug_assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let m = 0.5 * (self.data[i * self.cols + j] + self.data[j * self.cols + i]);
                self.data[i * self.cols + j] = m;
                self.data[j * self.cols + i] = m;
            }
        }
    }

    /// Adds `q` to every diagonal entry. Square matrices only.
    pub fn add_diag(&mut self, q: f64) {
        debug_assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            self.data[i * self.cols + i] += q;
        }
    }

    /// Maximum absolute asymmetry `max |A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        debug_assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let d = (self.data[i * self.cols + j] - self.data[j * self.cols + i]).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// True when every entry is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Cholesky factorization `A = L L^T` of a symmetric positive definite
/// matrix, returning the lower factor.
///
/// Fails with a numeric error if any pivot drops to `tol` or below — the
/// caller treats that as "system singular beyond tolerance" and aborts
/// whatever update it was computing instead of propagating garbage.
pub fn cholesky(a: &Matrix, tol: f64) -> Result<Matrix> {
    if a.rows != a.cols {
        return Err(Error::Shape(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= tol {
                    return Err(Error::Numeric(format!(
                        "matrix not positive definite: pivot {sum:.3e} at row {i} (tolerance {tol:.1e})"
                    )));
                }
                l.set(i, j, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b` given the lower Cholesky factor `L`.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    debug_assert_eq!(b.len(), n);
    // Forward: L y = b.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for (lik, yk) in l.row(i)[..i].iter().zip(&y[..i]) {
            sum -= lik * yk;
        }
        y[i] = sum / l.get(i, i);
    }
    // Backward: L^T x = y.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for (k, xk) in x.iter().enumerate().skip(i + 1) {
            sum -= l.get(k, i) * xk;
        }
        x[i] = sum / l.get(i, i);
    }
    x
}

/// Eigenvalues of a symmetric matrix, sorted ascending, via cyclic Jacobi
/// rotations. Intended for audits of small matrices (covariance checks up
/// to a few hundred rows), not as a general-purpose eigensolver.
///
/// `tol` bounds the final off-diagonal Frobenius norm. Mild asymmetry is
/// absorbed by averaging with the transpose before iterating.
pub fn symmetric_eigenvalues(a: &Matrix, tol: f64) -> Result<Vec<f64>> {
    if a.rows != a.cols {
        return Err(Error::Shape(format!(
            "eigenvalue audit needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if !a.all_finite() {
        return Err(Error::Numeric(
            "eigenvalue audit on a non-finite matrix".into(),
        ));
    }
    let n = a.rows;
    let mut m = a.clone();
    m.symmetrize();

    let off_norm = |m: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m.get(i, j) * m.get(i, j);
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&m) > tol {
        sweeps += 1;
        if sweeps > 100 {
            return Err(Error::Numeric(format!(
                "Jacobi iteration stalled: off-diagonal norm {:.3e} after 100 sweeps",
                off_norm(&m)
            )));
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle annihilating (p,q): tan chosen as the
                // smaller root for stability.
                let tau = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                m.set(p, p, app - t * apq);
                m.set(q, q, aqq + t * apq);
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(p, k, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                    m.set(q, k, s * akp + c * akq);
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eig)
}
