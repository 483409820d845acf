//! Dense row-major matrices.
//!
//! The orders involved are small (`n <= 20` for states, `N <= 210` for
//! operator coordinates), so everything is dense and unblocked.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Dense real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from a flat row-major slice.
    pub fn from_rows(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "row data has wrong length");
        Matrix {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in a_row.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let b_row = other.row(k);
                for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                    *o += aik * bkj;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!(self.rows, other.rows, "elementwise dimension mismatch");
        assert_eq!(self.cols, other.cols, "elementwise dimension mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..i {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Extracts column `j`.
    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    /// Horizontal stack of the rows of `self` above the rows of `other`.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "vstack dimension mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `A x = b` by Gaussian elimination with complete pivoting.
///
/// Rank-deficient systems are accepted: free variables are set to zero and
/// the routine returns *a* particular solution. The solution is verified
/// against the original system; an inconsistent right-hand side is
/// reported as an error. This is deliberately a different algorithm from
/// the eigendecomposition-based pseudo-inverse, so the two can be used to
/// cross-check each other.
pub fn solve_consistent(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(a.rows, b.len(), "solve dimension mismatch");
    let (rows, cols) = (a.rows, a.cols);
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let mut col_perm: Vec<usize> = (0..cols).collect();

    let scale = a.max_abs();
    let pivot_tol = scale * (rows.max(cols) as f64) * f64::EPSILON;

    let mut rank = 0;
    for k in 0..rows.min(cols) {
        // complete pivot search over the trailing block
        let (mut pi, mut pj, mut best) = (k, k, 0.0);
        for i in k..rows {
            for j in k..cols {
                let v = m[(i, j)].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= pivot_tol {
            break;
        }
        if pi != k {
            for j in 0..cols {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(pi, j)];
                m[(pi, j)] = tmp;
            }
            rhs.swap(k, pi);
        }
        if pj != k {
            for i in 0..rows {
                let tmp = m[(i, k)];
                m[(i, k)] = m[(i, pj)];
                m[(i, pj)] = tmp;
            }
            col_perm.swap(k, pj);
        }
        for i in k + 1..rows {
            let factor = m[(i, k)] / m[(k, k)];
            if factor == 0.0 {
                continue;
            }
            m[(i, k)] = 0.0;
            for j in k + 1..cols {
                let delta = factor * m[(k, j)];
                m[(i, j)] -= delta;
            }
            rhs[i] -= factor * rhs[k];
        }
        rank = k + 1;
    }

    // back substitution; free variables stay zero
    let mut x_perm = vec![0.0; cols];
    for k in (0..rank).rev() {
        let mut acc = rhs[k];
        for j in k + 1..cols {
            acc -= m[(k, j)] * x_perm[j];
        }
        x_perm[k] = acc / m[(k, k)];
    }
    let mut x = vec![0.0; cols];
    for (k, &orig) in col_perm.iter().enumerate() {
        x[orig] = x_perm[k];
    }

    // verify on the original system
    let ax = a.matvec(&x);
    let mut residual = 0.0_f64;
    for (axi, bi) in ax.iter().zip(b) {
        residual = residual.max((axi - bi).abs());
    }
    let xmax = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let bmax = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e4 * (rows.max(cols) as f64) * f64::EPSILON * (scale * xmax + bmax).max(1e-300);
    if residual > tol {
        return Err(Error::InconsistentSystem { residual });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let a = Matrix::from_rows(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let i = Matrix::identity(2);
        assert_eq!(a.mul(&i), a);
        assert_eq!(i.mul(&a), a);
    }

    #[test]
    fn solve_invertible() {
        let a = Matrix::from_rows(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let x = solve_consistent(&a, &[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn solve_singular_consistent() {
        // rank 1, rhs in range
        let a = Matrix::from_rows(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let x = solve_consistent(&a, &[3.0, 6.0]).unwrap();
        let ax = a.matvec(&x);
        assert!((ax[0] - 3.0).abs() < 1e-12);
        assert!((ax[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn solve_singular_inconsistent() {
        let a = Matrix::from_rows(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let err = solve_consistent(&a, &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::InconsistentSystem { .. }));
    }
}
