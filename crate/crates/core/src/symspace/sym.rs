use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Real symmetric matrix of order `n`.
///
/// Storage is one triangle packed in coordinate order — the diagonal
/// `(1,1)..(n,n)` first, then the off-diagonals by ascending distance
/// from the diagonal — so `X(i,j) = X(j,i)` holds exactly and the packed
/// slice doubles as the state vector of the integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    packed: Vec<f64>,
}

/// Number of packed entries for order `n`.
pub(crate) fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Recovers `n` from a triangular length, if it is one.
pub(crate) fn order_of_packed_len(len: usize) -> Option<usize> {
    let mut n = 0usize;
    loop {
        let t = packed_len(n);
        if t == len {
            return Some(n);
        }
        if t > len {
            return None;
        }
        n += 1;
    }
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            packed: vec![0.0; packed_len(n)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut x = SymMatrix::zeros(n);
        for i in 0..n {
            x.packed[i] = 1.0;
        }
        x
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut x = SymMatrix::zeros(diag.len());
        x.packed[..diag.len()].copy_from_slice(diag);
        x
    }

    /// Builds from `f(i, j)` evaluated on the lower triangle (`i >= j`).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut x = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                x.packed[pack_index(n, i, j)] = f(i, j);
            }
        }
        x
    }

    /// Builds from a flat row-major slice of a full symmetric matrix.
    ///
    /// Only the lower triangle is read; no symmetry check is performed.
    pub fn from_rows_lower(n: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), n * n);
        SymMatrix::from_fn(n, |i, j| data[i * n + j])
    }

    /// Folds the lower triangle of a square matrix into a symmetric one.
    pub fn fold_lower(m: &Matrix) -> Self {
        assert_eq!(m.rows(), m.cols());
        SymMatrix::from_fn(m.rows(), |i, j| m[(i, j)])
    }

    /// Symmetrizes a square matrix as `(M + Mᵀ)/2`.
    pub fn symmetrize(m: &Matrix) -> Self {
        assert_eq!(m.rows(), m.cols());
        SymMatrix::from_fn(m.rows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[pack_index(self.n, i, j)]
    }

    /// Sets both `(i,j)` and `(j,i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.packed[pack_index(self.n, i, j)] = v;
    }

    pub(crate) fn packed(&self) -> &[f64] {
        &self.packed
    }

    pub(crate) fn packed_mut(&mut self) -> &mut [f64] {
        &mut self.packed
    }

    pub(crate) fn from_packed(n: usize, packed: Vec<f64>) -> Self {
        debug_assert_eq!(packed.len(), packed_len(n));
        SymMatrix { n, packed }
    }

    pub fn to_full(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn diag(&self) -> Vec<f64> {
        self.packed[..self.n].to_vec()
    }

    /// Coordinates with respect to the orthonormal basis
    /// `{E_ii} ∪ {(E_ij+E_ji)/√2, i<j}`; the dot product of two
    /// coordinate vectors equals the Frobenius inner product.
    pub fn svec(&self) -> Vec<f64> {
        let mut v = self.packed.clone();
        for x in v[self.n..].iter_mut() {
            *x *= SQRT_2;
        }
        v
    }

    /// Inverse of [`svec`](Self::svec).
    pub fn from_svec(v: &[f64]) -> Result<Self> {
        let n = order_of_packed_len(v.len()).ok_or(Error::NotTriangularLength(v.len()))?;
        let mut packed = v.to_vec();
        for x in packed[n..].iter_mut() {
            *x /= SQRT_2;
        }
        Ok(SymMatrix { n, packed })
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    pub fn frob_norm_sq(&self) -> f64 {
        let diag: f64 = self.packed[..self.n].iter().map(|v| v * v).sum();
        let off: f64 = self.packed[self.n..].iter().map(|v| v * v).sum();
        diag + 2.0 * off
    }

    /// Frobenius norm of the off-diagonal part.
    pub fn off_diag_norm(&self) -> f64 {
        let off: f64 = self.packed[self.n..].iter().map(|v| v * v).sum();
        (2.0 * off).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.packed.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            packed: self.packed.iter().map(|v| v * s).collect(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.packed[self.n..].iter().all(|&v| v == 0.0)
    }

    /// Eigendecomposition with ascending eigenvalues.
    pub fn eigen(&self) -> Result<crate::symspace::EigenDecomposition> {
        crate::symspace::sym_eigen(&self.to_full())
    }

    /// Sorted eigenvalue vector `ev(X)`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigen()?.values().to_vec())
    }
}

/// Packed index of `(i, j)`: diagonal block first, then off-diagonals by
/// distance `d = |i-j|`; entry `(j, j+d)` sits at `d·n − d(d−1)/2 + j`.
#[inline]
fn pack_index(n: usize, i: usize, j: usize) -> usize {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    debug_assert!(hi < n);
    let d = hi - lo;
    d * n - (d * d - d) / 2 + lo
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, rhs.n, "order mismatch");
        SymMatrix {
            n: self.n,
            packed: self
                .packed
                .iter()
                .zip(&rhs.packed)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, rhs.n, "order mismatch");
        SymMatrix {
            n: self.n,
            packed: self
                .packed
                .iter()
                .zip(&rhs.packed)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, s: f64) -> SymMatrix {
        self.scaled(s)
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        self.scaled(-1.0)
    }
}

/// Frobenius inner product `⟨X,Y⟩ = Trace(XYᵀ)`.
pub fn frobenius_inner(x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    if x.n != y.n {
        return Err(Error::DimensionMismatch {
            left: x.n,
            right: y.n,
        });
    }
    let diag: f64 = x.packed[..x.n]
        .iter()
        .zip(&y.packed[..y.n])
        .map(|(a, b)| a * b)
        .sum();
    let off: f64 = x.packed[x.n..]
        .iter()
        .zip(&y.packed[y.n..])
        .map(|(a, b)| a * b)
        .sum();
    Ok(diag + 2.0 * off)
}

/// Commutator `[X,Y] = XY − YX` of two square matrices.
pub fn commutator(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    if x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows() {
        return Err(Error::DimensionMismatch {
            left: x.rows(),
            right: y.rows(),
        });
    }
    Ok(x.mul(y).sub(&y.mul(x)))
}
