use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::symspace::sym::{packed_len, SymMatrix};

/// Symmetric sparsity pattern `Δ` of index pairs, always containing the
/// diagonal.
///
/// `Sym(Δ)` is the subspace of symmetric matrices vanishing outside `Δ`.
/// Indices are 0-based in the API; file formats and documentation use the
/// 1-based convention.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityPattern {
    n: usize,
    // packed in the same coordinate order as SymMatrix
    mask: Vec<bool>,
}

impl SparsityPattern {
    fn empty(n: usize) -> Self {
        let mut mask = vec![false; packed_len(n)];
        for m in mask.iter_mut().take(n) {
            *m = true; // condition (nz1): the diagonal is always present
        }
        SparsityPattern { n, mask }
    }

    pub fn full(n: usize) -> Self {
        SparsityPattern {
            n,
            mask: vec![true; packed_len(n)],
        }
    }

    pub fn diagonal(n: usize) -> Self {
        SparsityPattern::empty(n)
    }

    /// Band pattern with `|i-j| <= bandwidth`.
    pub fn banded(n: usize, bandwidth: usize) -> Self {
        let mut p = SparsityPattern::empty(n);
        for i in 0..n {
            for j in 0..i {
                if i - j <= bandwidth {
                    p.insert(i, j);
                }
            }
        }
        p
    }

    pub fn tridiagonal(n: usize) -> Self {
        SparsityPattern::banded(n, 1)
    }

    /// Pattern from explicit pairs; the symmetric partner of each pair and
    /// the full diagonal are included automatically.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut p = SparsityPattern::empty(n);
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter("pattern index out of range"));
            }
            p.insert(i, j);
        }
        Ok(p)
    }

    /// Nonzero pattern of `x` (plus the diagonal).
    pub fn from_matrix(x: &SymMatrix) -> Self {
        let n = x.order();
        let mut p = SparsityPattern::empty(n);
        for i in 0..n {
            for j in 0..=i {
                if x.get(i, j) != 0.0 {
                    p.insert(i, j);
                }
            }
        }
        p
    }

    fn insert(&mut self, i: usize, j: usize) {
        let idx = pack_index_of(self.n, i, j);
        self.mask[idx] = true;
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.mask[pack_index_of(self.n, i, j)]
    }

    /// Number of pairs in `Δ`, counting `(i,j)` and `(j,i)` separately.
    pub fn cardinality(&self) -> usize {
        let diag = self.mask[..self.n].iter().filter(|&&b| b).count();
        let off = self.mask[self.n..].iter().filter(|&&b| b).count();
        diag + 2 * off
    }

    /// 0/1 mask in coordinate (svec) order.
    pub fn svec_mask(&self) -> Vec<f64> {
        self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    /// Orthogonal projection of `Sym(n)` onto `Sym(Δ)`: entries inside the
    /// pattern are copied, entries outside are exactly zero.
    pub fn project(&self, y: &SymMatrix) -> Result<SymMatrix> {
        if y.order() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: y.order(),
            });
        }
        let mut out = y.clone();
        for (v, &keep) in out.packed_mut().iter_mut().zip(&self.mask) {
            if !keep {
                *v = 0.0;
            }
        }
        Ok(out)
    }

    /// True when every entry of `x` outside the pattern is exactly zero.
    pub fn supports(&self, x: &SymMatrix) -> bool {
        x.order() == self.n
            && x.packed()
                .iter()
                .zip(&self.mask)
                .all(|(&v, &keep)| keep || v == 0.0)
    }

    /// True when the pattern is filled in toward the diagonal: for every
    /// `i < j` in `Δ`, both `(i, j-1)` and `(i+1, j)` are in `Δ`.
    pub fn is_staircase(&self) -> bool {
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.contains(i, j) && !(self.contains(i, j - 1) && self.contains(i + 1, j)) {
                    return false;
                }
            }
        }
        true
    }
}

#[inline]
fn pack_index_of(n: usize, i: usize, j: usize) -> usize {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    assert!(hi < n, "pattern index out of range");
    let d = hi - lo;
    d * n - (d * d - d) / 2 + lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symspace::sym::frobenius_inner;

    #[test]
    fn diagonal_always_present() {
        let p = SparsityPattern::from_pairs(3, &[(0, 1)]).unwrap();
        for i in 0..3 {
            assert!(p.contains(i, i));
        }
        assert!(p.contains(1, 0)); // symmetric closure
        assert!(!p.contains(0, 2));
    }

    #[test]
    fn project_full_and_diagonal() {
        let y = SymMatrix::from_fn(3, |i, j| (1 + i + 2 * j) as f64);
        let full = SparsityPattern::full(3);
        assert_eq!(full.project(&y).unwrap(), y);

        let d = SparsityPattern::diagonal(3);
        let proj = d.project(&y).unwrap();
        assert!(proj.is_diagonal());
        assert_eq!(proj.diag(), y.diag());
    }

    #[test]
    fn project_is_idempotent_and_self_adjoint() {
        let p = SparsityPattern::from_pairs(4, &[(0, 1), (1, 2), (0, 3)]).unwrap();
        let y = SymMatrix::from_fn(4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let z = SymMatrix::from_fn(4, |i, j| ((i * 5 + j * 11) % 7) as f64 - 3.0);
        let py = p.project(&y).unwrap();
        assert_eq!(p.project(&py).unwrap(), py);
        let lhs = frobenius_inner(&py, &z).unwrap();
        let rhs = frobenius_inner(&y, &p.project(&z).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn staircase_cases() {
        assert!(SparsityPattern::tridiagonal(5).is_staircase());
        assert!(SparsityPattern::diagonal(4).is_staircase());
        assert!(SparsityPattern::full(4).is_staircase());
        // (0,2) present without (1,2): not a staircase
        let p = SparsityPattern::from_pairs(3, &[(0, 2)]).unwrap();
        assert!(!p.is_staircase());
        // filled-in version is
        let q = SparsityPattern::from_pairs(3, &[(0, 2), (0, 1), (1, 2)]).unwrap();
        assert!(q.is_staircase());
    }
}
