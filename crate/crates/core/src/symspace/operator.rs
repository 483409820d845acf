use alloc::vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;
use crate::matrix::Matrix;
use crate::symspace::eigen::{psd_pseudo_inverse_matrix, sym_eigen, EigenDecomposition};
use crate::symspace::pattern::SparsityPattern;
use crate::symspace::sym::{packed_len, SymMatrix};

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Linear operator on `Sym(n)`, stored as its `N×N` coordinate matrix in
/// the orthonormal basis used by [`SymMatrix::svec`], `N = n(n+1)/2`.
///
/// In this basis a self-adjoint operator has a symmetric coordinate
/// matrix and a PSD operator a PSD one, so the operator calculus of the
/// quasi-projection machinery reduces to ordinary matrix algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct SymOperator {
    mat_order: usize,
    coeffs: Matrix,
}

impl SymOperator {
    pub fn from_coeffs(mat_order: usize, coeffs: Matrix) -> Self {
        let n = packed_len(mat_order);
        assert_eq!(coeffs.rows(), n, "coefficient matrix must be N×N");
        assert_eq!(coeffs.cols(), n, "coefficient matrix must be N×N");
        SymOperator { mat_order, coeffs }
    }

    pub fn identity(mat_order: usize) -> Self {
        SymOperator::from_coeffs(mat_order, Matrix::identity(packed_len(mat_order)))
    }

    pub fn zero(mat_order: usize) -> Self {
        let n = packed_len(mat_order);
        SymOperator::from_coeffs(mat_order, Matrix::zeros(n, n))
    }

    /// Order of the matrices the operator acts on.
    pub fn mat_order(&self) -> usize {
        self.mat_order
    }

    /// Dimension `N` of the coordinate space.
    pub fn coord_dim(&self) -> usize {
        self.coeffs.rows()
    }

    pub fn coeffs(&self) -> &Matrix {
        &self.coeffs
    }

    pub fn apply(&self, y: &SymMatrix) -> SymMatrix {
        assert_eq!(y.order(), self.mat_order, "operator/argument order mismatch");
        SymMatrix::from_svec(&self.coeffs.matvec(&y.svec())).unwrap()
    }

    pub fn add(&self, other: &SymOperator) -> SymOperator {
        assert_eq!(self.mat_order, other.mat_order);
        SymOperator {
            mat_order: self.mat_order,
            coeffs: self.coeffs.add(&other.coeffs),
        }
    }

    pub fn compose(&self, other: &SymOperator) -> SymOperator {
        assert_eq!(self.mat_order, other.mat_order);
        SymOperator {
            mat_order: self.mat_order,
            coeffs: self.coeffs.mul(&other.coeffs),
        }
    }

    pub fn scaled(&self, s: f64) -> SymOperator {
        SymOperator {
            mat_order: self.mat_order,
            coeffs: self.coeffs.scaled(s),
        }
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.coeffs.is_symmetric(tol)
    }

    pub fn eigen(&self) -> Result<EigenDecomposition> {
        sym_eigen(&self.coeffs)
    }

    /// Eigendecomposition-based Moore–Penrose pseudo-inverse; see
    /// [`psd_pseudo_inverse_matrix`] for the rank cutoff convention.
    pub fn pseudo_inverse(&self, rank_tol: f64) -> Result<SymOperator> {
        Ok(SymOperator {
            mat_order: self.mat_order,
            coeffs: psd_pseudo_inverse_matrix(&self.coeffs, rank_tol)?,
        })
    }
}

/// Materializes a linear action on `Sym(n)` as a [`SymOperator`] by
/// evaluating it column-by-column over the coordinate basis.
///
/// Linearity of `action` is the caller's contract; a debug build spot
/// checks additivity on a fixed pair of arguments.
pub fn operator_from_action(
    action: impl Fn(&SymMatrix) -> SymMatrix,
    mat_order: usize,
) -> SymOperator {
    let n = packed_len(mat_order);
    let mut coeffs = Matrix::zeros(n, n);
    let mut unit = vec![0.0; n];
    for k in 0..n {
        unit[k] = 1.0;
        let basis = SymMatrix::from_svec(&unit).unwrap();
        unit[k] = 0.0;
        let image = action(&basis);
        assert_eq!(image.order(), mat_order, "action changed the matrix order");
        coeffs.set_col(k, &image.svec());
    }
    debug_assert!(
        {
            let x = SymMatrix::from_fn(mat_order, |i, j| ((3 * i + 5 * j + 1) as f64).sin());
            let y = SymMatrix::from_fn(mat_order, |i, j| ((7 * i + 2 * j) as f64).cos());
            let lhs = action(&(&x + &y));
            let rhs = &action(&x) + &action(&y);
            (&lhs - &rhs).frob_norm() <= 1e-9 * (1.0 + lhs.frob_norm())
        },
        "action is not additive"
    );
    SymOperator {
        mat_order,
        coeffs,
    }
}

impl SparsityPattern {
    /// The pattern projector `m` as an operator: a diagonal 0/1 matrix in
    /// coordinate order. `m = m* = m²`.
    pub fn operator(&self) -> SymOperator {
        SymOperator::from_coeffs(self.order(), Matrix::diagonal(&self.svec_mask()))
    }
}

/// The double-bracket operator `A.X : Y ↦ [[Y,X],X]`, i.e. the
/// composition of `K ↦ [K,X]` with its adjoint. Its range spans the
/// tangent space of the iso-spectral surface through `X` at `X`.
///
/// Uses `[[Y,X],X] = YX² + X²Y − 2XYX`, assembled per basis column from
/// rows and columns of `X` and `X²`.
pub fn double_bracket_operator(x: &SymMatrix) -> SymOperator {
    let n = x.order();
    let nn = packed_len(n);
    let xf = x.to_full();
    let x2 = xf.mul(&xf);
    let mut coeffs = Matrix::zeros(nn, nn);

    let mut col = 0usize;
    let mut image = Matrix::zeros(n, n);
    for d in 0..n {
        for i in 0..n - d {
            let j = i + d;
            // basis element B = α(e_i e_jᵀ + e_j e_iᵀ), α = 1/2 on the
            // diagonal (i = j) and 1/√2 off it
            let alpha = if d == 0 { 0.5 } else { 1.0 / SQRT_2 };
            // [[B,X],X] = BX² + X²B − 2XBX expands into rank-one pieces
            // built from columns i,j of X and X²
            for p in 0..n {
                for q in 0..n {
                    let mut acc = -2.0 * (xf[(p, i)] * xf[(q, j)] + xf[(p, j)] * xf[(q, i)]);
                    if p == i {
                        acc += x2[(q, j)];
                    }
                    if p == j {
                        acc += x2[(q, i)];
                    }
                    if q == i {
                        acc += x2[(p, j)];
                    }
                    if q == j {
                        acc += x2[(p, i)];
                    }
                    image[(p, q)] = alpha * acc;
                }
            }
            coeffs.set_col(col, &SymMatrix::fold_lower(&image).svec());
            col += 1;
        }
    }
    SymOperator {
        mat_order: n,
        coeffs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symspace::sym::commutator;

    #[test]
    fn from_action_identity_and_scaling() {
        let id = operator_from_action(|y| y.clone(), 2);
        assert_eq!(id.coeffs(), &Matrix::identity(3));

        let twice = operator_from_action(|y| y.scaled(2.0), 2);
        assert_eq!(twice.coeffs(), &Matrix::identity(3).scaled(2.0));
    }

    #[test]
    fn from_action_double_bracket_with_diag() {
        // Y ↦ [[Y,D],D] with D = diag(1,2) multiplies slot (1,2) by
        // (d_1 - d_2)² = 1 and kills the diagonal slots.
        let d = Matrix::diagonal(&[1.0, 2.0]);
        let op = operator_from_action(
            |y| {
                let c = commutator(&y.to_full(), &d).unwrap();
                SymMatrix::fold_lower(&commutator(&c, &d).unwrap())
            },
            2,
        );
        let expect = Matrix::diagonal(&[0.0, 0.0, 1.0]);
        assert!(op.coeffs().sub(&expect).frob_norm() < 1e-12);
    }

    #[test]
    fn pattern_operator_examples() {
        assert_eq!(
            SparsityPattern::full(2).operator().coeffs(),
            &Matrix::identity(3)
        );
        assert_eq!(
            SparsityPattern::diagonal(2).operator().coeffs(),
            &Matrix::diagonal(&[1.0, 1.0, 0.0])
        );
        // order (11),(22),(33),(12),(23),(13): tridiagonal excludes (13)
        assert_eq!(
            SparsityPattern::tridiagonal(3).operator().coeffs(),
            &Matrix::diagonal(&[1.0, 1.0, 1.0, 1.0, 1.0, 0.0])
        );
    }

    #[test]
    fn double_bracket_identity_is_zero() {
        let op = double_bracket_operator(&SymMatrix::identity(3));
        assert!(op.coeffs().frob_norm() < 1e-14);
    }

    #[test]
    fn double_bracket_diagonal_multipliers() {
        let op = double_bracket_operator(&SymMatrix::from_diag(&[1.0, 2.0]));
        let expect = Matrix::diagonal(&[0.0, 0.0, 1.0]);
        assert!(op.coeffs().sub(&expect).frob_norm() < 1e-12);
    }

    #[test]
    fn double_bracket_kernel_is_commutant() {
        // X = [[0,1],[1,0]]: kernel = span{svec(I), svec(X)}
        let x = SymMatrix::from_rows_lower(2, &[0.0, 1.0, 1.0, 0.0]);
        let op = double_bracket_operator(&x);
        let ki = op.coeffs().matvec(&SymMatrix::identity(2).svec());
        let kx = op.coeffs().matvec(&x.svec());
        assert!(ki.iter().all(|v| v.abs() < 1e-14));
        assert!(kx.iter().all(|v| v.abs() < 1e-14));
        let eig = op.eigen().unwrap();
        assert_eq!(eig.rank_above(1e-10), 1);
    }

    #[test]
    fn double_bracket_matches_generic_construction() {
        let mut state = 42_u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in [1, 2, 3, 5, 6] {
            let x = SymMatrix::from_fn(n, |_, _| next());
            let fast = double_bracket_operator(&x);
            let xf = x.to_full();
            let generic = operator_from_action(
                |y| {
                    let c = commutator(&y.to_full(), &xf).unwrap();
                    SymMatrix::fold_lower(&commutator(&c, &xf).unwrap())
                },
                n,
            );
            let scale = 1.0 + generic.coeffs().frob_norm();
            assert!(fast.coeffs().sub(generic.coeffs()).frob_norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn pseudo_inverse_of_bracket_operator() {
        let op = double_bracket_operator(&SymMatrix::from_diag(&[1.0, 2.0]));
        let pinv = op.pseudo_inverse(1e-12).unwrap();
        assert!(pinv
            .coeffs()
            .sub(&Matrix::diagonal(&[0.0, 0.0, 1.0]))
            .frob_norm()
            < 1e-12);
    }
}
