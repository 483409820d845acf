//! Symmetric-matrix algebra.
//!
//! `Sym(n)` is treated as an inner-product space under the Frobenius
//! inner product. [`SymMatrix`] stores one triangle so symmetry is exact
//! by construction; [`svec`](SymMatrix::svec) maps a symmetric matrix to
//! its coordinates in the orthonormal basis `{E_ii} ∪ {(E_ij+E_ji)/√2}`,
//! which turns self-adjointness and positive semi-definiteness of linear
//! operators on `Sym(n)` into literal symmetry/PSD-ness of their
//! coordinate matrices ([`SymOperator`]).

mod eigen;
mod operator;
mod pattern;
mod sym;

pub use eigen::{
    default_rank_tol, kernel_basis, kernel_basis_scaled, psd_pseudo_inverse_matrix, sym_eigen, EigenDecomposition,
};
pub use operator::{double_bracket_operator, operator_from_action, SymOperator};
pub use pattern::SparsityPattern;
pub use sym::{commutator, frobenius_inner, SymMatrix};
