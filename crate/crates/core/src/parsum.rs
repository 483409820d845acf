//! Parallel sums (quasi-projections) of positive semi-definite operators.
//!
//! For PSD operators `A` and `B` the quasi-projection equations
//!
//! ```text
//! u − Aλ = Ac            (q1)
//! (A+B)λ = (B−A)c        (q2)
//! ```
//!
//! determine `u` uniquely; the map `c ↦ u` is the parallel sum
//! `!(A,B) = 2A(A+B)⁺B`. It is PSD, its range is `Range A ∩ Range B`,
//! and its kernel is `Kernel A + Kernel B`. When `A` and `B` are
//! orthogonal projectors, `!(A,B)` is the orthogonal projector onto the
//! intersection of their ranges.
//!
//! Two independent solution paths are implemented on purpose: the closed
//! pseudo-inverse formula and a pivoted-elimination solve of (q2). Any
//! solution `λ` of (q2) yields the same `u`, `Aλ` and `Bλ`, so agreement
//! of the two paths is a runnable uniqueness check rather than a trusted
//! theorem.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{solve_consistent, Matrix};
use crate::symspace::{
    default_rank_tol as default_tol, kernel_basis, kernel_basis_scaled,
    psd_pseudo_inverse_matrix, sym_eigen, SymMatrix, SymOperator,
};

/// `2A(A+B)⁺B` on coordinate matrices.
pub fn parallel_sum_coeffs(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    assert_eq!(a.rows(), b.rows(), "parallel sum dimension mismatch");
    let s = a.add(b);
    let s_pinv = psd_pseudo_inverse_matrix(&s, default_tol(s.rows()))?;
    Ok(a.mul(&s_pinv).mul(b).scaled(2.0))
}

/// Parallel sum `!(A,B)` of two PSD operators on `Sym(n)`.
pub fn parallel_sum(a: &SymOperator, b: &SymOperator) -> Result<SymOperator> {
    assert_eq!(a.mat_order(), b.mat_order(), "operator order mismatch");
    Ok(SymOperator::from_coeffs(
        a.mat_order(),
        parallel_sum_coeffs(a.coeffs(), b.coeffs())?,
    ))
}

/// A solved instance of the quasi-projection equations.
#[derive(Debug, Clone)]
pub struct QuasiProjectionSolution {
    /// The quasi-projected vector `u ∈ Range A ∩ Range B`.
    pub u: SymMatrix,
    /// The multiplier actually used; unique only up to `Kernel(A+B)`.
    pub lambda: SymMatrix,
    /// `‖u − Aλ − Ac‖` on the returned pair.
    pub residual_q1: f64,
    /// `‖(A+B)λ − (B−A)c‖` on the returned pair.
    pub residual_q2: f64,
}

fn finish_solution(
    a: &SymOperator,
    s: &Matrix,
    c: &SymMatrix,
    rhs: &[f64],
    lam: Vec<f64>,
) -> QuasiProjectionSolution {
    let lambda = SymMatrix::from_svec(&lam).unwrap();
    let u = a.apply(&(&lambda + c));
    let q1 = (&(&u - &a.apply(&lambda)) - &a.apply(c)).frob_norm();
    let s_lam = s.matvec(&lam);
    let q2 = s_lam
        .iter()
        .zip(rhs)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    QuasiProjectionSolution {
        u,
        lambda,
        residual_q1: q1,
        residual_q2: q2,
    }
}

/// Solves the quasi-projection equations with the minimum-norm multiplier
/// `λ := (A+B)⁺(B−A)c` and `u := A(λ+c)`.
pub fn quasi_project(
    a: &SymOperator,
    b: &SymOperator,
    c: &SymMatrix,
) -> Result<QuasiProjectionSolution> {
    assert_eq!(a.mat_order(), b.mat_order(), "operator order mismatch");
    let s = a.coeffs().add(b.coeffs());
    let s_pinv = psd_pseudo_inverse_matrix(&s, default_tol(s.rows()))?;
    let cv = c.svec();
    let rhs: Vec<f64> = b
        .coeffs()
        .matvec(&cv)
        .iter()
        .zip(a.coeffs().matvec(&cv))
        .map(|(bc, ac)| bc - ac)
        .collect();
    let lam = s_pinv.matvec(&rhs);
    Ok(finish_solution(a, &s, c, &rhs, lam))
}

/// Solves the quasi-projection equations by pivoted Gaussian elimination
/// on (q2) instead of the pseudo-inverse formula.
///
/// The multiplier it picks generally differs from the minimum-norm one,
/// but `u`, `Aλ` and `Bλ` must agree with [`quasi_project`].
pub fn quasi_project_by_elimination(
    a: &SymOperator,
    b: &SymOperator,
    c: &SymMatrix,
) -> Result<QuasiProjectionSolution> {
    assert_eq!(a.mat_order(), b.mat_order(), "operator order mismatch");
    let s = a.coeffs().add(b.coeffs());
    let cv = c.svec();
    let rhs: Vec<f64> = b
        .coeffs()
        .matvec(&cv)
        .iter()
        .zip(a.coeffs().matvec(&cv))
        .map(|(bc, ac)| bc - ac)
        .collect();
    let lam = solve_consistent(&s, &rhs)?;
    Ok(finish_solution(a, &s, c, &rhs, lam))
}

fn spd_inverse(m: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(m)?;
    let cutoff = default_tol(m.rows()) * eig.max_value().max(1.0);
    if eig.min_value() <= cutoff {
        return Err(Error::Singular);
    }
    Ok(eig.apply_spectral(|l| 1.0 / l))
}

/// Harmonic mean `2(A⁻¹+B⁻¹)⁻¹` of two positive definite operators; on
/// the definite cone this equals the parallel sum and serves as an
/// independent oracle for it.
pub fn harmonic_mean_coeffs(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    assert_eq!(a.rows(), b.rows(), "harmonic mean dimension mismatch");
    let sum_inv = spd_inverse(a)?.add(&spd_inverse(b)?);
    Ok(spd_inverse(&sum_inv)?.scaled(2.0))
}

/// Operator-level wrapper of [`harmonic_mean_coeffs`].
pub fn harmonic_mean_invertible(a: &SymOperator, b: &SymOperator) -> Result<SymOperator> {
    assert_eq!(a.mat_order(), b.mat_order(), "operator order mismatch");
    Ok(SymOperator::from_coeffs(
        a.mat_order(),
        harmonic_mean_coeffs(a.coeffs(), b.coeffs())?,
    ))
}

/// Congruence `M A Mᵀ` by an invertible coordinate map. Parallel sums are
/// congruence-covariant: `M !(A,B) Mᵀ = !(MAMᵀ, MBMᵀ)`.
pub fn congruence_transform(a: &SymOperator, m: &Matrix) -> Result<SymOperator> {
    assert_eq!(m.rows(), m.cols(), "congruence map must be square");
    assert_eq!(m.rows(), a.coord_dim(), "congruence map dimension mismatch");
    if kernel_basis(m)?.cols() > 0 {
        return Err(Error::Singular);
    }
    Ok(SymOperator::from_coeffs(
        a.mat_order(),
        m.mul(a.coeffs()).mul(&m.transpose()),
    ))
}

fn range_cutoff(eig: &crate::symspace::EigenDecomposition, dim: usize) -> f64 {
    64.0 * dim as f64 * f64::EPSILON * eig.max_value().max(0.0)
}

/// Orthogonal projector `P = LL⁺` onto the range of `L`.
///
/// Rank-deficient `L` is handled through the pseudo-inverse; the result
/// is idempotent and self-adjoint with `Range P = Range L`.
pub fn projector_of_map(l: &Matrix) -> Result<Matrix> {
    let gram = l.mul(&l.transpose());
    let eig = sym_eigen(&gram)?;
    let cutoff = range_cutoff(&eig, gram.rows());
    Ok(eig.apply_spectral(|lam| if lam > cutoff { 1.0 } else { 0.0 }))
}

/// Quasi-projector `LLᵀ`: PSD with the same range and kernel as `LL⁺`,
/// but no inverse anywhere in its construction.
pub fn quasi_projector_of_map(l: &Matrix) -> Matrix {
    l.mul(&l.transpose())
}

fn check_projector(p: &Matrix) -> Result<()> {
    let sym_defect = p.sub(&p.transpose()).max_abs();
    let idem_defect = p.mul(p).sub(p).max_abs();
    let defect = sym_defect.max(idem_defect);
    if defect > 1e-10 * (1.0 + p.max_abs()) {
        return Err(Error::NotAProjector { defect });
    }
    Ok(())
}

/// Orthogonal projector onto `Range P ∩ Range Q`, computed as the
/// parallel sum `!(P,Q) = 2P(P+Q)⁺Q` of the two projectors.
pub fn intersection_projector(p: &Matrix, q: &Matrix) -> Result<Matrix> {
    check_projector(p)?;
    check_projector(q)?;
    parallel_sum_coeffs(p, q)
}

/// Orthonormal basis of `Range P ∩ Range Q` by a null-space method: the
/// kernel of the stacked map `[I−P; I−Q]`. Independent of the parallel
/// sum formula, so it serves as a rank/range oracle for
/// [`intersection_projector`].
pub fn subspace_intersection_basis(p: &Matrix, q: &Matrix) -> Result<Matrix> {
    check_projector(p)?;
    check_projector(q)?;
    let n = p.rows();
    let i = Matrix::identity(n);
    let stacked = i.sub(p).vstack(&i.sub(q));
    // projectors have unit norm scale; a stacked difference that is zero
    // up to rounding must yield the full space
    kernel_basis_scaled(&stacked, 1.0)
}
