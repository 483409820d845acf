//! Iso-spectral vector fields on symmetric matrices.
//!
//! Three flows are provided, all driving `X` toward a matrix commuting
//! with a target `D` while preserving the spectrum of the initial value:
//!
//! * the **zero flow** `X' = 2m(A.X + m)⁺ A.X (D−X)`, the
//!   quasi-projected gradient flow of `f(X) = ½‖X−D‖²` that additionally
//!   preserves a sparsity pattern `Δ` (here `A.X : Y ↦ [[Y,X],X]` and `m`
//!   is the orthogonal projector onto `Sym(Δ)`);
//! * the **double-bracket flow** `X' = [[D,X],X]`;
//! * the **Toda flow** `X' = [X, X_l − X_lᵀ]` with `X_l` the strictly
//!   lower triangle.
//!
//! Sign conventions: `[X,Y] = XY − YX` throughout. With these
//! conventions and `D = diag(1,…,n)`, the double-bracket field on
//! tridiagonal matrices is the *negative* of the Toda field, since
//! `[D,X] = X_l − X_lᵀ` there while `h(X) = [[D,X],X] = −[X, [D,X]]`.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{solve_consistent, Matrix};
use crate::symspace::{
    commutator, double_bracket_operator, psd_pseudo_inverse_matrix, sym_eigen, SparsityPattern,
    SymMatrix, SymOperator,
};

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Which vector field drives a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    Zero,
    DoubleBracket,
    Toda,
}

/// One field evaluation: the derivative and whether the zero-flow
/// operator `A.X + m` was numerically singular (its pseudo-inverse then
/// truncated at least one eigenvalue).
#[derive(Debug, Clone)]
pub struct FieldEval {
    pub derivative: SymMatrix,
    pub singular: bool,
}

impl FieldEval {
    /// Wraps a field value that has no singularity diagnostics.
    pub fn smooth(derivative: SymMatrix) -> Self {
        FieldEval {
            derivative,
            singular: false,
        }
    }
}

/// Objective `f(X) = ½⟨X−D, X−D⟩`; its gradient is `X − D`.
pub fn objective_f(x: &SymMatrix, d: &SymMatrix) -> Result<f64> {
    if x.order() != d.order() {
        return Err(Error::DimensionMismatch {
            left: x.order(),
            right: d.order(),
        });
    }
    Ok(0.5 * (x - d).frob_norm_sq())
}

/// Reusable evaluator for the zero flow with a fixed target and pattern.
#[derive(Debug, Clone)]
pub struct ZeroFlow {
    d: SymMatrix,
    mask: Vec<f64>,
    rank_tol: f64,
}

impl ZeroFlow {
    pub fn new(d: &SymMatrix, pattern: &SparsityPattern, rank_tol: Option<f64>) -> Result<Self> {
        if d.order() != pattern.order() {
            return Err(Error::DimensionMismatch {
                left: d.order(),
                right: pattern.order(),
            });
        }
        let coord_dim = pattern.svec_mask().len();
        Ok(ZeroFlow {
            d: d.clone(),
            mask: pattern.svec_mask(),
            rank_tol: rank_tol.unwrap_or(coord_dim as f64 * f64::EPSILON),
        })
    }

    /// Evaluates `g(X) = 2m(A.X + m)⁺ A.X (D−X)`.
    ///
    /// The pseudo-inverse makes the field well defined even where
    /// `A.X + m` is singular; such evaluations are flagged rather than
    /// failed. Off-pattern entries of the result are exactly zero because
    /// `m` is applied last as a hard 0/1 mask in coordinate space.
    pub fn eval(&self, x: &SymMatrix) -> Result<FieldEval> {
        assert_eq!(x.order(), self.d.order(), "state order mismatch");
        let a = double_bracket_operator(x);
        let rhs = (&self.d - x).svec();
        let a_rhs = a.coeffs().matvec(&rhs);

        let mut s = a.coeffs().clone();
        for (i, &m) in self.mask.iter().enumerate() {
            s[(i, i)] += m;
        }
        let eig = sym_eigen(&s)?;
        let cutoff = self.rank_tol * eig.max_value().max(1.0);
        let singular = eig.min_value() <= cutoff;
        let mut y = eig.apply_spectral_to(|l| if l > cutoff { 1.0 / l } else { 0.0 }, &a_rhs);
        for (yi, &m) in y.iter_mut().zip(&self.mask) {
            *yi *= 2.0 * m;
        }
        Ok(FieldEval {
            derivative: SymMatrix::from_svec(&y)?,
            singular,
        })
    }
}

/// One-shot evaluation of the zero flow field; see [`ZeroFlow`].
pub fn zero_flow_field(
    x: &SymMatrix,
    d: &SymMatrix,
    pattern: &SparsityPattern,
    rank_tol: Option<f64>,
) -> Result<FieldEval> {
    debug_assert!(pattern.supports(x), "state must lie in Sym(Δ)");
    ZeroFlow::new(d, pattern, rank_tol)?.eval(x)
}

/// The same field obtained from the differential–algebraic form: solve
/// `(A.X + m)λ = (m − A.X)(D−X)` by elimination and substitute into
/// `A.X(λ + (D−X))`. Used to cross-check [`zero_flow_field`] — the two
/// routes share no solver.
pub fn zero_flow_field_dae(
    x: &SymMatrix,
    d: &SymMatrix,
    pattern: &SparsityPattern,
) -> Result<SymMatrix> {
    let a = double_bracket_operator(x);
    let mask = pattern.svec_mask();
    let c = (d - x).svec();
    let a_c = a.coeffs().matvec(&c);
    let rhs: Vec<f64> = c
        .iter()
        .zip(&mask)
        .zip(&a_c)
        .map(|((ci, mi), aci)| mi * ci - aci)
        .collect();
    let mut s = a.coeffs().clone();
    for (i, &m) in mask.iter().enumerate() {
        s[(i, i)] += m;
    }
    let lambda = solve_consistent(&s, &rhs)?;
    let arg: Vec<f64> = lambda.iter().zip(&c).map(|(l, ci)| l + ci).collect();
    SymMatrix::from_svec(&a.coeffs().matvec(&arg))
}

/// Double-bracket field `h(X) = [[D,X],X]`.
pub fn double_bracket_field(x: &SymMatrix, d: &SymMatrix) -> Result<SymMatrix> {
    if x.order() != d.order() {
        return Err(Error::DimensionMismatch {
            left: x.order(),
            right: d.order(),
        });
    }
    let xf = x.to_full();
    let inner = commutator(&d.to_full(), &xf)?;
    Ok(SymMatrix::fold_lower(&commutator(&inner, &xf)?))
}

/// Toda field `X' = [X, X_l − X_lᵀ]`.
pub fn toda_field(x: &SymMatrix) -> SymMatrix {
    let n = x.order();
    let xf = x.to_full();
    let k = Matrix::from_fn(n, n, |i, j| {
        if i > j {
            x.get(i, j)
        } else if i < j {
            -x.get(i, j)
        } else {
            0.0
        }
    });
    SymMatrix::fold_lower(&commutator(&xf, &k).unwrap())
}

/// Fold of a square matrix onto the symmetric part carried by its lower
/// triangle: `σ.X = X_l + X_d + X_lᵀ`, a projection along the strictly
/// upper triangular matrices.
pub fn sigma_project(x: &Matrix) -> SymMatrix {
    assert_eq!(x.rows(), x.cols(), "sigma projection needs a square matrix");
    SymMatrix::fold_lower(x)
}

/// Equilibrium certificate for the zero flow at `E`.
#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    /// `√(commute_norm² + pattern_norm²)` at the optimal multiplier.
    pub residual: f64,
    /// The minimum-norm least-squares multiplier `λ*`.
    pub lambda_star: SymMatrix,
    /// `‖[λ* + D, E]‖_F`.
    pub commute_norm: f64,
    /// `‖m(λ* + E − D)‖_F`.
    pub pattern_norm: f64,
}

/// Coordinates of a skew-symmetric matrix in the orthonormal basis
/// `{(E_ij − E_ji)/√2, i<j}`.
fn skew_coords(k: &Matrix) -> Vec<f64> {
    let n = k.rows();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for d in 1..n {
        for i in 0..n - d {
            out.push(SQRT_2 * k[(i, i + d)]);
        }
    }
    out
}

/// Tests whether `E ∈ Sym(Δ)` is an equilibrium of the zero flow by
/// minimizing `‖[λ+D,E]‖² + ‖m(λ+E−D)‖²` over all symmetric multipliers
/// `λ`. A residual near zero certifies the equilibrium conditions
/// `[λ+D,E] = 0` and `m(λ+E−D) = 0`.
pub fn equilibrium_residual(
    e: &SymMatrix,
    d: &SymMatrix,
    pattern: &SparsityPattern,
) -> Result<EquilibriumReport> {
    let n = e.order();
    if d.order() != n || pattern.order() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: d.order().max(pattern.order()),
        });
    }
    let coord_dim = n * (n + 1) / 2;
    let skew_dim = n * (n - 1) / 2;
    let ef = e.to_full();
    let mask = pattern.svec_mask();

    // columns: λ-basis element ↦ (kvec([B,E]), svec(m B))
    let mut m_ls = Matrix::zeros(skew_dim + coord_dim, coord_dim);
    let mut unit = alloc::vec![0.0; coord_dim];
    for k in 0..coord_dim {
        unit[k] = 1.0;
        let basis = SymMatrix::from_svec(&unit).unwrap();
        unit[k] = 0.0;
        let top = skew_coords(&commutator(&basis.to_full(), &ef)?);
        for (r, &v) in top.iter().enumerate() {
            m_ls[(r, k)] = v;
        }
        m_ls[(skew_dim + k, k)] = mask[k];
    }
    let mut r0 = skew_coords(&commutator(&d.to_full(), &ef)?);
    let e_minus_d = (e - d).svec();
    r0.extend(e_minus_d.iter().zip(&mask).map(|(v, m)| v * m));

    // minimum-norm least squares via the normal equations
    let gram = m_ls.transpose().mul(&m_ls);
    let rhs: Vec<f64> = m_ls.transpose().matvec(&r0).iter().map(|v| -v).collect();
    let pinv = psd_pseudo_inverse_matrix(&gram, gram.rows() as f64 * f64::EPSILON)?;
    let lambda_star = SymMatrix::from_svec(&pinv.matvec(&rhs))?;

    let commute_norm = commutator(&(&lambda_star + d).to_full(), &ef)?.frob_norm();
    let pattern_norm = pattern.project(&(&(&lambda_star + e) - d))?.frob_norm();
    Ok(EquilibriumReport {
        residual: commute_norm.hypot(pattern_norm),
        lambda_star,
        commute_norm,
        pattern_norm,
    })
}

/// The non-diagonal equilibrium family of the zero flow: for nonzero
/// `a`, `b`, `z` with `|a| ≠ |b|`,
///
/// ```text
/// E = [[0,a,0],[a,0,b],[0,b,0]],   D = ½z·diag(E²),   λ = −E + zE² − D
/// ```
///
/// satisfies both equilibrium conditions with a `D` that has distinct
/// diagonal entries, so diagonal matrices are not the only equilibria.
pub fn shader_counterexample(
    a: f64,
    b: f64,
    z: f64,
) -> Result<(SymMatrix, SymMatrix, SymMatrix)> {
    if a == 0.0 || b == 0.0 || z == 0.0 {
        return Err(Error::InvalidParameter("a, b, z must be nonzero"));
    }
    if a.abs() == b.abs() {
        return Err(Error::InvalidParameter(
            "|a| must differ from |b| so that D has distinct entries",
        ));
    }
    let mut e = SymMatrix::zeros(3);
    e.set(0, 1, a);
    e.set(1, 2, b);
    let ef = e.to_full();
    let e2 = ef.mul(&ef);
    let d = SymMatrix::from_diag(&[
        0.5 * z * e2[(0, 0)],
        0.5 * z * e2[(1, 1)],
        0.5 * z * e2[(2, 2)],
    ]);
    let lambda = &(&SymMatrix::symmetrize(&e2).scaled(z) - &e) - &d;
    Ok((e, d, lambda))
}

/// A state where `A.X + m` is singular: the 4×4 circulant `X` with `−2`
/// on the diagonal and `1` on the adjacent diagonals and corners, and the
/// circulant `Y` supported entirely outside `Δ = pattern(X)`. Circulants
/// commute, so `(A.X + m)Y = 0` while `Y ≠ 0`.
pub fn circulant_kernel_witness() -> (SymMatrix, SymMatrix) {
    let n = 4;
    let x = SymMatrix::from_fn(n, |i, j| {
        let d = i - j; // lower triangle: i >= j
        if d == 0 {
            -2.0
        } else if d == 1 || d == n - 1 {
            1.0
        } else {
            0.0
        }
    });
    let y = SymMatrix::from_fn(n, |i, j| if i - j == 2 { 1.0 } else { 0.0 });
    (x, y)
}

/// Smallest eigenvalue of `A.D + m` for a diagonal `D`, and whether the
/// operator is invertible at the default rank threshold. For distinct
/// diagonal entries and any admissible pattern the operator is
/// invertible, which is the generic situation the zero flow relies on.
pub fn genericity_check(d: &SymMatrix, pattern: &SparsityPattern) -> Result<(f64, bool)> {
    if !d.is_diagonal() {
        return Err(Error::InvalidParameter("D must be diagonal"));
    }
    if d.order() != pattern.order() {
        return Err(Error::DimensionMismatch {
            left: d.order(),
            right: pattern.order(),
        });
    }
    let op = double_bracket_operator(d).add(&pattern.operator());
    let eig = op.eigen()?;
    let min_eig = eig.min_value();
    let threshold = op.coord_dim() as f64 * f64::EPSILON * eig.max_value().max(0.0);
    Ok((min_eig, min_eig > threshold))
}

/// A flow problem bundling the field kind, initial value, target, and
/// (for the zero flow) the preserved pattern.
#[derive(Debug, Clone)]
pub struct FlowProblem {
    pub kind: FlowKind,
    pub x0: SymMatrix,
    pub d: SymMatrix,
    pub pattern: SparsityPattern,
}

impl FlowProblem {
    /// When `pattern` is `None` it is derived from the nonzero pattern of
    /// `x0`. For the zero flow, `x0` must lie in `Sym(Δ)` exactly.
    pub fn new(
        kind: FlowKind,
        x0: SymMatrix,
        d: SymMatrix,
        pattern: Option<SparsityPattern>,
    ) -> Result<Self> {
        if x0.order() != d.order() {
            return Err(Error::DimensionMismatch {
                left: x0.order(),
                right: d.order(),
            });
        }
        let pattern = pattern.unwrap_or_else(|| SparsityPattern::from_matrix(&x0));
        if pattern.order() != x0.order() {
            return Err(Error::DimensionMismatch {
                left: pattern.order(),
                right: x0.order(),
            });
        }
        if kind == FlowKind::Zero && !pattern.supports(&x0) {
            return Err(Error::InvalidParameter(
                "zero flow initial value must lie in Sym(Δ)",
            ));
        }
        Ok(FlowProblem {
            kind,
            x0,
            d,
            pattern,
        })
    }

    pub fn evaluator(&self) -> Result<FlowEvaluator> {
        Ok(match self.kind {
            FlowKind::Zero => FlowEvaluator::Zero(ZeroFlow::new(&self.d, &self.pattern, None)?),
            FlowKind::DoubleBracket => FlowEvaluator::DoubleBracket { d: self.d.clone() },
            FlowKind::Toda => FlowEvaluator::Toda,
        })
    }
}

/// Evaluates the field of a [`FlowProblem`].
#[derive(Debug, Clone)]
pub enum FlowEvaluator {
    Zero(ZeroFlow),
    DoubleBracket { d: SymMatrix },
    Toda,
}

impl FlowEvaluator {
    pub fn eval(&self, x: &SymMatrix) -> Result<FieldEval> {
        match self {
            FlowEvaluator::Zero(zf) => zf.eval(x),
            FlowEvaluator::DoubleBracket { d } => {
                Ok(FieldEval::smooth(double_bracket_field(x, d)?))
            }
            FlowEvaluator::Toda => Ok(FieldEval::smooth(toda_field(x))),
        }
    }
}

/// PSD operator `ρ.X = !(A.X, m)` used by the descent property of the
/// zero flow; exposed mainly for tests and diagnostics.
pub fn quasi_projection_operator(
    x: &SymMatrix,
    pattern: &SparsityPattern,
) -> Result<SymOperator> {
    crate::parsum::parallel_sum(&double_bracket_operator(x), &pattern.operator())
}
