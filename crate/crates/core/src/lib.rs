//! Iso-spectral matrix flows that preserve sparsity patterns.
//!
//! The crate provides the building blocks for gradient-like flows on the
//! space of real symmetric matrices:
//!
//! * [`symspace`] — symmetric-matrix algebra: sparsity patterns, the
//!   Frobenius inner product, an orthonormal coordinate system for
//!   `Sym(n)`, linear operators on that space, a symmetric
//!   eigendecomposition, and PSD pseudo-inverses.
//! * [`parsum`] — parallel sums (quasi-projections) of positive
//!   semi-definite operators and the projector calculus built on them.
//! * [`flows`] — the sparsity-preserving iso-spectral gradient flow, the
//!   double-bracket flow, the Toda flow, and their equilibrium and
//!   counterexample constructions.
//! * [`integrate`] — an embedded Dormand–Prince 5(4) integrator with
//!   adaptive step control and trajectory monitors.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the
//! default `std` feature for embedded use.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod flows;
pub mod integrate;
pub mod matrix;
pub mod parsum;
pub mod symspace;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use symspace::{
    commutator, frobenius_inner, sym_eigen, EigenDecomposition, SparsityPattern, SymMatrix,
    SymOperator,
};
