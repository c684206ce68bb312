//! Exact finite-dimensional Koopman models of block-oriented nonlinear systems.
//!
//! A nonlinear system given as a chain of LTI dynamic blocks and static
//! polynomial blocks (in series and in parallel, no feedback) admits an exact
//! lifted model whose state and output matrices are constant and whose input
//! influence is linear in the lifted state and polynomial in the input.
//! If no LTI block has feedthrough and the chain does not begin with a static
//! nonlinearity, the lifted model is bilinear.
//!
//! The crate provides:
//!
//! * [`model`] — the block-chain description: parsing, validation, and
//!   evaluation of decoupled polynomial blocks;
//! * [`kron`] — Kronecker-power calculus (powers, Jacobians, lifted operators);
//! * [`atlas`] — monomial bookkeeping for the lifted state and duplicate-state
//!   reduction;
//! * [`poly`] — sparse multivariate polynomials and the closed-form integral
//!   factorization `f(u) − f(0) = f̃(u)·u`;
//! * [`embed`] — the inductive embedding itself, classification, and reduction;
//! * [`sim`] — fixed-step RK4 co-simulation of the original chain and the
//!   lifted model, with error reporting.

pub mod atlas;
pub mod embed;
pub mod error;
pub mod kron;
pub mod model;
pub mod poly;
pub mod sim;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
