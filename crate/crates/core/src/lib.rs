//! Discrete-time symplectic maps with a two-photon Lie-Poisson coalgebra
//! symmetry.
//!
//! The crate provides the exact bracket algebra of the six-generator
//! two-photon algebra, its canonical realization on N degrees of freedom,
//! the discrete map induced by a classified family of potentials, a catalog
//! of conserved quantities with rank and involution verification, the
//! classification machinery (determinant lemma, coefficient-matrix rank,
//! functional-equation residuals, closure probe, invariant search) and a
//! continuum-limit harness.

pub mod algebra;
pub mod classify;
pub mod cli;
pub mod config;
pub mod continuum;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod invariants;
pub mod poly;
pub mod potential;

pub use error::Error;

pub use cli::run;
