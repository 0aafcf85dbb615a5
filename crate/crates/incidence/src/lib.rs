//! Exact-arithmetic library for group gradings on finite-dimensional
//! incidence algebras: grading verification, the canonical triangular form
//! (group-algebra diagonal blocks with character-decomposed bimodules),
//! graded-isomorphism decision, and two-block realization, with brute-force
//! oracles at desk scale.

pub mod algebra;
pub mod bimodule;
pub mod canonical;
pub mod format;
pub mod groups;
pub mod isoclass;
pub mod linalg;
pub mod poset;
pub mod scalars;

pub use scalars::{CyclotomicScalar, Rational, RootScalar, Scalar};
