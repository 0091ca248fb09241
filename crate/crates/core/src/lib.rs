//! Exact arithmetic, stopping-time cuts and hierarchical mass decomposition
//! for dust-like self-similar sets, together with a constructive Lipschitz
//! surjection between commensurable systems of equal dimension and
//! finite-depth verifiers for its structural invariants.

pub mod algebra;
pub mod cli;
pub mod equivalence;
pub mod error;
pub mod ifs;
pub mod massdecomp;
pub mod surjection;

pub use error::{Error, Result};
