//! Entanglement of superpositions of bipartite pure states: exact
//! quantities, the bounds relating them, closed-form state families and a
//! seeded numerical search for extremal superpositions.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entanglement;
pub mod error;
pub mod families;
pub mod io;
pub mod rng;
pub mod search;
pub mod simplex;
pub mod state;
pub mod sweep;

pub use entanglement::{binary_entropy, entanglement, gain, ratio, upsilon, BoundReport, CheckKind, ConstraintClass};
pub use error::{Error, Result};
pub use state::{DensityMatrix, StateVector, Superposition, C64};
