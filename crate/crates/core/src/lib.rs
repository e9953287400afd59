//! Bound states of the radial Dirac equation with a vector potential, and
//! numerical checks that each eigenvalue moves in the direction of the
//! potential's parameter derivative.

// `!(x > y)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod grid;
pub mod harness;
pub mod ode;
pub mod oracle;
pub mod potentials;
pub mod solver;

pub use error::{Error, Result};
pub use potentials::{make_homotopy, PotentialFamily, Shape, SignClass};
pub use solver::{solve, BoundState, ChannelSpec, Parity, SolveConfig};
