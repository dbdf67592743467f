//! Bounded equivariant set maps over `Z^d` and their thermodynamic formalism.
//!
//! The crate is organised around five layers:
//!
//! * [`group`]: the groups `Z^d`, finite subsets, invariance defects, Følner
//!   schedules and single-schedule limit estimates.
//! * [`representation`]: uniformly bounded representations (matrix and
//!   Koopman), ergodic sums and averages, coboundary spaces and quotient
//!   semi-norms.
//! * [`subshift`]: finite-alphabet subshifts of finite type over `Z` and `Z^2`,
//!   pattern enumeration, cylinder suprema and locally constant potentials.
//! * [`setmaps`]: equivariant set maps, asymptotic additivity, additive
//!   realization (absolute and relative to a target set) and stitched limits.
//! * [`thermo`]: partition functions, pressure, entropy of Markov measures,
//!   equilibrium states and variational certificates.
//!
//! [`config`] holds the JSON schemas shared with the command-line front end.

// NaN must fail validation, hence `!(x > 0.0)`; index loops mirror the matrix formulas
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod group;
pub mod linalg;
pub mod par;
pub mod representation;
pub mod setmaps;
pub mod subshift;
pub mod thermo;

pub use error::{Error, Result};
