//! Expectation-value geometry for finite sets of Hermitian operators.
//!
//! Given operators `S = {O_1, ..., O_n}` acting on an `N`-dimensional Hilbert
//! space, the crate maps out the convex body `E_S` of jointly attainable
//! expectation vectors `(tr(rho O_1), ..., tr(rho O_n))`:
//!
//! * [`boundary`] traces `∂E_S` through ground states of direction operators,
//!   including flat faces coming from degenerate ground spaces.
//! * [`gibbs`] evaluates the generalized Gibbs map `beta -> E(beta)` and its
//!   spectral Jacobian.
//! * [`flow`] inverts that map with a Newton-type flow that classifies a
//!   target as interior, boundary or exterior and builds the realizing state.
//! * [`certificates`] gives independent algebraic checks: the positivity
//!   matrix for full operator bases, uncertainty residuals and purity tests.
//!
//! The `expectation-atlas` binary exposes all of this on the command line.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod certificates;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod gibbs;
pub mod io;
pub mod linalg;

pub use error::{AtlasError, Result};
pub use faer::c64;
