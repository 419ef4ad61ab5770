//! Spectral regularization toolkit for linear discrete ill-posed least-squares
//! problems.
//!
//! The crate factors a problem `min ||Ax - b||` through the SVD of `A` and
//! solves it with filter methods that differ only in how they modify the
//! squared singular values: classical Tikhonov (`mu^2 I`), truncated SVD, and
//! a family of closest-matrix regularization operators that shift, cut, or
//! scale the spectrum. On top of the solvers sit parameter-selection rules
//! (discrepancy principle, oracle-optimal search), diagnostic checks for the
//! theory the methods come from, and a seeded Monte-Carlo benchmark harness
//! that reproduces the usual comparison tables.
//!
//! Modules, bottom up:
//!
//! * [`linalg`]: dense matrices, SVD with a full orthogonal `U`, orthogonal
//!   constructions, and a normal-equations oracle solver used for testing.
//! * [`problems`]: classical test problems (`phillips`, `shaw`, `deriv2`,
//!   `heat`) discretized to matrix form with known exact solutions.
//! * [`noise`]: seeded white and colored noise at an exact relative level.
//! * [`filters`]: the regularization methods as diagonal modifications of the
//!   squared spectrum, spectral solves, and filter factors.
//! * [`select`]: discrepancy-principle parameter selection and oracle-optimal
//!   parameter search.
//! * [`analysis`]: condition numbers, operator norms, and numerical checks of
//!   the comparison propositions relating the methods.
//! * [`bench`]: the Monte-Carlo experiment harness and report emitters.

pub mod analysis;
pub mod bench;
pub mod error;
pub mod filters;
pub mod linalg;
pub mod noise;
pub mod problems;
pub mod select;

pub use error::{Error, Result};
