//! Numerical core for a heat equation driven by a pointwise play operator.
//!
//! The crate is `no_std` (with `alloc`) and covers:
//!
//! * the scalar play operator, its directional (Bouligand) derivative and an
//!   active-branch Newton derivative ([`hysteresis`]),
//! * the space-indexed lift of those operators to space-time fields ([`field`]),
//! * a backward-Euler finite-difference solver for the state, first-order and
//!   generic inhomogeneous problems ([`solver`], [`tridiag`]),
//! * discrete Bochner norms ([`norms`]),
//! * the verification harness: remainder studies, a priori estimates, maximum
//!   principle and a semismooth Newton solver for `S(u) = y_target`
//!   ([`verification`]).
//!
//! IO, configuration and the command line live in the companion `hystherm`
//! crate.
#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod field;
pub mod grid;
pub mod hysteresis;
pub mod norms;
pub mod presets;
pub mod solver;
pub mod tridiag;
pub mod verification;

pub use error::{Error, Result};
pub use field::{apply_w, apply_w_bouligand, apply_w_newton};
pub use grid::{Boundary, BoundarySpec, SpaceTimeField, SpatialMesh, TimeGrid};
pub use hysteresis::{PlayConfig, PlayState, ScalarSignal};
pub use norms::{NormKind, NormSpec};
pub use solver::{DerivativeMode, Forcing, HeatOperator, Problem, SolverParams};
