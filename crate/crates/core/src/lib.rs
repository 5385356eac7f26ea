//! Dark-soliton profiles of the defocusing cubic and cubic-quintic nonlinear
//! Schrödinger equation with a periodic, inhomogeneous coefficient.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`periodic_orbit`] computes the positive periodic background `φ₊` of the
//!    stationary equation, bracketed between constant lower and upper solutions.
//! 2. [`reduction`] substitutes `w = φ/φ₊`, which turns the stationary equation
//!    into a weighted Allen–Cahn equation with a nonsingular weight `φ₊²`.
//! 3. [`heteroclinic`] minimizes the reduced energy on a truncated line with
//!    `w(∓L) = ∓1`, producing the kink `w` and hence `φ = φ₊ w`.
//! 4. [`verify`] checks amplitude, monotonicity, residuals and exponential tails;
//!    [`evolve`] integrates the time-dependent equation as a dynamical check.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` rejects NaN as well; banded kernels index several arrays at once
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod evolve;
pub mod heteroclinic;
pub mod linalg;
pub(crate) mod math;
pub mod model;
pub mod periodic_orbit;
pub mod pipeline;
pub mod reduction;
pub mod verify;

pub use error::{Error, ErrorClass, Result};
pub use model::{
    make_uniform_grid, sample_coefficient, validate_problem, CheckedProblem, Coefficient,
    CoefficientRole, CoefficientSpec, Grid, Model, PeriodicProfile, Problem, Profile,
};
