//! Simulation and cross-validation of protected quantum measurements.
//!
//! The crate is organised around the two protection schemes and their
//! epistemic toy models:
//!
//! * [`qcore`]: finite-dimensional states, observables, bases and channels.
//! * [`zeno`]: measurement by repeated projective protection, with an exact
//!   POVM, a sampler and a brute-force joint-evolution oracle.
//! * [`hamgauss`]: closed-form Heisenberg evolution of a protected displaced
//!   oscillator coupled to a pointer, with an ODE oracle.
//! * [`tomography`]: recovering the protection channel or Hamiltonian from
//!   black-box access and reading off the protected state.
//! * [`toybit`]: the four-state ball-in-box model of Zeno protection.
//! * [`epigauss`]: the Gaussian phase-space model of Hamiltonian protection.
//!
//! Numerical helpers shared across modules live in [`numerics`] and
//! [`stats`]; deterministic seeding lives in [`seeding`].

// `!(x > 0.0)` is used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod epigauss;
pub mod error;
pub mod hamgauss;
pub mod numerics;
pub mod qcore;
pub mod seeding;
pub mod stats;
pub mod tomography;
pub mod toybit;
pub mod zeno;

pub use error::{Error, Result};
