//! Classical simulation of quantum Wasserstein generative adversarial networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`qcore`]: dense complex matrices, density matrices, matrix functions.
//! - [`pauli`]: Pauli strings, observables and rotation gates.
//! - [`circuit`]: parameterized circuits, generator ensembles and layouts.
//! - [`wasserstein`]: the transport semimetric, its dual, and the regularized loss.
//! - [`trainer`]: gradients and the alternating training loop.
//! - [`hamsim`]: Heisenberg Hamiltonians, product formulas and circuit compression.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod hamsim;
pub mod parallel;
pub mod pauli;
pub mod qcore;
pub mod trainer;
pub mod wasserstein;

pub use error::{Error, Result};
