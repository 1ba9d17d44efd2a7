//! Sampling kernels for Hamiltonian Monte Carlo, random-walk Metropolis and
//! preconditioned Crank–Nicolson, together with their auto-encoded variants
//! that simulate dynamics in a learned low-dimensional latent space and map
//! proposals back to the ambient space for the accept/reject step.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, timing and the
//! experiment runner live in the `latentmc` crate.

#![no_std]

#[macro_use]
extern crate alloc;

pub mod autoencoder;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod samplers;
pub mod targets;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
