//! Simulation of qubit measurements under two collapse rules: the standard
//! projective postulate and a unitary symmetry-breaking model in which the
//! measured state is rotated onto a basis ray and can be rotated back.
//!
//! The crate covers
//! - exact 2- and 4-dimensional state algebra ([`qcore`]),
//! - the measurement operators of both models and Born-rule sampling
//!   ([`measurement`]),
//! - seeded Monte Carlo runs of a single-qubit null-result experiment and a
//!   Bell-state reversal experiment ([`experiments`]),
//! - Pauli tomography to decide whether a final ensemble is pure
//!   ([`tomography`]).

pub mod error;
pub mod experiments;
pub mod measurement;
pub mod qcore;
pub mod rng;
pub mod tomography;

pub use error::{Error, Result};
