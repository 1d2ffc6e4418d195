// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Constant-depth matchgate circuits for 1D topological spin chains.
//!
//! The crate compiles the exact quench propagator of a Z-coupled,
//! X-field spin chain into a fixed-depth brickwork of two-qubit
//! matchgates (one circuit per elapsed time), executes the circuits on
//! an ideal or noisy statevector simulator, and checks the resulting
//! edge-mode signatures against exact diagonalization and the
//! free-fermion (BdG) picture.
//!
//! Conventions shared by every module:
//!
//! - qubits are numbered from 1 in user-facing text and from 0 in code;
//!   qubit `q` is bit `q` of a computational-basis index, so qubit 1 is
//!   the least-significant bit and the right-most character of an outcome
//!   string such as `"00001"`;
//! - time is in units of `1/h_x`, frequency in units of `h_x`;
//! - `RZ(θ) = exp(-iθZ/2)` and `RX(θ) = exp(-iθX/2)`.

pub mod analysis;
pub mod basis;
pub mod circuit;
pub mod circuitsim;
pub mod compiler;
pub mod error;
pub mod exact;
pub mod freefermion;
pub mod linalg;
pub mod matchgate;
pub mod model;
pub mod optimize;
pub mod parallel;
pub mod qasm;
pub mod trace;
pub mod trotter;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use parallel::Execution;

/// Crate version, echoed into every output manifest.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
