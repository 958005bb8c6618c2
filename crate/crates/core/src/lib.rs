//! Four-qubit maximum-hyperdeterminant states.
//!
//! The crate bundles everything needed to generate four-qubit states that
//! maximize the absolute value of the Cayley hyperdeterminant `Δ4` with a
//! CNOT circuit acting on a fully factorized state:
//!
//! - [`qstate`]: a dense 4-qubit statevector with index-arithmetic gate
//!   application, parametrized product states and local operators.
//! - [`dense`]: a slow 16×16 matrix path built from Kronecker products, used
//!   as an independent reference.
//! - [`f2linear`]: GF(2) matrices, the group GL(4, F2) (isomorphic to the
//!   CNOT group) and its 840 right cosets modulo qubit permutations.
//! - [`pauli`]: the Pauli group in normal form `i^λ X_u Z_v` and its
//!   conjugation by CNOT circuits.
//! - [`hyperdet`]: `Δ4` through Schläfli's construction.
//! - [`search`]: coset screening and random-walk maximization.
//! - [`catalog`]: every named state, parameter matrix and identity, with a
//!   one-call verification report.
//! - [`circuit`]: circuit IR, simulation, coupling-graph routing and
//!   OpenQASM 2.0 text.
//!
//! Bit order is fixed throughout: basis label `i0 i1 i2 i3` lives at index
//! `8*i0 + 4*i1 + 2*i2 + i3`, so qubit 0 is the most significant bit and
//! Kronecker products read left to right as qubits 0..3.

pub mod catalog;
pub mod circuit;
pub mod dense;
pub mod error;
pub mod f2linear;
pub mod hyperdet;
pub mod pauli;
pub mod qstate;
pub mod search;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
