//! Quantum stochastic toolkit with a Horn-clause front end.
//!
//! The crate is organized in layers. [`linalg`] provides the dense complex
//! matrix substrate. On top of it sit [`qprob`] (projection lattices, Gleason
//! probabilities, conditional expectation, and the probe-observable protocol),
//! [`qwalk`] (discrete-time quantum stochastic flows and the Hadamard walk),
//! [`fockweyl`] (exponential vectors, Weyl operators, and gauge /
//! annihilation / creation matrix elements over a Poisson Fock space),
//! [`slh`] (circuit algebra for cascaded open networks), and [`dynamics`]
//! (Lindblad integration with concurrence readout). The [`horn`] module
//! implements the decorated Horn-clause language whose builtins delegate to
//! the numeric layers, and [`cli`] exposes everything as a batch command-line
//! tool.
//!
//! Run `cargo run --example <name>` for a tour; each major capability has a
//! runnable example under `examples/`.

pub mod cli;
pub mod dynamics;
pub mod fockweyl;
pub mod horn;
pub mod linalg;
pub mod qprob;
pub mod qwalk;
pub mod selftest;
pub mod slh;

pub use linalg::{ComplexMatrix, ComplexVector, C64};
