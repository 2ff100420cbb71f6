//! Simulation and pulse design for optical-tweezer-controlled entangling
//! gates on trapped-ion chains.
//!
//! The crate is organised by capability:
//!
//! - [`chain`]: equilibrium positions, the tweezer-modified secular matrix,
//!   axial mode spectra, Lamb-Dicke parameters and the control-conditional
//!   mode spectrum.
//! - [`ms`]: Mølmer-Sørensen dynamics for single- and multi-tone drives,
//!   including a truncated-Fock-space reference integrator, parity fringes,
//!   state fidelities and detuning fits.
//! - [`synth`]: multi-tone drive synthesis for n-controlled MS gates.
//! - [`noise`]: Monte-Carlo fidelity under drive, trap and tweezer noise, and
//!   dynamical decoupling of the control qubit.
//! - [`cli`]: configuration ingestion, experiment orchestration and
//!   plot-ready output used by the `tweezer-gates` binary.
//!
//! All internal frequencies are angular (rad/s). Configuration files and
//! output tables use ordinary frequencies in Hz.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod cli;
pub mod constants;
pub mod error;
pub mod integrals;
pub mod ms;
pub mod noise;
pub mod quadrature;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
