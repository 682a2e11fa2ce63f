//! Classical emulator of quantum Car-Parrinello molecular dynamics.
//!
//! Nuclei and variational-ansatz angles evolve together under Langevin
//! equations whose noise is the shot noise of sampled Pauli expectation
//! values; the friction is fixed by the fluctuation-dissipation relation so
//! that the stationary distribution is Boltzmann at the requested
//! temperature. A VQE-driven MD baseline and a covariance-based vibrational
//! frequency analysis are included.
//!
//! Module map:
//!
//! * [`operator`] - Pauli strings, qubit operators, dense FCI reference.
//! * [`qsim`] - statevector simulation of the particle-conserving ansatz
//!   and shot sampling.
//! * [`chem`] - STO-3G integrals, RHF, Jordan-Wigner qubit Hamiltonians.
//! * [`estimator`] - sampled energy/force estimators and resource ledger.
//! * [`dynamics`] - QCPMD and VQE-MD integrators, FDT thermostat.
//! * [`analysis`] - trajectory statistics and frequency analysis.
//! * [`cli`] - run orchestration behind the `qcpmd` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod chem;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod estimator;
pub mod operator;
pub mod optimize;
pub mod qsim;
pub mod rng;
pub mod units;

pub use error::{Error, Result};
