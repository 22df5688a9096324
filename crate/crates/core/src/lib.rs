//! Quantum relative entropies, monotone metrics and reverse tests.
//!
//! The crate computes the Umegaki relative entropy, the RLD divergence
//! `tr rho ln(sqrt(rho) sigma^-1 sqrt(rho))`, max-relative entropy and the
//! fidelity log-divergence; SLD, RLD and Petz monotone metrics with their
//! integral divergences along the mixture path; the optimal reverse test
//! achieving the RLD divergence; and finite-n Neyman–Pearson, smoothing and
//! state-conversion constructions.
//!
//! All routines work on small dense matrices (dimension up to a few thousand)
//! and are pure functions of their inputs.

pub mod asymptotics;
pub mod divergences;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod objects;
pub mod quadrature;
pub mod random;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, ComplexMatrix, EigenSystem, HermitianMatrix, C64};
pub use objects::{
    ClassicalDistribution, DensityMatrix, DimCap, Measurement, Preparation, QuantumChannel, TangentDirection,
};
