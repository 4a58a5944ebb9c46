//! Regularized zero-point mode sums, heat-kernel asymptotics and finiteness
//! certificates for Casimir energy differences.
//!
//! Natural units are used throughout: frequencies and energies share units of
//! inverse length, and a Casimir energy is half of a regularized mode sum.

pub mod asymptotics;
pub mod certifier;
pub mod cutoffs;
pub mod error;
pub mod heat_kernel;
pub mod io;
pub mod lsq;
pub mod quadrature;
pub mod reference_models;
pub mod regularization;
pub mod special;
pub mod spectra;
pub mod tridiag;

pub use error::{Error, ErrorClass, Result};
