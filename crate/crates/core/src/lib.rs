//! Spectral variance analysis for homogeneous Monte Carlo integration.
//!
//! The expected value of a Monte Carlo estimate under a homogeneous sampling
//! pattern is the product of the trivial Fourier coefficients of the integrand
//! and the mean sampler, and the variance is a sum over non-trivial irreducible
//! blocks of integrand power times expected sampler power, divided by the block
//! dimension. This crate evaluates those closed forms on the torus, the
//! 2-sphere and (formally) Euclidean windows, checks the underlying
//! representation-theoretic identities exactly on finite groups, and compares
//! every prediction against brute-force simulation.
//!
//! Module map:
//!
//! * [`repcheck`]: finite groups, unitary representations, Schur averages.
//! * [`spectra`]: block labels, power spectra and the generic predictors.
//! * [`torus`], [`sphere`], [`euclidean`]: per-domain spectral machinery.
//! * [`samplers`]: homogeneous point-pattern generators.
//! * [`harness`]: empirical estimation and prediction-vs-simulation reports.
//! * [`cli`]: the `spectral-variance` command-line front end.

pub mod cli;
pub mod config;
pub mod error;
pub mod euclidean;
pub mod harness;
pub mod integrand;
pub mod io;
pub mod repcheck;
pub mod rng;
pub mod samplers;
pub mod spectra;
pub mod sphere;
pub mod stats;
pub mod torus;

pub use error::{Error, Result};
pub use num_complex::Complex64;
