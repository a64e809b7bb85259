//! Exact-arithmetic laboratory for sum-of-squares (SoS) certificates.
//!
//! Everything here computes over arbitrary-precision rationals; no floating
//! point touches any verification path. The crate provides:
//!
//! - sparse multivariate polynomial arithmetic ([`poly`]),
//! - a registry of Boolean/sphere constraint systems with exact solution
//!   enumeration ([`systems`]),
//! - exact moment matrices, kernels, and spectral lower bounds ([`moment`]),
//! - richness audits (spectral, completeness, robustness) with constructive
//!   derivations ([`richness`]),
//! - Gram-form SoS certificates with exact LDL^T verification
//!   ([`certificate`]),
//! - certificate rewriting onto the moment-kernel complement with bounded
//!   coefficients ([`rewrite`]),
//! - the chain-system family with doubly-exponential certificates, dual
//!   pseudo-expectations, and coefficient lower bounds ([`counterexample`]).
//!
//! Data-parallel loops (moment assembly, Gram PSD checks, per-vector
//! derivation solves) run on a work-stealing pool when the default
//! `parallel` feature is enabled and degrade to plain iteration without it;
//! results are identical either way.

pub mod certificate;
pub mod charpoly;
pub mod counterexample;
pub mod error;
pub mod matrix;
pub mod par;
pub mod moment;
pub mod poly;
pub mod rewrite;
pub mod richness;
pub mod systems;
pub mod ratio;

pub use error::{Error, Result};
