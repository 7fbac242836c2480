//! Spectra of magnetic Laplacians and Berezin-Toeplitz operators with
//! potential wells.
//!
//! The library has three layers:
//!
//! * an exact layer on Bargmann-Fock space ([`fock`], [`modelwell`]): weighted
//!   monomial bases, the Gaussian model projection kernel, ladder operators,
//!   anti-Wick operators and their Weyl form, and closed-form spectra of
//!   quadratic-well model operators;
//! * a discrete layer on the flat unit 2-torus ([`symbols`], [`torus`],
//!   [`toeplitz`]): magnetic fields of integer flux, link-phase covariant
//!   finite differences for the Bochner Laplacian, spectral-gap detection of
//!   the low cluster, Toeplitz compressions, localization and kernel-decay
//!   diagnostics;
//! * a verification layer ([`asymptotics`]): (p, grid) sweeps with
//!   Richardson control of discretization error, power-law fits of spectral
//!   residuals, and named pass/fail verdicts.
//!
//! The companion `toeplitz-wells-cli` crate drives these layers from JSON
//! experiment configs and emits structured reports and CSV tables.

pub mod asymptotics;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod modelwell;
pub mod quad;
pub mod symbols;
pub mod toeplitz;
pub mod torus;

pub use error::{Error, Result};
