//! Magnetic Schrödinger operators on the flat unit 2-torus.
//!
//! A positive field b(x)dx₁∧dx₂ with integer flux m defines a line bundle
//! whose p-th power carries the Bochner Laplacian Δ^{L^p}. The submodules
//! build the field from closed-form families, solve for an exact periodic
//! gauge, assemble covariant finite-difference stencils with quantized
//! lattice flux, and extract the low Landau cluster that the Toeplitz layer
//! projects onto.

pub mod cache;
pub mod field;
pub mod gauge;
pub mod laplacian;
pub mod spectrum;
