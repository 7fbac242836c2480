//! Convergence studies over the tensor power p.
//!
//! The spectral theorems verified here are asymptotic: low Bochner
//! eigenvalues approach p·b₀ + μ_j and low Toeplitz eigenvalues approach
//! p⁻¹μ_m, each with a p^{-1/2}-type remainder. A sweep turns that into
//! finite evidence: certified eigensolves over a p-list at paired grid
//! resolutions, Richardson separation of discretization error, power-law
//! fits of the residuals, and named pass/fail verdicts with explicit
//! thresholds.

pub mod fits;
pub mod sweep;

pub use fits::{
    drift_exponent, fit_against_inverse_sqrt, fit_power_law, richardson_gap, InverseSqrtFit,
    PowerLawFit,
};
pub use sweep::{
    job_seed, magnetic_wells, run_bochner_sweep, run_toeplitz_sweep, symbol_wells, ClusterCount,
    ExcludedJob, GridRule, LevelDrift, LevelFit, SweepLaw, SweepRecord, SweepReport,
    SweepThresholds, Verdict,
};
