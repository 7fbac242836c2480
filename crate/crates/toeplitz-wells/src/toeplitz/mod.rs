//! Toeplitz operators on the low Landau cluster: compression of symbols,
//! algebra defects, well spectra, and localization diagnostics.

pub mod kernel;
pub mod localization;
pub mod matrix;

pub use kernel::{kernel_trace, kernel_value, offdiag_decay, standard_probe_pairs, DecayFit, KernelOperand};
pub use localization::{
    degenerate_well_report, distance_to_sublevel, distance_to_zero_set, localization_report,
    DegenerateReport, LocalizationParams, LocalizationReport,
};
pub use matrix::{
    product_defect, toeplitz_low_spectrum, toeplitz_matrix, toeplitz_matrix_from_samples,
    ProductDefect, ToeplitzEigs, ToeplitzMatrix,
};
