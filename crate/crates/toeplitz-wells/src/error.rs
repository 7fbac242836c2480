//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any layer of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A requested monomial lies outside the active truncation.
    #[error("multi-index {index:?} has total degree {degree}, beyond truncation N = {max_degree}")]
    OutOfTruncation {
        index: Vec<u32>,
        degree: u32,
        max_degree: u32,
    },

    /// The grid violates the resolution rule (spacing must be at most 1/8 of
    /// the magnetic length).
    #[error("grid too coarse: grid_n = {grid_n}, resolution rule requires grid_n >= {required}")]
    GridTooCoarse { grid_n: usize, required: usize },

    /// A field that must be positive vanishes or goes negative somewhere.
    #[error("field not positive: b = {value:.6e} at grid point ({i}, {j}) = ({x:.6}, {y:.6})")]
    NonPositiveField {
        i: usize,
        j: usize,
        x: f64,
        y: f64,
        value: f64,
    },

    /// Basis growth hit its cap before the spectrum settled.
    #[error(
        "truncation did not converge: lowest {levels} levels still moved {last_shift:.3e} at N = {n_cap}"
    )]
    TruncationNotConverged {
        levels: usize,
        n_cap: u32,
        last_shift: f64,
    },

    /// Iterative eigensolver failed; carries the best residuals reached.
    #[error("eigensolver did not converge: {message}; best residuals {residuals:?}")]
    EigensolverFailed {
        message: String,
        residuals: Vec<f64>,
    },

    /// Dense linear algebra backend failure.
    #[error("dense linear algebra failed: {0}")]
    Dense(String),

    /// Doubling the quadrature nodes moved the result beyond tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),

    /// No spectral gap separating the low cluster could be located.
    #[error("no spectral gap found: {0}")]
    NoGap(String),

    /// Mismatched grid shapes between a basis and a symbol or vector.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Power-law fit could not be performed.
    #[error("fit failed: {0}")]
    FitFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
