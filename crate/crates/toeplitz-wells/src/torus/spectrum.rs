//! Low spectrum of the lattice Laplacians and identification of the Landau
//! cluster.
//!
//! For flux p·m the lowest p·m eigenvalues form a cluster of width O(1)
//! separated from the rest by a gap that opens linearly in p: the spectrum
//! of the renormalized operator sits in [-C_L, C_L] ∪ [2pμ₀ - C_L, ∞) with
//! μ₀ = min b. `detect_cluster` locates that structure empirically by the
//! largest consecutive gap and cross-checks the count against the
//! Riemann-Roch value d_p = p·m.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{certified_lowest_pairs, EigMode, HermitianOp};
use crate::torus::field::TorusField;
use crate::torus::laplacian::{assemble_laplacian, LandauProblem, OperatorKind, StencilMatrix};

/// Above this grid size the dense path would need multiple gigabytes; the
/// iterative solver takes over.
pub(crate) const DENSE_GRID_CAP: usize = 64;

/// Converged low eigenpairs of a lattice Laplacian.
#[derive(Debug, Clone)]
pub struct LowSpectrum {
    /// Ascending eigenvalues of the requested operator.
    pub eigenvalues: Vec<f64>,
    /// Eigensections normalized under grid quadrature: h²Σ|u|² = 1.
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// Certified ‖Hv - λv‖ per pair, measured in the stencil itself.
    pub residuals: Vec<f64>,
    /// Which operator the values belong to.
    pub kind: OperatorKind,
    pub p: u32,
    pub grid_n: usize,
    /// (C_L estimate, gap edge) once a cluster has been detected.
    pub window: Option<(f64, f64)>,
    /// Low cluster dimension once detected; equals p·m.
    pub d_p: Option<usize>,
}

/// Cluster geometry reported by [`detect_cluster`]. Values are in shifted
/// units: eigenvalues minus p·b₀ for the Bochner operator, raw for the
/// renormalized one, so 0 marks the bottom of the continuum cluster.
#[derive(Debug, Clone, Copy)]
pub struct ClusterInfo {
    /// Number of states below the gap; always p·m on success.
    pub d_p: usize,
    /// Observed half-width of the low cluster.
    pub c_l_estimate: f64,
    /// First eigenvalue above the cluster, shifted.
    pub gap_edge: f64,
}

/// The k lowest eigenpairs of an assembled stencil. Dense mode is refused
/// beyond grid_n = 64. Eigenvectors come back grid-normalized.
pub fn low_spectrum(matrix: &StencilMatrix, k: usize, mode: EigMode, seed: u64) -> Result<LowSpectrum> {
    if mode == EigMode::Dense && matrix.grid_n() > DENSE_GRID_CAP {
        return Err(Error::InvalidArgument(format!(
            "dense mode supports grid_n <= {DENSE_GRID_CAP}, got {}",
            matrix.grid_n()
        )));
    }
    let pairs = certified_lowest_pairs(matrix, k, mode, seed)?;
    let scale = matrix.grid_n() as f64;
    let eigenvectors = pairs
        .vectors
        .into_iter()
        .map(|v| v.into_iter().map(|c| c * scale).collect())
        .collect();
    Ok(LowSpectrum {
        eigenvalues: pairs.values,
        eigenvectors,
        residuals: pairs.residuals,
        kind: matrix.kind(),
        p: matrix.p(),
        grid_n: matrix.grid_n(),
        window: None,
        d_p: None,
    })
}

/// Locates the Landau cluster by the largest consecutive gap and validates
/// it: the gap must reach p·μ₀, dominate the cluster width, and enclose
/// exactly p·m states. Fills `window` and `d_p` on success.
pub fn detect_cluster(spec: &mut LowSpectrum, field: &TorusField) -> Result<ClusterInfo> {
    let d_target = (spec.p as usize) * (field.m() as usize);
    let k = spec.eigenvalues.len();
    if k < d_target + 1 {
        return Err(Error::NoGap(format!(
            "only {k} eigenvalues computed; need at least p·m + 1 = {} to see past the cluster",
            d_target + 1
        )));
    }
    let b0 = field.min_value();
    let shift = match spec.kind {
        OperatorKind::Bochner => spec.p as f64 * b0,
        OperatorKind::Renormalized => 0.0,
    };
    let w: Vec<f64> = spec.eigenvalues.iter().map(|v| v - shift).collect();

    let mut split = 0;
    let mut gap = f64::NEG_INFINITY;
    for i in 0..k - 1 {
        let d = w[i + 1] - w[i];
        if d > gap {
            gap = d;
            split = i;
        }
    }
    let mu0 = b0;
    if gap < spec.p as f64 * mu0 {
        return Err(Error::NoGap(format!(
            "largest gap {gap:.4e} is below p·μ₀ = {:.4e}; grid too coarse or p too small",
            spec.p as f64 * mu0
        )));
    }
    let width = w[split] - w[0];
    if width >= gap {
        return Err(Error::NoGap(format!(
            "candidate cluster width {width:.4e} is not dominated by the gap {gap:.4e}"
        )));
    }
    let d_p = split + 1;
    if d_p != d_target {
        return Err(Error::NoGap(format!(
            "low cluster holds {d_p} states but Riemann-Roch predicts p·m = {d_target}"
        )));
    }
    let info = ClusterInfo { d_p, c_l_estimate: width / 2.0, gap_edge: w[split + 1] };
    spec.window = Some((info.c_l_estimate, info.gap_edge));
    spec.d_p = Some(info.d_p);
    Ok(info)
}

/// The lowest `j_max` eigenvalues of the Bochner Laplacian, after the low
/// cluster has been detected and validated.
pub fn bochner_low_eigs(prob: &LandauProblem, j_max: usize, mode: EigMode, seed: u64) -> Result<Vec<f64>> {
    if j_max == 0 {
        return Ok(Vec::new());
    }
    let matrix = assemble_laplacian(prob, OperatorKind::Bochner);
    let d_target = (prob.p() as usize) * (prob.field().m() as usize);
    let k = j_max.max(d_target + 2).min(matrix.dim());
    let mut spec = low_spectrum(&matrix, k, mode, seed)?;
    detect_cluster(&mut spec, prob.field())?;
    spec.eigenvalues.truncate(j_max);
    Ok(spec.eigenvalues)
}
