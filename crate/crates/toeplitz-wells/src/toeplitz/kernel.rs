//! Position-space kernels of cluster operators and their off-diagonal
//! decay.
//!
//! An operator A on 𝓗_p with matrix entries A_{ij} in the cluster basis
//! has the kernel K(x, x') = Σ_{ij} u_i(x) A_{ij} conj(u_j(x')). For the
//! spectral projector (A = I) the kernel decays like e^{−c√p·d(x,x')}
//! away from the diagonal; the decay rate is measured by sampling pairs in
//! a fixed window of the rescaled separation t = √p·d and fitting
//! log|K| against t. Working in a common t-window makes rates comparable
//! across tensor powers, which is what the scaling-collapse check needs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::toeplitz::matrix::ToeplitzMatrix;
use crate::torus::spectrum::LowSpectrum;

/// Separation window in physical distance.
pub const PAIR_DISTANCE_WINDOW: (f64, f64) = (0.1, 0.5);
/// Window in the rescaled variable t = √p·d; below it the O(1) diagonal
/// dominates, above it the kernel sinks into the quadrature floor.
pub const PAIR_T_WINDOW: (f64, f64) = (0.6, 2.0);

/// What to reconstruct the kernel of.
#[derive(Clone, Copy)]
pub enum KernelOperand<'a> {
    /// The spectral projector onto the cluster: A = I.
    Projector(&'a LowSpectrum),
    /// A compressed symbol: A = T_{f,p}.
    Toeplitz(&'a ToeplitzMatrix),
}

impl<'a> KernelOperand<'a> {
    fn basis(&self) -> &'a LowSpectrum {
        match self {
            KernelOperand::Projector(b) => b,
            KernelOperand::Toeplitz(t) => t.basis(),
        }
    }

    fn cluster_dim(&self) -> Result<usize> {
        self.basis().d_p.ok_or_else(|| {
            Error::InvalidArgument("kernel reconstruction needs a detected cluster".into())
        })
    }

    fn entry(&self, i: usize, j: usize) -> Complex64 {
        match self {
            KernelOperand::Projector(_) => {
                if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            KernelOperand::Toeplitz(t) => {
                let e = t.entries()[(i, j)];
                Complex64::new(e.re, e.im)
            }
        }
    }
}

/// Snaps a torus point to the nearest grid site, returning (site, point).
fn snap(x: [f64; 2], n: usize) -> (usize, [f64; 2]) {
    let nf = n as f64;
    let i = (x[0].rem_euclid(1.0) * nf).round() as usize % n;
    let j = (x[1].rem_euclid(1.0) * nf).round() as usize % n;
    (i * n + j, [i as f64 / nf, j as f64 / nf])
}

/// Periodic distance on the unit torus.
fn periodic_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let mut acc = 0.0;
    for ax in 0..2 {
        let mut d = (a[ax] - b[ax]).abs();
        if d > 0.5 {
            d = 1.0 - d;
        }
        acc += d * d;
    }
    acc.sqrt()
}

/// K(x, x') with both points snapped to the basis grid.
pub fn kernel_value(op: &KernelOperand, x: [f64; 2], y: [f64; 2]) -> Result<Complex64> {
    let basis = op.basis();
    let d = op.cluster_dim()?;
    let n = basis.grid_n;
    let (sx, _) = snap(x, n);
    let (sy, _) = snap(y, n);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += basis.eigenvectors[i][sx] * op.entry(i, j) * basis.eigenvectors[j][sy].conj();
        }
    }
    Ok(acc)
}

/// ∫ K(x,x) dv by grid quadrature; equals d_p for the projector.
pub fn kernel_trace(op: &KernelOperand) -> Result<f64> {
    let basis = op.basis();
    let d = op.cluster_dim()?;
    let n = basis.grid_n;
    let h2 = 1.0 / (n * n) as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 0..n * n {
        for i in 0..d {
            for j in 0..d {
                acc += basis.eigenvectors[i][s] * op.entry(i, j) * basis.eigenvectors[j][s].conj();
            }
        }
    }
    Ok(acc.re * h2)
}

/// Least-squares fit of the off-diagonal kernel decay.
#[derive(Debug, Clone)]
pub struct DecayFit {
    /// Fitted intercept of log|K| at t = 0.
    pub log_amplitude: f64,
    /// Fitted decay rate in t = √p·d; positive means decay.
    pub rate: f64,
    /// (t, log|K|) samples that entered the fit.
    pub samples: Vec<(f64, f64)>,
    /// Pairs discarded: outside the windows or below the floating floor.
    pub dropped: usize,
}

/// Probe pairs spanning the admissible separation window for tensor power
/// p: half along the x₁ axis, half along the diagonal, anchored at
/// `anchor`.
pub fn standard_probe_pairs(p: u32, anchor: [f64; 2], count: usize) -> Vec<([f64; 2], [f64; 2])> {
    let sqrt_p = (p as f64).sqrt();
    let lo = PAIR_DISTANCE_WINDOW.0.max(PAIR_T_WINDOW.0 / sqrt_p);
    let hi = PAIR_DISTANCE_WINDOW.1.min(PAIR_T_WINDOW.1 / sqrt_p);
    if hi <= lo || count == 0 {
        return Vec::new();
    }
    let mut pairs = Vec::with_capacity(count);
    for q in 0..count {
        let frac = (q as f64 + 0.5) / count as f64;
        let d = lo + frac * (hi - lo);
        let offset = if q % 2 == 0 {
            [d, 0.0]
        } else {
            [d / std::f64::consts::SQRT_2, d / std::f64::consts::SQRT_2]
        };
        pairs.push((anchor, [anchor[0] + offset[0], anchor[1] + offset[1]]));
    }
    pairs
}

/// Samples |K| on the probe pairs, keeps those inside both separation
/// windows and above the floating floor, and fits log|K| = a − rate·t.
pub fn offdiag_decay(op: &KernelOperand, pairs: &[([f64; 2], [f64; 2])]) -> Result<DecayFit> {
    let basis = op.basis();
    let d = op.cluster_dim()?;
    let n = basis.grid_n;
    let sqrt_p = (basis.p as f64).sqrt();
    // Kernel diagonal scale is ~d_p; anything 14 orders below it is noise.
    let floor = 1e-14 * d as f64;
    let mut samples = Vec::new();
    let mut dropped = 0usize;
    for (x, y) in pairs {
        let (_, xs) = snap(*x, n);
        let (_, ys) = snap(*y, n);
        let dist = periodic_distance(xs, ys);
        let t = sqrt_p * dist;
        if dist < PAIR_DISTANCE_WINDOW.0
            || dist > PAIR_DISTANCE_WINDOW.1
            || t < PAIR_T_WINDOW.0
            || t > PAIR_T_WINDOW.1
        {
            dropped += 1;
            continue;
        }
        let k = kernel_value(op, xs, ys)?.norm();
        if k < floor {
            dropped += 1;
            continue;
        }
        samples.push((t, k.ln()));
    }
    if samples.len() < 3 {
        return Err(Error::FitFailed(format!(
            "only {} usable kernel samples after windowing; need at least 3",
            samples.len()
        )));
    }
    // Plain least squares on (t, log|K|).
    let m = samples.len() as f64;
    let st: f64 = samples.iter().map(|(t, _)| t).sum();
    let sv: f64 = samples.iter().map(|(_, v)| v).sum();
    let stt: f64 = samples.iter().map(|(t, _)| t * t).sum();
    let stv: f64 = samples.iter().map(|(t, v)| t * v).sum();
    let denom = m * stt - st * st;
    if denom.abs() < 1e-14 {
        return Err(Error::FitFailed("degenerate separation samples".into()));
    }
    let slope = (m * stv - st * sv) / denom;
    let intercept = (sv - slope * st) / m;
    Ok(DecayFit { log_amplitude: intercept, rate: -slope, samples, dropped })
}
