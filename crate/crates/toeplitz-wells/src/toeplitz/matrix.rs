//! Toeplitz matrices T_{f,p} = P f P in the orthonormal eigenbasis of the
//! low Landau cluster, and the semiclassical algebra defects.
//!
//! With cluster sections u_1, …, u_{d_p} normalized under grid quadrature,
//! the compression of multiplication by f has entries ⟨u_i, f u_j⟩ computed
//! by the same quadrature; for smooth periodic integrands the equispaced
//! trapezoid rule is spectrally accurate. The product and commutator
//! defects quantify the leading terms of the symbol calculus: T_f T_g
//! approximates T_{fg} to O(1/p), and p[T_f, T_g] approximates ±i T_{{f,g}}
//! with the Poisson bracket taken in the magnetic symplectic form
//! b dx₁∧dx₂, i.e. {f,g} = (∂₁f ∂₂g − ∂₂f ∂₁g)/b.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::dense::{hermitian_eigen, hermitian_eigenvalues, operator_norm};
use crate::symbols::TrigPoly;
use crate::torus::field::TorusField;
use crate::torus::spectrum::LowSpectrum;

/// A symbol compressed to the low cluster.
#[derive(Debug, Clone)]
pub struct ToeplitzMatrix {
    p: u32,
    grid_n: usize,
    entries: faer::Mat<faer::c64>,
    hermiticity_defect: f64,
    samples: Vec<f64>,
    closed_form: Option<TrigPoly>,
    basis: Arc<LowSpectrum>,
}

/// The cluster sections as a grid_n² × d_p column matrix. Requires the
/// basis to carry a detected cluster; extra eigenpairs beyond d_p are not
/// part of 𝓗_p and are ignored.
fn basis_columns(basis: &LowSpectrum) -> Result<(faer::Mat<faer::c64>, usize)> {
    let d = basis.d_p.ok_or_else(|| {
        Error::InvalidArgument("basis has no detected cluster; run detect_cluster first".into())
    })?;
    let dim = basis.grid_n * basis.grid_n;
    let mut u = faer::Mat::<faer::c64>::zeros(dim, d);
    for (col, vec) in basis.eigenvectors.iter().take(d).enumerate() {
        if vec.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "basis section has {} entries, grid {} needs {}",
                vec.len(),
                basis.grid_n,
                dim
            )));
        }
        for (row, v) in vec.iter().enumerate() {
            u[(row, col)] = faer::c64::new(v.re, v.im);
        }
    }
    Ok((u, d))
}

fn compress(samples: &[f64], basis: &Arc<LowSpectrum>) -> Result<(faer::Mat<faer::c64>, f64)> {
    let dim = basis.grid_n * basis.grid_n;
    if samples.len() != dim {
        return Err(Error::ShapeMismatch(format!(
            "symbol sampled at {} points, basis grid {} needs {}",
            samples.len(),
            basis.grid_n,
            dim
        )));
    }
    let (u, d) = basis_columns(basis)?;
    let mut w = u.clone();
    for row in 0..dim {
        let f = samples[row];
        for col in 0..d {
            w[(row, col)] *= f;
        }
    }
    let h2 = 1.0 / dim as f64;
    let raw = u.adjoint() * &w;
    // Quadrature of conj(u_i) f u_j is Hermitian up to rounding for real f;
    // measure the defect, then symmetrize so downstream eigensolves see an
    // exactly Hermitian matrix.
    let mut defect: f64 = 0.0;
    let mut entries = faer::Mat::<faer::c64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let a = raw[(i, j)] * h2;
            let b = raw[(j, i)] * h2;
            defect = defect.max((a - b.conj()).norm());
            entries[(i, j)] = (a + b.conj()) * 0.5;
        }
    }
    if defect > 1e-8 {
        return Err(Error::Dense(format!(
            "compression of a real symbol came out non-Hermitian (defect {defect:.3e}); basis is not orthonormal"
        )));
    }
    Ok((entries, defect))
}

/// Compresses a real trigonometric polynomial onto the cluster basis.
pub fn toeplitz_matrix(f: &TrigPoly, basis: &Arc<LowSpectrum>) -> Result<ToeplitzMatrix> {
    if f.reality_defect() > 1e-10 {
        return Err(Error::InvalidArgument(
            "toeplitz_matrix expects a real symbol (conjugate-symmetric coefficients)".into(),
        ));
    }
    let samples = f.eval_grid(basis.grid_n);
    let (entries, hermiticity_defect) = compress(&samples, basis)?;
    Ok(ToeplitzMatrix {
        p: basis.p,
        grid_n: basis.grid_n,
        entries,
        hermiticity_defect,
        samples,
        closed_form: Some(f.clone()),
        basis: Arc::clone(basis),
    })
}

/// Compresses a symbol given by raw grid samples (row-major, site i·n + j).
/// Needed for symbols that are not trigonometric polynomials, like Poisson
/// brackets with their 1/b factor.
pub fn toeplitz_matrix_from_samples(samples: &[f64], basis: &Arc<LowSpectrum>) -> Result<ToeplitzMatrix> {
    let (entries, hermiticity_defect) = compress(samples, basis)?;
    Ok(ToeplitzMatrix {
        p: basis.p,
        grid_n: basis.grid_n,
        entries,
        hermiticity_defect,
        samples: samples.to_vec(),
        closed_form: None,
        basis: Arc::clone(basis),
    })
}

impl ToeplitzMatrix {
    /// d_p, the cluster dimension.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn entries(&self) -> &faer::Mat<faer::c64> {
        &self.entries
    }

    pub fn basis(&self) -> &Arc<LowSpectrum> {
        &self.basis
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn closed_form(&self) -> Option<&TrigPoly> {
        self.closed_form.as_ref()
    }

    /// Skew part measured before symmetrization.
    pub fn hermiticity_defect(&self) -> f64 {
        self.hermiticity_defect
    }

    /// Full spectrum, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.entries)
    }

    /// Operator norm, exact for the Hermitian compression.
    pub fn op_norm(&self) -> Result<f64> {
        let eigs = self.eigenvalues()?;
        Ok(eigs.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    }
}

/// Semiclassical algebra defects for a symbol pair, with the empirically
/// chosen commutator sign.
#[derive(Debug, Clone, Copy)]
pub struct ProductDefect {
    /// ‖T_f T_g − T_{fg}‖, expected O(1/p).
    pub norm_fg: f64,
    /// min over s = ±1 of ‖p[T_f, T_g] − s·i·T_{{f,g}}‖, expected O(p^{-1/2}).
    pub norm_comm: f64,
    /// The minimizing sign s.
    pub chosen_sign: i8,
}

/// Measures how far the compressed algebra is from the symbol algebra. The
/// commutator sign is not pinned by any convention choice here, so both are
/// tried and the winner reported.
pub fn product_defect(
    f: &TrigPoly,
    g: &TrigPoly,
    field: &TorusField,
    basis: &Arc<LowSpectrum>,
) -> Result<ProductDefect> {
    let tf = toeplitz_matrix(f, basis)?;
    let tg = toeplitz_matrix(g, basis)?;
    let tfg = toeplitz_matrix(&f.mul(g), basis)?;

    let prod = tf.entries() * tg.entries();
    let d = tf.dim();
    let mut diff = faer::Mat::<faer::c64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            diff[(i, j)] = prod[(i, j)] - tfg.entries()[(i, j)];
        }
    }
    let norm_fg = operator_norm(&diff)?;

    // {f,g} with respect to b dx₁∧dx₂; the 1/b factor leaves the class of
    // trigonometric polynomials, so the bracket is compressed from samples.
    let numerator = f.partial(0).mul(&g.partial(1)).sub(&f.partial(1).mul(&g.partial(0)));
    let num_samples = numerator.eval_grid(basis.grid_n);
    let b_samples = field.eval_grid(basis.grid_n);
    let bracket: Vec<f64> = num_samples.iter().zip(&b_samples).map(|(n, b)| n / b).collect();
    let tbr = toeplitz_matrix_from_samples(&bracket, basis)?;

    let gf = tg.entries() * tf.entries();
    let pf = basis.p as f64;
    let mut best = (f64::INFINITY, 1i8);
    for sign in [1.0f64, -1.0] {
        let mut dmat = faer::Mat::<faer::c64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let comm = (prod[(i, j)] - gf[(i, j)]) * pf;
                let target = faer::c64::new(0.0, sign) * tbr.entries()[(i, j)];
                dmat[(i, j)] = comm - target;
            }
        }
        let norm = operator_norm(&dmat)?;
        if norm < best.0 {
            best = (norm, sign as i8);
        }
    }
    Ok(ProductDefect { norm_fg, norm_comm: best.0, chosen_sign: best.1 })
}

/// Low eigenpairs of a compressed well symbol, with the eigensections
/// reconstructed on the grid.
#[derive(Debug, Clone)]
pub struct ToeplitzEigs {
    pub p: u32,
    pub grid_n: usize,
    /// Ascending eigenvalues λ_p^0 ≤ λ_p^1 ≤ … of T_{h,p}.
    pub values: Vec<f64>,
    /// Coefficient vectors in the cluster basis, one per value.
    pub coefficients: Vec<Vec<Complex64>>,
    /// Grid sections Σ_m c_m u_m, normalized under grid quadrature.
    pub sections: Vec<Vec<Complex64>>,
}

/// The `count` lowest eigenpairs of T_{h,p}.
pub fn toeplitz_low_spectrum(
    h: &TrigPoly,
    basis: &Arc<LowSpectrum>,
    count: usize,
) -> Result<ToeplitzEigs> {
    let t = toeplitz_matrix(h, basis)?;
    let d = t.dim();
    if count > d {
        return Err(Error::InvalidArgument(format!(
            "requested {count} eigenpairs from a d_p = {d} cluster"
        )));
    }
    let (values, vectors) = hermitian_eigen(t.entries())?;
    let dim = basis.grid_n * basis.grid_n;
    let mut coefficients = Vec::with_capacity(count);
    let mut sections = Vec::with_capacity(count);
    for m in 0..count {
        let c: Vec<Complex64> = (0..d)
            .map(|i| {
                let e = vectors[(i, m)];
                Complex64::new(e.re, e.im)
            })
            .collect();
        let mut section = vec![Complex64::new(0.0, 0.0); dim];
        for (i, ci) in c.iter().enumerate() {
            for (s, val) in basis.eigenvectors[i].iter().enumerate() {
                section[s] += ci * val;
            }
        }
        coefficients.push(c);
        sections.push(section);
    }
    Ok(ToeplitzEigs {
        p: basis.p,
        grid_n: basis.grid_n,
        values: values[..count].to_vec(),
        coefficients,
        sections,
    })
}
