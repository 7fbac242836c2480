//! Bargmann-Fock space: weighted monomial basis, the Gaussian model
//! projection kernel, and the scaling isometry between the two.
//!
//! Conventions. The Fock inner product is ⟨F, G⟩ = ∫ F(z) conj(G(z)) e^{-|z|²} dz
//! over ℂⁿ with Lebesgue measure, so the monomials z^k are orthogonal with
//! ‖z^k‖ = √(πⁿ ∏ k_j!) and the Fock projection Π has integral kernel
//! π^{-n} exp(-|z'|² + z·conj(z')) acting on unweighted L² integrands. The
//! model space attached to weights a = (a_1, …, a_n) consists of functions
//! f(z) e^{-¼ Σ a_j |z_j|²} with f holomorphic; its projection kernel is the
//! Gaussian `model_bergman_kernel`, and `model_isometry` maps one picture to
//! the other.

pub mod antiwick;
pub mod bargmann;
pub mod poly;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;

/// Finite Fock-space truncation: complex dimension `n`, maximum monomial
/// total degree `max_degree`, and positive model weights `a` (one per
/// complex dimension).
#[derive(Debug, Clone, PartialEq)]
pub struct FockTruncation {
    n: usize,
    max_degree: u32,
    a: Vec<f64>,
}

impl FockTruncation {
    /// Truncation in `n` complex dimensions with the given weights.
    pub fn new(max_degree: u32, a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidArgument("weights must be non-empty".into()));
        }
        if let Some(bad) = a.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weights must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { n: a.len(), max_degree, a })
    }

    /// One-dimensional truncation with weight a₁ = 1 (the standard Fock space).
    pub fn standard(max_degree: u32) -> Self {
        Self { n: 1, max_degree, a: vec![1.0] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn weights(&self) -> &[f64] {
        &self.a
    }

    fn check_index(&self, k: &[u32]) -> Result<()> {
        if k.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "multi-index length {} does not match dimension {}",
                k.len(),
                self.n
            )));
        }
        let degree: u32 = k.iter().sum();
        if degree > self.max_degree {
            return Err(Error::OutOfTruncation {
                index: k.to_vec(),
                degree,
                max_degree: self.max_degree,
            });
        }
        Ok(())
    }

    /// All multi-indices of total degree ≤ `max_degree`, in graded
    /// lexicographic order. This is the basis ordering used by every matrix
    /// in this module.
    pub fn basis_indices(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for degree in 0..=self.max_degree {
            push_compositions(self.n, degree, &mut Vec::new(), &mut out);
        }
        out
    }
}

fn push_compositions(dims: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if dims == 1 {
        let mut k = prefix.clone();
        k.push(remaining);
        out.push(k);
        return;
    }
    for first in (0..=remaining).rev() {
        prefix.push(first);
        push_compositions(dims - 1, remaining - first, prefix, out);
        prefix.pop();
    }
}

/// Natural log of k! for integer k, exact recursion in f64.
pub(crate) fn ln_factorial(k: u32) -> f64 {
    (2..=u64::from(k)).map(|j| (j as f64).ln()).sum()
}

/// Norm of the monomial z^k in the Fock inner product: √(πⁿ ∏ k_j!).
pub fn monomial_norm(k: &[u32], trunc: &FockTruncation) -> Result<f64> {
    trunc.check_index(k)?;
    let ln_sq = (trunc.n as f64) * std::f64::consts::PI.ln()
        + k.iter().map(|&kj| ln_factorial(kj)).sum::<f64>();
    Ok((0.5 * ln_sq).exp())
}

/// Normalized monomial e_k(z) = z^k / ‖z^k‖ evaluated at z.
pub fn basis_eval(k: &[u32], z: &[Complex64], trunc: &FockTruncation) -> Result<Complex64> {
    let norm = monomial_norm(k, trunc)?;
    if z.len() != trunc.n {
        return Err(Error::InvalidArgument(format!(
            "point has {} complex coordinates, expected {}",
            z.len(),
            trunc.n
        )));
    }
    let mut v = Complex64::new(1.0, 0.0);
    for (zj, &kj) in z.iter().zip(k) {
        v *= zj.powu(kj);
    }
    Ok(v / norm)
}

/// Pack a real 2n-vector Z into complex coordinates z_j = Z_{2j} + i Z_{2j+1}.
pub fn complex_coords(zr: &[f64]) -> Result<Vec<Complex64>> {
    if zr.len() % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "real coordinate vector must have even length, got {}",
            zr.len()
        )));
    }
    Ok(zr
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect())
}

/// Fock projection kernel Π(z, z') = π^{-n} exp(-|z'|² + z·conj(z')),
/// acting on plain L²(dz') integrands (the weight is folded in).
pub fn fock_projector_kernel(z: &[Complex64], zp: &[Complex64]) -> Complex64 {
    debug_assert_eq!(z.len(), zp.len());
    let n = z.len();
    let mut exponent = Complex64::new(0.0, 0.0);
    for j in 0..n {
        exponent += z[j] * zp[j].conj() - zp[j].norm_sqr();
    }
    exponent.exp() / std::f64::consts::PI.powi(n as i32)
}

/// Model Bergman kernel for weights a: the Gaussian
/// 𝒫(Z, Z') = (2π)^{-n} ∏ a_j exp(-¼ Σ a_j (|z_j|² + |z'_j|² - 2 z_j conj(z'_j))).
///
/// Arguments are real 2n-vectors identified with points of ℂⁿ via
/// z_j = Z_{2j} + i Z_{2j+1}.
pub fn model_bergman_kernel(zr: &[f64], zpr: &[f64], trunc: &FockTruncation) -> Result<Complex64> {
    let z = complex_coords(zr)?;
    let zp = complex_coords(zpr)?;
    if z.len() != trunc.n || zp.len() != trunc.n {
        return Err(Error::InvalidArgument(format!(
            "points have {} and {} complex coordinates, expected {}",
            z.len(),
            zp.len(),
            trunc.n
        )));
    }
    Ok(model_bergman_kernel_c(&z, &zp, trunc.weights()))
}

/// `model_bergman_kernel` on complex coordinates.
pub fn model_bergman_kernel_c(z: &[Complex64], zp: &[Complex64], a: &[f64]) -> Complex64 {
    let n = a.len();
    let mut exponent = Complex64::new(0.0, 0.0);
    let mut prefactor = 1.0;
    for j in 0..n {
        prefactor *= a[j] / (2.0 * std::f64::consts::PI);
        exponent += -0.25
            * a[j]
            * (Complex64::new(z[j].norm_sqr() + zp[j].norm_sqr(), 0.0)
                - 2.0 * z[j] * zp[j].conj());
    }
    prefactor * exponent.exp()
}

/// The scaling isometry S from the standard Fock picture to the model
/// picture: (S u)(z) = c · e^{-¼ Σ a_j |z_j|²} · u(φ(z)) with
/// φ(z)_j = √(a_j/2) z_j.
///
/// The prefactor c = √(∏ a_j / 2ⁿ) is forced by unitarity
/// L²(e^{-|z|²} dz) → L²(dz); the relation S Π S^{-1} = 𝒫 holds for any
/// constant, so the kernel identity does not pin c and the isometry
/// normalization is verified by quadrature in the tests.
#[derive(Debug, Clone)]
pub struct ModelIsometry {
    a: Vec<f64>,
    prefactor: f64,
}

impl ModelIsometry {
    pub fn new(trunc: &FockTruncation) -> Self {
        let prod: f64 = trunc.a.iter().product();
        let prefactor = (prod / 2f64.powi(trunc.n as i32)).sqrt();
        Self { a: trunc.a.clone(), prefactor }
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    /// φ(z): the coordinate scaling z_j ↦ √(a_j/2) z_j.
    pub fn scale(&self, z: &[Complex64]) -> Vec<Complex64> {
        z.iter()
            .zip(&self.a)
            .map(|(zj, aj)| zj * (aj / 2.0).sqrt())
            .collect()
    }

    /// Apply S to a function given in the standard Fock picture.
    pub fn apply<F>(&self, u: F, z: &[Complex64]) -> Complex64
    where
        F: Fn(&[Complex64]) -> Complex64,
    {
        let weight: f64 = z
            .iter()
            .zip(&self.a)
            .map(|(zj, aj)| -0.25 * aj * zj.norm_sqr())
            .sum();
        self.prefactor * weight.exp() * u(&self.scale(z))
    }
}

/// Deviation of the reproducing identity ∫ 𝒫(Z, W) 𝒫(W, Z') dW = 𝒫(Z, Z'),
/// evaluated by tensor Gauss-Legendre quadrature over [-radius, radius]^{2n}.
pub fn model_reproducing_defect(
    zr: &[f64],
    zpr: &[f64],
    trunc: &FockTruncation,
    radius: f64,
    nodes_per_axis: usize,
) -> Result<f64> {
    let z = complex_coords(zr)?;
    let zp = complex_coords(zpr)?;
    let a = trunc.weights();
    let direct = model_bergman_kernel_c(&z, &zp, a);
    let composed = quad::integrate_complex(trunc.n, radius, nodes_per_axis, |w| {
        model_bergman_kernel_c(&z, w, a) * model_bergman_kernel_c(w, &zp, a)
    });
    Ok((composed - direct).norm())
}

/// Deviation of the Fock reproducing identity
/// F(z) = ∫ Π(z, w) F(w) dw for F in the range of Π (holomorphic data taken
/// as F(w) = polynomial; the kernel carries the weight e^{-|w|²}).
pub fn fock_reproducing_defect<F>(
    f: F,
    z: &[Complex64],
    n_complex: usize,
    radius: f64,
    nodes_per_axis: usize,
) -> f64
where
    F: Fn(&[Complex64]) -> Complex64,
{
    let direct = f(z);
    let composed = quad::integrate_complex(n_complex, radius, nodes_per_axis, |w| {
        fock_projector_kernel(z, w) * f(w)
    });
    (composed - direct).norm()
}
