//! Anti-Wick (Toeplitz) quantization on the truncated Fock space, and the
//! exact Weyl route for quadratic symbols.
//!
//! A polynomial symbol P(z̄, z) = Σ A_{K;L} z̄^K z^L quantizes to
//! T⁰(P) = Π P Π, which on monomials acts as Σ A_{K;L} ∂^K ∘ z^L. On the
//! normalized basis e_M = z^M/‖z^M‖ the matrix entries are factorial ratios,
//! evaluated through log-gamma so truncation degrees up to 200 stay finite.
//!
//! For n = 1 homogeneous quadratics the same operator is unitarily a Weyl
//! quantized harmonic oscillator plus a trace correction, giving closed-form
//! eigenvalues 2√(det M)(j + ½) + tr(M)/2. The two routes are kept separate
//! so each can check the other.

use std::collections::{BTreeMap, HashMap};

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{ln_factorial, FockTruncation};

/// Polynomial anti-Wick symbol Σ A_{K;L} z̄^K z^L in n complex variables.
#[derive(Debug, Clone)]
pub struct AntiWickPolynomial {
    n: usize,
    /// Keyed by (K, L) = (anti-holomorphic powers, holomorphic powers).
    terms: BTreeMap<(Vec<u32>, Vec<u32>), Complex64>,
}

impl AntiWickPolynomial {
    pub fn new(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Vec<u32>, Vec<u32>), &Complex64)> {
        self.terms.iter()
    }

    /// Adds `coeff · z̄^K z^L`, merging with any existing term.
    pub fn add_term(&mut self, k: Vec<u32>, l: Vec<u32>, coeff: Complex64) -> Result<()> {
        if k.len() != self.n || l.len() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "term exponents have lengths {} and {}, symbol has {} variables",
                k.len(),
                l.len(),
                self.n
            )));
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((k, l)) {
            Entry::Vacant(e) => {
                if coeff != Complex64::new(0.0, 0.0) {
                    e.insert(coeff);
                }
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if *e.get() == Complex64::new(0.0, 0.0) {
                    e.remove();
                }
            }
        }
        Ok(())
    }

    pub fn constant(n: usize, value: Complex64) -> Self {
        let mut p = Self::new(n);
        p.add_term(vec![0; n], vec![0; n], value).expect("zero exponents always fit");
        p
    }

    /// n = 1 symbol α z̄z + β z² + conj(β) z̄², the general self-adjoint
    /// homogeneous quadratic in one complex variable.
    pub fn quadratic_n1(alpha: f64, beta: Complex64) -> Self {
        let mut p = Self::new(1);
        p.add_term(vec![1], vec![1], Complex64::new(alpha, 0.0)).unwrap();
        if beta != Complex64::new(0.0, 0.0) {
            p.add_term(vec![0], vec![2], beta).unwrap();
            p.add_term(vec![2], vec![0], beta.conj()).unwrap();
        }
        p
    }

    /// Converts the real quadratic form q(Z) = q11 Z₁² + 2 q12 Z₁Z₂ + q22 Z₂²
    /// (with z = Z₁ + iZ₂) into its complex form α z̄z + β z² + conj(β) z̄².
    pub fn from_real_quadratic_n1(q11: f64, q12: f64, q22: f64) -> Self {
        let alpha = 0.5 * (q11 + q22);
        let beta = Complex64::new(0.25 * (q11 - q22), -0.5 * q12);
        Self::quadratic_n1(alpha, beta)
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        if factor == Complex64::new(0.0, 0.0) {
            self.terms.clear();
        } else {
            for v in self.terms.values_mut() {
                *v *= factor;
            }
        }
        self
    }

    /// Total degree max(|K| + |L|) over terms; zero symbol has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|(k, l)| k.iter().sum::<u32>() + l.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Largest deviation |A_{K;L} - conj(A_{L;K})| from self-adjointness.
    pub fn self_adjoint_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for ((k, l), v) in &self.terms {
            let mirror = self
                .terms
                .get(&(l.clone(), k.clone()))
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0));
            worst = worst.max((*v - mirror.conj()).norm());
        }
        worst
    }

    /// Symbol value P(z̄, z) at a point.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((k, l), coeff) in &self.terms {
            let mut term = *coeff;
            for j in 0..self.n {
                term *= z[j].conj().powu(k[j]) * z[j].powu(l[j]);
            }
            acc += term;
        }
        acc
    }
}

/// Matrix of T⁰(P) on the graded-lexicographic normalized monomial basis.
#[derive(Debug)]
pub struct AntiWickMatrix {
    pub matrix: Mat<c64>,
    /// Basis multi-indices in column/row order.
    pub basis: Vec<Vec<u32>>,
    /// Set when the truncation degree is smaller than deg(P), i.e. the
    /// cut-off discards whole degree bands the symbol couples to.
    pub truncation_warning: bool,
    /// Raising components that landed outside the truncated space.
    pub dropped_components: usize,
}

/// Assembles T⁰(P) = Σ A_{K;L} ∂^K ∘ z^L on monomials of degree ≤ N.
///
/// Per dimension, the action on e_m for a term z̄^k z^l is a shift to
/// e_{m+l-k} with weight (m+l)! / √((m+l-k)! · m!); products over dimensions
/// give the entry. Components shifted above the truncation degree are
/// dropped and counted, never silently mangled.
pub fn antiwick_matrix(poly: &AntiWickPolynomial, trunc: &FockTruncation) -> Result<AntiWickMatrix> {
    if poly.n() != trunc.n() {
        return Err(Error::ShapeMismatch(format!(
            "symbol has {} variables, truncation has {}",
            poly.n(),
            trunc.n()
        )));
    }
    let n = trunc.n();
    let basis = trunc.basis_indices();
    let index_of: HashMap<Vec<u32>, usize> =
        basis.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect();
    let dim = basis.len();
    let mut matrix = Mat::<c64>::zeros(dim, dim);
    let mut dropped = 0usize;

    for (col, m) in basis.iter().enumerate() {
        'term: for ((k, l), coeff) in &poly.terms {
            let mut target = vec![0u32; n];
            let mut ln_weight = 0.0_f64;
            for j in 0..n {
                let raised = m[j] + l[j];
                if raised < k[j] {
                    // ∂^k annihilates this component exactly.
                    continue 'term;
                }
                target[j] = raised - k[j];
                ln_weight += ln_factorial(raised)
                    - 0.5 * ln_factorial(target[j])
                    - 0.5 * ln_factorial(m[j]);
            }
            match index_of.get(&target) {
                Some(&row) => {
                    let add = *coeff * ln_weight.exp();
                    matrix[(row, col)] += c64::new(add.re, add.im);
                }
                None => dropped += 1,
            }
        }
    }

    Ok(AntiWickMatrix {
        matrix,
        basis,
        truncation_warning: poly.degree() > trunc.max_degree(),
        dropped_components: dropped,
    })
}

/// Weyl-side quadratic form: the 2×2 symmetric matrix M of
/// P̃(x, ξ) = (x, ξ) M (x, ξ)ᵀ together with the anti-Wick trace correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylQuadratic {
    pub m: [[f64; 2]; 2],
}

impl WeylQuadratic {
    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }
}

/// Rewrites a self-adjoint homogeneous quadratic n = 1 symbol through the
/// substitution z = (x - iξ)/√2 as a real quadratic form in (x, ξ).
///
/// For P = α z̄z + β z² + conj(β) z̄² the form matrix is
/// M = [[α/2 + Re β, Im β], [Im β, α/2 - Re β]].
pub fn antiwick_to_weyl_quadratic(poly: &AntiWickPolynomial) -> Result<WeylQuadratic> {
    if poly.n() != 1 {
        return Err(Error::InvalidArgument(format!(
            "the Weyl route handles n = 1 only, symbol has {} variables",
            poly.n()
        )));
    }
    let defect = poly.self_adjoint_defect();
    if defect > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "symbol is not self-adjoint (defect {defect:.3e})"
        )));
    }
    let mut alpha = 0.0_f64;
    let mut beta = Complex64::new(0.0, 0.0);
    for ((k, l), coeff) in poly.terms() {
        let (dk, dl) = (k[0], l[0]);
        match (dk, dl) {
            (1, 1) => alpha = coeff.re,
            (0, 2) => beta = *coeff,
            (2, 0) => {}
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unsupported degree: term z̄^{dk} z^{dl} is not homogeneous quadratic"
                )))
            }
        }
    }
    Ok(WeylQuadratic {
        m: [
            [0.5 * alpha + beta.re, beta.im],
            [beta.im, 0.5 * alpha - beta.re],
        ],
    })
}

/// Closed-form spectrum of the anti-Wick quantization of the quadratic form
/// with Weyl matrix M: eigenvalues 2√(det M)(j + ½) + tr(M)/2, j = 0, 1, ….
pub fn weyl_quadratic_spectrum(w: &WeylQuadratic, levels: usize) -> Result<Vec<f64>> {
    let det = w.det();
    let tr = w.trace();
    if det <= 0.0 || tr <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Weyl quadratic form is not positive definite (det {det:.3e}, trace {tr:.3e})"
        )));
    }
    let omega = det.sqrt();
    Ok((0..levels)
        .map(|j| 2.0 * omega * (j as f64 + 0.5) + 0.5 * tr)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn n1_trunc(max_degree: u32) -> FockTruncation {
        FockTruncation::new(max_degree, vec![1.0]).unwrap()
    }

    #[test]
    fn constant_symbol_gives_identity() {
        let p = AntiWickPolynomial::constant(1, Complex64::new(1.0, 0.0));
        let aw = antiwick_matrix(&p, &n1_trunc(6)).unwrap();
        assert!(!aw.truncation_warning);
        assert_eq!(aw.dropped_components, 0);
        for i in 0..aw.basis.len() {
            for j in 0..aw.basis.len() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(aw.matrix[(i, j)].re, want, epsilon = 1e-14);
                assert_abs_diff_eq!(aw.matrix[(i, j)].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn number_symbol_is_diag_one_through_n_plus_one() {
        let n_deg = 9;
        let p = AntiWickPolynomial::quadratic_n1(1.0, Complex64::new(0.0, 0.0));
        let aw = antiwick_matrix(&p, &n1_trunc(n_deg)).unwrap();
        for j in 0..=n_deg as usize {
            assert_abs_diff_eq!(aw.matrix[(j, j)].re, (j + 1) as f64, epsilon = 1e-11);
        }
        assert_eq!(aw.dropped_components, 0);
    }

    #[test]
    fn quartic_number_symbol_is_diag_of_falling_products() {
        let mut p = AntiWickPolynomial::new(1);
        p.add_term(vec![2], vec![2], Complex64::new(1.0, 0.0)).unwrap();
        let aw = antiwick_matrix(&p, &n1_trunc(8)).unwrap();
        for j in 0..=8usize {
            let want = ((j + 1) * (j + 2)) as f64;
            assert_abs_diff_eq!(aw.matrix[(j, j)].re, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn raising_and_lowering_quadratics_sit_on_shifted_diagonals() {
        let mut raise = AntiWickPolynomial::new(1);
        raise.add_term(vec![0], vec![2], Complex64::new(1.0, 0.0)).unwrap();
        let aw = antiwick_matrix(&raise, &n1_trunc(7)).unwrap();
        // z² maps e_j to √((j+1)(j+2)) e_{j+2}; top two columns fall out.
        for j in 0..=5usize {
            let want = (((j + 1) * (j + 2)) as f64).sqrt();
            assert_abs_diff_eq!(aw.matrix[(j + 2, j)].re, want, epsilon = 1e-11);
        }
        assert_eq!(aw.dropped_components, 2);
        assert!(!aw.truncation_warning);

        let mut lower = AntiWickPolynomial::new(1);
        lower.add_term(vec![2], vec![0], Complex64::new(1.0, 0.0)).unwrap();
        let lw = antiwick_matrix(&lower, &n1_trunc(7)).unwrap();
        for j in 2..=7usize {
            let want = ((j * (j - 1)) as f64).sqrt();
            assert_abs_diff_eq!(lw.matrix[(j - 2, j)].re, want, epsilon = 1e-11);
        }
        // Lowering never leaves the truncated space.
        assert_eq!(lw.dropped_components, 0);
    }

    #[test]
    fn self_adjoint_symbol_gives_hermitian_matrix() {
        let p = AntiWickPolynomial::quadratic_n1(1.7, Complex64::new(0.3, -0.4));
        assert!(p.self_adjoint_defect() < 1e-15);
        let aw = antiwick_matrix(&p, &n1_trunc(20)).unwrap();
        assert!(dense::hermitian_defect(&aw.matrix) < 1e-12);
    }

    #[test]
    fn truncation_warning_tracks_symbol_degree() {
        let mut p = AntiWickPolynomial::new(1);
        p.add_term(vec![2], vec![2], Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(p.degree(), 4);
        assert!(antiwick_matrix(&p, &n1_trunc(2)).unwrap().truncation_warning);
        assert!(!antiwick_matrix(&p, &n1_trunc(10)).unwrap().truncation_warning);
    }

    #[test]
    fn weyl_bridge_of_number_symbol_is_half_identity() {
        let p = AntiWickPolynomial::quadratic_n1(1.0, Complex64::new(0.0, 0.0));
        let w = antiwick_to_weyl_quadratic(&p).unwrap();
        assert_eq!(w.m, [[0.5, 0.0], [0.0, 0.5]]);
        let spec = weyl_quadratic_spectrum(&w, 5).unwrap();
        for (j, v) in spec.iter().enumerate() {
            assert_abs_diff_eq!(*v, (j + 1) as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn weyl_bridge_of_axis_aligned_real_form_is_half_diag() {
        // q(Z) = α Z₁² + β Z₂² ↦ P̃ = ½(α x² + β ξ²).
        let (alpha, beta) = (1.0, 4.0);
        let p = AntiWickPolynomial::from_real_quadratic_n1(alpha, 0.0, beta);
        let w = antiwick_to_weyl_quadratic(&p).unwrap();
        assert_abs_diff_eq!(w.m[0][0], 0.5 * alpha, epsilon = 1e-15);
        assert_abs_diff_eq!(w.m[1][1], 0.5 * beta, epsilon = 1e-15);
        assert_abs_diff_eq!(w.m[0][1], 0.0, epsilon = 1e-15);
        // √(αβ) j + (√α + √β)²/4 with α=1, β=4 is 2j + 9/4.
        let spec = weyl_quadratic_spectrum(&w, 4).unwrap();
        for (j, v) in spec.iter().enumerate() {
            assert_abs_diff_eq!(*v, 2.0 * j as f64 + 2.25, epsilon = 1e-13);
        }
    }

    #[test]
    fn weyl_bridge_of_cross_term_is_traceless_off_diagonal() {
        // q(Z) = Z₁Z₂, i.e. q11 = q22 = 0, q12 = ½.
        let p = AntiWickPolynomial::from_real_quadratic_n1(0.0, 0.5, 0.0);
        let w = antiwick_to_weyl_quadratic(&p).unwrap();
        assert_abs_diff_eq!(w.m[0][0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.m[1][1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.m[0][1], -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(w.m[1][0], -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(w.trace(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_weyl_form_is_rejected() {
        let w = WeylQuadratic { m: [[0.0, 0.0], [0.0, 0.0]] };
        assert!(weyl_quadratic_spectrum(&w, 3).is_err());
    }

    #[test]
    fn non_quadratic_symbol_is_rejected_by_the_weyl_route() {
        let mut p = AntiWickPolynomial::new(1);
        p.add_term(vec![0], vec![0], Complex64::new(1.0, 0.0)).unwrap();
        assert!(antiwick_to_weyl_quadratic(&p).is_err());
        let mut cubic = AntiWickPolynomial::new(1);
        cubic.add_term(vec![1], vec![2], Complex64::new(1.0, 0.0)).unwrap();
        cubic.add_term(vec![2], vec![1], Complex64::new(1.0, 0.0)).unwrap();
        assert!(antiwick_to_weyl_quadratic(&cubic).is_err());
    }

    #[test]
    fn truncated_and_closed_form_spectra_agree_for_random_quadratics() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..8 {
            // Positive-definite M guaranteed by construction: α > 2|β|.
            let beta = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let alpha = 2.0 * beta.norm() + 0.5 + rng.random::<f64>();
            let p = AntiWickPolynomial::quadratic_n1(alpha, beta);
            let w = antiwick_to_weyl_quadratic(&p).unwrap();
            let exact = weyl_quadratic_spectrum(&w, 8).unwrap();
            let aw = antiwick_matrix(&p, &n1_trunc(80)).unwrap();
            let eigs = dense::hermitian_eigenvalues(&aw.matrix).unwrap();
            for (got, want) in eigs.iter().zip(&exact) {
                assert_abs_diff_eq!(*got, *want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn lowest_truncated_eigenvalue_is_nonincreasing_in_degree() {
        let p = AntiWickPolynomial::quadratic_n1(1.3, Complex64::new(0.4, 0.2));
        let mut prev = f64::INFINITY;
        for n_deg in [4u32, 8, 12, 16, 24] {
            let aw = antiwick_matrix(&p, &n1_trunc(n_deg)).unwrap();
            let low = dense::hermitian_eigenvalues(&aw.matrix).unwrap()[0];
            assert!(low <= prev + 1e-12, "lowest eigenvalue rose: {prev} -> {low} at N = {n_deg}");
            prev = low;
        }
    }

    #[test]
    fn two_dimensional_number_symbol_counts_total_degree() {
        // P = z̄₁z₁ + z̄₂z₂ has diagonal entries m₁ + m₂ + 2.
        let mut p = AntiWickPolynomial::new(2);
        p.add_term(vec![1, 0], vec![1, 0], Complex64::new(1.0, 0.0)).unwrap();
        p.add_term(vec![0, 1], vec![0, 1], Complex64::new(1.0, 0.0)).unwrap();
        let trunc = FockTruncation::new(4, vec![1.0, 1.0]).unwrap();
        let aw = antiwick_matrix(&p, &trunc).unwrap();
        for (i, m) in aw.basis.iter().enumerate() {
            let want = (m[0] + m[1] + 2) as f64;
            assert_abs_diff_eq!(aw.matrix[(i, i)].re, want, epsilon = 1e-11);
        }
    }
}
