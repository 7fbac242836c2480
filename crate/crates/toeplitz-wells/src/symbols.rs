//! Trigonometric polynomials on the unit 2-torus.
//!
//! Fields, symbols, and gauge correctors are all finite Fourier sums
//! f(x) = Σ_k c_k e^{2πi k·x} over k ∈ ℤ². Keeping them symbolic makes
//! derivatives, products, and the periodic Poisson solve exact; grids only
//! enter when a field is sampled.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Finite Fourier sum over ℤ² frequencies.
#[derive(Debug, Clone, Default)]
pub struct TrigPoly {
    coeffs: BTreeMap<(i32, i32), Complex64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        let mut p = Self::zero();
        p.add_term((0, 0), Complex64::new(value, 0.0));
        p
    }

    pub fn from_terms<I: IntoIterator<Item = ((i32, i32), Complex64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    /// cos(2π k·x) as a conjugate-symmetric pair of modes.
    pub fn cosine(k: (i32, i32), amplitude: f64) -> Self {
        let half = Complex64::new(0.5 * amplitude, 0.0);
        let mut p = Self::zero();
        p.add_term(k, half);
        p.add_term((-k.0, -k.1), half);
        p
    }

    pub fn add_term(&mut self, k: (i32, i32), c: Complex64) {
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(k) {
            Entry::Vacant(e) => {
                if c != Complex64::new(0.0, 0.0) {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == Complex64::new(0.0, 0.0) {
                    e.remove();
                }
            }
        }
    }

    pub fn coeff(&self, k: (i32, i32)) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&(i32, i32), &Complex64)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mean(&self) -> Complex64 {
        self.coeff((0, 0))
    }

    /// ℓ¹ norm of the coefficients, an upper bound for sup |f|.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Largest |k|_∞ over the support.
    pub fn degree(&self) -> i32 {
        self.coeffs
            .keys()
            .map(|(k1, k2)| k1.abs().max(k2.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Max |c_k - conj(c_{-k})|: zero exactly when the poly is real-valued.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (&(k1, k2), &c) in &self.coeffs {
            let mirror = self.coeff((-k1, -k2));
            worst = worst.max((c - mirror.conj()).norm());
        }
        worst
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, &c) in &other.coeffs {
            out.add_term(k, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.clone().scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        if factor == Complex64::new(0.0, 0.0) {
            self.coeffs.clear();
        } else {
            for c in self.coeffs.values_mut() {
                *c *= factor;
            }
        }
        self
    }

    /// Pointwise product, i.e. coefficient convolution.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(a1, a2), &ca) in &self.coeffs {
            for (&(b1, b2), &cb) in &other.coeffs {
                out.add_term((a1 + b1, a2 + b2), ca * cb);
            }
        }
        out
    }

    /// ∂/∂x_axis, exact: multiplies mode k by 2πi k_axis.
    pub fn partial(&self, axis: usize) -> Self {
        assert!(axis < 2, "the torus has two coordinates");
        let mut out = Self::zero();
        for (&k, &c) in &self.coeffs {
            let ka = if axis == 0 { k.0 } else { k.1 };
            if ka != 0 {
                out.add_term(k, c * Complex64::new(0.0, TAU * ka as f64));
            }
        }
        out
    }

    pub fn eval_c(&self, x: [f64; 2]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&(k1, k2), &c) in &self.coeffs {
            let phase = TAU * (k1 as f64 * x[0] + k2 as f64 * x[1]);
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc
    }

    /// Real value; callers guard realness via [`Self::reality_defect`].
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.eval_c(x).re
    }

    pub fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        [self.partial(0).eval(x), self.partial(1).eval(x)]
    }

    pub fn hess(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let dxx = self.partial(0).partial(0).eval(x);
        let dxy = self.partial(0).partial(1).eval(x);
        let dyy = self.partial(1).partial(1).eval(x);
        [[dxx, dxy], [dxy, dyy]]
    }

    /// Samples on the n×n grid x = (i/n, j/n), index s = i·n + j.
    pub fn eval_grid(&self, n: usize) -> Vec<f64> {
        let h = 1.0 / n as f64;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.eval([i as f64 * h, j as f64 * h]);
            }
        }
        out
    }

    /// f(x - s): mode k picks up the phase e^{-2πi k·s}. Realness is
    /// preserved since conjugate modes pick up conjugate phases.
    pub fn translated(&self, s: [f64; 2]) -> Self {
        let mut out = Self::zero();
        for (&(k1, k2), &c) in &self.coeffs {
            let phase = -TAU * (k1 as f64 * s[0] + k2 as f64 * s[1]);
            out.add_term((k1, k2), c * Complex64::from_polar(1.0, phase));
        }
        out
    }

    /// Solves Δφ = self exactly on the frequency support: the mode k picks
    /// up the factor -1/(4π²|k|²). The mean must vanish (the constant mode
    /// is not in the image of Δ).
    pub fn laplace_invert(&self) -> Result<Self> {
        if self.mean().norm() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "Poisson solve needs a zero-mean right-hand side, mean = {}",
                self.mean()
            )));
        }
        let mut out = Self::zero();
        for (&(k1, k2), &c) in &self.coeffs {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let ksq = (k1 as f64).powi(2) + (k2 as f64).powi(2);
            out.add_term((k1, k2), -c / (TAU * TAU * ksq));
        }
        Ok(out)
    }

    /// Newton refinement of a critical point from the seed x0; converges
    /// quadratically near a non-degenerate minimum. Returns the refined
    /// point folded into [0, 1)².
    pub fn refine_critical_point(&self, x0: [f64; 2], max_steps: usize) -> Result<[f64; 2]> {
        let mut x = x0;
        for _ in 0..max_steps {
            let g = self.grad(x);
            let h = self.hess(x);
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if det.abs() < 1e-14 {
                return Err(Error::InvalidArgument(format!(
                    "degenerate Hessian during Newton refinement at ({}, {})",
                    x[0], x[1]
                )));
            }
            let step = [
                (h[1][1] * g[0] - h[0][1] * g[1]) / det,
                (-h[1][0] * g[0] + h[0][0] * g[1]) / det,
            ];
            x = [x[0] - step[0], x[1] - step[1]];
            if step[0].hypot(step[1]) < 1e-15 {
                break;
            }
        }
        Ok([x[0].rem_euclid(1.0), x[1].rem_euclid(1.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cosine_evaluates_to_the_closed_form() {
        let p = TrigPoly::cosine((1, 0), 1.0);
        for &x in &[0.0, 0.13, 0.5, 0.77] {
            assert_abs_diff_eq!(p.eval([x, 0.4]), (TAU * x).cos(), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(p.reality_defect(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn partial_derivative_matches_hand_derivative() {
        let p = TrigPoly::cosine((1, 0), 1.0);
        let dp = p.partial(0);
        for &x in &[0.1, 0.35, 0.62] {
            assert_abs_diff_eq!(dp.eval([x, 0.0]), -TAU * (TAU * x).sin(), epsilon = 1e-13);
        }
        assert!(p.partial(1).is_zero());
    }

    #[test]
    fn product_is_coefficient_convolution() {
        let a = TrigPoly::cosine((1, 0), 1.0);
        let b = TrigPoly::cosine((0, 1), 1.0);
        let ab = a.mul(&b);
        for &x in &[[0.1, 0.2], [0.37, 0.83], [0.5, 0.5]] {
            let want = (TAU * x[0]).cos() * (TAU * x[1]).cos();
            assert_abs_diff_eq!(ab.eval(x), want, epsilon = 1e-13);
        }
    }

    #[test]
    fn poisson_solve_inverts_the_laplacian_on_a_single_mode() {
        // Δφ = cos(2πx₁) has φ = -cos(2πx₁)/(4π²).
        let g = TrigPoly::cosine((1, 0), 1.0);
        let phi = g.laplace_invert().unwrap();
        for &x in &[0.0, 0.21, 0.6] {
            assert_abs_diff_eq!(phi.eval([x, 0.0]), -(TAU * x).cos() / (TAU * TAU), epsilon = 1e-15);
        }
        // Residual Δφ - g vanishes identically on the frequency support.
        let lap = phi.partial(0).partial(0).add(&phi.partial(1).partial(1));
        assert!(lap.sub(&g).l1_norm() < 1e-14);
    }

    #[test]
    fn poisson_solve_rejects_nonzero_mean() {
        assert!(TrigPoly::constant(1.0).laplace_invert().is_err());
    }

    #[test]
    fn grid_samples_match_pointwise_evaluation() {
        let p = TrigPoly::from_terms([
            ((0, 0), Complex64::new(2.0, 0.0)),
            ((1, 1), Complex64::new(0.3, 0.1)),
            ((-1, -1), Complex64::new(0.3, -0.1)),
        ]);
        let n = 8;
        let grid = p.eval_grid(n);
        for i in 0..n {
            for j in 0..n {
                let x = [i as f64 / n as f64, j as f64 / n as f64];
                assert_abs_diff_eq!(grid[i * n + j], p.eval(x), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn translation_shifts_evaluation_points() {
        let p = TrigPoly::from_terms([
            ((0, 0), Complex64::new(1.0, 0.0)),
            ((1, 0), Complex64::new(0.2, 0.1)),
            ((-1, 0), Complex64::new(0.2, -0.1)),
            ((1, 2), Complex64::new(0.05, 0.0)),
            ((-1, -2), Complex64::new(0.05, 0.0)),
        ]);
        let s = [0.31, 0.74];
        let q = p.translated(s);
        assert_abs_diff_eq!(q.reality_defect(), 0.0, epsilon = 1e-15);
        for &x in &[[0.0, 0.0], [0.4, 0.9], [0.77, 0.13]] {
            assert_abs_diff_eq!(q.eval(x), p.eval([x[0] - s[0], x[1] - s[1]]), epsilon = 1e-13);
        }
    }

    #[test]
    fn newton_refinement_lands_on_the_minimum() {
        // 2 - cos2π(x₁-¼) - cos2π(x₂-½): minimum at (0.25, 0.5). The shift
        // puts coefficient -½e^{∓2πi k·s} on mode ±k.
        let q = TrigPoly::from_terms([
            ((0, 0), Complex64::new(2.0, 0.0)),
            ((1, 0), -Complex64::from_polar(0.5, -TAU * 0.25)),
            ((-1, 0), -Complex64::from_polar(0.5, TAU * 0.25)),
            ((0, 1), -Complex64::from_polar(0.5, -TAU * 0.5)),
            ((0, -1), -Complex64::from_polar(0.5, TAU * 0.5)),
        ]);
        let x = q.refine_critical_point([0.22, 0.46], 30).unwrap();
        assert_abs_diff_eq!(x[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.5, epsilon = 1e-12);
    }
}
