//! Magnetic fields b(x) dx₁∧dx₂ on the unit torus with integer flux.
//!
//! The field is a real trigonometric polynomial whose mean is pinned to
//! 2πm by prequantization (area 1, flux ∫b = 2πm). Everything downstream
//! keys off b: the mean b̄ = 2πm, the minimum b₀ = μ₀, and the list of
//! non-degenerate minima with their Hessians.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbols::TrigPoly;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Verification grid used by the positivity check.
const POSITIVITY_GRID: usize = 256;

/// A non-degenerate local minimum of b, Newton-refined.
#[derive(Debug, Clone)]
pub struct FieldMinimum {
    pub x: [f64; 2],
    pub value: f64,
    pub hess: [[f64; 2]; 2],
}

/// Positive field of integer flux m on the unit torus.
#[derive(Debug, Clone)]
pub struct TorusField {
    poly: TrigPoly,
    m: u32,
}

impl TorusField {
    /// Validates realness, integer flux, and positivity on a fine grid.
    pub fn new(poly: TrigPoly) -> Result<Self> {
        let defect = poly.reality_defect();
        if defect > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "field coefficients are not conjugate-symmetric (defect {defect:.3e})"
            )));
        }
        let mean = poly.mean();
        if mean.im.abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "field mean has imaginary part {:.3e}",
                mean.im
            )));
        }
        let m_float = mean.re / TAU;
        let m = m_float.round();
        if (m_float - m).abs() > 1e-9 * m_float.abs().max(1.0) || m < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "field mean {:.12} is not 2π times a positive integer (flux {m_float:.12})",
                mean.re
            )));
        }
        let field = Self { poly, m: m as u32 };
        field.check_positive(POSITIVITY_GRID)?;
        Ok(field)
    }

    /// b ≡ 2πm.
    pub fn constant(m: u32) -> Result<Self> {
        Self::new(TrigPoly::constant(TAU * m as f64))
    }

    /// b(x) = c(1 + ε(2 - cos2πx₁ - cos2πx₂)), c = 2πm/(1+2ε): one
    /// non-degenerate minimum at the origin with b₀ = c.
    pub fn single_well(m: u32, eps: f64) -> Result<Self> {
        if eps < 0.0 {
            return Err(Error::InvalidArgument(format!("well depth ε = {eps} must be non-negative")));
        }
        let c = TAU * m as f64 / (1.0 + 2.0 * eps);
        let mut poly = TrigPoly::constant(TAU * m as f64);
        poly = poly.sub(&TrigPoly::cosine((1, 0), c * eps));
        poly = poly.sub(&TrigPoly::cosine((0, 1), c * eps));
        Self::new(poly)
    }

    /// b(x) = c(1 + ε(2 - cos2π(x₁+x₂) - cos2π(x₁-x₂))), c = 2πm/(1+2ε):
    /// exactly two symmetric minima, at (0,0) and (½,½), with equal
    /// Hessians 8π²cε·I.
    pub fn double_well(m: u32, eps: f64) -> Result<Self> {
        if eps < 0.0 {
            return Err(Error::InvalidArgument(format!("well depth ε = {eps} must be non-negative")));
        }
        let c = TAU * m as f64 / (1.0 + 2.0 * eps);
        let mut poly = TrigPoly::constant(TAU * m as f64);
        poly = poly.sub(&TrigPoly::cosine((1, 1), c * eps));
        poly = poly.sub(&TrigPoly::cosine((1, -1), c * eps));
        Self::new(poly)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// b̄ = 2πm.
    pub fn mean(&self) -> f64 {
        self.poly.mean().re
    }

    pub fn poly(&self) -> &TrigPoly {
        &self.poly
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.poly.eval(x)
    }

    pub fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        self.poly.grad(x)
    }

    pub fn hess(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        self.poly.hess(x)
    }

    pub fn eval_grid(&self, n: usize) -> Vec<f64> {
        self.poly.eval_grid(n)
    }

    /// The field b(x - s): flux and well shape unchanged, features moved
    /// to +s. Used by the gauge-covariance checks.
    pub fn translated(&self, s: [f64; 2]) -> Result<Self> {
        Self::new(self.poly.translated(s))
    }

    /// Upper bound for sup |b| from the coefficient ℓ¹ norm.
    pub fn l1_bound(&self) -> f64 {
        self.poly.l1_norm()
    }

    /// Rejects the field if b ≤ 0 anywhere on the n×n verification grid,
    /// naming the offending grid point.
    pub fn check_positive(&self, n: usize) -> Result<()> {
        let values = self.poly.eval_grid(n);
        let h = 1.0 / n as f64;
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if v <= 0.0 {
                    return Err(Error::NonPositiveField {
                        i,
                        j,
                        x: i as f64 * h,
                        y: j as f64 * h,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// All strict local minima, found by a periodic 8-neighbor scan on an
    /// n×n grid and Newton-refined; deduplicated and sorted by value then
    /// position for deterministic reports.
    pub fn minima(&self, scan_n: usize) -> Result<Vec<FieldMinimum>> {
        Ok(local_minima(&self.poly, scan_n))
    }

    /// b₀ = min b = μ₀. Refined through the minima list; a constant field
    /// falls back to its mean.
    pub fn min_value(&self) -> f64 {
        match self.minima(128) {
            Ok(list) if !list.is_empty() => list[0].value,
            _ => {
                let grid = self.poly.eval_grid(128);
                grid.iter().cloned().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Stable textual key for caching spectra per field.
    pub fn fingerprint(&self) -> String {
        use std::fmt::Write;
        let mut s = format!("m={};", self.m);
        for (&(k1, k2), c) in self.poly.coeffs() {
            write!(s, "({k1},{k2})=({:.17e},{:.17e});", c.re, c.im).expect("string write");
        }
        s
    }
}

/// All strict local minima of a real trigonometric polynomial on the torus:
/// periodic 8-neighbor scan on an n×n grid, Newton refinement, periodic
/// deduplication, sorted by value then position. Works for symbols with
/// zeros as well as for strictly positive fields.
pub fn local_minima(poly: &TrigPoly, scan_n: usize) -> Vec<FieldMinimum> {
    if poly.degree() == 0 {
        // A constant has no isolated minima.
        return Vec::new();
    }
    let values = poly.eval_grid(scan_n);
    let at = |i: isize, j: isize| {
        let ii = i.rem_euclid(scan_n as isize) as usize;
        let jj = j.rem_euclid(scan_n as isize) as usize;
        values[ii * scan_n + jj]
    };
    let mut found: Vec<FieldMinimum> = Vec::new();
    let h = 1.0 / scan_n as f64;
    for i in 0..scan_n as isize {
        for j in 0..scan_n as isize {
            let v = at(i, j);
            let mut is_min = true;
            'nbrs: for di in -1..=1 {
                for dj in -1..=1 {
                    if (di, dj) == (0, 0) {
                        continue;
                    }
                    if at(i + di, j + dj) < v {
                        is_min = false;
                        break 'nbrs;
                    }
                }
            }
            if !is_min {
                continue;
            }
            let seed = [i as f64 * h, j as f64 * h];
            let x = match poly.refine_critical_point(seed, 40) {
                Ok(x) => x,
                // Degenerate Newton step: keep the grid point, let the
                // consumer's Hessian check reject it.
                Err(_) => seed,
            };
            let dup = found.iter().any(|mm| {
                let dx = (mm.x[0] - x[0]).rem_euclid(1.0).min((x[0] - mm.x[0]).rem_euclid(1.0));
                let dy = (mm.x[1] - x[1]).rem_euclid(1.0).min((x[1] - mm.x[1]).rem_euclid(1.0));
                dx.hypot(dy) < 1e-6
            });
            if !dup {
                found.push(FieldMinimum {
                    x,
                    value: poly.eval(x),
                    hess: poly.hess(x),
                });
            }
        }
    }
    found.sort_by(|a, b| {
        (a.value, a.x[0], a.x[1])
            .partial_cmp(&(b.value, b.x[0], b.x[1]))
            .expect("scanned values are finite")
    });
    found
}

/// Builds the Fourier coefficients of a field from raw terms, folding in
/// the conjugate-symmetric partner of every listed frequency.
pub fn field_from_raw_terms(m: u32, terms: &[((i32, i32), Complex64)]) -> Result<TorusField> {
    let mut poly = TrigPoly::constant(TAU * m as f64);
    for &(k, c) in terms {
        if k == (0, 0) {
            return Err(Error::InvalidArgument(
                "the (0,0) coefficient is fixed by the flux; specify m instead".into(),
            ));
        }
        poly.add_term(k, c);
        poly.add_term((-k.0, -k.1), c.conj());
    }
    TorusField::new(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_field_is_two_pi_m() {
        let f = TorusField::constant(1).unwrap();
        for &x in &[[0.0, 0.0], [0.3, 0.8]] {
            assert_abs_diff_eq!(f.eval(x), TAU, epsilon = 1e-14);
        }
        assert_eq!(f.m(), 1);
        assert_abs_diff_eq!(f.min_value(), TAU, epsilon = 1e-12);
    }

    #[test]
    fn single_well_has_its_advertised_minimum() {
        let f = TorusField::single_well(1, 0.1).unwrap();
        let c = TAU / 1.2;
        assert_abs_diff_eq!(f.eval([0.0, 0.0]), c, epsilon = 1e-12);
        assert_abs_diff_eq!(f.mean(), TAU, epsilon = 1e-12);
        let minima = f.minima(64).unwrap();
        assert_eq!(minima.len(), 1);
        assert_abs_diff_eq!(minima[0].x[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(minima[0].x[1], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(minima[0].value, c, epsilon = 1e-12);
        // Hess b(0) = 4π²cε·I.
        let want = TAU * TAU * c * 0.1;
        assert_abs_diff_eq!(minima[0].hess[0][0], want, epsilon = 1e-9);
        assert_abs_diff_eq!(minima[0].hess[1][1], want, epsilon = 1e-9);
        assert_abs_diff_eq!(minima[0].hess[0][1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn double_well_has_two_symmetric_minima_with_equal_hessians() {
        let f = TorusField::double_well(1, 0.15).unwrap();
        let minima = f.minima(64).unwrap();
        assert_eq!(minima.len(), 2);
        let c = TAU / 1.3;
        for mm in &minima {
            assert_abs_diff_eq!(mm.value, c, epsilon = 1e-11);
            // Hess = 8π²cε·I at both wells.
            let want = 2.0 * TAU * TAU * c * 0.15;
            assert_abs_diff_eq!(mm.hess[0][0], want, epsilon = 1e-8);
            assert_abs_diff_eq!(mm.hess[1][1], want, epsilon = 1e-8);
            assert_abs_diff_eq!(mm.hess[0][1], 0.0, epsilon = 1e-8);
        }
        // Wells sit at (0,0) and (½,½).
        assert_abs_diff_eq!(minima[0].x[0] + minima[1].x[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(minima[0].x[1] + minima[1].x[1], 0.5, epsilon = 1e-9);
    }

    #[test]
    fn non_positive_field_is_rejected_with_the_offending_point() {
        let mut poly = TrigPoly::constant(TAU);
        poly = poly.sub(&TrigPoly::cosine((1, 0), 10.0));
        match TorusField::new(poly) {
            Err(Error::NonPositiveField { value, x, .. }) => {
                assert!(value <= 0.0);
                // The dip of 2π - 10cos2πx₁ is deepest near x₁ = 0.
                assert!(x < 0.2 || x > 0.8, "offending x₁ = {x}");
            }
            other => panic!("expected NonPositiveField, got {other:?}"),
        }
    }

    #[test]
    fn fractional_flux_is_rejected() {
        let poly = TrigPoly::constant(1.5 * TAU);
        assert!(TorusField::new(poly).is_err());
    }

    #[test]
    fn complex_valued_field_is_rejected() {
        let mut poly = TrigPoly::constant(TAU);
        poly.add_term((1, 0), Complex64::new(0.1, 0.0));
        // Missing the conjugate partner at (-1, 0).
        assert!(TorusField::new(poly).is_err());
    }

    #[test]
    fn raw_terms_builder_symmetrizes() {
        let f = field_from_raw_terms(1, &[((1, 0), Complex64::new(0.05, 0.02))]).unwrap();
        assert_abs_diff_eq!(f.poly().reality_defect(), 0.0, epsilon = 1e-16);
        assert_eq!(f.m(), 1);
    }

    #[test]
    fn fingerprints_distinguish_fields_and_are_stable() {
        let a = TorusField::single_well(1, 0.1).unwrap();
        let b = TorusField::single_well(1, 0.1).unwrap();
        let c = TorusField::single_well(1, 0.2).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
