//! Model well operators and their reference spectra.
//!
//! A non-degenerate well is the quadratic form q(Z) = ⟨½ Hess b(x₀) Z, Z⟩
//! with curvature weight a₁ = b(x₀) and a scalar shift. Its model operator
//! is the anti-Wick quantization of the rescaled symbol Q∘φ⁻¹ on the model
//! Bergman space; for n = 1 the spectrum is closed-form,
//! μ_j = (2√D/a₁) j + A²/(2a₁) + shift with D = det Q and A = tr √Q.
//! Several wells combine as a direct sum, i.e. a sorted merge.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::antiwick::{antiwick_matrix, AntiWickPolynomial};
use crate::fock::FockTruncation;
use crate::linalg::dense;
use crate::torus::field::TorusField;

/// Hard cap for the adaptive truncation degree.
const TRUNCATION_CAP: u32 = 200;

/// One non-degenerate quadratic well.
#[derive(Debug, Clone)]
pub struct QuadraticWell {
    /// Complex dimension n (real dimension 2n).
    pub n: usize,
    /// Curvature weights a_j > 0 (for magnetic wells, a₁ = b(x₀)).
    pub a: Vec<f64>,
    /// Symmetric positive-definite 2n×2n matrix of q(Z), row-major.
    pub q: Vec<f64>,
    /// Scalar shift added to every eigenvalue.
    pub shift: f64,
    /// Well identifier, typically its position.
    pub label: String,
}

impl QuadraticWell {
    pub fn new(n: usize, a: Vec<f64>, q: Vec<f64>, shift: f64, label: String) -> Result<Self> {
        if n == 0 || a.len() != n {
            return Err(Error::InvalidArgument(format!(
                "well needs n ≥ 1 weights, got n = {n} with {} weights",
                a.len()
            )));
        }
        if let Some(bad) = a.iter().find(|v| **v <= 0.0) {
            return Err(Error::InvalidArgument(format!("curvature weight {bad} is not positive")));
        }
        let d = 2 * n;
        if q.len() != d * d {
            return Err(Error::ShapeMismatch(format!(
                "quadratic form needs a {d}x{d} matrix, got {} entries",
                q.len()
            )));
        }
        for r in 0..d {
            for c in 0..d {
                if (q[r * d + c] - q[c * d + r]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "quadratic form is not symmetric at ({r}, {c})"
                    )));
                }
            }
        }
        let eigs = dense::hermitian_eigenvalues(&dense::mat_from_fn(d, d, |r, c| {
            Complex64::new(q[r * d + c], 0.0)
        }))?;
        if eigs[0] <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "quadratic form is not positive definite (smallest eigenvalue {:.3e})",
                eigs[0]
            )));
        }
        Ok(Self { n, a, q, shift, label })
    }

    /// Convenience n = 1 constructor from the 2×2 entries.
    pub fn n1(a1: f64, q11: f64, q12: f64, q22: f64, shift: f64, label: &str) -> Result<Self> {
        Self::new(1, vec![a1], vec![q11, q12, q12, q22], shift, label.to_string())
    }

    /// D = det Q (n = 1 only).
    pub fn det_q(&self) -> f64 {
        debug_assert_eq!(self.n, 1);
        self.q[0] * self.q[3] - self.q[1] * self.q[2]
    }

    /// A = tr √Q = √λ₁ + √λ₂ = √(tr Q + 2√(det Q)) (n = 1 only).
    pub fn tr_sqrt_q(&self) -> f64 {
        debug_assert_eq!(self.n, 1);
        (self.q[0] + self.q[3] + 2.0 * self.det_q().sqrt()).sqrt()
    }
}

/// One reference eigenvalue with provenance.
#[derive(Debug, Clone)]
pub struct ModelLevel {
    pub value: f64,
    pub well_index: usize,
    pub well_label: String,
    /// Closed-form (true) or convergence-controlled truncation (false).
    pub exact: bool,
}

/// Ascending reference spectrum {μ_m} with multiplicities and provenance.
#[derive(Debug, Clone)]
pub struct ModelSpectrum {
    pub levels: Vec<ModelLevel>,
}

impl ModelSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.value).collect()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn from_values(values: Vec<f64>, well_index: usize, label: &str, exact: bool) -> Self {
        Self {
            levels: values
                .into_iter()
                .map(|value| ModelLevel {
                    value,
                    well_index,
                    well_label: label.to_string(),
                    exact,
                })
                .collect(),
        }
    }
}

/// Closed-form spectrum μ_j = (2√D/a₁) j + A²/(2a₁) + shift for n = 1.
/// Wells with n ≠ 1 are routed to the truncated diagonalization.
pub fn well_spectrum_exact(well: &QuadraticWell, levels: usize) -> Result<ModelSpectrum> {
    if well.n != 1 {
        let trunc = FockTruncation::new(8, vec![1.0; well.n])?;
        return well_spectrum_truncated(well, &trunc, levels);
    }
    let d = well.det_q();
    let a1 = well.a[0];
    let slope = 2.0 * d.sqrt() / a1;
    let offset = well.tr_sqrt_q().powi(2) / (2.0 * a1) + well.shift;
    let values = (0..levels).map(|j| slope * j as f64 + offset).collect();
    Ok(ModelSpectrum::from_values(values, 0, &well.label, true))
}

/// The well's symbol on the standard model space: (Q ∘ φ⁻¹)(z) with
/// φ⁻¹(z)_j = √(2/a_j) z_j, expanded into anti-Wick form. For n = 1 this
/// is (2/a₁)·Q(z).
pub fn symbol_from_well(well: &QuadraticWell) -> Result<AntiWickPolynomial> {
    let n = well.n;
    let d = 2 * n;
    let mut sym = AntiWickPolynomial::new(n);
    // Z_{2j} = s_j (z_j + z̄_j)/2 and Z_{2j+1} = -i s_j (z_j - z̄_j)/2 with
    // s_j = √(2/a_j); each real coordinate splits into a z and a z̄ part.
    let parts = |s: usize| -> [(bool, Complex64); 2] {
        let j = s / 2;
        let scale = (2.0 / well.a[j]).sqrt();
        if s % 2 == 0 {
            [
                (true, Complex64::new(0.5 * scale, 0.0)),
                (false, Complex64::new(0.5 * scale, 0.0)),
            ]
        } else {
            [
                (true, Complex64::new(0.0, -0.5 * scale)),
                (false, Complex64::new(0.0, 0.5 * scale)),
            ]
        }
    };
    for s in 0..d {
        for t in 0..d {
            let qst = well.q[s * d + t];
            if qst == 0.0 {
                continue;
            }
            for (s_is_z, s_coeff) in parts(s) {
                for (t_is_z, t_coeff) in parts(t) {
                    let mut k = vec![0u32; n];
                    let mut l = vec![0u32; n];
                    if s_is_z {
                        l[s / 2] += 1;
                    } else {
                        k[s / 2] += 1;
                    }
                    if t_is_z {
                        l[t / 2] += 1;
                    } else {
                        k[t / 2] += 1;
                    }
                    sym.add_term(k, l, s_coeff * t_coeff * qst)?;
                }
            }
        }
    }
    Ok(sym)
}

/// Truncated diagonalization of the model operator, starting from the given
/// truncation degree and growing it by 4 until the lowest `levels`
/// eigenvalues move by less than 1e-10, with a hard cap at 200.
pub fn well_spectrum_truncated(
    well: &QuadraticWell,
    trunc: &FockTruncation,
    levels: usize,
) -> Result<ModelSpectrum> {
    if levels == 0 {
        return Ok(ModelSpectrum { levels: Vec::new() });
    }
    let sym = symbol_from_well(well)?;
    let mut n_deg = trunc.max_degree().max(4);
    let mut prev: Option<Vec<f64>> = None;
    let mut last_shift = f64::INFINITY;
    loop {
        let t = FockTruncation::new(n_deg, vec![1.0; well.n])?;
        let aw = antiwick_matrix(&sym, &t)?;
        let eigs = dense::hermitian_eigenvalues(&aw.matrix)?;
        if eigs.len() >= levels {
            let head: Vec<f64> = eigs[..levels].iter().map(|v| v + well.shift).collect();
            if let Some(p) = &prev {
                last_shift = head
                    .iter()
                    .zip(p)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0_f64, f64::max);
                if last_shift < 1e-10 {
                    return Ok(ModelSpectrum::from_values(head, 0, &well.label, false));
                }
            }
            prev = Some(head);
        }
        if n_deg >= TRUNCATION_CAP {
            return Err(Error::TruncationNotConverged {
                levels,
                n_cap: TRUNCATION_CAP,
                last_shift,
            });
        }
        n_deg += 4;
    }
}

/// Direct sum over wells: a stable ascending merge, ties broken by well
/// index, truncated to `levels` values.
pub fn multiwell_spectrum(wells: &[QuadraticWell], levels: usize) -> Result<ModelSpectrum> {
    if wells.is_empty() {
        return Err(Error::InvalidArgument("multiwell spectrum needs at least one well".into()));
    }
    let mut merged: Vec<ModelLevel> = Vec::new();
    for (index, well) in wells.iter().enumerate() {
        let single = well_spectrum_exact(well, levels)?;
        merged.extend(single.levels.into_iter().map(|mut l| {
            l.well_index = index;
            l
        }));
    }
    merged.sort_by(|x, y| {
        (x.value, x.well_index)
            .partial_cmp(&(y.value, y.well_index))
            .expect("model eigenvalues are finite")
    });
    merged.truncate(levels);
    Ok(ModelSpectrum { levels: merged })
}

/// Leading-order Toeplitz eigenvalue predictions p⁻¹ μ_m. The next
/// correction p^{-3/2} φ_m is fitted downstream, never predicted.
pub fn predict_toeplitz_eigs(spec: &ModelSpectrum, p: u32) -> Vec<f64> {
    assert!(p >= 1, "tensor power must be positive");
    spec.levels.iter().map(|l| l.value / p as f64).collect()
}

/// Builds the magnetic well at a claimed minimum of b: a₁ = b(x₀),
/// Q = ½ Hess b(x₀), shift 0 (pure multiplication symbol; any constant
/// offset is left to the fitted remainder).
pub fn magnetic_well_from_field(field: &TorusField, minimum: [f64; 2]) -> Result<QuadraticWell> {
    let grad = field.grad(minimum);
    let scale = field.l1_bound();
    let grad_norm = grad[0].hypot(grad[1]);
    if grad_norm > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!(
            "({:.6}, {:.6}) is not a critical point: |∇b| = {grad_norm:.3e}",
            minimum[0], minimum[1]
        )));
    }
    let h = field.hess(minimum);
    let tr = h[0][0] + h[1][1];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let min_eig = 0.5 * (tr - disc);
    if min_eig < 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "Hessian at ({:.6}, {:.6}) is degenerate (smallest eigenvalue {min_eig:.3e}); \
             degenerate wells are outside the non-degenerate model",
            minimum[0], minimum[1]
        )));
    }
    let b0 = field.eval(minimum);
    QuadraticWell::new(
        1,
        vec![b0],
        vec![0.5 * h[0][0], 0.5 * h[0][1], 0.5 * h[1][0], 0.5 * h[1][1]],
        0.0,
        format!("({:.6}, {:.6})", minimum[0], minimum[1]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rotated(q11: f64, q22: f64, angle: f64) -> [f64; 4] {
        let (c, s) = (angle.cos(), angle.sin());
        // R diag(q11, q22) Rᵀ.
        [
            c * c * q11 + s * s * q22,
            c * s * (q11 - q22),
            c * s * (q11 - q22),
            s * s * q11 + c * c * q22,
        ]
    }

    #[test]
    fn exact_spectrum_matches_the_three_reference_wells() {
        let w = QuadraticWell::n1(1.0, 1.0, 0.0, 1.0, 0.0, "unit").unwrap();
        let spec = well_spectrum_exact(&w, 4).unwrap();
        for (j, v) in spec.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, 2.0 * j as f64 + 2.0, epsilon = 1e-13);
        }

        let w = QuadraticWell::n1(2.0, 1.0, 0.0, 4.0, 0.0, "eccentric").unwrap();
        let spec = well_spectrum_exact(&w, 4).unwrap();
        for (j, v) in spec.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, 2.0 * j as f64 + 2.25, epsilon = 1e-13);
        }

        let w = QuadraticWell::n1(1.0, 1.0, 0.0, 1.0, 5.0, "shifted").unwrap();
        let spec = well_spectrum_exact(&w, 3).unwrap();
        for (j, v) in spec.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, 2.0 * j as f64 + 7.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn truncated_route_reproduces_the_exact_one() {
        let trunc = FockTruncation::standard(8);
        let w = QuadraticWell::n1(1.0, 1.0, 0.0, 1.0, 0.0, "unit").unwrap();
        let spec = well_spectrum_truncated(&w, &trunc, 6).unwrap();
        for (j, v) in spec.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, 2.0 * j as f64 + 2.0, epsilon = 1e-8);
        }
        assert!(!spec.levels[0].exact);

        let w = QuadraticWell::n1(2.0, 1.0, 0.0, 4.0, 0.0, "eccentric").unwrap();
        let spec = well_spectrum_truncated(&w, &trunc, 5).unwrap();
        for (j, v) in spec.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, 2.0 * j as f64 + 2.25, epsilon = 1e-8);
        }
    }

    #[test]
    fn rotation_leaves_both_routes_unchanged() {
        let q = rotated(1.0, 4.0, std::f64::consts::PI / 6.0);
        let w = QuadraticWell::n1(2.0, q[0], q[1], q[3], 0.0, "rotated").unwrap();
        let exact = well_spectrum_exact(&w, 5).unwrap();
        for (j, v) in exact.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, 2.0 * j as f64 + 2.25, epsilon = 1e-12);
        }
        let trunc = FockTruncation::standard(8);
        let truncated = well_spectrum_truncated(&w, &trunc, 5).unwrap();
        for (a, b) in exact.values().iter().zip(truncated.values()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn exact_and_truncated_agree_on_fifty_random_wells() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trunc = FockTruncation::standard(8);
        for _ in 0..50 {
            let l1 = 0.1 + 9.9 * rng.random::<f64>();
            let l2 = 0.1 + 9.9 * rng.random::<f64>();
            let angle = std::f64::consts::PI * rng.random::<f64>();
            let a1 = 0.5 + 4.5 * rng.random::<f64>();
            let q = rotated(l1, l2, angle);
            let w = QuadraticWell::n1(a1, q[0], q[1], q[3], 0.0, "random").unwrap();
            let exact = well_spectrum_exact(&w, 6).unwrap();
            let truncated = well_spectrum_truncated(&w, &trunc, 6).unwrap();
            for (a, b) in exact.values().iter().zip(truncated.values()) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn scaling_q_scales_slope_and_offset_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let q = rotated(0.5 + rng.random::<f64>(), 1.0 + rng.random::<f64>(), rng.random::<f64>());
            let s = 0.3 + 3.0 * rng.random::<f64>();
            let a1 = 0.8 + rng.random::<f64>();
            let w = QuadraticWell::n1(a1, q[0], q[1], q[3], 0.0, "base").unwrap();
            let ws = QuadraticWell::n1(a1, s * q[0], s * q[1], s * q[3], 0.0, "scaled").unwrap();
            let base = well_spectrum_exact(&w, 3).unwrap().values();
            let scaled = well_spectrum_exact(&ws, 3).unwrap().values();
            let slope = base[1] - base[0];
            let slope_s = scaled[1] - scaled[0];
            assert_abs_diff_eq!(slope_s / slope, s, epsilon = 1e-10);
            assert_abs_diff_eq!(scaled[0] / base[0], s, epsilon = 1e-10);
        }
    }

    #[test]
    fn lowest_level_of_every_single_well_is_simple() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let q = rotated(0.2 + rng.random::<f64>(), 0.2 + 5.0 * rng.random::<f64>(), rng.random::<f64>());
            let w = QuadraticWell::n1(1.0 + rng.random::<f64>(), q[0], q[1], q[3], 0.0, "w").unwrap();
            let spec = well_spectrum_exact(&w, 2).unwrap().values();
            assert!(spec[1] > spec[0] + 1e-9, "lowest level not simple: {spec:?}");
        }
    }

    #[test]
    fn multiwell_merge_is_stable_and_sorted() {
        let w = QuadraticWell::n1(1.0, 1.0, 0.0, 1.0, 0.0, "w").unwrap();
        let single = multiwell_spectrum(std::slice::from_ref(&w), 4).unwrap();
        assert_eq!(single.values(), well_spectrum_exact(&w, 4).unwrap().values());

        let twins = vec![w.clone(), w.clone()];
        let doubled = multiwell_spectrum(&twins, 6).unwrap();
        assert_eq!(doubled.values(), vec![2.0, 2.0, 4.0, 4.0, 6.0, 6.0]);
        // Ties resolve by well index.
        let idx: Vec<usize> = doubled.levels.iter().map(|l| l.well_index).collect();
        assert_eq!(idx, vec![0, 1, 0, 1, 0, 1]);

        let other = QuadraticWell::n1(2.0, 1.0, 0.0, 4.0, 0.0, "v").unwrap();
        let merged = multiwell_spectrum(&[w, other], 4).unwrap();
        let got = merged.values();
        for (a, b) in got.iter().zip([2.0, 2.25, 4.0, 4.25]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn toeplitz_predictions_divide_by_p() {
        let w = QuadraticWell::n1(1.0, 1.0, 0.0, 1.0, 0.0, "w").unwrap();
        let spec = well_spectrum_exact(&w, 2).unwrap();
        assert_eq!(predict_toeplitz_eigs(&spec, 100), vec![0.02, 0.04]);
        let empty = ModelSpectrum { levels: Vec::new() };
        assert!(predict_toeplitz_eigs(&empty, 5).is_empty());
        for p in [10u32, 100, 1000] {
            let head = predict_toeplitz_eigs(&spec, p)[0];
            assert_abs_diff_eq!(head, 2.0 / p as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn magnetic_single_well_gives_the_closed_form_spectrum() {
        let eps = 0.1;
        let field = TorusField::single_well(1, eps).unwrap();
        let well = magnetic_well_from_field(&field, [0.0, 0.0]).unwrap();
        // Hess = 4π²cε·I, Q = 2π²cε·I, a₁ = c, so μ_j = 4π²ε(j+1): the well
        // depth c cancels entirely.
        let spec = well_spectrum_exact(&well, 4).unwrap();
        let unit = 4.0 * std::f64::consts::PI.powi(2) * eps;
        for (j, v) in spec.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, unit * (j as f64 + 1.0), epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_field_has_no_valid_well() {
        let field = TorusField::constant(1).unwrap();
        assert!(magnetic_well_from_field(&field, [0.3, 0.3]).is_err());
    }

    #[test]
    fn double_well_yields_two_identical_wells() {
        let field = TorusField::double_well(1, 0.15).unwrap();
        let minima = field.minima(64).unwrap();
        assert_eq!(minima.len(), 2);
        let wells: Vec<QuadraticWell> = minima
            .iter()
            .map(|mm| magnetic_well_from_field(&field, mm.x).unwrap())
            .collect();
        let s0 = well_spectrum_exact(&wells[0], 3).unwrap().values();
        let s1 = well_spectrum_exact(&wells[1], 3).unwrap().values();
        for (a, b) in s0.iter().zip(&s1) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
        }
    }

    #[test]
    fn well_symbol_matches_the_direct_n1_conversion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let (q11, q12, q22) = (
                1.0 + rng.random::<f64>(),
                0.5 * rng.random::<f64>(),
                2.0 + rng.random::<f64>(),
            );
            let a1 = 0.7 + rng.random::<f64>();
            let w = QuadraticWell::n1(a1, q11, q12, q22, 0.0, "w").unwrap();
            let sym = symbol_from_well(&w).unwrap();
            let direct = AntiWickPolynomial::from_real_quadratic_n1(q11, q12, q22)
                .scale(Complex64::new(2.0 / a1, 0.0));
            for _ in 0..6 {
                let z = [Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)];
                let d = (sym.eval(&z) - direct.eval(&z)).norm();
                assert!(d < 1e-12, "symbol mismatch {d}");
            }
        }
    }
}
