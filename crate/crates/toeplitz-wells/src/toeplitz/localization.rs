//! Concentration diagnostics for low eigensections: mass outside well
//! neighborhoods, symbol moments, and exponentially weighted integrals.
//!
//! The sets involved are sublevel sets of the symbol: U₀ = {h = 0} (the
//! wells) and U_{h₀} = {h ≤ h₀}. Distances are exact periodic Euclidean
//! distances to the set discretized on a fine reference grid; only the
//! set's boundary points enter the minimization, which keeps the transform
//! affordable at production grids.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbols::TrigPoly;

/// Reference grid for resolving sublevel sets.
pub const DISTANCE_REF_GRID: usize = 512;

/// Periodic squared distance between two points of the unit torus.
fn periodic_dist_sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    let mut acc = 0.0;
    for ax in 0..2 {
        let mut d = (a[ax] - b[ax]).abs();
        if d > 0.5 {
            d = 1.0 - d;
        }
        acc += d * d;
    }
    acc
}

/// Distance from every point of the eval_n grid to {h ≤ level}, the set
/// resolved on a ref_n × ref_n grid. Points inside the set get 0; points
/// outside minimize over the set's boundary cells.
pub fn distance_to_sublevel(h: &TrigPoly, level: f64, eval_n: usize, ref_n: usize) -> Result<Vec<f64>> {
    let ref_samples = h.eval_grid(ref_n);
    let inside = |i: usize, j: usize| ref_samples[i * ref_n + j] <= level;
    let mut boundary: Vec<[f64; 2]> = Vec::new();
    let hr = 1.0 / ref_n as f64;
    let mut any_inside = false;
    for i in 0..ref_n {
        for j in 0..ref_n {
            if !inside(i, j) {
                continue;
            }
            any_inside = true;
            let neighbors_out = !inside((i + 1) % ref_n, j)
                || !inside((i + ref_n - 1) % ref_n, j)
                || !inside(i, (j + 1) % ref_n)
                || !inside(i, (j + ref_n - 1) % ref_n);
            if neighbors_out {
                boundary.push([i as f64 * hr, j as f64 * hr]);
            }
        }
    }
    if !any_inside {
        return Err(Error::InvalidArgument(format!(
            "sublevel set {{h <= {level}}} is empty on the {ref_n}x{ref_n} reference grid"
        )));
    }

    let he = 1.0 / eval_n as f64;
    let h_eval = h.eval_grid(eval_n);
    let mut dist = vec![0.0; eval_n * eval_n];
    for i in 0..eval_n {
        for j in 0..eval_n {
            let s = i * eval_n + j;
            if h_eval[s] <= level {
                continue;
            }
            let x = [i as f64 * he, j as f64 * he];
            // boundary is empty only when the whole torus is inside, which
            // the h_eval test already short-circuits.
            let mut best = f64::INFINITY;
            for b in &boundary {
                let d = periodic_dist_sq(x, *b);
                if d < best {
                    best = d;
                }
            }
            dist[s] = best.sqrt();
        }
    }
    Ok(dist)
}

/// Distance to the zero set U₀ = {h = 0}, resolved as the sublevel set at
/// the grid minimum plus a relative tolerance (the wells are isolated
/// points for the symbols in scope; the tolerance catches the nearest
/// reference cell).
pub fn distance_to_zero_set(h: &TrigPoly, eval_n: usize, ref_n: usize) -> Result<Vec<f64>> {
    let ref_samples = h.eval_grid(ref_n);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in &ref_samples {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let level = lo + 1e-6 * (hi - lo).max(1e-300);
    distance_to_sublevel(h, level, eval_n, ref_n)
}

/// Parameter lists for a localization scan.
#[derive(Debug, Clone)]
pub struct LocalizationParams {
    /// Neighborhood radii δ for the mass-outside map.
    pub deltas: Vec<f64>,
    /// Exponential weights α for ∫ e^{2α√p d(x, U_{h₀})}|u|².
    pub alphas: Vec<f64>,
    /// Sublevel threshold defining U_{h₀}.
    pub h0: f64,
    /// Moment orders k for (u, h^k u).
    pub moment_orders: Vec<u32>,
}

/// Concentration measurements for one eigensection.
#[derive(Debug, Clone)]
pub struct LocalizationReport {
    pub p: u32,
    pub eigen_index: usize,
    /// (δ, ∫_{d(x,U₀) ≥ δ} |u|²), ascending in δ.
    pub mass_outside: Vec<(f64, f64)>,
    /// (k, (u, h^k u)).
    pub moments: Vec<(u32, f64)>,
    /// (α, ∫ e^{2α√p d(x,U_{h₀})}|u|²).
    pub exp_weight: Vec<(f64, f64)>,
    /// Filled by the degenerate-well variant.
    pub degenerate_weight: Option<Vec<(f64, f64)>>,
}

/// Grid quadrature ∫ w(x)|u(x)|² dv for a grid-normalized section.
fn weighted_mass(section: &[Complex64], weights: impl Fn(usize) -> f64) -> f64 {
    let h2 = 1.0 / section.len() as f64;
    section
        .iter()
        .enumerate()
        .map(|(s, u)| weights(s) * u.norm_sqr())
        .sum::<f64>()
        * h2
}

/// Measures localization of `section` (grid-normalized, site i·n + j)
/// around the wells of `h`.
pub fn localization_report(
    section: &[Complex64],
    p: u32,
    eigen_index: usize,
    h: &TrigPoly,
    params: &LocalizationParams,
) -> Result<LocalizationReport> {
    let dim = section.len();
    let eval_n = (dim as f64).sqrt().round() as usize;
    if eval_n * eval_n != dim {
        return Err(Error::ShapeMismatch(format!(
            "section length {dim} is not a square grid"
        )));
    }
    let norm = weighted_mass(section, |_| 1.0);
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "section must be normalized under grid quadrature; got ‖u‖² = {norm:.8}"
        )));
    }

    let d_zero = distance_to_zero_set(h, eval_n, DISTANCE_REF_GRID)?;
    let d_sub = distance_to_sublevel(h, params.h0, eval_n, DISTANCE_REF_GRID)?;
    let h_samples = h.eval_grid(eval_n);

    let mut deltas = params.deltas.clone();
    deltas.sort_by(|a, b| a.total_cmp(b));
    let mass_outside = deltas
        .iter()
        .map(|&delta| {
            let mass = weighted_mass(section, |s| if d_zero[s] >= delta { 1.0 } else { 0.0 });
            (delta, mass)
        })
        .collect();

    let moments = params
        .moment_orders
        .iter()
        .map(|&k| {
            let m = weighted_mass(section, |s| h_samples[s].powi(k as i32));
            (k, m)
        })
        .collect();

    let sqrt_p = (p as f64).sqrt();
    let exp_weight = params
        .alphas
        .iter()
        .map(|&alpha| {
            let w = weighted_mass(section, |s| (2.0 * alpha * sqrt_p * d_sub[s]).exp());
            (alpha, w)
        })
        .collect();

    Ok(LocalizationReport {
        p,
        eigen_index,
        mass_outside,
        moments,
        exp_weight,
        degenerate_weight: None,
    })
}

/// Weighted decay integrals for a symbol vanishing like d(x,U₀)^{2k}: the
/// weight exponent scales as p^{1/(2k+1)} instead of √p.
#[derive(Debug, Clone)]
pub struct DegenerateReport {
    pub p: u32,
    /// Vanishing order parameter: h ≍ d(x,U₀)^{2k}.
    pub k: u32,
    /// The eigenvalue under test.
    pub lambda: f64,
    /// λ·p^{2k/(2k+1)}, the quantity the precondition bounds.
    pub lambda_scaled: f64,
    /// Whether λ < c₀·p^{-2k/(2k+1)} held.
    pub applicable: bool,
    /// (c, ∫ e^{2c·p^{1/(2k+1)} d(x,U₀)}|u|²).
    pub weights: Vec<(f64, f64)>,
}

/// Evaluates the degenerate-well weights e^{2c·p^{1/(2k+1)}d(x,U₀)} for
/// each requested c. The eigenvalue precondition λ < c₀·p^{-2k/(2k+1)} is
/// checked and reported, not enforced: a violating report comes back
/// marked non-applicable with the integrals still attached.
pub fn degenerate_well_report(
    section: &[Complex64],
    p: u32,
    lambda: f64,
    h: &TrigPoly,
    k: u32,
    c_list: &[f64],
    c0: f64,
) -> Result<DegenerateReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("degeneracy order k must be at least 1".into()));
    }
    let dim = section.len();
    let eval_n = (dim as f64).sqrt().round() as usize;
    if eval_n * eval_n != dim {
        return Err(Error::ShapeMismatch(format!(
            "section length {dim} is not a square grid"
        )));
    }
    let d_zero = distance_to_zero_set(h, eval_n, DISTANCE_REF_GRID)?;
    let exponent = 2.0 * k as f64 / (2.0 * k as f64 + 1.0);
    let rate = (p as f64).powf(1.0 / (2.0 * k as f64 + 1.0));
    let lambda_scaled = lambda * (p as f64).powf(exponent);
    let applicable = lambda_scaled < c0;
    let weights = c_list
        .iter()
        .map(|&c| {
            let w = weighted_mass(section, |s| (2.0 * c * rate * d_zero[s]).exp());
            (c, w)
        })
        .collect();
    Ok(DegenerateReport { p, k, lambda, lambda_scaled, applicable, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn well_symbol() -> TrigPoly {
        // h = 2 − cos2πx₁ − cos2πx₂, single zero at the origin.
        TrigPoly::constant(2.0)
            .add(&TrigPoly::cosine((1, 0), -1.0))
            .add(&TrigPoly::cosine((0, 1), -1.0))
    }

    fn flat_section(n: usize) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0); n * n]
    }

    #[test]
    fn distance_field_matches_the_point_well() {
        let h = well_symbol();
        let d = distance_to_zero_set(&h, 64, 512).unwrap();
        // d((0.5, 0), {0}) = 0.5 and d((0.25, 0.25), {0}) = √2/4.
        let tol = 2.0 * (1.0 / 512.0) * std::f64::consts::SQRT_2;
        assert_abs_diff_eq!(d[32 * 64], 0.5, epsilon = tol);
        assert_abs_diff_eq!(d[16 * 64 + 16], std::f64::consts::FRAC_1_SQRT_2 / 2.0, epsilon = tol);
        assert_eq!(d[0], 0.0);
        // Periodic wrap: (58/64, 0) is 6/64 away through the boundary.
        assert_abs_diff_eq!(d[58 * 64], 6.0 / 64.0, epsilon = 1e-12);
    }

    #[test]
    fn mass_outside_of_a_flat_section_measures_area() {
        let h = well_symbol();
        let params = LocalizationParams {
            deltas: vec![0.2],
            alphas: vec![],
            h0: 0.5,
            moment_orders: vec![],
        };
        let report = localization_report(&flat_section(128), 8, 0, &h, &params).unwrap();
        // Complement of a radius-0.2 disk around the single well.
        let want = 1.0 - std::f64::consts::PI * 0.04;
        assert_abs_diff_eq!(report.mass_outside[0].1, want, epsilon = 0.02);
    }

    #[test]
    fn mass_outside_is_monotone_in_delta() {
        let h = well_symbol();
        let params = LocalizationParams {
            deltas: vec![0.3, 0.1, 0.2, 0.05],
            alphas: vec![],
            h0: 0.5,
            moment_orders: vec![],
        };
        let report = localization_report(&flat_section(96), 4, 0, &h, &params).unwrap();
        for w in report.mass_outside.windows(2) {
            assert!(w[0].0 < w[1].0);
            assert!(w[0].1 >= w[1].1, "mass_outside increased with δ: {w:?}");
        }
    }

    #[test]
    fn constant_symbol_has_unit_moments() {
        let h = TrigPoly::constant(1.0);
        let params = LocalizationParams {
            deltas: vec![0.1],
            alphas: vec![0.0],
            h0: 2.0,
            moment_orders: vec![0, 1, 2, 5],
        };
        let report = localization_report(&flat_section(64), 16, 0, &h, &params).unwrap();
        for (_, m) in &report.moments {
            assert_abs_diff_eq!(*m, 1.0, epsilon = 1e-12);
        }
        // α = 0 weight is the plain norm; h ≡ 1 never exceeds h₀ = 2 so the
        // whole torus is U_{h₀} and every mass_outside entry vanishes.
        assert_abs_diff_eq!(report.exp_weight[0].1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.mass_outside[0].1, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn unnormalized_sections_are_rejected() {
        let h = well_symbol();
        let params = LocalizationParams {
            deltas: vec![0.1],
            alphas: vec![],
            h0: 0.5,
            moment_orders: vec![],
        };
        let mut section = flat_section(32);
        for u in &mut section {
            *u *= 2.0;
        }
        assert!(matches!(
            localization_report(&section, 4, 0, &h, &params),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn degenerate_weight_at_c_zero_is_the_norm() {
        let h = well_symbol();
        let quartic = h.mul(&h);
        let report =
            degenerate_well_report(&flat_section(64), 16, 0.01, &quartic, 2, &[0.0, 0.1], 5.0).unwrap();
        assert_abs_diff_eq!(report.weights[0].1, 1.0, epsilon = 1e-12);
        assert!(report.weights[1].1 >= 1.0);
        // λ·p^{4/5} = 0.01·16^{0.8} ≈ 0.092 < 5 → applicable.
        assert!(report.applicable);
        let hard = degenerate_well_report(&flat_section(64), 16, 10.0, &quartic, 2, &[0.0], 5.0).unwrap();
        assert!(!hard.applicable);
    }

    #[test]
    fn empty_sublevel_set_is_rejected() {
        let h = well_symbol();
        assert!(matches!(
            distance_to_sublevel(&h, -1.0, 32, 128),
            Err(Error::InvalidArgument(_))
        ));
    }
}
