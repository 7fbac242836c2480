//! Least-squares fits and grid-refinement error estimates.
//!
//! The theorems under test are asymptotic: they predict power-law decay of
//! residuals in the tensor power p and say nothing about constants. The
//! fits here turn a finite sweep into checkable numbers: a log–log slope
//! with its r², an extrapolated limit against p^{-1/2}, and an order-2
//! Richardson estimate separating discretization error from the genuine
//! semiclassical remainder.

use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares power law v ≈ amplitude · p^exponent in log–log space.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Fits (p, v) data to amplitude · p^exponent by least squares on
/// (ln p, ln v). Points with nonpositive p or v are rejected; fewer than
/// three survivors is an error, as is a degenerate abscissa.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(p, v)| p > 0.0 && v > 0.0)
        .map(|&(p, v)| (p.ln(), v.ln()))
        .collect();
    if logs.len() < 3 {
        return Err(Error::FitFailed(format!(
            "power-law fit needs at least 3 positive points, got {} of {}",
            logs.len(),
            points.len()
        )));
    }
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::FitFailed(
            "power-law fit needs at least two distinct abscissae".into(),
        ));
    }
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = logs
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = logs.iter().map(|&(_, y)| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(PowerLawFit {
        amplitude: intercept.exp(),
        exponent: slope,
        r_squared,
        points_used: logs.len(),
    })
}

/// Order-2 Richardson estimate of the discretization error in the finer
/// value, given the same quantity at grid_n and 2·grid_n:
/// |v_coarse − v_fine| / (2² − 1).
pub fn richardson_gap(coarse: f64, fine: f64) -> f64 {
    (coarse - fine).abs() / 3.0
}

/// Affine fit y ≈ limit + coefficient · p^{-1/2}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InverseSqrtFit {
    pub limit: f64,
    pub coefficient: f64,
    pub points_used: usize,
}

/// Extrapolates (p, y) data to p → ∞ assuming a p^{-1/2} leading
/// correction. Needs at least two distinct p.
pub fn fit_against_inverse_sqrt(points: &[(f64, f64)]) -> Result<InverseSqrtFit> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(p, _)| p > 0.0)
        .map(|&(p, y)| (p.powf(-0.5), y))
        .collect();
    if data.len() < 2 {
        return Err(Error::FitFailed(format!(
            "inverse-sqrt fit needs at least 2 points with p > 0, got {}",
            data.len()
        )));
    }
    let n = data.len() as f64;
    let mean_x = data.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let mean_y = data.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = data.iter().map(|&(x, _)| (x - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::FitFailed(
            "inverse-sqrt fit needs at least two distinct p".into(),
        ));
    }
    let sxy: f64 = data.iter().map(|&(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let coefficient = sxy / sxx;
    Ok(InverseSqrtFit {
        limit: mean_y - coefficient * mean_x,
        coefficient,
        points_used: data.len(),
    })
}

/// Decay exponent of a drifting sequence y(p) = L + K·p^σ with unknown
/// limit L: successive differences |y(p_{i+1}) − y(p_i)| scale like p^σ,
/// so their log–log slope against the geometric mean √(p_i p_{i+1})
/// estimates σ without knowing L. Differences that vanish to rounding are
/// dropped; fewer than two surviving differences is an error.
pub fn drift_exponent(points: &[(f64, f64)]) -> Result<f64> {
    let mut sorted: Vec<(f64, f64)> = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = sorted.iter().map(|&(_, y)| y.abs()).fold(0.0, f64::max);
    let diffs: Vec<(f64, f64)> = sorted
        .windows(2)
        .filter_map(|w| {
            let d = (w[1].1 - w[0].1).abs();
            (d > 1e-14 * scale).then(|| ((w[0].0 * w[1].0).sqrt(), d))
        })
        .collect();
    match diffs.len() {
        0 | 1 => Err(Error::FitFailed(format!(
            "drift exponent needs at least 2 nonvanishing successive differences, got {}",
            diffs.len()
        ))),
        2 => {
            let (x1, d1) = diffs[0];
            let (x2, d2) = diffs[1];
            Ok((d2 / d1).ln() / (x2 / x1).ln())
        }
        _ => Ok(fit_power_law(&diffs)?.exponent),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_inverse_law_is_recovered() {
        let points: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0].iter().map(|&p| (p, 5.0 / p)).collect();
        let fit = fit_power_law(&points).unwrap();
        assert_abs_diff_eq!(fit.amplitude, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.exponent, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        assert_eq!(fit.points_used, 4);
    }

    #[test]
    fn noisy_half_law_lands_in_the_window() {
        // 1% multiplicative noise from a fixed quasi-random phase.
        let points: Vec<(f64, f64)> = (3..11)
            .map(|i| {
                let p = f64::powi(2.0, i);
                let noise = 1.0 + 0.01 * (3.0 * i as f64 + 1.0).sin();
                (p, 2.0 * p.powf(-0.5) * noise)
            })
            .collect();
        let fit = fit_power_law(&points).unwrap();
        assert!(
            (fit.exponent + 0.5).abs() < 0.05,
            "exponent {} drifted outside -0.5 ± 0.05",
            fit.exponent
        );
    }

    #[test]
    fn constant_data_has_zero_exponent() {
        let points = vec![(8.0, 3.25), (16.0, 3.25), (32.0, 3.25), (64.0, 3.25)];
        let fit = fit_power_law(&points).unwrap();
        assert!(fit.exponent.abs() <= 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn nonpositive_values_are_rejected_pointwise() {
        let fit = fit_power_law(&[(2.0, 1.0), (4.0, 0.5), (8.0, 0.25), (16.0, -1.0), (32.0, 0.0)])
            .unwrap();
        assert_eq!(fit.points_used, 3);
        assert_abs_diff_eq!(fit.exponent, -1.0, epsilon = 1e-12);

        let err = fit_power_law(&[(2.0, 1.0), (4.0, 0.5), (8.0, 0.0)]).unwrap_err();
        assert!(err.to_string().contains("at least 3"));
    }

    #[test]
    fn richardson_gap_arithmetic() {
        assert_eq!(richardson_gap(1.5, 1.5), 0.0);
        assert_abs_diff_eq!(richardson_gap(1.04, 1.01), 0.01, epsilon = 1e-12);
    }

    #[test]
    fn inverse_sqrt_fit_recovers_affine_data() {
        let points: Vec<(f64, f64)> =
            [16.0f64, 32.0, 64.0, 128.0].iter().map(|&p| (p, 7.0 + 3.0 * p.powf(-0.5))).collect();
        let fit = fit_against_inverse_sqrt(&points).unwrap();
        assert_abs_diff_eq!(fit.limit, 7.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.coefficient, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn drift_exponent_sees_through_the_unknown_limit() {
        let points: Vec<(f64, f64)> =
            [16.0f64, 32.0, 64.0, 128.0].iter().map(|&p| (p, 3.0 + 10.0 * p.powf(-0.5))).collect();
        // Differences are exactly proportional to p^{-1/2} at the geometric
        // mean abscissa, so the fit is exact up to rounding.
        assert_abs_diff_eq!(drift_exponent(&points).unwrap(), -0.5, epsilon = 1e-10);

        let flat = vec![(16.0, 1.0), (32.0, 1.0), (64.0, 1.0)];
        assert!(drift_exponent(&flat).is_err());
    }
}
