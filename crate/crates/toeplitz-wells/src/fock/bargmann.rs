//! Bargmann transform checks against Hermite functions.
//!
//! B maps L²(ℝ) onto the Fock space by
//! Bf(z) = π^{-1/4} ∫ exp[-(½z² + ½x² - √2 zx)] f(x) dx,
//! sending the Hermite function h_j to z^j/√(j!) (the constant fixed by the
//! j = 0 case, Bh₀ = 1) and intertwining the raising operator
//! â* = (x - d/dx)/√2 with multiplication by z. Everything here is evaluated
//! by Gauss-Legendre quadrature so the algebraic layers have an independent
//! analytic witness.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre_on;

/// Normalized Hermite function h_j(x), ‖h_j‖_{L²} = 1, computed by the
/// stable recurrence h_{j+1} = x√(2/(j+1)) h_j - √(j/(j+1)) h_{j-1}.
pub fn hermite_function(j: u32, x: f64) -> f64 {
    let h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if j == 0 {
        return h0;
    }
    let mut prev = h0;
    let mut cur = std::f64::consts::SQRT_2 * x * h0;
    for m in 1..j {
        let mf = m as f64;
        let next = x * (2.0 / (mf + 1.0)).sqrt() * cur - (mf / (mf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// (â* h_j)(x) = (x h_j - h_j')/√2, with the derivative taken through the
/// identity h_j' = √(2j) h_{j-1} - x h_j rather than through the raising
/// recurrence, so the intertwining check does not assume its own conclusion.
pub fn hermite_raised(j: u32, x: f64) -> f64 {
    let hj = hermite_function(j, x);
    let deriv = if j == 0 {
        -x * hj
    } else {
        (2.0 * j as f64).sqrt() * hermite_function(j - 1, x) - x * hj
    };
    (x * hj - deriv) / std::f64::consts::SQRT_2
}

/// Bargmann transform of a real-line function at the point z, by
/// Gauss-Legendre quadrature on [-radius, radius].
pub fn bargmann_transform<F: Fn(f64) -> f64>(
    f: &F,
    z: Complex64,
    radius: f64,
    nodes: usize,
) -> Complex64 {
    let (xs, ws) = gauss_legendre_on(nodes, -radius, radius);
    let prefactor = std::f64::consts::PI.powf(-0.25);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&x, &w) in xs.iter().zip(&ws) {
        let exponent = -(0.5 * z * z + Complex64::new(0.5 * x * x, 0.0)
            - std::f64::consts::SQRT_2 * z * x);
        acc += exponent.exp() * f(x) * w;
    }
    acc * prefactor
}

/// Deterministic sample points with |z| ≤ 1.3 spread over ten phases.
fn sample_points() -> Vec<Complex64> {
    (0..10)
        .map(|k| {
            let r = 0.2 + 0.12 * k as f64;
            let phi = 2.0 * std::f64::consts::PI * k as f64 / 10.0;
            Complex64::from_polar(r, phi)
        })
        .collect()
}

fn converged_transform<F: Fn(f64) -> f64>(
    f: &F,
    z: Complex64,
    radius: f64,
    nodes: usize,
) -> Result<Complex64> {
    let coarse = bargmann_transform(f, z, radius, nodes);
    let fine = bargmann_transform(f, z, radius, 2 * nodes);
    if (coarse - fine).norm() > 1e-9 {
        return Err(Error::QuadratureNotConverged(format!(
            "Bargmann quadrature at z = {z} moved by {:.3e} when doubling {nodes} nodes",
            (coarse - fine).norm()
        )));
    }
    Ok(fine)
}

/// Max deviation of B h_j from z^j/√(j!) over the sample points.
pub fn bargmann_hermite_check(j: u32, radius: f64, nodes: usize) -> Result<f64> {
    let f = |x: f64| hermite_function(j, x);
    let ln_fact: f64 = (1..=j).map(|m| (m as f64).ln()).sum();
    let mut worst: f64 = 0.0;
    for z in sample_points() {
        let got = converged_transform(&f, z, radius, nodes)?;
        let want = z.powu(j) * (-0.5 * ln_fact).exp();
        worst = worst.max((got - want).norm());
    }
    Ok(worst)
}

/// Max relative deviation of B(â* h_j) from z · B(h_j) over the sample
/// points: the raising operator must intertwine with multiplication by z.
pub fn bargmann_ladder_check(j: u32, radius: f64, nodes: usize) -> Result<f64> {
    let raised = |x: f64| hermite_raised(j, x);
    let plain = |x: f64| hermite_function(j, x);
    let mut worst: f64 = 0.0;
    for z in sample_points() {
        let lhs = converged_transform(&raised, z, radius, nodes)?;
        let rhs = z * converged_transform(&plain, z, radius, nodes)?;
        worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1e-8));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const RADIUS: f64 = 10.0;
    const NODES: usize = 160;

    #[test]
    fn hermite_functions_are_orthonormal_under_quadrature() {
        let (xs, ws) = gauss_legendre_on(200, -RADIUS, RADIUS);
        for i in 0..=6u32 {
            for j in i..=6u32 {
                let integral: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(&x, &w)| hermite_function(i, x) * hermite_function(j, x) * w)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(integral, want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn ground_state_maps_to_the_constant_one() {
        let residual = bargmann_hermite_check(0, RADIUS, NODES).unwrap();
        assert!(residual < 1e-8, "ground-state residual {residual}");
    }

    #[test]
    fn raising_operator_becomes_multiplication_by_z() {
        for j in [0u32, 1, 2, 4] {
            let dev = bargmann_ladder_check(j, RADIUS, NODES).unwrap();
            assert!(dev < 1e-8, "ladder deviation {dev} at j = {j}");
        }
    }

    #[test]
    fn third_hermite_matches_direct_quadrature() {
        let residual = bargmann_hermite_check(3, RADIUS, NODES).unwrap();
        assert!(residual < 1e-6, "j = 3 residual {residual}");
    }

    #[test]
    fn raised_sample_equals_scaled_next_hermite() {
        // â* h_j = √(j+1) h_{j+1} pointwise; the quadrature checks above
        // must be probing a correctly built integrand.
        for j in 0..5u32 {
            for &x in &[-1.7, -0.3, 0.0, 0.9, 2.4] {
                let want = ((j + 1) as f64).sqrt() * hermite_function(j + 1, x);
                assert_abs_diff_eq!(hermite_raised(j, x), want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn starved_quadrature_reports_non_convergence() {
        let err = bargmann_hermite_check(6, RADIUS, 8);
        assert!(matches!(err, Err(Error::QuadratureNotConverged(_))));
    }
}
