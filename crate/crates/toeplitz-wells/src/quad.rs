//! Gauss-Legendre quadrature on intervals, squares, and copies of ℂⁿ.
//!
//! Integrands in this crate are Gaussians times polynomials, so a fixed
//! high-order rule on a truncated domain converges to machine precision once
//! the domain covers the effective support.

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; standard cosine initial
/// guesses converge in a handful of steps for any practical `n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "quadrature needs at least two nodes");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule scaled to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| half * w).collect(),
    )
}

/// Tensor rule for ∫_{ℂⁿ} g(w) dw over the polydisc-covering box
/// [-radius, radius]^{2n}, with dw the Lebesgue measure on ℝ^{2n}.
///
/// Calls `g` at every tensor node with the node's weight. `nodes_per_axis`
/// applies to each of the 2n real axes, so the cost is nodes^(2n).
pub fn integrate_complex<F>(n_complex: usize, radius: f64, nodes_per_axis: usize, mut g: F) -> Complex64
where
    F: FnMut(&[Complex64]) -> Complex64,
{
    let (xs, ws) = gauss_legendre_on(nodes_per_axis, -radius, radius);
    let dims = 2 * n_complex;
    let mut idx = vec![0usize; dims];
    let mut z = vec![Complex64::new(0.0, 0.0); n_complex];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let mut w = 1.0;
        for d in 0..dims {
            w *= ws[idx[d]];
        }
        for j in 0..n_complex {
            z[j] = Complex64::new(xs[idx[2 * j]], xs[idx[2 * j + 1]]);
        }
        total += w * g(&z);
        // Odometer increment over the tensor grid.
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < xs.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == dims {
                return total;
            }
        }
    }
}
