//! Slow lattice oracles: stencil convergence order and cluster gap scaling.
//!
//! Both facts have closed-form references. For a constant field the lowest
//! Bochner eigenvalue is p·b̄ exactly, so the discretization error is
//! directly measurable and must shrink at the stencil's second order. For a
//! well field the renormalized spectrum splits into a cluster near 0 and a
//! continuum starting near 2p·min b, so the first eigenvalue above the
//! cluster, divided by p·min b, must stay in a fixed window as p grows.

use std::sync::OnceLock;

use toeplitz_wells::asymptotics::GridRule;
use toeplitz_wells::torus::cache::BasisCache;
use toeplitz_wells::torus::field::TorusField;
use toeplitz_wells::torus::laplacian::OperatorKind;

fn cache() -> &'static BasisCache {
    static CACHE: OnceLock<BasisCache> = OnceLock::new();
    CACHE.get_or_init(BasisCache::new)
}

#[test]
fn constant_field_stencil_converges_at_second_order() {
    let field = TorusField::constant(1).expect("constant field");
    let p = 8u32;
    let exact = p as f64 * field.mean();

    let errors: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&n| {
            let low = cache()
                .low_eigs(&field, p, n, OperatorKind::Bochner, 1, 3)
                .expect("lowest Bochner eigenvalue");
            (low.eigenvalues[0] - exact).abs()
        })
        .collect();

    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!(
            order >= 1.8,
            "convergence order {order:.2} below 2; errors {errors:?}"
        );
    }
}

#[test]
fn first_eigenvalue_above_the_cluster_scales_like_the_gap() {
    let field = TorusField::single_well(1, 0.1).expect("single well field");
    let mu0 = field.min_value();

    for p in [16u32, 32, 64] {
        let grid = GridRule::Auto.grid_for(&field, p);
        let basis = cache()
            .cluster_basis(&field, p, grid, OperatorKind::Renormalized, 11)
            .expect("cluster basis");
        let d_p = basis.d_p.expect("cluster dimension");
        assert_eq!(d_p, p as usize, "Riemann-Roch count at p = {p}");

        // Renormalized units: cluster near 0, continuum from about 2p·mu0.
        let first_above = basis.eigenvalues[d_p];
        let ratio = first_above / (p as f64 * mu0);
        assert!(
            (1.0..=3.0).contains(&ratio),
            "gap ratio {ratio:.3} at p = {p} (grid {grid})"
        );
    }
}
