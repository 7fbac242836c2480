//! Generative invariants of the quantization layers.
//!
//! The compression T_f = Π M_f Π is linear and positive with spectrum inside
//! the range of f, because every eigenvalue is a Rayleigh quotient of the
//! multiplication operator over an orthonormal family. The anti-Wick route on
//! Fock space is Hermitian for self-adjoint symbols, variational in the
//! truncation degree, and agrees with the closed-form metaplectic spectrum
//! for quadratic wells. These hold for arbitrary admissible inputs, so they
//! are exercised over random symbols and wells rather than fixed cases.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use proptest::prelude::*;

use toeplitz_wells::fock::antiwick::{
    antiwick_matrix, antiwick_to_weyl_quadratic, weyl_quadratic_spectrum, AntiWickPolynomial,
};
use toeplitz_wells::fock::FockTruncation;
use toeplitz_wells::linalg::dense;
use toeplitz_wells::modelwell::{multiwell_spectrum, QuadraticWell};
use toeplitz_wells::symbols::TrigPoly;
use toeplitz_wells::toeplitz::{
    localization_report, product_defect, toeplitz_matrix, LocalizationParams,
};
use toeplitz_wells::torus::cache::BasisCache;
use toeplitz_wells::torus::field::TorusField;
use toeplitz_wells::torus::laplacian::OperatorKind;
use toeplitz_wells::torus::spectrum::LowSpectrum;

/// Shared Bergman-space basis: constant field, p = 4, dense grid.
fn flat_basis() -> Arc<LowSpectrum> {
    static BASIS: OnceLock<Arc<LowSpectrum>> = OnceLock::new();
    Arc::clone(BASIS.get_or_init(|| {
        let field = TorusField::constant(1).expect("constant field");
        BasisCache::new()
            .cluster_basis(&field, 4, 24, OperatorKind::Renormalized, 7)
            .expect("flat cluster basis")
    }))
}

fn flat_field() -> TorusField {
    TorusField::constant(1).expect("constant field")
}

/// Random real trigonometric polynomial: a constant plus a few cosine pairs.
fn real_poly() -> impl Strategy<Value = TrigPoly> {
    (
        -1.0f64..1.0,
        prop::collection::vec(((-2i32..=2, -2i32..=2), -1.0f64..1.0), 0..4),
    )
        .prop_map(|(c0, terms)| {
            let mut f = TrigPoly::constant(c0);
            for ((k1, k2), amp) in terms {
                if (k1, k2) == (0, 0) {
                    f = f.add(&TrigPoly::constant(amp));
                } else {
                    f = f.add(&TrigPoly::cosine((k1, k2), amp));
                }
            }
            f
        })
}

/// Positive-definite 2x2 quadratic form, off-diagonal bounded away from the
/// degenerate edge so the truncated route converges well inside the degree
/// used by the tests.
fn pd_form() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.8f64..2.5, 0.8f64..2.5, -0.5f64..0.5)
        .prop_map(|(q11, q22, t)| (q11, (q11 * q22).sqrt() * t, q22))
}

fn n1_trunc(max_degree: u32) -> FockTruncation {
    FockTruncation::new(max_degree, vec![1.0]).expect("n = 1 truncation")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Compression is linear in the symbol, entry by entry.
    #[test]
    fn toeplitz_compression_is_linear(
        f in real_poly(),
        g in real_poly(),
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
    ) {
        let basis = flat_basis();
        let ca = Complex64::new(alpha, 0.0);
        let cb = Complex64::new(beta, 0.0);
        let combo = f.clone().scale(ca).add(&g.clone().scale(cb));

        let tc = toeplitz_matrix(&combo, &basis).unwrap();
        let tf = toeplitz_matrix(&f, &basis).unwrap();
        let tg = toeplitz_matrix(&g, &basis).unwrap();

        let d = tc.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let lhs = tc.entries()[(i, j)];
                let rhs = tf.entries()[(i, j)] * ca + tg.entries()[(i, j)] * cb;
                worst = worst.max((lhs - rhs).norm());
            }
        }
        prop_assert!(worst <= 1e-10, "linearity defect {worst:.3e}");
    }

    /// Every Toeplitz eigenvalue is a Rayleigh quotient of multiplication by
    /// f, so the spectrum sits inside the sampled range of the symbol.
    #[test]
    fn toeplitz_spectrum_stays_in_symbol_range(f in real_poly()) {
        let basis = flat_basis();
        let tm = toeplitz_matrix(&f, &basis).unwrap();
        let eigs = tm.eigenvalues().unwrap();

        let samples = f.eval_grid(basis.grid_n);
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for lambda in &eigs {
            prop_assert!(
                *lambda >= lo - 1e-8 && *lambda <= hi + 1e-8,
                "eigenvalue {lambda} outside symbol range [{lo}, {hi}]"
            );
        }
    }

    /// A nonnegative symbol compresses to a positive semi-definite operator.
    #[test]
    fn nonnegative_symbols_compress_positively(g in real_poly()) {
        let basis = flat_basis();
        let f = g.mul(&g);
        let tm = toeplitz_matrix(&f, &basis).unwrap();
        let low = tm.eigenvalues().unwrap()[0];
        prop_assert!(low >= -1e-10, "lowest eigenvalue {low:.3e} of a square symbol");
    }

    /// Anti-Wick matrices of self-adjoint symbols are Hermitian.
    #[test]
    fn antiwick_matrices_of_self_adjoint_symbols_are_hermitian(
        terms in prop::collection::vec(
            (0u32..=2, 0u32..=2, -1.0f64..1.0, -1.0f64..1.0),
            1..5,
        ),
    ) {
        let mut p = AntiWickPolynomial::new(1);
        for (k, l, re, im) in terms {
            let c = Complex64::new(re, im);
            p.add_term(vec![k], vec![l], c).unwrap();
            p.add_term(vec![l], vec![k], c.conj()).unwrap();
        }
        prop_assert!(p.self_adjoint_defect() <= 1e-12);

        let aw = antiwick_matrix(&p, &n1_trunc(10)).unwrap();
        let defect = dense::hermitian_defect(&aw.matrix);
        prop_assert!(defect <= 1e-10, "hermiticity defect {defect:.3e}");
    }

    /// A merged multiwell spectrum is ascending, and exact ties between
    /// identical wells keep the well order.
    #[test]
    fn multiwell_merge_is_sorted_and_stable(
        a1 in 0.5f64..2.0,
        (q11, q12, q22) in pd_form(),
        shift in -1.0f64..1.0,
    ) {
        let q = vec![q11, q12, q12, q22];
        let first = QuadraticWell::new(1, vec![a1], q.clone(), shift, "first".into()).unwrap();
        let second = QuadraticWell::new(1, vec![a1], q, shift, "second".into()).unwrap();

        let merged = multiwell_spectrum(&[first, second], 8).unwrap();
        prop_assert_eq!(merged.len(), 8);
        for w in merged.levels.windows(2) {
            prop_assert!(
                (w[0].value, w[0].well_index) <= (w[1].value, w[1].well_index),
                "merge out of order: {:?} then {:?}",
                (w[0].value, w[0].well_index),
                (w[1].value, w[1].well_index)
            );
        }
        // Identical wells produce identical levels; each value must appear
        // once per well, in well order.
        for pair in merged.levels.chunks(2) {
            prop_assert_eq!(pair[0].value, pair[1].value);
            prop_assert_eq!(pair[0].well_index, 0);
            prop_assert_eq!(pair[1].well_index, 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The commutator defect is symmetric in its two symbols: swapping f and
    /// g negates both the commutator and the bracket, leaving the norm fixed.
    #[test]
    fn commutator_defect_is_symmetric(f in real_poly(), g in real_poly()) {
        let basis = flat_basis();
        let field = flat_field();
        let fg = product_defect(&f, &g, &field, &basis).unwrap();
        let gf = product_defect(&g, &f, &field, &basis).unwrap();
        prop_assert!(
            (fg.norm_comm - gf.norm_comm).abs() <= 1e-10 * (1.0 + fg.norm_comm),
            "norm_comm asymmetry: {} vs {}",
            fg.norm_comm,
            gf.norm_comm
        );
    }

    /// Truncated anti-Wick spectra agree with the closed-form metaplectic
    /// route for positive-definite quadratic wells.
    #[test]
    fn truncated_and_closed_form_routes_agree((q11, q12, q22) in pd_form()) {
        let p = AntiWickPolynomial::from_real_quadratic_n1(q11, q12, q22);
        let w = antiwick_to_weyl_quadratic(&p).unwrap();
        let exact = weyl_quadratic_spectrum(&w, 4).unwrap();

        let aw = antiwick_matrix(&p, &n1_trunc(120)).unwrap();
        let eigs = dense::hermitian_eigenvalues(&aw.matrix).unwrap();
        for (got, want) in eigs.iter().zip(&exact) {
            prop_assert!(
                (got - want).abs() <= 1e-8,
                "route mismatch {got} vs {want} for q = ({q11}, {q12}, {q22})"
            );
        }
    }

    /// The lowest truncated eigenvalue never rises when the degree grows:
    /// larger truncations enlarge the variational trial space.
    #[test]
    fn truncation_is_variational_in_the_degree(
        (q11, q12, q22) in pd_form(),
        step in 1u32..4,
    ) {
        let p = AntiWickPolynomial::from_real_quadratic_n1(q11, q12, q22);
        let mut prev = f64::INFINITY;
        for deg in [8, 8 + 4 * step, 8 + 8 * step] {
            let aw = antiwick_matrix(&p, &n1_trunc(deg)).unwrap();
            let low = dense::hermitian_eigenvalues(&aw.matrix).unwrap()[0];
            prop_assert!(
                low <= prev + 1e-12,
                "lowest eigenvalue rose from {prev} to {low} at degree {deg}"
            );
            prev = low;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Localization measurements of any normalized section are genuine
    /// integrals: masses lie in [0, 1] and shrink as the neighborhood grows,
    /// moments of a nonnegative symbol are nonnegative, and an exponential
    /// weight at least preserves the total mass.
    #[test]
    fn localization_reports_behave_like_measures(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
    ) {
        let basis = flat_basis();
        let d_p = basis.d_p.expect("cluster dimension");
        prop_assert_eq!(d_p, 4);

        let dim = basis.eigenvectors[0].len();
        let mut section = vec![Complex64::new(0.0, 0.0); dim];
        for (c, vecj) in coeffs.iter().zip(&basis.eigenvectors) {
            let c = Complex64::new(c.0, c.1);
            for (s, v) in section.iter_mut().zip(vecj) {
                *s += c * v;
            }
        }
        let h2 = 1.0 / dim as f64;
        let norm = (section.iter().map(|v| v.norm_sqr()).sum::<f64>() * h2).sqrt();
        prop_assume!(norm > 1e-3);
        for v in &mut section {
            *v /= norm;
        }

        let h = TrigPoly::constant(2.0)
            .add(&TrigPoly::cosine((1, 0), -1.0))
            .add(&TrigPoly::cosine((0, 1), -1.0));
        let params = LocalizationParams {
            deltas: vec![0.05, 0.1, 0.2, 0.4],
            alphas: vec![0.25, 0.5],
            h0: 0.2,
            moment_orders: vec![1, 2],
        };
        let report = localization_report(&section, basis.p, 0, &h, &params).unwrap();

        let mut prev = f64::INFINITY;
        for (delta, mass) in &report.mass_outside {
            prop_assert!(*mass >= 0.0 && *mass <= 1.0 + 1e-9, "mass {mass} at delta {delta}");
            prop_assert!(*mass <= prev + 1e-12, "mass grew with delta at {delta}");
            prev = *mass;
        }
        for (k, moment) in &report.moments {
            prop_assert!(*moment >= -1e-12, "negative moment {moment} at order {k}");
        }
        for (alpha, weight) in &report.exp_weight {
            prop_assert!(*weight >= 1.0 - 1e-9, "weight {weight} below total mass at alpha {alpha}");
        }
    }
}
