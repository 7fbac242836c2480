//! Config schema tests: validation errors name the offending key, defaults
//! are materialized into the resolved form, and keys an experiment does not
//! consume are rejected.

use std::path::PathBuf;

use toeplitz_wells_cli::config::{parse_config, resolve, ExperimentKind, RawConfig};
use toeplitz_wells_cli::error::CliError;

/// Writes `text` to a unique temp file and parses it.
fn parse(text: &str) -> Result<RawConfig, CliError> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let path = std::env::temp_dir().join(format!(
        "toeplitz-wells-config-{}-{}.json",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::write(&path, text).unwrap();
    let result = parse_config(&path);
    let _ = std::fs::remove_file(&path);
    result
}

fn resolved_json(kind: ExperimentKind, text: &str) -> serde_json::Value {
    let raw = parse(text).unwrap();
    let resolved = resolve(kind, raw, None).unwrap();
    serde_json::to_value(&resolved).unwrap()
}

fn resolve_err(kind: ExperimentKind, text: &str) -> String {
    let raw = parse(text).unwrap();
    resolve(kind, raw, None).unwrap_err().to_string()
}

#[test]
fn minimal_config_materializes_every_default() {
    let v = resolved_json(
        ExperimentKind::LandauLevels,
        r#"{"field": {"family": "constant", "m": 1}, "p": [8]}"#,
    );
    assert_eq!(v["experiment"], "landau-levels");
    assert_eq!(v["seed"], 0);
    assert_eq!(v["grid"], "auto");
    assert_eq!(v["landau"]["cluster_rel_tol"], 0.01);
    assert_eq!(v["landau"]["excited_rel_tol"], 0.05);
    assert_eq!(v["p"], serde_json::json!([8]));
    assert!(v.get("out_dir").is_none());
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    let err = parse(r#"{"field": {"family": "constant", "m": 1}, "p": [8], "mystery": 3}"#)
        .unwrap_err()
        .to_string();
    assert!(err.contains("mystery"), "error does not name the key: {err}");
}

#[test]
fn fractional_flux_is_a_type_error_at_its_path() {
    let err = parse(r#"{"field": {"family": "constant", "m": 1.5}, "p": [8]}"#)
        .unwrap_err()
        .to_string();
    assert!(err.contains("field.m"), "missing key path: {err}");
}

#[test]
fn negative_well_depth_is_rejected() {
    let err = resolve_err(
        ExperimentKind::BochnerSweep,
        r#"{"field": {"family": "single-well", "m": 1, "eps": -0.1}, "p": [8]}"#,
    );
    assert!(err.contains("field.eps"), "missing key path: {err}");
    assert!(err.contains("positive"), "unexpected message: {err}");
}

#[test]
fn family_and_raw_terms_conflict() {
    let err = resolve_err(
        ExperimentKind::BochnerSweep,
        r#"{"field": {"family": "constant", "m": 1, "terms": {"1,0": [0.1, 0.0]}}, "p": [8]}"#,
    );
    assert!(err.contains("not both"), "unexpected message: {err}");
}

#[test]
fn stated_experiment_must_match_the_subcommand() {
    let err = resolve_err(
        ExperimentKind::BochnerSweep,
        r#"{"experiment": "landau-levels", "field": {"family": "constant", "m": 1}, "p": [8]}"#,
    );
    assert!(
        err.contains("landau-levels") && err.contains("bochner-sweep"),
        "unexpected message: {err}"
    );
}

#[test]
fn keys_of_other_experiments_are_rejected() {
    let err = resolve_err(
        ExperimentKind::ModelSpectrum,
        r#"{"well": {"a": [1.0], "q": [1.0, 0.0, 0.0, 1.0]}, "field": {"family": "constant", "m": 1}}"#,
    );
    assert!(
        err.contains("field") && err.contains("not used by the model-spectrum"),
        "unexpected message: {err}"
    );
}

#[test]
fn p_list_alias_is_sorted_and_deduplicated() {
    let v = resolved_json(
        ExperimentKind::LandauLevels,
        r#"{"field": {"family": "constant", "m": 1}, "p_list": [4, 2, 2]}"#,
    );
    assert_eq!(v["p"], serde_json::json!([2, 4]));
}

#[test]
fn zero_tensor_power_is_rejected() {
    let err = resolve_err(
        ExperimentKind::LandauLevels,
        r#"{"field": {"family": "constant", "m": 1}, "p": [0, 4]}"#,
    );
    assert!(err.contains("`p`"), "missing key path: {err}");
}

#[test]
fn grid_override_is_recorded_in_the_resolved_form() {
    let raw = parse(r#"{"field": {"family": "constant", "m": 1}, "p": [8], "grid": "auto"}"#).unwrap();
    let resolved = resolve(ExperimentKind::LandauLevels, raw, Some(16)).unwrap();
    let v = serde_json::to_value(&resolved).unwrap();
    assert_eq!(v["grid"], serde_json::json!({ "fixed": 16 }));
}

#[test]
fn grid_override_has_no_meaning_for_the_model_well() {
    let raw = parse(r#"{"well": {"a": [1.0], "q": [1.0, 0.0, 0.0, 1.0]}}"#).unwrap();
    let err = resolve(ExperimentKind::ModelSpectrum, raw, Some(16))
        .unwrap_err()
        .to_string();
    assert!(err.contains("no lattice"), "unexpected message: {err}");
}

#[test]
fn landau_levels_requires_a_constant_field() {
    let err = resolve_err(
        ExperimentKind::LandauLevels,
        r#"{"field": {"family": "single-well", "m": 1, "eps": 0.1}, "p": [8]}"#,
    );
    assert!(err.contains("constant field"), "unexpected message: {err}");
}

#[test]
fn localization_scan_materializes_its_verdict_points() {
    let v = resolved_json(
        ExperimentKind::Localization,
        r#"{
            "field": {"family": "constant", "m": 1},
            "p": [4, 8],
            "symbols": {"h": {"constant": 2.0, "cosines": [
                {"k": [1, 0], "amplitude": -1.0},
                {"k": [0, 1], "amplitude": -1.0}
            ]}},
            "localization": {"deltas": [0.1, 0.3], "mass_delta": 0.15, "moment_orders": [2]}
        }"#,
    );
    let deltas: Vec<f64> = serde_json::from_value(v["localization"]["deltas"].clone()).unwrap();
    assert_eq!(deltas, vec![0.1, 0.15, 0.3]);
    let orders: Vec<u32> =
        serde_json::from_value(v["localization"]["moment_orders"].clone()).unwrap();
    assert_eq!(orders, vec![1, 2]);
}

#[test]
fn required_symbols_are_named_when_missing() {
    let err = resolve_err(
        ExperimentKind::ToeplitzSpectrum,
        r#"{"field": {"family": "constant", "m": 1}, "p": [4]}"#,
    );
    assert!(err.contains("symbols.h"), "missing key path: {err}");
}

#[test]
fn empty_symbols_are_rejected() {
    let err = resolve_err(
        ExperimentKind::ToeplitzSpectrum,
        r#"{"field": {"family": "constant", "m": 1}, "p": [4], "symbols": {"h": {}}}"#,
    );
    assert!(err.contains("symbols.h") && err.contains("empty"), "unexpected message: {err}");
}

#[test]
fn extra_symbols_are_rejected() {
    let err = resolve_err(
        ExperimentKind::AlgebraDefects,
        r#"{"field": {"family": "constant", "m": 1}, "p": [4],
            "symbols": {"w": {"constant": 1.0}}}"#,
    );
    assert!(err.contains("symbols.w"), "unexpected message: {err}");
}

#[test]
fn malformed_coefficient_keys_are_rejected() {
    let err = resolve_err(
        ExperimentKind::ToeplitzSpectrum,
        r#"{"field": {"family": "constant", "m": 1}, "p": [4],
            "symbols": {"h": {"terms": {"1;0": [1.0, 0.0]}}}}"#,
    );
    assert!(err.contains("k1,k2"), "unexpected message: {err}");
}

#[test]
fn missing_config_file_reports_the_path() {
    let path = PathBuf::from("/no/such/config.json");
    let err = parse_config(&path).unwrap_err().to_string();
    assert!(err.contains("/no/such/config.json"), "unexpected message: {err}");
}

#[test]
fn resolved_configs_reparse_to_themselves() {
    // The config echoed into report.json must be a valid config file whose
    // resolution is a fixed point, so a report can be rerun as-is.
    let cases = [
        (
            ExperimentKind::ModelSpectrum,
            r#"{"well": {"a": [1.0, 2.0], "q": [
                1.0, 0.0, 0.0, 0.0,  0.0, 1.0, 0.0, 0.0,
                0.0, 0.0, 1.0, 0.0,  0.0, 0.0, 0.0, 1.0]}}"#,
        ),
        (
            ExperimentKind::LandauLevels,
            r#"{"field": {"family": "constant", "m": 2}, "p": [4, 8], "seed": 7}"#,
        ),
        (
            ExperimentKind::ToeplitzSweep,
            r#"{"field": {"family": "single-well", "m": 1, "eps": 0.1}, "p": [16, 32],
                "grid": {"fixed": 32},
                "symbols": {"h": {"constant": 2.0, "cosines": [
                    {"k": [1, 0], "amplitude": -1.0}, {"k": [0, 1], "amplitude": -1.0}]}}}"#,
        ),
        (
            ExperimentKind::Localization,
            r#"{"field": {"family": "constant", "m": 1}, "p": [8, 16],
                "symbols": {"h": {"terms": {"0,0": [2.0, 0.0], "1,0": [-0.5, 0.0],
                                            "-1,0": [-0.5, 0.0]}}},
                "localization": {"degenerate": {"k": 2}}}"#,
        ),
        (
            ExperimentKind::AlgebraDefects,
            r#"{"field": {"family": "constant", "m": 1}, "p": [8, 16, 32]}"#,
        ),
    ];
    for (kind, text) in cases {
        let first = resolved_json(kind, text);
        let echoed = serde_json::to_string(&first).unwrap();
        let second = resolved_json(kind, &echoed);
        assert_eq!(first, second, "{kind:?} did not round trip");
    }
}

#[test]
fn defaults_for_algebra_defects_fill_both_symbols() {
    let v = resolved_json(
        ExperimentKind::AlgebraDefects,
        r#"{"field": {"family": "constant", "m": 1}, "p": [8, 16, 32]}"#,
    );
    assert_eq!(v["symbols"]["f"]["cosines"][0]["k"], serde_json::json!([1, 0]));
    assert_eq!(v["symbols"]["g"]["cosines"][0]["k"], serde_json::json!([0, 1]));
    assert_eq!(v["defects"]["product_slope_center"], -1.0);
    assert_eq!(v["defects"]["min_r_squared"], 0.9);
}
