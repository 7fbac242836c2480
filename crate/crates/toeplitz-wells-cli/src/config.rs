//! JSON experiment configuration: schema, validation, and resolution.
//!
//! A config file is a single JSON object. Which keys are meaningful depends
//! on the experiment, which is chosen by the subcommand; an `experiment` key
//! in the file is optional and must agree with the subcommand when present.
//! Keys an experiment does not consume are rejected, not ignored, so a
//! config cannot silently carry dead settings. [`resolve`] materializes
//! every default into a [`ResolvedConfig`], and that resolved form (not the
//! raw file) is echoed into `report.json`, so a report always records the
//! exact knobs that produced it.
//!
//! Symbols are trigonometric polynomials given as any combination of
//! `constant`, `cosines` (amplitude times cos 2πk·x), and raw Fourier
//! `terms` keyed `"k1,k2"` with `[re, im]` values. Fields take a closed-form
//! `family` (`constant`, `single-well`, `double-well`) or raw `terms`, never
//! both, plus the integer flux `m`; fractional flux fails integer parsing by
//! construction.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use toeplitz_wells::asymptotics::{GridRule, SweepThresholds};
use toeplitz_wells::symbols::TrigPoly;
use toeplitz_wells::torus::field::{field_from_raw_terms, TorusField};

use crate::error::{CliError, Result};

/// The seven experiment pipelines; subcommand names equal these kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ModelSpectrum,
    LandauLevels,
    ToeplitzSpectrum,
    BochnerSweep,
    ToeplitzSweep,
    Localization,
    AlgebraDefects,
}

impl ExperimentKind {
    pub const fn name(self) -> &'static str {
        match self {
            ExperimentKind::ModelSpectrum => "model-spectrum",
            ExperimentKind::LandauLevels => "landau-levels",
            ExperimentKind::ToeplitzSpectrum => "toeplitz-spectrum",
            ExperimentKind::BochnerSweep => "bochner-sweep",
            ExperimentKind::ToeplitzSweep => "toeplitz-sweep",
            ExperimentKind::Localization => "localization",
            ExperimentKind::AlgebraDefects => "algebra-defects",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Raw Fourier coefficients keyed `"k1,k2"`, values `[re, im]`.
pub type CoeffMap = BTreeMap<String, [f64; 2]>;

/// Named symbols, echoed under the same `symbols` key the file uses.
pub type SymbolTable = BTreeMap<String, SymbolSpec>;

/// One cosine term: `amplitude · cos(2π k·x)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineSpec {
    pub k: [i32; 2],
    pub amplitude: f64,
}

/// A real trigonometric polynomial assembled from the three term sources.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cosines: Vec<CosineSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub terms: CoeffMap,
}

impl SymbolSpec {
    /// A pure cosine symbol, used for defaults.
    pub fn cosine(k: [i32; 2], amplitude: f64) -> Self {
        SymbolSpec {
            constant: None,
            cosines: vec![CosineSpec { k, amplitude }],
            terms: BTreeMap::new(),
        }
    }

    /// Builds the trig polynomial; `path` names this symbol in errors.
    pub fn build(&self, path: &str) -> Result<TrigPoly> {
        let mut poly = TrigPoly::zero();
        if let Some(c) = self.constant {
            poly = poly.add(&TrigPoly::constant(c));
        }
        for cs in &self.cosines {
            poly = poly.add(&TrigPoly::cosine((cs.k[0], cs.k[1]), cs.amplitude));
        }
        for (key, &[re, im]) in &self.terms {
            let k = parse_coeff_key(key, &format!("{path}.terms"))?;
            poly.add_term(k, num_complex::Complex64::new(re, im));
        }
        if poly.is_zero() {
            return Err(CliError::config(
                path,
                "symbol is empty; give at least one of constant, cosines, terms",
            ));
        }
        Ok(poly)
    }
}

/// Closed-form magnetic field families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldFamily {
    Constant,
    SingleWell,
    DoubleWell,
}

/// Magnetic field: integer flux plus either a family or raw coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FieldFamily>,
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<CoeffMap>,
}

impl FieldSpec {
    /// Validates the cross-key rules and builds the field.
    pub fn build(&self) -> Result<TorusField> {
        if self.m == 0 {
            return Err(CliError::config("field.m", "flux must be at least 1"));
        }
        match (self.family, &self.terms) {
            (Some(_), Some(_)) => Err(CliError::config(
                "field",
                "give either a closed-form family or raw Fourier terms, not both",
            )),
            (None, None) => Err(CliError::config(
                "field",
                "give a closed-form family or raw Fourier terms",
            )),
            (Some(family), None) => {
                let eps = match (family, self.eps) {
                    (FieldFamily::Constant, Some(_)) => {
                        return Err(CliError::config(
                            "field.eps",
                            "the constant family takes no well depth",
                        ));
                    }
                    (FieldFamily::Constant, None) => None,
                    (_, None) => {
                        return Err(CliError::config(
                            "field.eps",
                            format!("required by the {family:?} family"),
                        ));
                    }
                    (_, Some(e)) if e <= 0.0 => {
                        return Err(CliError::config(
                            "field.eps",
                            format!("well depth must be positive, got {e}"),
                        ));
                    }
                    (_, Some(e)) => Some(e),
                };
                let field = match family {
                    FieldFamily::Constant => TorusField::constant(self.m),
                    FieldFamily::SingleWell => {
                        TorusField::single_well(self.m, eps.expect("validated"))
                    }
                    FieldFamily::DoubleWell => {
                        TorusField::double_well(self.m, eps.expect("validated"))
                    }
                };
                field.map_err(|e| CliError::config("field", e.to_string()))
            }
            (None, Some(terms)) => {
                if self.eps.is_some() {
                    return Err(CliError::config(
                        "field.eps",
                        "raw Fourier terms take no well depth",
                    ));
                }
                let mut parsed = Vec::with_capacity(terms.len());
                for (key, &[re, im]) in terms {
                    let k = parse_coeff_key(key, "field.terms")?;
                    parsed.push((k, num_complex::Complex64::new(re, im)));
                }
                field_from_raw_terms(self.m, &parsed)
                    .map_err(|e| CliError::config("field.terms", e.to_string()))
            }
        }
    }
}

/// Quadratic model well in `n` complex variables: `a` holds the n metric
/// coefficients, `q` the (2n)² row-major entries of the symmetric positive
/// Hessian factor Q.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellSpec {
    pub a: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(default)]
    pub shift: f64,
    #[serde(default = "default_well_label")]
    pub label: String,
}

fn default_well_label() -> String {
    "config-well".to_string()
}

impl WellSpec {
    pub fn build(&self) -> Result<toeplitz_wells::modelwell::QuadraticWell> {
        let n = self.a.len();
        if n == 0 {
            return Err(CliError::config("well.a", "need at least one coefficient"));
        }
        let expected = (2 * n) * (2 * n);
        if self.q.len() != expected {
            return Err(CliError::config(
                "well.q",
                format!(
                    "need the {expected} row-major entries of a {s}x{s} matrix, got {}",
                    self.q.len(),
                    s = 2 * n
                ),
            ));
        }
        toeplitz_wells::modelwell::QuadraticWell::new(
            n,
            self.a.clone(),
            self.q.clone(),
            self.shift,
            self.label.clone(),
        )
        .map_err(|e| CliError::config("well", e.to_string()))
    }
}

/// Pass tolerances for the Landau-level verdicts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandauSpec {
    /// Relative tolerance on the lowest cluster against p·b̄.
    pub cluster_rel_tol: f64,
    /// Relative tolerance on the first excited level against 3p·b̄.
    pub excited_rel_tol: f64,
}

impl Default for LandauSpec {
    fn default() -> Self {
        LandauSpec {
            cluster_rel_tol: 0.01,
            excited_rel_tol: 0.05,
        }
    }
}

/// Weighted decay scan for symbols vanishing to order 2k at the wells.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegenerateScan {
    /// Vanishing order parameter: h ≍ d(x,U₀)^{2k}.
    pub k: u32,
    /// Weight rates c in e^{2c·p^{1/(2k+1)}d}.
    #[serde(default = "default_c_list")]
    pub c_list: Vec<f64>,
    /// Eigenvalue precondition constant: λ·p^{2k/(2k+1)} < c₀.
    #[serde(default = "default_c0")]
    pub c0: f64,
    /// Boundedness verdict: max/min of the smallest-c integral over the
    /// p-sweep must stay below this.
    #[serde(default = "default_bound_ratio")]
    pub bound_ratio: f64,
}

fn default_c_list() -> Vec<f64> {
    vec![0.05, 0.1]
}
fn default_c0() -> f64 {
    1.0
}
fn default_bound_ratio() -> f64 {
    10.0
}

/// Localization scan parameters and verdict thresholds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizationScan {
    /// Neighborhood radii δ for the mass-outside table.
    pub deltas: Vec<f64>,
    /// Exponential weights α in e^{2α√p d(x,U_{h₀})}.
    pub alphas: Vec<f64>,
    /// Sublevel threshold defining U_{h₀}.
    pub h0: f64,
    /// Moment orders k for (u, hᵏu).
    pub moment_orders: Vec<u32>,
    /// Eigenindices to scan.
    pub modes: Vec<usize>,
    /// Mass-bound verdict: at the largest p, mass outside this radius must
    /// fall below p^{-mass_power}.
    pub mass_delta: f64,
    pub mass_power: f64,
    /// Moment-slope verdict window: fitted log-log slope of (u, hu) vs p.
    pub moment_slope_center: f64,
    pub moment_slope_window: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<DegenerateScan>,
}

impl Default for LocalizationScan {
    fn default() -> Self {
        LocalizationScan {
            deltas: vec![0.05, 0.1, 0.2, 0.4],
            alphas: vec![0.25, 0.5, 1.0],
            h0: 0.2,
            moment_orders: vec![1, 2, 3],
            modes: vec![0],
            mass_delta: 0.2,
            mass_power: 3.0,
            moment_slope_center: -1.0,
            moment_slope_window: 0.2,
            degenerate: None,
        }
    }
}

/// Verdict thresholds for the product and commutator defect fits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefectThresholds {
    /// ‖T_fT_g − T_{fg}‖ decays like p^{-1}: center and half-width of the
    /// admissible fitted-slope window.
    pub product_slope_center: f64,
    pub product_slope_window: f64,
    /// The sign-minimized commutator defect must decay at least this fast.
    pub commutator_slope_max: f64,
    /// Minimum r² for the commutator fit to count as a power law.
    pub min_r_squared: f64,
}

impl Default for DefectThresholds {
    fn default() -> Self {
        DefectThresholds {
            product_slope_center: -1.0,
            product_slope_window: 0.2,
            commutator_slope_max: -0.8,
            min_r_squared: 0.9,
        }
    }
}

/// The raw file schema: every key optional, unknown keys rejected. Which
/// keys must be present is decided per experiment in [`resolve`].
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub field: Option<FieldSpec>,
    #[serde(default, alias = "p_list")]
    pub p: Option<Vec<u32>>,
    #[serde(default)]
    pub grid: Option<GridRule>,
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub symbols: Option<BTreeMap<String, SymbolSpec>>,
    #[serde(default)]
    pub well: Option<WellSpec>,
    #[serde(default)]
    pub truncation_degree: Option<u32>,
    #[serde(default)]
    pub truncation_tol: Option<f64>,
    #[serde(default)]
    pub thresholds: Option<SweepThresholds>,
    #[serde(default)]
    pub landau: Option<LandauSpec>,
    #[serde(default)]
    pub localization: Option<LocalizationScan>,
    #[serde(default)]
    pub defects: Option<DefectThresholds>,
    #[serde(default)]
    pub dump_modes: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<String>,
}

/// Per-experiment parameter blocks, fully materialized.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Params {
    ModelSpectrum {
        well: WellSpec,
        levels: usize,
        truncation_degree: u32,
        /// Verdict tolerance on |exact − truncated| per level.
        truncation_tol: f64,
    },
    LandauLevels {
        field: FieldSpec,
        p: Vec<u32>,
        grid: GridRule,
        landau: LandauSpec,
        dump_modes: Vec<usize>,
    },
    ToeplitzSpectrum {
        field: FieldSpec,
        symbols: SymbolTable,
        p: Vec<u32>,
        grid: GridRule,
        levels: usize,
    },
    BochnerSweep {
        field: FieldSpec,
        p: Vec<u32>,
        grid: GridRule,
        levels: usize,
        thresholds: SweepThresholds,
    },
    ToeplitzSweep {
        field: FieldSpec,
        symbols: SymbolTable,
        p: Vec<u32>,
        grid: GridRule,
        levels: usize,
        thresholds: SweepThresholds,
    },
    Localization {
        field: FieldSpec,
        symbols: SymbolTable,
        p: Vec<u32>,
        grid: GridRule,
        #[serde(rename = "localization")]
        scan: LocalizationScan,
    },
    AlgebraDefects {
        field: FieldSpec,
        symbols: SymbolTable,
        p: Vec<u32>,
        grid: GridRule,
        defects: DefectThresholds,
    },
}

/// A validated configuration with every default filled in. Serializing it
/// yields the canonical form echoed into `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(flatten)]
    pub params: Params,
}

/// Reads and deserializes the config file; schema violations come back with
/// the JSON path to the offending key.
pub fn parse_config(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
        path: path.to_path_buf(),
        source,
    })?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let key_path = err.path().to_string();
        CliError::config(
            if key_path == "." { "<root>" } else { &key_path }.to_string(),
            err.into_inner().to_string(),
        )
    })
}

fn parse_coeff_key(key: &str, path: &str) -> Result<(i32, i32)> {
    let parts: Vec<&str> = key.split(',').collect();
    let parsed = if parts.len() == 2 {
        match (parts[0].trim().parse::<i32>(), parts[1].trim().parse::<i32>()) {
            (Ok(k1), Ok(k2)) => Some((k1, k2)),
            _ => None,
        }
    } else {
        None
    };
    parsed.ok_or_else(|| {
        CliError::config(
            format!("{path}.{key}"),
            "coefficient keys look like \"k1,k2\" with integer modes",
        )
    })
}

/// Rejects a key the chosen experiment does not consume.
fn reject_unused<T>(value: &Option<T>, key: &str, kind: ExperimentKind) -> Result<()> {
    if value.is_some() {
        return Err(CliError::config(
            key,
            format!("not used by the {kind} experiment"),
        ));
    }
    Ok(())
}

fn require_p(raw: &mut RawConfig) -> Result<Vec<u32>> {
    let mut p = raw
        .p
        .take()
        .ok_or_else(|| CliError::config("p", "give the list of tensor powers to run"))?;
    if p.is_empty() {
        return Err(CliError::config("p", "the tensor power list is empty"));
    }
    if p.contains(&0) {
        return Err(CliError::config("p", "tensor powers must be at least 1"));
    }
    p.sort_unstable();
    p.dedup();
    Ok(p)
}

fn require_field(raw: &mut RawConfig) -> Result<FieldSpec> {
    let spec = raw
        .field
        .take()
        .ok_or_else(|| CliError::config("field", "give the magnetic field"))?;
    spec.build()?;
    Ok(spec)
}

fn resolve_grid(raw: &mut RawConfig, grid_override: Option<usize>) -> Result<GridRule> {
    let stated = raw.grid.take();
    let rule = match grid_override {
        Some(n) => GridRule::Fixed(n),
        None => stated.unwrap_or(GridRule::Auto),
    };
    if let GridRule::Fixed(n) = rule {
        if n < 4 {
            return Err(CliError::config(
                "grid",
                format!("a fixed lattice needs at least 4 sites per side, got {n}"),
            ));
        }
    }
    Ok(rule)
}

fn resolve_levels(raw: &mut RawConfig, default: usize) -> Result<usize> {
    let levels = raw.levels.take().unwrap_or(default);
    if levels == 0 {
        return Err(CliError::config("levels", "need at least one level"));
    }
    Ok(levels)
}

/// Pulls the named symbols out of the table, rejecting extras. Missing
/// symbols fall back to the given defaults when provided.
fn take_symbols(
    raw: &mut RawConfig,
    wanted: &[(&str, Option<SymbolSpec>)],
    kind: ExperimentKind,
) -> Result<SymbolTable> {
    let mut table = raw.symbols.take().unwrap_or_default();
    let mut out = SymbolTable::new();
    for (name, default) in wanted {
        let spec = match (table.remove(*name), default) {
            (Some(spec), _) => spec,
            (None, Some(d)) => d.clone(),
            (None, None) => {
                return Err(CliError::config(
                    format!("symbols.{name}"),
                    format!("the {kind} experiment needs this symbol"),
                ));
            }
        };
        spec.build(&format!("symbols.{name}"))?;
        out.insert(name.to_string(), spec);
    }
    if let Some(extra) = table.keys().next() {
        return Err(CliError::config(
            format!("symbols.{extra}"),
            format!("not used by the {kind} experiment"),
        ));
    }
    Ok(out)
}

/// Validates the raw config against the chosen experiment and materializes
/// all defaults. `grid_override` (the `--grid-override` flag) replaces the
/// grid rule and is recorded in the resolved form.
pub fn resolve(
    kind: ExperimentKind,
    mut raw: RawConfig,
    grid_override: Option<usize>,
) -> Result<ResolvedConfig> {
    if let Some(stated) = raw.experiment.take() {
        if stated != kind {
            return Err(CliError::config(
                "experiment",
                format!("config says {stated} but the {kind} subcommand was invoked"),
            ));
        }
    }
    let seed = raw.seed.take().unwrap_or(0);
    let out_dir = raw.out_dir.take();

    let params = match kind {
        ExperimentKind::ModelSpectrum => {
            let well = raw
                .well
                .take()
                .ok_or_else(|| CliError::config("well", "give the quadratic model well"))?;
            well.build()?;
            let levels = resolve_levels(&mut raw, 8)?;
            let truncation_degree = raw.truncation_degree.take().unwrap_or(24).max(1);
            let truncation_tol = raw.truncation_tol.take().unwrap_or(1e-8);
            if truncation_tol <= 0.0 {
                return Err(CliError::config(
                    "truncation_tol",
                    "the agreement tolerance must be positive",
                ));
            }
            if grid_override.is_some() {
                return Err(CliError::config(
                    "grid",
                    "model-spectrum runs on Fock space; there is no lattice to override",
                ));
            }
            Params::ModelSpectrum {
                well,
                levels,
                truncation_degree,
                truncation_tol,
            }
        }
        ExperimentKind::LandauLevels => {
            let field = require_field(&mut raw)?;
            let built = field.build().expect("validated above");
            if built.poly().degree() != 0 {
                return Err(CliError::config(
                    "field",
                    "landau-levels needs a constant field; use a sweep for wells",
                ));
            }
            let p = require_p(&mut raw)?;
            let grid = resolve_grid(&mut raw, grid_override)?;
            let landau = raw.landau.take().unwrap_or_default();
            let dump_modes = raw.dump_modes.take().unwrap_or_default();
            Params::LandauLevels {
                field,
                p,
                grid,
                landau,
                dump_modes,
            }
        }
        ExperimentKind::ToeplitzSpectrum => {
            let field = require_field(&mut raw)?;
            let p = require_p(&mut raw)?;
            let grid = resolve_grid(&mut raw, grid_override)?;
            let levels = resolve_levels(&mut raw, 4)?;
            let symbols = take_symbols(&mut raw, &[("h", None)], kind)?;
            Params::ToeplitzSpectrum {
                field,
                symbols,
                p,
                grid,
                levels,
            }
        }
        ExperimentKind::BochnerSweep => {
            let field = require_field(&mut raw)?;
            let p = require_p(&mut raw)?;
            let grid = resolve_grid(&mut raw, grid_override)?;
            let levels = resolve_levels(&mut raw, 3)?;
            let thresholds = raw.thresholds.take().unwrap_or_default();
            Params::BochnerSweep {
                field,
                p,
                grid,
                levels,
                thresholds,
            }
        }
        ExperimentKind::ToeplitzSweep => {
            let field = require_field(&mut raw)?;
            let p = require_p(&mut raw)?;
            let grid = resolve_grid(&mut raw, grid_override)?;
            let levels = resolve_levels(&mut raw, 3)?;
            let thresholds = raw.thresholds.take().unwrap_or_default();
            let symbols = take_symbols(&mut raw, &[("h", None)], kind)?;
            Params::ToeplitzSweep {
                field,
                symbols,
                p,
                grid,
                levels,
                thresholds,
            }
        }
        ExperimentKind::Localization => {
            let field = require_field(&mut raw)?;
            let p = require_p(&mut raw)?;
            let grid = resolve_grid(&mut raw, grid_override)?;
            let scan = validate_scan(raw.localization.take().unwrap_or_default())?;
            let symbols = take_symbols(&mut raw, &[("h", None)], kind)?;
            Params::Localization {
                field,
                symbols,
                p,
                grid,
                scan,
            }
        }
        ExperimentKind::AlgebraDefects => {
            let field = require_field(&mut raw)?;
            let p = require_p(&mut raw)?;
            let grid = resolve_grid(&mut raw, grid_override)?;
            let defects = raw.defects.take().unwrap_or_default();
            if !(0.0..=1.0).contains(&defects.min_r_squared) {
                return Err(CliError::config(
                    "defects.min_r_squared",
                    "r² lives in [0, 1]",
                ));
            }
            let symbols = take_symbols(
                &mut raw,
                &[
                    ("f", Some(SymbolSpec::cosine([1, 0], 1.0))),
                    ("g", Some(SymbolSpec::cosine([0, 1], 1.0))),
                ],
                kind,
            )?;
            Params::AlgebraDefects {
                field,
                symbols,
                p,
                grid,
                defects,
            }
        }
    };

    // Anything still present was not consumed by this experiment.
    reject_unused(&raw.field, "field", kind)?;
    reject_unused(&raw.p, "p", kind)?;
    reject_unused(&raw.grid, "grid", kind)?;
    reject_unused(&raw.levels, "levels", kind)?;
    reject_unused(&raw.symbols, "symbols", kind)?;
    reject_unused(&raw.well, "well", kind)?;
    reject_unused(&raw.truncation_degree, "truncation_degree", kind)?;
    reject_unused(&raw.truncation_tol, "truncation_tol", kind)?;
    reject_unused(&raw.thresholds, "thresholds", kind)?;
    reject_unused(&raw.landau, "landau", kind)?;
    reject_unused(&raw.localization, "localization", kind)?;
    reject_unused(&raw.defects, "defects", kind)?;
    reject_unused(&raw.dump_modes, "dump_modes", kind)?;

    Ok(ResolvedConfig {
        experiment: kind,
        seed,
        out_dir,
        params,
    })
}

fn validate_scan(mut scan: LocalizationScan) -> Result<LocalizationScan> {
    if scan.deltas.is_empty() {
        return Err(CliError::config("localization.deltas", "give at least one radius"));
    }
    if scan.deltas.iter().any(|&d| d < 0.0) || scan.alphas.iter().any(|&a| a < 0.0) {
        return Err(CliError::config(
            "localization",
            "radii and weight rates must be nonnegative",
        ));
    }
    if scan.h0 <= 0.0 {
        return Err(CliError::config(
            "localization.h0",
            "the sublevel threshold must be positive",
        ));
    }
    if scan.modes.is_empty() {
        return Err(CliError::config("localization.modes", "give at least one eigenindex"));
    }
    if scan.mass_delta <= 0.0 {
        return Err(CliError::config(
            "localization.mass_delta",
            "the mass-bound radius must be positive",
        ));
    }
    if let Some(d) = &scan.degenerate {
        if d.k == 0 {
            return Err(CliError::config(
                "localization.degenerate.k",
                "the vanishing order parameter k is at least 1",
            ));
        }
        if d.c_list.is_empty() || d.c_list.iter().any(|&c| c < 0.0) {
            return Err(CliError::config(
                "localization.degenerate.c_list",
                "give nonnegative weight rates",
            ));
        }
        if d.bound_ratio <= 1.0 {
            return Err(CliError::config(
                "localization.degenerate.bound_ratio",
                "the boundedness ratio must exceed 1",
            ));
        }
    }
    // The verdicts read the mass at mass_delta and the order-1 moment, so
    // those scan points are materialized rather than assumed.
    if !scan.deltas.iter().any(|&d| d == scan.mass_delta) {
        scan.deltas.push(scan.mass_delta);
    }
    scan.deltas.sort_by(|a, b| a.total_cmp(b));
    if !scan.moment_orders.contains(&1) {
        scan.moment_orders.push(1);
    }
    scan.moment_orders.sort_unstable();
    scan.modes.sort_unstable();
    scan.modes.dedup();
    Ok(scan)
}
