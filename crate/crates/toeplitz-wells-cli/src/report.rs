//! Structured reports and CSV tables.
//!
//! Every run writes `report.json` (the resolved config, all results, all
//! verdicts, and a provenance map tying each CSV to the library module and
//! operation that produced its numbers) plus one RFC-4180 CSV per flat
//! table. `report.json` is byte-identical across reruns of the same config
//! and seed: wall-clock facts live in `run_metadata.json`, never in the
//! report, and every collection it serializes is either a Vec in
//! deterministic order or a BTreeMap.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use toeplitz_wells::asymptotics::{PowerLawFit, SweepReport, Verdict};

use crate::config::ResolvedConfig;
use crate::error::Result;

/// Which library call a CSV's numbers come from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Provenance {
    pub module: &'static str,
    pub operation: &'static str,
}

/// One reference level of a model spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub index: usize,
    pub value: f64,
    pub well_label: String,
    pub exact: bool,
}

/// Landau-level summary for one tensor power.
#[derive(Debug, Clone, Serialize)]
pub struct LandauSummary {
    pub p: u32,
    pub grid_n: usize,
    pub d_p: usize,
    pub expected_d_p: usize,
    /// Worst |λ_j − p·b̄| / (p·b̄) over the cluster.
    pub max_cluster_rel_dev: f64,
    pub first_excited: f64,
    /// The second Landau level 3·p·b̄.
    pub excited_target: f64,
    pub excited_rel_dev: f64,
}

/// One row of the Toeplitz spectrum table.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub p: u32,
    pub m: usize,
    pub lambda: f64,
    pub p_times_lambda: f64,
    pub model_mu: f64,
    pub gap_to_model: f64,
}

/// Localization scan of one eigensection.
#[derive(Debug, Clone, Serialize)]
pub struct LocalizationOut {
    pub p: u32,
    pub eigen_index: usize,
    pub lambda: f64,
    /// (δ, mass outside the δ-neighborhood of the wells), ascending in δ.
    pub mass_outside: Vec<(f64, f64)>,
    /// (k, (u, hᵏu)).
    pub moments: Vec<(u32, f64)>,
    /// (α, ∫ e^{2α√p d}|u|²).
    pub exp_weight: Vec<(f64, f64)>,
}

/// Weighted decay integrals for a degenerate (order-2k) well.
#[derive(Debug, Clone, Serialize)]
pub struct DegenerateOut {
    pub p: u32,
    pub eigen_index: usize,
    pub k: u32,
    pub lambda: f64,
    pub lambda_scaled: f64,
    pub applicable: bool,
    /// (c, ∫ e^{2c·p^{1/(2k+1)}d}|u|²).
    pub weights: Vec<(f64, f64)>,
}

/// Product and commutator defects at one tensor power.
#[derive(Debug, Clone, Serialize)]
pub struct DefectRow {
    pub p: u32,
    pub norm_fg: f64,
    pub norm_comm: f64,
    pub chosen_sign: i8,
}

/// Experiment-specific result payloads.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Results {
    ModelSpectrum {
        exact: Vec<LevelRow>,
        truncated: Vec<LevelRow>,
        max_abs_difference: f64,
    },
    LandauLevels {
        per_p: Vec<LandauSummary>,
    },
    ToeplitzSpectrum {
        model: Vec<LevelRow>,
        rows: Vec<SpectrumRow>,
    },
    Sweep {
        sweep: SweepReport,
    },
    Localization {
        scans: Vec<LocalizationOut>,
        #[serde(skip_serializing_if = "Option::is_none")]
        moment_fit: Option<PowerLawFit>,
        degenerate: Vec<DegenerateOut>,
    },
    AlgebraDefects {
        rows: Vec<DefectRow>,
        #[serde(skip_serializing_if = "Option::is_none")]
        product_fit: Option<PowerLawFit>,
        #[serde(skip_serializing_if = "Option::is_none")]
        commutator_fit: Option<PowerLawFit>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

/// The full structured report written to `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub config: ResolvedConfig,
    pub results: Results,
    pub verdicts: Vec<Verdict>,
    /// CSV file name → the (module, operation) its numbers come from.
    pub provenance: BTreeMap<String, Provenance>,
    /// Every CSV written, in emission order.
    pub artifacts: Vec<String>,
}

/// Wall-clock and invocation facts, segregated from the report so that
/// `report.json` stays byte-identical across reruns.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub unix_started_seconds: u64,
    pub duration_seconds: f64,
    pub worker_threads: usize,
    pub out_dir: String,
}

/// Output directory handle accumulating artifacts and their provenance.
pub struct OutDir {
    root: PathBuf,
    artifacts: Vec<String>,
    provenance: BTreeMap<String, Provenance>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(OutDir {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
            provenance: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes one CSV table; `fill` receives a writer with the header
    /// already emitted. The file is recorded with its provenance.
    pub fn write_csv<F>(
        &mut self,
        name: &str,
        module: &'static str,
        operation: &'static str,
        header: &[&str],
        fill: F,
    ) -> Result<()>
    where
        F: FnOnce(&mut csv::Writer<File>) -> Result<()>,
    {
        let path = self.root.join(name);
        let mut writer = csv::Writer::from_writer(File::create(path)?);
        writer.write_record(header)?;
        fill(&mut writer)?;
        writer.flush()?;
        self.artifacts.push(name.to_string());
        self.provenance
            .insert(name.to_string(), Provenance { module, operation });
        Ok(())
    }

    /// Consumes the accumulated artifact list into a report and writes
    /// `report.json`.
    pub fn write_report(
        &mut self,
        config: ResolvedConfig,
        results: Results,
        verdicts: Vec<Verdict>,
    ) -> Result<(Report, PathBuf)> {
        let report = Report {
            tool: ToolInfo {
                name: "toeplitz-wells",
                version: env!("CARGO_PKG_VERSION"),
            },
            config,
            results,
            verdicts,
            provenance: std::mem::take(&mut self.provenance),
            artifacts: std::mem::take(&mut self.artifacts),
        };
        let path = self.root.join("report.json");
        let mut bytes = serde_json::to_vec_pretty(&report)?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes)?;
        Ok((report, path))
    }

    pub fn write_metadata(&self, meta: &RunMetadata) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(meta)?;
        bytes.push(b'\n');
        std::fs::write(self.root.join("run_metadata.json"), bytes)?;
        Ok(())
    }

    /// Marks an aborted run, leaving partial artifacts in place.
    pub fn write_failure(&self, error: &str) -> Result<()> {
        #[derive(Serialize)]
        struct Failure<'a> {
            failed: bool,
            error: &'a str,
            partial_artifacts: &'a [String],
        }
        let mut bytes = serde_json::to_vec_pretty(&Failure {
            failed: true,
            error,
            partial_artifacts: &self.artifacts,
        })?;
        bytes.push(b'\n');
        std::fs::write(self.root.join("failure.json"), bytes)?;
        Ok(())
    }
}

/// Prints the one-screen verdict summary.
pub fn print_summary(report: &Report, report_path: &Path, lead: &[String]) {
    let mut out = std::io::stdout().lock();
    let mut emit = |line: &str| {
        let _ = writeln!(out, "{line}");
    };
    emit(&format!(
        "{} (seed {})",
        report.config.experiment, report.config.seed
    ));
    for line in lead {
        emit(line);
    }
    if report.verdicts.is_empty() {
        emit("no verdicts enabled for this experiment");
    } else {
        for v in &report.verdicts {
            let mark = if v.pass { "PASS" } else { "FAIL" };
            emit(&format!(
                "  [{mark}] {:<28} observed {:.6e} vs {:.6e}  ({})",
                v.name, v.observed, v.threshold, v.detail
            ));
        }
        let failed = report.verdicts.iter().filter(|v| !v.pass).count();
        emit(&format!(
            "{} verdicts: {} passed, {} failed",
            report.verdicts.len(),
            report.verdicts.len() - failed,
            failed
        ));
    }
    emit(&format!(
        "report: {} ({} tables)",
        report_path.display(),
        report.artifacts.len()
    ));
}
