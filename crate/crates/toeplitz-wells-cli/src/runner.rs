//! Experiment pipelines: parallel solves, verdicts, and artifact emission.
//!
//! Each pipeline farms its (p, grid) solves out to the rayon pool with
//! deterministic per-job seeds, reduces single-threaded in p order, and
//! writes its tables through [`OutDir`]. A failed pipeline leaves whatever
//! tables it already wrote plus a `failure.json` marker; a completed one
//! writes `report.json` and returns exit code 1 when any verdict failed,
//! 0 otherwise.

use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use toeplitz_wells::asymptotics::{
    fit_power_law, job_seed, run_bochner_sweep, run_toeplitz_sweep, symbol_wells, GridRule,
    PowerLawFit, SweepReport, SweepThresholds, Verdict,
};
use toeplitz_wells::fock::FockTruncation;
use toeplitz_wells::modelwell::{multiwell_spectrum, well_spectrum_exact, well_spectrum_truncated};
use toeplitz_wells::toeplitz::{
    degenerate_well_report, localization_report, product_defect, toeplitz_low_spectrum,
    LocalizationParams,
};
use toeplitz_wells::torus::cache::BasisCache;
use toeplitz_wells::torus::laplacian::OperatorKind;

use crate::config::{
    DefectThresholds, FieldSpec, LandauSpec, LocalizationScan, Params, ResolvedConfig, SymbolSpec,
    WellSpec,
};
use crate::error::Result;
use crate::report::{
    print_summary, DefectRow, DegenerateOut, LandauSummary, LevelRow, LocalizationOut, OutDir,
    Results, RunMetadata, SpectrumRow,
};

/// Invocation facts that are not part of the configuration.
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub quiet: bool,
}

pub struct RunOutcome {
    /// 0: all verdicts passed; 1: at least one failed.
    pub exit_code: u8,
    pub report_path: PathBuf,
}

/// Runs the configured experiment end to end.
pub fn run(cfg: &ResolvedConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let mut out = OutDir::create(&opts.out_dir)?;

    let (results, verdicts, lead) = match dispatch(cfg, &mut out) {
        Ok(t) => t,
        Err(e) => {
            // Keep partial tables; mark the directory as a failed run.
            let _ = out.write_failure(&e.to_string());
            return Err(e);
        }
    };

    let (report, report_path) = out.write_report(cfg.clone(), results, verdicts)?;
    out.write_metadata(&RunMetadata {
        unix_started_seconds: started,
        duration_seconds: clock.elapsed().as_secs_f64(),
        worker_threads: rayon::current_num_threads(),
        out_dir: out.root().display().to_string(),
    })?;
    if !opts.quiet {
        print_summary(&report, &report_path, &lead);
    }
    let exit_code = u8::from(!report.verdicts.iter().all(|v| v.pass));
    Ok(RunOutcome {
        exit_code,
        report_path,
    })
}

type Produced = (Results, Vec<Verdict>, Vec<String>);

fn dispatch(cfg: &ResolvedConfig, out: &mut OutDir) -> Result<Produced> {
    match &cfg.params {
        Params::ModelSpectrum {
            well,
            levels,
            truncation_degree,
            truncation_tol,
        } => model_spectrum(well, *levels, *truncation_degree, *truncation_tol, out),
        Params::LandauLevels {
            field,
            p,
            grid,
            landau,
            dump_modes,
        } => landau_levels(field, p, *grid, landau, dump_modes, cfg.seed, out),
        Params::ToeplitzSpectrum {
            field,
            symbols,
            p,
            grid,
            levels,
        } => toeplitz_spectrum(field, &symbols["h"], p, *grid, *levels, cfg.seed, out),
        Params::BochnerSweep {
            field,
            p,
            grid,
            levels,
            thresholds,
        } => bochner_sweep(field, p, *grid, *levels, thresholds, cfg.seed, out),
        Params::ToeplitzSweep {
            field,
            symbols,
            p,
            grid,
            levels,
            thresholds,
        } => toeplitz_sweep(
            field,
            &symbols["h"],
            p,
            *grid,
            *levels,
            thresholds,
            cfg.seed,
            out,
        ),
        Params::Localization {
            field,
            symbols,
            p,
            grid,
            scan,
        } => localization(field, &symbols["h"], p, *grid, scan, cfg.seed, out),
        Params::AlgebraDefects {
            field,
            symbols,
            p,
            grid,
            defects,
        } => algebra_defects(
            field,
            &symbols["f"],
            &symbols["g"],
            p,
            *grid,
            defects,
            cfg.seed,
            out,
        ),
    }
}

fn verdict(name: String, pass: bool, observed: f64, threshold: f64, detail: String) -> Verdict {
    Verdict {
        name,
        pass,
        observed,
        threshold,
        detail,
    }
}

fn fmt_values(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn model_spectrum(
    well: &WellSpec,
    levels: usize,
    truncation_degree: u32,
    truncation_tol: f64,
    out: &mut OutDir,
) -> Result<Produced> {
    let w = well.build()?;
    let exact = well_spectrum_exact(&w, levels)?;
    let trunc = FockTruncation::new(truncation_degree, w.a.clone())?;
    let truncated = well_spectrum_truncated(&w, &trunc, levels)?;

    let to_rows = |spec: &toeplitz_wells::modelwell::ModelSpectrum| -> Vec<LevelRow> {
        spec.levels
            .iter()
            .enumerate()
            .map(|(index, l)| LevelRow {
                index,
                value: l.value,
                well_label: l.well_label.clone(),
                exact: l.exact,
            })
            .collect()
    };
    let exact_rows = to_rows(&exact);
    let truncated_rows = to_rows(&truncated);
    let max_abs_difference = exact_rows
        .iter()
        .zip(&truncated_rows)
        .map(|(a, b)| (a.value - b.value).abs())
        .fold(0.0, f64::max);

    for (name, operation, rows) in [
        ("model_spectrum_exact.csv", "well_spectrum_exact", &exact_rows),
        (
            "model_spectrum_truncated.csv",
            "well_spectrum_truncated",
            &truncated_rows,
        ),
    ] {
        out.write_csv(
            name,
            "modelwell",
            operation,
            &["index", "value", "well_label", "exactness"],
            |w| {
                for r in rows.iter() {
                    w.write_record([
                        r.index.to_string(),
                        format!("{}", r.value),
                        r.well_label.clone(),
                        if r.exact { "exact" } else { "truncated" }.to_string(),
                    ])?;
                }
                Ok(())
            },
        )?;
    }

    let verdicts = vec![verdict(
        "truncation-agreement".to_string(),
        max_abs_difference <= truncation_tol,
        max_abs_difference,
        truncation_tol,
        format!("worst |exact - truncated| over the first {levels} levels"),
    )];
    let lead = vec![format!(
        "model levels: {}",
        fmt_values(&exact.values())
    )];
    Ok((
        Results::ModelSpectrum {
            exact: exact_rows,
            truncated: truncated_rows,
            max_abs_difference,
        },
        verdicts,
        lead,
    ))
}

fn landau_levels(
    field_spec: &FieldSpec,
    p_list: &[u32],
    grid: GridRule,
    landau: &LandauSpec,
    dump_modes: &[usize],
    seed: u64,
    out: &mut OutDir,
) -> Result<Produced> {
    let field = field_spec.build()?;
    let b_mean = field.mean();
    let m = field.m() as usize;
    let cache = BasisCache::new();

    let mut solves = p_list
        .par_iter()
        .map(|&p| {
            let g = grid.grid_for(&field, p);
            let basis =
                cache.cluster_basis(&field, p, g, OperatorKind::Bochner, job_seed(seed, p, g, 0))?;
            Ok((p, g, basis))
        })
        .collect::<Result<Vec<_>>>()?;
    solves.sort_by_key(|s| s.0);

    let mut per_p = Vec::with_capacity(solves.len());
    let mut verdicts = Vec::new();
    for (p, _, basis) in &solves {
        let d_p = basis.d_p.expect("cluster basis carries its dimension");
        let expected = *p as usize * m;
        let target = *p as f64 * b_mean;
        let max_cluster_rel_dev = basis.eigenvalues[..d_p]
            .iter()
            .map(|l| (l - target).abs() / target)
            .fold(0.0, f64::max);
        let first_excited = basis.eigenvalues[d_p];
        let excited_target = 3.0 * target;
        let excited_rel_dev = (first_excited - excited_target).abs() / excited_target;

        verdicts.push(verdict(
            format!("landau-cluster-p{p}"),
            max_cluster_rel_dev <= landau.cluster_rel_tol,
            max_cluster_rel_dev,
            landau.cluster_rel_tol,
            format!("worst relative deviation of the lowest {d_p} levels from p*mean(b) = {target}"),
        ));
        verdicts.push(verdict(
            format!("cluster-dimension-p{p}"),
            d_p == expected,
            d_p as f64,
            expected as f64,
            "cluster dimension against the Riemann-Roch count p*m".to_string(),
        ));
        verdicts.push(verdict(
            format!("first-excited-p{p}"),
            excited_rel_dev <= landau.excited_rel_tol,
            excited_rel_dev,
            landau.excited_rel_tol,
            format!("first level above the cluster against 3*p*mean(b) = {excited_target}"),
        ));
        per_p.push(LandauSummary {
            p: *p,
            grid_n: basis.grid_n,
            d_p,
            expected_d_p: expected,
            max_cluster_rel_dev,
            first_excited,
            excited_target,
            excited_rel_dev,
        });
    }

    out.write_csv(
        "landau_levels.csv",
        "torus",
        "cluster_basis",
        &[
            "p",
            "grid_n",
            "j",
            "lambda_bochner",
            "lambda_renormalized",
            "residual",
        ],
        |w| {
            for (p, g, basis) in &solves {
                // The renormalized stencil is the Bochner one minus
                // p*b(site)*Id; for a constant field that shift is exactly
                // p*mean(b), so the column is the exact diagonal shift
                // rather than a second solve.
                let shift = *p as f64 * b_mean;
                for (j, (lambda, residual)) in basis
                    .eigenvalues
                    .iter()
                    .zip(&basis.residuals)
                    .enumerate()
                {
                    w.write_record([
                        p.to_string(),
                        g.to_string(),
                        j.to_string(),
                        format!("{lambda}"),
                        format!("{}", lambda - shift),
                        format!("{residual}"),
                    ])?;
                }
            }
            Ok(())
        },
    )?;

    for (p, _, basis) in &solves {
        for &j in dump_modes {
            if j >= basis.eigenvectors.len() {
                return Err(crate::error::CliError::config(
                    "dump_modes",
                    format!(
                        "mode {j} not computed at p = {p}; the solve carries {}",
                        basis.eigenvectors.len()
                    ),
                ));
            }
            let n = basis.grid_n;
            let name = format!("mode_p{p}_j{j}.csv");
            let vector = basis.eigenvectors[j].clone();
            out.write_csv(
                &name,
                "torus",
                "cluster_basis",
                &["ix", "iy", "re", "im"],
                |w| {
                    for (s, value) in vector.iter().enumerate() {
                        w.write_record([
                            (s / n).to_string(),
                            (s % n).to_string(),
                            format!("{}", value.re),
                            format!("{}", value.im),
                        ])?;
                    }
                    Ok(())
                },
            )?;
        }
    }

    Ok((Results::LandauLevels { per_p }, verdicts, Vec::new()))
}

fn toeplitz_spectrum(
    field_spec: &FieldSpec,
    h_spec: &SymbolSpec,
    p_list: &[u32],
    grid: GridRule,
    levels: usize,
    seed: u64,
    out: &mut OutDir,
) -> Result<Produced> {
    let field = field_spec.build()?;
    let h = h_spec.build("symbols.h")?;
    let wells = symbol_wells(&field, &h)?;
    let model = multiwell_spectrum(&wells, levels)?;
    let model_values = model.values();
    let model_rows: Vec<LevelRow> = model
        .levels
        .iter()
        .enumerate()
        .map(|(index, l)| LevelRow {
            index,
            value: l.value,
            well_label: l.well_label.clone(),
            exact: l.exact,
        })
        .collect();

    let cache = BasisCache::new();
    let mut per_p = p_list
        .par_iter()
        .map(|&p| {
            let g = grid.grid_for(&field, p);
            let basis = cache.cluster_basis(
                &field,
                p,
                g,
                OperatorKind::Renormalized,
                job_seed(seed, p, g, 0),
            )?;
            let count = levels.min(basis.d_p.expect("cluster basis carries its dimension"));
            let eigs = toeplitz_low_spectrum(&h, &basis, count)?;
            Ok((p, eigs.values))
        })
        .collect::<Result<Vec<(u32, Vec<f64>)>>>()?;
    per_p.sort_by_key(|s| s.0);

    let mut rows = Vec::new();
    let mut lead = Vec::new();
    for (p, values) in &per_p {
        for (m, lambda) in values.iter().enumerate() {
            let scaled = *p as f64 * lambda;
            rows.push(SpectrumRow {
                p: *p,
                m,
                lambda: *lambda,
                p_times_lambda: scaled,
                model_mu: model_values[m],
                gap_to_model: scaled - model_values[m],
            });
        }
        if let Some(lambda0) = values.first() {
            lead.push(format!(
                "p {p}: p*lambda_0 = {:.6} against mu_0 = {:.6}",
                *p as f64 * lambda0,
                model_values[0]
            ));
        }
    }

    out.write_csv(
        "toeplitz_spectrum.csv",
        "toeplitz",
        "toeplitz_low_spectrum",
        &["p", "m", "lambda", "p_times_lambda", "model_mu", "gap_to_model"],
        |w| {
            for r in &rows {
                w.write_record([
                    r.p.to_string(),
                    r.m.to_string(),
                    format!("{}", r.lambda),
                    format!("{}", r.p_times_lambda),
                    format!("{}", r.model_mu),
                    format!("{}", r.gap_to_model),
                ])?;
            }
            Ok(())
        },
    )?;

    Ok((
        Results::ToeplitzSpectrum {
            model: model_rows,
            rows,
        },
        Vec::new(),
        lead,
    ))
}

/// Writes the shared sweep tables; both sweep experiments emit the same set
/// so a report directory always has the same shape.
fn write_sweep_tables(out: &mut OutDir, sweep: &SweepReport, operation: &'static str) -> Result<()> {
    let opt = |v: &Option<String>| v.clone().unwrap_or_default();

    out.write_csv(
        "sweep_records.csv",
        "asymptotics",
        operation,
        &[
            "p",
            "grid_n",
            "coarse_grid_n",
            "level",
            "lambda",
            "model",
            "signed_residual",
            "residual",
            "disc_estimate",
            "usable",
            "note",
        ],
        |w| {
            for r in &sweep.records {
                w.write_record([
                    r.p.to_string(),
                    r.grid_n.to_string(),
                    r.coarse_grid_n.to_string(),
                    r.level.to_string(),
                    format!("{}", r.lambda),
                    format!("{}", r.model),
                    format!("{}", r.signed_residual),
                    format!("{}", r.residual),
                    format!("{}", r.disc_estimate),
                    r.usable.to_string(),
                    opt(&r.note),
                ])?;
            }
            Ok(())
        },
    )?;

    out.write_csv(
        "cluster_counts.csv",
        "asymptotics",
        operation,
        &["p", "grid_n", "d_p", "expected"],
        |w| {
            for c in &sweep.cluster_counts {
                w.write_record([
                    c.p.to_string(),
                    c.grid_n.to_string(),
                    c.d_p.to_string(),
                    c.expected.to_string(),
                ])?;
            }
            Ok(())
        },
    )?;

    out.write_csv(
        "excluded_jobs.csv",
        "asymptotics",
        operation,
        &["p", "grid_n", "message"],
        |w| {
            for e in &sweep.excluded {
                w.write_record([e.p.to_string(), e.grid_n.to_string(), e.message.clone()])?;
            }
            Ok(())
        },
    )?;

    out.write_csv(
        "level_fits.csv",
        "asymptotics",
        operation,
        &["level", "points_used", "amplitude", "exponent", "r_squared", "note"],
        |w| {
            for f in &sweep.fits {
                let (amplitude, exponent, r2) = match &f.fit {
                    Some(fit) => (
                        format!("{}", fit.amplitude),
                        format!("{}", fit.exponent),
                        format!("{}", fit.r_squared),
                    ),
                    None => (String::new(), String::new(), String::new()),
                };
                w.write_record([
                    f.level.to_string(),
                    f.points_used.to_string(),
                    amplitude,
                    exponent,
                    r2,
                    opt(&f.note),
                ])?;
            }
            Ok(())
        },
    )?;

    out.write_csv(
        "level_drifts.csv",
        "asymptotics",
        operation,
        &["level", "points_used", "limit", "coefficient", "note"],
        |w| {
            for d in &sweep.drifts {
                let (limit, coefficient) = match &d.fit {
                    Some(fit) => (format!("{}", fit.limit), format!("{}", fit.coefficient)),
                    None => (String::new(), String::new()),
                };
                w.write_record([
                    d.level.to_string(),
                    d.points_used.to_string(),
                    limit,
                    coefficient,
                    opt(&d.note),
                ])?;
            }
            Ok(())
        },
    )?;

    out.write_csv(
        "verdicts.csv",
        "asymptotics",
        operation,
        &["name", "pass", "observed", "threshold", "detail"],
        |w| {
            for v in &sweep.verdicts {
                w.write_record([
                    v.name.clone(),
                    v.pass.to_string(),
                    format!("{}", v.observed),
                    format!("{}", v.threshold),
                    v.detail.clone(),
                ])?;
            }
            Ok(())
        },
    )?;

    Ok(())
}

fn sweep_lead(sweep: &SweepReport) -> Vec<String> {
    sweep
        .excluded
        .iter()
        .map(|e| format!("excluded p = {} (grid {}): {}", e.p, e.grid_n, e.message))
        .collect()
}

fn bochner_sweep(
    field_spec: &FieldSpec,
    p_list: &[u32],
    grid: GridRule,
    levels: usize,
    thresholds: &SweepThresholds,
    seed: u64,
    out: &mut OutDir,
) -> Result<Produced> {
    let field = field_spec.build()?;
    let cache = BasisCache::new();
    let sweep = run_bochner_sweep(&cache, &field, p_list, levels - 1, grid, thresholds, seed)?;
    write_sweep_tables(out, &sweep, "run_bochner_sweep")?;
    let verdicts = sweep.verdicts.clone();
    let lead = sweep_lead(&sweep);
    Ok((Results::Sweep { sweep }, verdicts, lead))
}

fn toeplitz_sweep(
    field_spec: &FieldSpec,
    h_spec: &SymbolSpec,
    p_list: &[u32],
    grid: GridRule,
    levels: usize,
    thresholds: &SweepThresholds,
    seed: u64,
    out: &mut OutDir,
) -> Result<Produced> {
    let field = field_spec.build()?;
    let h = h_spec.build("symbols.h")?;
    let cache = BasisCache::new();
    let sweep =
        run_toeplitz_sweep(&cache, &field, &h, p_list, levels - 1, grid, thresholds, seed)?;
    write_sweep_tables(out, &sweep, "run_toeplitz_sweep")?;
    let verdicts = sweep.verdicts.clone();
    let lead = sweep_lead(&sweep);
    Ok((Results::Sweep { sweep }, verdicts, lead))
}

/// Fits a power law, keeping the failure message for the verdict detail.
fn try_fit(points: &[(f64, f64)]) -> (Option<PowerLawFit>, Option<String>) {
    match fit_power_law(points) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

fn localization(
    field_spec: &FieldSpec,
    h_spec: &SymbolSpec,
    p_list: &[u32],
    grid: GridRule,
    scan: &LocalizationScan,
    seed: u64,
    out: &mut OutDir,
) -> Result<Produced> {
    let field = field_spec.build()?;
    let h = h_spec.build("symbols.h")?;
    let count = scan.modes.last().expect("validated nonempty") + 1;
    let params = LocalizationParams {
        deltas: scan.deltas.clone(),
        alphas: scan.alphas.clone(),
        h0: scan.h0,
        moment_orders: scan.moment_orders.clone(),
    };
    let cache = BasisCache::new();

    type PerP = (u32, Vec<LocalizationOut>, Vec<DegenerateOut>);
    let mut per_p = p_list
        .par_iter()
        .map(|&p| {
            let g = grid.grid_for(&field, p);
            let basis = cache.cluster_basis(
                &field,
                p,
                g,
                OperatorKind::Renormalized,
                job_seed(seed, p, g, 0),
            )?;
            let eigs = toeplitz_low_spectrum(&h, &basis, count)?;
            let mut scans = Vec::with_capacity(scan.modes.len());
            let mut degenerate = Vec::new();
            for &mode in &scan.modes {
                let rep = localization_report(&eigs.sections[mode], p, mode, &h, &params)?;
                scans.push(LocalizationOut {
                    p,
                    eigen_index: mode,
                    lambda: eigs.values[mode],
                    mass_outside: rep.mass_outside,
                    moments: rep.moments,
                    exp_weight: rep.exp_weight,
                });
                if let Some(dg) = &scan.degenerate {
                    let rep = degenerate_well_report(
                        &eigs.sections[mode],
                        p,
                        eigs.values[mode],
                        &h,
                        dg.k,
                        &dg.c_list,
                        dg.c0,
                    )?;
                    degenerate.push(DegenerateOut {
                        p,
                        eigen_index: mode,
                        k: rep.k,
                        lambda: rep.lambda,
                        lambda_scaled: rep.lambda_scaled,
                        applicable: rep.applicable,
                        weights: rep.weights,
                    });
                }
            }
            Ok((p, scans, degenerate))
        })
        .collect::<Result<Vec<PerP>>>()?;
    per_p.sort_by_key(|s| s.0);

    let scans: Vec<LocalizationOut> = per_p.iter().flat_map(|(_, s, _)| s.clone()).collect();
    let degenerate: Vec<DegenerateOut> = per_p.iter().flat_map(|(_, _, d)| d.clone()).collect();

    // One table per eigenindex so every file keeps the flat
    // (p, delta, mass, k, moment, alpha, integral) schema unambiguously.
    let primary = scan.modes[0];
    for &mode in &scan.modes {
        let name = if mode == primary {
            "localization.csv".to_string()
        } else {
            format!("localization_mode{mode}.csv")
        };
        let rows: Vec<&LocalizationOut> =
            scans.iter().filter(|s| s.eigen_index == mode).collect();
        out.write_csv(
            &name,
            "toeplitz",
            "localization_report",
            &["p", "delta", "mass_outside", "k", "moment", "alpha", "exp_integral"],
            |w| {
                for s in rows {
                    let p = s.p.to_string();
                    for (delta, mass) in &s.mass_outside {
                        w.write_record([
                            p.clone(),
                            format!("{delta}"),
                            format!("{mass}"),
                            String::new(),
                            String::new(),
                            String::new(),
                            String::new(),
                        ])?;
                    }
                    for (k, moment) in &s.moments {
                        w.write_record([
                            p.clone(),
                            String::new(),
                            String::new(),
                            k.to_string(),
                            format!("{moment}"),
                            String::new(),
                            String::new(),
                        ])?;
                    }
                    for (alpha, integral) in &s.exp_weight {
                        w.write_record([
                            p.clone(),
                            String::new(),
                            String::new(),
                            String::new(),
                            String::new(),
                            format!("{alpha}"),
                            format!("{integral}"),
                        ])?;
                    }
                }
                Ok(())
            },
        )?;
    }

    if scan.degenerate.is_some() {
        out.write_csv(
            "degenerate_weights.csv",
            "toeplitz",
            "degenerate_well_report",
            &["p", "eigen_index", "k", "lambda", "lambda_scaled", "applicable", "c", "weight"],
            |w| {
                for d in &degenerate {
                    for (c, weight) in &d.weights {
                        w.write_record([
                            d.p.to_string(),
                            d.eigen_index.to_string(),
                            d.k.to_string(),
                            format!("{}", d.lambda),
                            format!("{}", d.lambda_scaled),
                            d.applicable.to_string(),
                            format!("{c}"),
                            format!("{weight}"),
                        ])?;
                    }
                }
                Ok(())
            },
        )?;
    }

    // Verdicts are made on the primary (lowest requested) eigenindex.
    let p_max = *p_list.last().expect("validated nonempty");
    let mut verdicts = Vec::new();

    let mass_at = |s: &LocalizationOut| {
        s.mass_outside
            .iter()
            .find(|(d, _)| *d == scan.mass_delta)
            .map(|(_, m)| *m)
    };
    let last_primary = scans
        .iter()
        .find(|s| s.p == p_max && s.eigen_index == primary)
        .expect("every p produced a primary scan");
    let mass = mass_at(last_primary).expect("mass_delta was materialized into deltas");
    let mass_threshold = (p_max as f64).powf(-scan.mass_power);
    verdicts.push(verdict(
        "mass-outside".to_string(),
        mass <= mass_threshold,
        mass,
        mass_threshold,
        format!(
            "ground mass outside the {} neighborhood at p = {p_max} against p^-{}",
            scan.mass_delta, scan.mass_power
        ),
    ));

    let moment_points: Vec<(f64, f64)> = scans
        .iter()
        .filter(|s| s.eigen_index == primary)
        .filter_map(|s| {
            s.moments
                .iter()
                .find(|(k, _)| *k == 1)
                .map(|(_, v)| (s.p as f64, *v))
        })
        .collect();
    let (moment_fit, fit_err) = try_fit(&moment_points);
    match &moment_fit {
        Some(fit) => {
            let deviation = (fit.exponent - scan.moment_slope_center).abs();
            verdicts.push(verdict(
                "moment-slope".to_string(),
                deviation <= scan.moment_slope_window,
                deviation,
                scan.moment_slope_window,
                format!(
                    "|fitted slope {} - {}| of (u, h u) against p",
                    fit.exponent, scan.moment_slope_center
                ),
            ));
        }
        None => {
            verdicts.push(verdict(
                "moment-slope".to_string(),
                false,
                0.0,
                scan.moment_slope_window,
                format!(
                    "cannot fit the first-moment decay: {}",
                    fit_err.as_deref().unwrap_or("no points")
                ),
            ));
        }
    }

    if let Some(dg) = &scan.degenerate {
        let primary_rows: Vec<&DegenerateOut> = degenerate
            .iter()
            .filter(|d| d.eigen_index == primary)
            .collect();
        let worst_scaled = primary_rows
            .iter()
            .map(|d| d.lambda_scaled)
            .fold(0.0, f64::max);
        verdicts.push(verdict(
            "degenerate-precondition".to_string(),
            primary_rows.iter().all(|d| d.applicable),
            worst_scaled,
            dg.c0,
            format!("lambda * p^(2k/(2k+1)) stays below c0 at every p, k = {}", dg.k),
        ));
        let c_min = dg
            .c_list
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = primary_rows
            .iter()
            .filter_map(|d| {
                d.weights
                    .iter()
                    .find(|(c, _)| *c == c_min)
                    .map(|(_, w)| *w)
            })
            .collect();
        let ratio = match (
            weights.iter().copied().fold(f64::INFINITY, f64::min),
            weights.iter().copied().fold(0.0, f64::max),
        ) {
            (min, max) if min > 0.0 => max / min,
            _ => 0.0,
        };
        verdicts.push(verdict(
            "degenerate-bounded".to_string(),
            ratio > 0.0 && ratio <= dg.bound_ratio,
            ratio,
            dg.bound_ratio,
            format!("max/min of the c = {c_min} weighted mass over the p sweep"),
        ));
    }

    Ok((
        Results::Localization {
            scans,
            moment_fit,
            degenerate,
        },
        verdicts,
        Vec::new(),
    ))
}

fn algebra_defects(
    field_spec: &FieldSpec,
    f_spec: &SymbolSpec,
    g_spec: &SymbolSpec,
    p_list: &[u32],
    grid: GridRule,
    thresholds: &DefectThresholds,
    seed: u64,
    out: &mut OutDir,
) -> Result<Produced> {
    let field = field_spec.build()?;
    let f = f_spec.build("symbols.f")?;
    let g = g_spec.build("symbols.g")?;
    let cache = BasisCache::new();

    let mut rows = p_list
        .par_iter()
        .map(|&p| {
            let grid_n = grid.grid_for(&field, p);
            let basis = cache.cluster_basis(
                &field,
                p,
                grid_n,
                OperatorKind::Renormalized,
                job_seed(seed, p, grid_n, 0),
            )?;
            let defect = product_defect(&f, &g, &field, &basis)?;
            Ok(DefectRow {
                p,
                norm_fg: defect.norm_fg,
                norm_comm: defect.norm_comm,
                chosen_sign: defect.chosen_sign,
            })
        })
        .collect::<Result<Vec<DefectRow>>>()?;
    rows.sort_by_key(|r| r.p);

    out.write_csv(
        "defects.csv",
        "toeplitz",
        "product_defect",
        &["p", "norm_fg", "norm_comm", "chosen_sign"],
        |w| {
            for r in &rows {
                w.write_record([
                    r.p.to_string(),
                    format!("{}", r.norm_fg),
                    format!("{}", r.norm_comm),
                    r.chosen_sign.to_string(),
                ])?;
            }
            Ok(())
        },
    )?;

    let product_points: Vec<(f64, f64)> =
        rows.iter().map(|r| (r.p as f64, r.norm_fg)).collect();
    let comm_points: Vec<(f64, f64)> =
        rows.iter().map(|r| (r.p as f64, r.norm_comm)).collect();
    let (product_fit, product_err) = try_fit(&product_points);
    let (commutator_fit, comm_err) = try_fit(&comm_points);

    let mut verdicts = Vec::new();
    match &product_fit {
        Some(fit) => {
            let deviation = (fit.exponent - thresholds.product_slope_center).abs();
            verdicts.push(verdict(
                "product-decay".to_string(),
                deviation <= thresholds.product_slope_window,
                deviation,
                thresholds.product_slope_window,
                format!(
                    "|fitted slope {} - {}| of ||T_f T_g - T_fg|| against p",
                    fit.exponent, thresholds.product_slope_center
                ),
            ));
        }
        None => verdicts.push(verdict(
            "product-decay".to_string(),
            false,
            0.0,
            thresholds.product_slope_window,
            format!(
                "cannot fit the product defect: {}",
                product_err.as_deref().unwrap_or("no points")
            ),
        )),
    }
    match &commutator_fit {
        Some(fit) => {
            verdicts.push(verdict(
                "commutator-decay".to_string(),
                fit.exponent <= thresholds.commutator_slope_max,
                fit.exponent,
                thresholds.commutator_slope_max,
                "fitted slope of the sign-minimized commutator defect against p".to_string(),
            ));
            verdicts.push(verdict(
                "commutator-fit-quality".to_string(),
                fit.r_squared >= thresholds.min_r_squared,
                fit.r_squared,
                thresholds.min_r_squared,
                "r-squared of the commutator power-law fit".to_string(),
            ));
        }
        None => verdicts.push(verdict(
            "commutator-decay".to_string(),
            false,
            0.0,
            thresholds.commutator_slope_max,
            format!(
                "cannot fit the commutator defect: {}",
                comm_err.as_deref().unwrap_or("no points")
            ),
        )),
    }

    let lead = rows
        .iter()
        .map(|r| {
            format!(
                "p {}: product defect {:.3e}, commutator defect {:.3e} (sign {:+})",
                r.p, r.norm_fg, r.norm_comm, r.chosen_sign
            )
        })
        .collect();

    Ok((
        Results::AlgebraDefects {
            rows,
            product_fit,
            commutator_fit,
        },
        verdicts,
        lead,
    ))
}
