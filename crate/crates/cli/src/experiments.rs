//! Experiment runners: build the requested model, compute, and write the
//! output files.
//!
//! Every run is deterministic — the same validated configuration produces
//! byte-identical files regardless of thread count. Each emitted file starts
//! with a comment line recording the tool version and the full validated
//! configuration, so any table can be reproduced from its own header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bandgap_core::analytic::{
    chain_limit_spectrum, figure3_curves, gap_certificate, limit2d_bands,
    product_neumann_spectrum, DispersionCurve, LimitBand,
};
use bandgap_core::floquet::{band_convergence, band_sweep, detect_gaps, BandSweep, ThetaGrid};
use bandgap_core::geometry::{
    conformal_cell, conformal_curvature, cylinder_linked_cell, dumbbell_cell,
    flat_cylinder_cell, isoperimetric_slice_bound, sectional_curvature, CellKind,
    ConformalCell, CurvatureReport, MeshSpec, ProfileCell,
};
use bandgap_core::spectral::minmax::{minmax_compare, random_instance, Verdict};
use serde::Serialize;

use crate::config::{
    classify, emit_config, CliError, ExperimentConfig, ExperimentKind, GeometryKind,
    OutputFormat,
};

/// Version stamp written to every output header.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

type Result<T> = std::result::Result<T, CliError>;

/// Run one validated experiment, writing its outputs under `out_dir`
/// (created if missing). Returns the paths written, in emission order.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| {
        CliError::Config(format!("output directory {}: {e}", out_dir.display()))
    })?;
    match config.experiment {
        ExperimentKind::Bands => run_bands(config, out_dir),
        ExperimentKind::Convergence => run_convergence(config, out_dir),
        ExperimentKind::Limit2d => run_limit2d(config, out_dir),
        ExperimentKind::Figure3 => run_figure3(config, out_dir),
        ExperimentKind::Certificate => run_certificate(config, out_dir),
        ExperimentKind::Curvature => run_curvature(config, out_dir),
        ExperimentKind::Isoperimetric => run_isoperimetric(config, out_dir),
        ExperimentKind::MinmaxSelftest => run_minmax_selftest(config, out_dir),
    }
}

// ---------------------------------------------------------------------------
// Cell construction
// ---------------------------------------------------------------------------

/// A period cell of either discretization family.
enum AnyCell {
    Profile(ProfileCell),
    Conformal(ConformalCell),
}

fn mesh_spec(config: &ExperimentConfig) -> MeshSpec {
    MeshSpec {
        body_spacing: config.h_body,
        collar_factor: config
            .collar_factor
            .unwrap_or_else(|| MeshSpec::default().collar_factor),
    }
}

/// Build the configured period cell; `epsilon` overrides `config.epsilon`
/// (used by the convergence sweep).
fn build_cell(config: &ExperimentConfig, epsilon: Option<f64>) -> Result<AnyCell> {
    let mesh = mesh_spec(config);
    let geometry = config.geometry.expect("geometry checked during validation");
    let d = config.d.expect("d checked during validation");
    let eps = epsilon.or(config.epsilon);
    let cell = match geometry {
        GeometryKind::Dumbbell => {
            dumbbell_cell(d, eps.expect("epsilon checked"), &mesh).map(AnyCell::Profile)
        }
        GeometryKind::CylinderLinked => cylinder_linked_cell(
            d,
            eps.expect("epsilon checked"),
            config.length.expect("L checked"),
            &mesh,
        )
        .map(AnyCell::Profile),
        GeometryKind::FlatCylinder => flat_cylinder_cell(
            d,
            config.r.expect("r checked"),
            config.length.expect("L checked"),
            &mesh,
        )
        .map(AnyCell::Profile),
        GeometryKind::Conformal => conformal_cell(
            d,
            config.r.expect("r checked"),
            config.a.expect("a checked"),
            config.b.expect("b checked"),
            eps.expect("epsilon checked"),
            &mesh,
        )
        .map(AnyCell::Conformal),
    };
    cell.map_err(|e| classify("building the period cell", e))
}

fn sweep_cell(
    cell: &AnyCell,
    theta: &ThetaGrid,
    lambda_max: f64,
    k_max: usize,
) -> Result<BandSweep> {
    match cell {
        AnyCell::Profile(c) => band_sweep(c, theta, lambda_max, k_max),
        AnyCell::Conformal(c) => band_sweep(c, theta, lambda_max, k_max),
    }
    .map_err(|e| classify("band sweep", e))
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fn header(config: &ExperimentConfig) -> String {
    format!("# bandgap {TOOL_VERSION} config={}", emit_config(config))
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content)
        .map_err(|e| CliError::Numeric(format!("writing {}: {e}", path.display())))
}

/// One float, fixed significant digits, scientific notation — stable across
/// platforms and immune to shortest-representation drift.
fn fmt(value: f64, precision: usize) -> String {
    format!("{value:.precision$e}")
}

fn write_csv(
    out_dir: &Path,
    name: &str,
    config: &ExperimentConfig,
    columns: &str,
    rows: &[String],
) -> Result<PathBuf> {
    let mut text = String::new();
    let _ = writeln!(text, "{}", header(config));
    let _ = writeln!(text, "{columns}");
    for row in rows {
        let _ = writeln!(text, "{row}");
    }
    let path = out_dir.join(name);
    write_text(&path, &text)?;
    Ok(path)
}

fn write_json<T: Serialize>(
    out_dir: &Path,
    name: &str,
    config: &ExperimentConfig,
    value: &T,
) -> Result<PathBuf> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numeric(format!("serializing {name}: {e}")))?;
    let text = format!("{}\n{}\n", header(config), body);
    let path = out_dir.join(name);
    write_text(&path, &text)?;
    Ok(path)
}

fn wants(config: &ExperimentConfig, format: OutputFormat) -> bool {
    config.format.is_none() || config.format == Some(format)
}

/// Dispersion-curve blocks as `theta, branch, sqrt_lambda` rows.
fn curve_rows(curves: &[DispersionCurve], precision: usize) -> Vec<String> {
    let mut rows = Vec::new();
    for curve in curves {
        for (&theta, &value) in curve.theta.iter().zip(&curve.values) {
            rows.push(format!(
                "{},{},{}",
                fmt(theta, precision),
                curve.branch,
                fmt(value, precision)
            ));
        }
    }
    rows
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

fn run_bands(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let precision = config.precision.expect("filled");
    let theta = ThetaGrid::half_zone(config.t.expect("filled"))
        .map_err(|e| classify("quasi-momentum grid", e))?;
    let cell = build_cell(config, None)?;
    let sweep = sweep_cell(
        &cell,
        &theta,
        config.lambda_max.expect("filled"),
        config.k_max.expect("filled"),
    )?;
    if sweep.truncated {
        println!(
            "note: fewer than k_max = {} bands stayed below the spectral cutoff; \
             the band list was shortened",
            config.k_max.expect("filled")
        );
    }
    let gaps = detect_gaps(&sweep.bands, config.lambda_max.expect("filled"))
        .map_err(|e| classify("gap detection", e))?;

    let mut files = Vec::new();
    if wants(config, OutputFormat::Csv) {
        let mut rows = Vec::new();
        for function in &sweep.functions {
            for ((&theta_j, &lambda), &ell) in sweep
                .theta
                .values
                .iter()
                .zip(&function.values)
                .zip(&function.modes)
            {
                rows.push(format!(
                    "{},{},{},ell_{ell}",
                    fmt(theta_j, precision),
                    function.index,
                    fmt(lambda, precision)
                ));
            }
        }
        files.push(write_csv(
            out_dir,
            "bands.csv",
            config,
            "theta,k,lambda,mode_label",
            &rows,
        )?);
    }
    if wants(config, OutputFormat::Json) {
        files.push(write_json(out_dir, "gaps.json", config, &gaps)?);
    }
    Ok(files)
}

fn run_convergence(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let precision = config.precision.expect("filled");
    let epsilons = config.epsilons.clone().expect("checked during validation");
    let geometry = config.geometry.expect("checked during validation");
    let d = config.d.expect("checked during validation");
    let k_max = config.k_max.expect("filled");
    let lambda_max = config.lambda_max.expect("filled");
    let theta = ThetaGrid::half_zone(config.t.expect("filled"))
        .map_err(|e| classify("quasi-momentum grid", e))?;

    let reference: Vec<f64> = match geometry {
        GeometryKind::Dumbbell => chain_limit_spectrum(CellKind::Dumbbell, d, 0.0, k_max)
            .and_then(|s| s.leading(k_max)),
        GeometryKind::CylinderLinked => chain_limit_spectrum(
            CellKind::CylinderLinked,
            d,
            config.length.expect("L checked"),
            k_max,
        )
        .and_then(|s| s.leading(k_max)),
        GeometryKind::Conformal => product_neumann_spectrum(
            config.r.expect("r checked"),
            config.b.expect("b checked") - config.a.expect("a checked"),
            d,
            k_max,
        )
        .and_then(|s| s.leading(k_max)),
        GeometryKind::FlatCylinder => unreachable!("rejected during validation"),
    }
    .map_err(|e| classify("limit spectrum", e))?;

    let table = match geometry {
        GeometryKind::Conformal => {
            let mut cells = Vec::new();
            for &eps in &epsilons {
                match build_cell(config, Some(eps))? {
                    AnyCell::Conformal(c) => cells.push((eps, c)),
                    AnyCell::Profile(_) => unreachable!("conformal geometry"),
                }
            }
            band_convergence(&cells, &reference, &theta, lambda_max, k_max)
        }
        _ => {
            let mut cells = Vec::new();
            for &eps in &epsilons {
                match build_cell(config, Some(eps))? {
                    AnyCell::Profile(c) => cells.push((eps, c)),
                    AnyCell::Conformal(_) => unreachable!("profile geometry"),
                }
            }
            band_convergence(&cells, &reference, &theta, lambda_max, k_max)
        }
    }
    .map_err(|e| classify("band convergence sweep", e))?;

    let rows: Vec<String> = table
        .rows
        .iter()
        .map(|row| {
            format!(
                "{},{},{},{}",
                fmt(row.epsilon, precision),
                row.band,
                fmt(row.width, precision),
                fmt(row.distance, precision)
            )
        })
        .collect();
    Ok(vec![write_csv(
        out_dir,
        "convergence.csv",
        config,
        "epsilon,band,width,distance",
        &rows,
    )?])
}

#[derive(Serialize)]
struct LimitBandsOut<'a> {
    bands: &'a [LimitBand],
    warnings: &'a [String],
}

fn run_limit2d(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let precision = config.precision.expect("filled");
    let result = limit2d_bands(
        config.length.expect("checked during validation"),
        config.r.expect("checked during validation"),
        config.lambda_max.expect("filled"),
        config.t.expect("filled"),
    )
    .map_err(|e| classify("limit band structure", e))?;
    for warning in &result.warnings {
        println!("note: {warning}");
    }

    let mut files = Vec::new();
    if wants(config, OutputFormat::Csv) {
        files.push(write_csv(
            out_dir,
            "limit2d.csv",
            config,
            "theta,branch,sqrt_lambda",
            &curve_rows(&result.curves, precision),
        )?);
    }
    if wants(config, OutputFormat::Json) {
        let bands = LimitBandsOut {
            bands: &result.bands,
            warnings: &result.warnings,
        };
        files.push(write_json(out_dir, "limit2d-bands.json", config, &bands)?);
        files.push(write_json(out_dir, "limit2d-gaps.json", config, &result.gaps)?);
    }
    Ok(files)
}

fn run_figure3(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let precision = config.precision.expect("filled");
    let curves = figure3_curves(config.t.expect("filled"))
        .map_err(|e| classify("dispersion curves", e))?;
    Ok(vec![write_csv(
        out_dir,
        "figure3.csv",
        config,
        "theta,branch,sqrt_lambda",
        &curve_rows(&curves, precision),
    )?])
}

fn run_certificate(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let cert = gap_certificate(
        config.length.expect("checked during validation"),
        config.r.expect("checked during validation"),
        config.m.expect("checked during validation"),
    )
    .map_err(|e| classify("gap certificate", e))?;
    println!(
        "certificate: {} for m = {} (radius threshold {})",
        if cert.certified { "certified" } else { "not certified" },
        cert.gaps_required,
        cert.threshold
    );
    Ok(vec![write_json(out_dir, "certificate.json", config, &cert)?])
}

fn curvature_rows(report: &CurvatureReport, precision: usize) -> Vec<String> {
    let mut rows = Vec::new();
    for (&s, &k) in report.grid.iter().zip(&report.radial) {
        rows.push(format!("{},radial,{}", fmt(s, precision), fmt(k, precision)));
    }
    if let Some(spherical) = &report.spherical {
        for (&s, &k) in report.grid.iter().zip(spherical) {
            rows.push(format!("{},spherical,{}", fmt(s, precision), fmt(k, precision)));
        }
    }
    rows
}

fn run_curvature(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let precision = config.precision.expect("filled");
    let report = match build_cell(config, None)? {
        AnyCell::Profile(cell) => sectional_curvature(&cell),
        AnyCell::Conformal(cell) => conformal_curvature(&cell),
    }
    .map_err(|e| classify("curvature profile", e))?;
    println!("max |K| = {}", fmt(report.max_abs, precision));
    Ok(vec![write_csv(
        out_dir,
        "curvature.csv",
        config,
        "s,section,curvature",
        &curvature_rows(&report, precision),
    )?])
}

fn run_isoperimetric(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let cell = match build_cell(config, None)? {
        AnyCell::Profile(cell) => cell,
        AnyCell::Conformal(_) => unreachable!("rejected during validation"),
    };
    let bound = isoperimetric_slice_bound(&cell, config.nu.expect("filled"))
        .map_err(|e| classify("isoperimetric bound", e))?;
    Ok(vec![write_json(out_dir, "isoperimetric.json", config, &bound)?])
}

#[derive(Serialize)]
struct MinmaxSummary {
    seed: u64,
    instances: usize,
    /// Eigenvalue indices checked across all instances.
    indices_checked: usize,
    /// Instances where every index verdict holds.
    holds: usize,
    /// Instances with at least one violated comparison (bugs by construction).
    violated: usize,
    /// Instances where some hypothesis failed quantitatively.
    not_applicable: usize,
    /// Seeds of the failing instances, if any.
    failing_seeds: Vec<u64>,
    all_hold: bool,
}

fn run_minmax_selftest(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let seed = config.seed.expect("filled");
    let instances = config.instances.expect("filled");
    let mut summary = MinmaxSummary {
        seed,
        instances,
        indices_checked: 0,
        holds: 0,
        violated: 0,
        not_applicable: 0,
        failing_seeds: Vec::new(),
        all_hold: false,
    };
    for offset in 0..instances as u64 {
        let s = seed.wrapping_add(offset);
        let instance = random_instance(s);
        let report = minmax_compare(&instance)
            .map_err(|e| classify(&format!("comparison instance seed {s}"), e))?;
        summary.indices_checked += report.verdict.len();
        let any_violated = report.verdict.iter().any(|v| *v == Verdict::Violated);
        let any_na = report.verdict.iter().any(|v| *v == Verdict::NotApplicable);
        if any_violated {
            summary.violated += 1;
            summary.failing_seeds.push(s);
        } else if any_na {
            summary.not_applicable += 1;
            summary.failing_seeds.push(s);
        } else {
            summary.holds += 1;
        }
    }
    summary.all_hold = summary.holds == instances;
    let path = write_json(out_dir, "minmax-selftest.json", config, &summary)?;
    println!(
        "minmax self-test: {}/{} instances hold",
        summary.holds, summary.instances
    );
    if summary.all_hold {
        Ok(vec![path])
    } else {
        Err(CliError::Numeric(format!(
            "minmax self-test: {} of {} instances failed the eigenvalue comparison \
             (seeds {:?}); see {}",
            instances - summary.holds,
            instances,
            summary.failing_seeds,
            path.display()
        )))
    }
}
