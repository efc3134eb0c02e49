//! Experiment configuration: JSON schema, validation, defaults, and the
//! config/exit-code error type.
//!
//! A configuration is a single JSON object. `experiment` selects what to
//! compute; the remaining fields supply geometry, sweep resolution, and
//! output options. [`parse_config`] rejects unknown fields and out-of-range
//! values with the offending field path in the message, and fills documented
//! defaults so that the validated config is self-describing:
//! `parse_config(&emit_config(&c))` returns `c` again.

use serde::{Deserialize, Serialize};

/// Tool failure, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or violated precondition — exit code 2.
    Config(String),
    /// Numerical failure or a violated self-test verdict — exit code 3.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Numeric(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Map a core-library error to an exit class: parameter and mesh
/// preconditions trace back to the configuration (exit 2), everything else is
/// a numerical failure (exit 3). `step` names the stage for the message.
pub fn classify(step: &str, e: bandgap_core::Error) -> CliError {
    use bandgap_core::Error as E;
    match e {
        E::InvalidParameter { .. } | E::MeshTooCoarse(_) => CliError::Config(format!("{step}: {e}")),
        other => CliError::Numeric(format!("{step}: {other}")),
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Config(msg.into()))
}

/// What to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Floquet band sweep and gap report for one period cell.
    Bands,
    /// Band widths/distances to the limit spectrum over a list of ε values.
    Convergence,
    /// Exact band/gap structure of the two-dimensional limit model.
    Limit2d,
    /// Reference dispersion plot (`L = 0.5`, `r = 1/13`): six branches of √λ.
    Figure3,
    /// Closed-form certificate for `m` gaps of the limit model.
    Certificate,
    /// Sectional-curvature profile of a period cell.
    Curvature,
    /// Isoperimetric lower bound from the thinnest admissible slice.
    Isoperimetric,
    /// Randomized eigenvalue-comparison self-test.
    MinmaxSelftest,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Bands => "bands",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Limit2d => "limit2d",
            ExperimentKind::Figure3 => "figure3",
            ExperimentKind::Certificate => "certificate",
            ExperimentKind::Curvature => "curvature",
            ExperimentKind::Isoperimetric => "isoperimetric",
            ExperimentKind::MinmaxSelftest => "minmax-selftest",
        }
    }
}

/// Period-cell family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    /// Spheres joined by short thin necks (neck radius ε).
    Dumbbell,
    /// Spheres joined through a thin cylinder of length `L` and radius ε.
    CylinderLinked,
    /// Straight cylinder of radius `r`, period `L` (no deformation).
    FlatCylinder,
    /// Conformally deformed cylinder: factor ε on `[a, b]`, 1 elsewhere.
    Conformal,
}

impl GeometryKind {
    pub fn name(self) -> &'static str {
        match self {
            GeometryKind::Dumbbell => "dumbbell",
            GeometryKind::CylinderLinked => "cylinder-linked",
            GeometryKind::FlatCylinder => "flat-cylinder",
            GeometryKind::Conformal => "conformal",
        }
    }
}

/// Output file format restriction. When absent, an experiment writes all of
/// its natural outputs (CSV tables and JSON summaries).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One experiment run. Optional fields left unset take the documented
/// defaults during validation where the experiment needs them; fields an
/// experiment does not read stay `None` and are omitted when re-emitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,

    // Geometry ---------------------------------------------------------
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryKind>,
    /// Manifold dimension `d ≥ 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Deformation size (neck/link radius, or conformal factor).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Length: link length (cylinder-linked), period (flat-cylinder), or
    /// insert length of the limit model (limit2d/figure3/certificate).
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    /// Cross-section radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Start of the conformally deformed window, `0 < a < b < 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// End of the conformally deformed window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,

    // Sweep ------------------------------------------------------------
    /// Quasi-momentum samples over `[0, π]` (default 33; 65 for the
    /// analytic dispersion sweeps).
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    /// Number of bands to track (default 8).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// Spectral cutoff (default 40).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    /// Strictly decreasing deformation sizes for `convergence`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,

    // Mesh -------------------------------------------------------------
    /// Grid spacing away from necks; default: cell length / 400.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_body: Option<f64>,
    /// Neck refinement factor (≥ 8; default 8).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collar_factor: Option<f64>,

    // Experiment-specific ------------------------------------------------
    /// Gap count for `certificate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Volume-ratio exponent for `isoperimetric` (ν > 1; default 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// RNG seed for `minmax-selftest` (default 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Instance count for `minmax-selftest` (default 200).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,

    // Output -------------------------------------------------------------
    /// Significant digits after the decimal point (1..=17; default 12).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    /// Restrict outputs to one format; absent = write all outputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    /// Output directory; the `--out` flag takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// Parse and validate one JSON configuration. On success every field the
/// experiment reads is populated (defaults filled in); errors carry the
/// offending field path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
    validate(config)
}

/// Serialize a configuration as one compact JSON line (used for the header
/// comment of every output file). Floats survive a round trip bit-exactly.
pub fn emit_config(config: &ExperimentConfig) -> String {
    serde_json::to_string(config).expect("configs always serialize")
}

fn validate(mut config: ExperimentConfig) -> Result<ExperimentConfig> {
    check_ranges(&config)?;
    let kind = config.experiment;

    // Defaults for the fields this experiment reads.
    let uses_sweep = matches!(kind, ExperimentKind::Bands | ExperimentKind::Convergence);
    let uses_dispersion = matches!(kind, ExperimentKind::Limit2d | ExperimentKind::Figure3);
    if uses_sweep {
        config.t.get_or_insert(33);
        config.k_max.get_or_insert(8);
        config.lambda_max.get_or_insert(40.0);
    }
    if uses_dispersion {
        config.t.get_or_insert(65);
    }
    if kind == ExperimentKind::Limit2d {
        config.lambda_max.get_or_insert(40.0);
    }
    if kind == ExperimentKind::Isoperimetric {
        config.nu.get_or_insert(2.0);
    }
    if kind == ExperimentKind::MinmaxSelftest {
        config.seed.get_or_insert(0);
        config.instances.get_or_insert(200);
    }
    config.precision.get_or_insert(12);

    if uses_dispersion && config.t.unwrap() < 9 {
        return config_err(format!(
            "config.T: the dispersion sweep needs at least 9 samples, got {}",
            config.t.unwrap()
        ));
    }

    // Presence of the fields this experiment reads.
    match kind {
        ExperimentKind::Bands | ExperimentKind::Curvature => {
            let geometry = require_geometry(&config)?;
            require_geometry_params(&config, geometry, true)?;
        }
        ExperimentKind::Isoperimetric => {
            let geometry = require_geometry(&config)?;
            if geometry == GeometryKind::Conformal {
                return config_err(
                    "config.geometry: the slice bound is defined for tube-like cells \
                     (dumbbell, cylinder-linked, flat-cylinder), not conformal",
                );
            }
            require_geometry_params(&config, geometry, true)?;
        }
        ExperimentKind::Convergence => {
            let geometry = require_geometry(&config)?;
            match geometry {
                GeometryKind::FlatCylinder => {
                    return config_err(
                        "config.geometry: flat-cylinder has no deformation to shrink; \
                         convergence needs dumbbell, cylinder-linked, or conformal",
                    );
                }
                GeometryKind::Conformal => {
                    if config.d.is_some_and(|d| d < 3) {
                        return config_err(
                            "config.d: the conformal limit spectrum is available in closed \
                             form for d ≥ 3 only",
                        );
                    }
                }
                GeometryKind::Dumbbell | GeometryKind::CylinderLinked => {}
            }
            require_geometry_params(&config, geometry, false)?;
            match &config.epsilons {
                None => {
                    return config_err(format!(
                        "config.epsilons: required for `convergence` (strictly decreasing \
                         deformation sizes, e.g. [0.2, 0.1, 0.05]); got only {}",
                        provided_fields(&config)
                    ));
                }
                Some(eps) if eps.len() < 2 => {
                    return config_err(
                        "config.epsilons: need at least two deformation sizes to compare",
                    );
                }
                Some(_) => {}
            }
        }
        ExperimentKind::Limit2d => {
            require_field(config.length.is_some(), "L", kind, "insert length in (0, 1)")?;
            require_field(config.r.is_some(), "r", kind, "cross-section radius")?;
        }
        ExperimentKind::Certificate => {
            require_field(config.length.is_some(), "L", kind, "insert length in (0, 1)")?;
            require_field(config.r.is_some(), "r", kind, "cross-section radius")?;
            require_field(config.m.is_some(), "m", kind, "number of gaps to certify")?;
        }
        ExperimentKind::Figure3 => {
            // Fixed geometry; `L`/`r` may restate it but must match.
            if let Some(length) = config.length {
                if length != 0.5 {
                    return config_err(format!(
                        "config.L: this dispersion plot is fixed at L = 0.5, got {length}"
                    ));
                }
            }
            if let Some(r) = config.r {
                if (r - 1.0 / 13.0).abs() > 1e-6 {
                    return config_err(format!(
                        "config.r: this dispersion plot is fixed at r = 1/13 ≈ 0.0769231, got {r}"
                    ));
                }
            }
        }
        ExperimentKind::MinmaxSelftest => {}
    }

    check_format(&config)?;
    Ok(config)
}

/// Range checks for every provided field, independent of which experiment
/// reads it, so that e.g. `d = 1` is always reported as a range error on `d`.
fn check_ranges(config: &ExperimentConfig) -> Result<()> {
    if let Some(d) = config.d {
        if d < 2 {
            return config_err(format!("config.d: dimension must be at least 2, got {d}"));
        }
    }
    for (name, value) in [
        ("epsilon", config.epsilon),
        ("L", config.length),
        ("r", config.r),
        ("h_body", config.h_body),
    ] {
        if let Some(v) = value {
            if !(v > 0.0 && v.is_finite()) {
                return config_err(format!("config.{name}: must be positive, got {v}"));
            }
        }
    }
    for (name, value) in [("a", config.a), ("b", config.b)] {
        if let Some(v) = value {
            if !(v > 0.0 && v < 1.0) {
                return config_err(format!(
                    "config.{name}: must lie strictly inside the unit period (0, 1), got {v}"
                ));
            }
        }
    }
    if let (Some(a), Some(b)) = (config.a, config.b) {
        if !(a < b) {
            return config_err(format!(
                "config.a: deformation window needs a < b, got a = {a}, b = {b}"
            ));
        }
    }
    if matches!(
        config.experiment,
        ExperimentKind::Limit2d | ExperimentKind::Certificate
    ) {
        if let Some(length) = config.length {
            if !(length < 1.0) {
                return config_err(format!(
                    "config.L: insert length must lie in (0, 1) — the period is normalized \
                     to 1 — got {length}"
                ));
            }
        }
    }
    if let Some(t) = config.t {
        if t < 2 {
            return config_err(format!(
                "config.T: need at least 2 quasi-momentum samples, got {t}"
            ));
        }
    }
    if let Some(k) = config.k_max {
        if k < 1 {
            return config_err("config.k_max: need at least one band");
        }
    }
    if let Some(lm) = config.lambda_max {
        if !(lm > 0.0 && lm.is_finite()) {
            return config_err(format!("config.lambda_max: must be positive, got {lm}"));
        }
    }
    if let Some(eps) = &config.epsilons {
        if eps.is_empty() {
            return config_err("config.epsilons: must not be empty");
        }
        if eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return config_err("config.epsilons: every deformation size must be positive");
        }
        if eps.windows(2).any(|w| !(w[1] < w[0])) {
            return config_err(
                "config.epsilons: deformation sizes must be strictly decreasing",
            );
        }
    }
    if let Some(cf) = config.collar_factor {
        if !(cf >= 8.0 && cf.is_finite()) {
            return config_err(format!(
                "config.collar_factor: neck refinement factor must be at least 8, got {cf}"
            ));
        }
    }
    if let Some(m) = config.m {
        if m < 1 {
            return config_err("config.m: need at least one gap to certify");
        }
    }
    if let Some(nu) = config.nu {
        if !(nu > 1.0 && nu.is_finite()) {
            return config_err(format!(
                "config.nu: the volume-ratio exponent must exceed 1, got {nu}"
            ));
        }
    }
    if let Some(n) = config.instances {
        if n < 1 {
            return config_err("config.instances: need at least one instance");
        }
    }
    if let Some(p) = config.precision {
        if !(1..=17).contains(&p) {
            return config_err(format!(
                "config.precision: supported range is 1..=17 digits, got {p}"
            ));
        }
    }
    Ok(())
}

fn require_geometry(config: &ExperimentConfig) -> Result<GeometryKind> {
    config.geometry.ok_or_else(|| {
        CliError::Config(format!(
            "config.geometry: required for `{}` (dumbbell, cylinder-linked, flat-cylinder, \
             or conformal), together with its parameters: config.d, and config.epsilon / \
             config.L / config.r / config.a / config.b as the geometry requires",
            config.experiment.name()
        ))
    })
}

/// Check that every parameter the chosen geometry needs is present.
/// `with_epsilon = false` for `convergence`, where ε comes from `epsilons`.
fn require_geometry_params(
    config: &ExperimentConfig,
    geometry: GeometryKind,
    with_epsilon: bool,
) -> Result<()> {
    let mut missing: Vec<&str> = Vec::new();
    let mut need = |present: bool, name: &'static str| {
        if !present {
            missing.push(name);
        }
    };
    need(config.d.is_some(), "config.d");
    match geometry {
        GeometryKind::Dumbbell => {
            if with_epsilon {
                need(config.epsilon.is_some(), "config.epsilon");
            }
        }
        GeometryKind::CylinderLinked => {
            if with_epsilon {
                need(config.epsilon.is_some(), "config.epsilon");
            }
            need(config.length.is_some(), "config.L");
        }
        GeometryKind::FlatCylinder => {
            need(config.r.is_some(), "config.r");
            need(config.length.is_some(), "config.L");
        }
        GeometryKind::Conformal => {
            if with_epsilon {
                need(config.epsilon.is_some(), "config.epsilon");
            }
            need(config.r.is_some(), "config.r");
            need(config.a.is_some(), "config.a");
            need(config.b.is_some(), "config.b");
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        config_err(format!(
            "{}: required for geometry `{}`",
            missing.join(", "),
            geometry.name()
        ))
    }
}

fn require_field(
    present: bool,
    name: &str,
    kind: ExperimentKind,
    what: &str,
) -> Result<()> {
    if present {
        Ok(())
    } else {
        config_err(format!(
            "config.{name}: required for `{}` ({what})",
            kind.name()
        ))
    }
}

/// Reject a format restriction that would leave an experiment with nothing
/// to write.
fn check_format(config: &ExperimentConfig) -> Result<()> {
    let Some(format) = config.format else {
        return Ok(());
    };
    let kind = config.experiment;
    let csv_only = matches!(
        kind,
        ExperimentKind::Figure3 | ExperimentKind::Convergence | ExperimentKind::Curvature
    );
    let json_only = matches!(
        kind,
        ExperimentKind::Certificate | ExperimentKind::Isoperimetric | ExperimentKind::MinmaxSelftest
    );
    match format {
        OutputFormat::Json if csv_only => config_err(format!(
            "config.format: `{}` writes CSV tables only",
            kind.name()
        )),
        OutputFormat::Csv if json_only => config_err(format!(
            "config.format: `{}` writes a JSON summary only",
            kind.name()
        )),
        _ => Ok(()),
    }
}

/// The non-empty optional fields, for "you gave me X, I need Y" messages.
fn provided_fields(config: &ExperimentConfig) -> String {
    let mut names = vec!["experiment"];
    macro_rules! note {
        ($field:ident, $name:expr) => {
            if config.$field.is_some() {
                names.push($name);
            }
        };
    }
    note!(geometry, "geometry");
    note!(d, "d");
    note!(epsilon, "epsilon");
    note!(length, "L");
    note!(r, "r");
    note!(a, "a");
    note!(b, "b");
    note!(t, "T");
    note!(k_max, "k_max");
    note!(lambda_max, "lambda_max");
    note!(h_body, "h_body");
    note!(collar_factor, "collar_factor");
    note!(m, "m");
    note!(nu, "nu");
    note!(seed, "seed");
    note!(instances, "instances");
    note!(precision, "precision");
    note!(format, "format");
    note!(path, "path");
    names.join(", ")
}
