//! Closed-form oracles: limit spectra of the collapsing-cell families, the
//! exact dispersion relations of the two-dimensional cylinder-linked model,
//! its band intervals and gaps, and the sufficient gap-count certificate.
//!
//! Everything here is independent of the finite-element pipeline, which is
//! what makes these values usable as test oracles for it.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{detect_gaps, Band, GapReport, ThetaGrid};
use crate::geometry::CellKind;
use crate::reduction::{angular_mode, EndCondition};

// ---------------------------------------------------------------------------
// Limit spectra
// ---------------------------------------------------------------------------

/// Provenance of one limit eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralSource {
    /// Sphere harmonic of degree `ℓ`.
    Sphere { degree: usize },
    /// Interval eigenvalue of index `m` (Dirichlet `m ≥ 1`, Neumann `m ≥ 0`).
    Interval { index: usize },
    /// Product eigenvalue: interval index `m` × cross-section degree `ℓ`.
    Product { index: usize, degree: usize },
}

/// One eigenvalue of a limit operator, with multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub value: f64,
    pub multiplicity: usize,
    pub source: SpectralSource,
}

/// Ascending eigenvalue list of a limit operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSpectrum {
    pub lines: Vec<SpectralLine>,
}

impl LimitSpectrum {
    /// Eigenvalues repeated by multiplicity, ascending.
    pub fn flatten(&self) -> Vec<f64> {
        self.lines
            .iter()
            .flat_map(|line| std::iter::repeat(line.value).take(line.multiplicity))
            .collect()
    }

    /// First `k` eigenvalues counted with multiplicity.
    pub fn leading(&self, k: usize) -> Result<Vec<f64>> {
        let flat = self.flatten();
        if flat.len() < k {
            return Err(Error::InsufficientData(format!(
                "limit spectrum holds {} eigenvalues, need {k}",
                flat.len()
            )));
        }
        Ok(flat[..k].to_vec())
    }

    fn sorted(mut lines: Vec<SpectralLine>) -> Self {
        lines.sort_by(|a, b| a.value.total_cmp(&b.value));
        LimitSpectrum { lines }
    }
}

/// First `count` eigenvalues of the Laplacian on `[0, L]`: `(mπ/L)²` with
/// `m ≥ 1` for Dirichlet ends, `m ≥ 0` for Neumann ends. All simple.
pub fn interval_spectrum(length: f64, bc: EndCondition, count: usize) -> Result<LimitSpectrum> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::invalid("L", format!("interval length must be positive, got {length}")));
    }
    let first = match bc {
        EndCondition::Dirichlet => 1,
        EndCondition::Neumann => 0,
    };
    let lines = (first..first + count)
        .map(|m| {
            let freq = m as f64 * PI / length;
            SpectralLine {
                value: freq * freq,
                multiplicity: 1,
                source: SpectralSource::Interval { index: m },
            }
        })
        .collect();
    Ok(LimitSpectrum { lines })
}

/// First `count` distinct eigenvalues `ℓ(ℓ + d − 1)` of the round unit
/// sphere of dimension `d`, with their full multiplicities.
pub fn sphere_spectrum(dimension: usize, count: usize) -> Result<LimitSpectrum> {
    if dimension < 2 {
        return Err(Error::invalid("dimension", format!("d ≥ 2 required, got {dimension}")));
    }
    let lines = (0..count)
        .map(|l| {
            // Degree-ℓ harmonics of S^d are the degree-ℓ modes of a
            // (d+1)-dimensional warped product's cross-section.
            let mode = angular_mode(dimension + 1, l)?;
            Ok(SpectralLine {
                value: mode.eigenvalue,
                multiplicity: mode.multiplicity,
                source: SpectralSource::Sphere { degree: l },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitSpectrum { lines })
}

/// First `count` lines of the Neumann Laplacian on the product
/// `[0, L] × S^{d−1}_r`: `(mπ/L)² + ℓ(ℓ + d − 2)/r²`, multiplicity that of
/// the sphere factor. The collapsing-conformal limit requires `d ≥ 3`.
pub fn product_neumann_spectrum(
    radius: f64,
    length: f64,
    dimension: usize,
    count: usize,
) -> Result<LimitSpectrum> {
    if dimension < 3 {
        return Err(Error::invalid("dimension", format!("d ≥ 3 required, got {dimension}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::invalid("L", format!("must be positive, got {length}")));
    }
    // The first `count` merged lines can only involve the first `count`
    // indices of either factor (each factor is strictly increasing).
    let mut lines = Vec::with_capacity((count + 1) * (count + 1));
    for m in 0..=count {
        let axial = (m as f64 * PI / length).powi(2);
        for l in 0..=count {
            let mode = angular_mode(dimension, l)?;
            lines.push(SpectralLine {
                value: axial + mode.eigenvalue / (radius * radius),
                multiplicity: mode.multiplicity,
                source: SpectralSource::Product { index: m, degree: l },
            });
        }
    }
    let mut spectrum = LimitSpectrum::sorted(lines);
    spectrum.lines.truncate(count);
    Ok(spectrum)
}

/// Limit spectrum of a chain cell as the necks collapse: the sphere spectrum
/// alone for a dumbbell chain, merged with the Dirichlet spectrum of the
/// length-`L` link for a cylinder-linked chain. `count` lines are returned.
pub fn chain_limit_spectrum(
    kind: CellKind,
    dimension: usize,
    link_length: f64,
    count: usize,
) -> Result<LimitSpectrum> {
    match kind {
        CellKind::Dumbbell => sphere_spectrum(dimension, count),
        CellKind::CylinderLinked => {
            let sphere = sphere_spectrum(dimension, count)?;
            let interval = interval_spectrum(link_length, EndCondition::Dirichlet, count)?;
            let mut lines = sphere.lines;
            lines.extend(interval.lines);
            let mut spectrum = LimitSpectrum::sorted(lines);
            spectrum.lines.truncate(count);
            Ok(spectrum)
        }
        _ => Err(Error::invalid(
            "kind",
            "chain limits exist for dumbbell and cylinder-linked cells only",
        )),
    }
}

// ---------------------------------------------------------------------------
// Root scanning
// ---------------------------------------------------------------------------

/// Ascending roots of `f` on `[a, b]` by sign scan at `samples` resolution
/// plus bisection to `1e−12` relative. Exact zeros at the lower endpoint or
/// at interior samples are roots; a zero at the upper endpoint belongs to the
/// next bracket and is excluded.
fn scan_roots(f: &dyn Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev_x = a;
    let mut prev_f = f(a);
    if prev_f == 0.0 {
        roots.push(a);
    }
    for i in 1..=samples {
        let x = if i == samples { b } else { a + (b - a) * i as f64 / samples as f64 };
        let fx = f(x);
        if fx == 0.0 {
            if i < samples {
                roots.push(x);
            }
        } else if prev_f != 0.0 && (prev_f > 0.0) != (fx > 0.0) {
            roots.push(bisect(f, prev_x, x));
        }
        prev_x = x;
        prev_f = fx;
    }
    roots
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Two-dimensional dispersion relations
// ---------------------------------------------------------------------------

fn check_dispersion_geometry(length: f64) -> Result<()> {
    if !(length > 0.0 && length < 1.0) {
        return Err(Error::invalid("L", format!("need 0 < L < 1 (period is 1), got {length}")));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..2.0 * PI).contains(&theta) {
        return Err(Error::invalid("theta", format!("need θ ∈ [0, 2π), got {theta}")));
    }
    Ok(())
}

/// Secular function of the circle-constant branches: a root `ω` means
/// `λ = ω²` is a quasi-periodic eigenvalue of the limit model.
fn longitudinal_secular(length: f64, theta: f64) -> impl Fn(f64) -> f64 {
    let ell = 1.0 - length;
    let cos_theta = theta.cos();
    move |omega: f64| {
        2.0 * ((length * omega).cos() - cos_theta) - ell * omega * (length * omega).sin()
    }
}

/// Lower bracket edges `mπ/L` confine the `m`-th branch.
fn longitudinal_bracket(length: f64, m: usize) -> (f64, f64) {
    (m as f64 * PI / length, (m + 1) as f64 * PI / length)
}

fn longitudinal_root(length: f64, theta: f64, m: usize) -> Result<(f64, usize)> {
    check_dispersion_geometry(length)?;
    check_theta(theta)?;
    let (a, b) = longitudinal_bracket(length, m);
    let f = longitudinal_secular(length, theta);
    let roots = scan_roots(&f, a, b, 512);
    if let Some(&first) = roots.first() {
        return Ok((first, roots.len()));
    }
    // No crossing: accept a numerically-zero lower endpoint (the trivial
    // roots ω = mπ/L at θ ∈ {0, π} evaluate to ~1e−16, not exactly 0).
    let scale = 4.0 + (1.0 - length) * b;
    if f(a).abs() <= 1e-9 * scale {
        return Ok((a, 1));
    }
    Err(Error::RootBracketing {
        detail: format!(
            "no root of the m = {m} branch in [{a}, {b}] at θ = {theta}: \
             F(a) = {}, F(mid) = {}, F(b) = {}",
            f(a),
            f(0.5 * (a + b)),
            f(b)
        ),
    })
}

/// Frequency `ω_m(θ)` of the `m`-th circle-constant branch: the root of
/// `2(cos Lω − cos θ) = (1−L)·ω·sin Lω` inside `[mπ/L, (m+1)π/L]`.
pub fn dispersion_n0(length: f64, theta: f64, m: usize) -> Result<f64> {
    longitudinal_root(length, theta, m).map(|(omega, _)| omega)
}

/// One root of the winding-`n` dispersion relation: the axial frequency `ω`
/// and the full frequency `η = √(ω² + n²/r²)`, so `λ = η²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub omega: f64,
    pub eta: f64,
}

/// Secular function of the winding-`n` branches. For `(1−L)·n/r > 30` the
/// cosh/sinh ratio is replaced by its asymptotic form
/// `cos(Lω) − 2cosθ·e^{−(1−L)n/r}` (relative error below 1e−13), which keeps
/// the evaluation finite for thin cross-sections.
fn transverse_secular(length: f64, nu: f64, theta: f64) -> impl Fn(f64) -> f64 {
    let ell = 1.0 - length;
    let cos_theta = theta.cos();
    let x = ell * nu;
    move |omega: f64| {
        let (sin_l, cos_l) = (length * omega).sin_cos();
        let ratio = if x > 30.0 {
            cos_l - 2.0 * cos_theta * (-x).exp()
        } else {
            (x.cosh() * cos_l - cos_theta) / x.sinh()
        };
        (omega * omega - nu * nu) * sin_l - 2.0 * omega * nu * ratio
    }
}

/// All positive roots `ω` of the winding-`n` relation up to `omega_cap`.
fn transverse_roots(
    length: f64,
    radius: f64,
    n: usize,
    theta: f64,
    omega_cap: f64,
) -> Result<Vec<DispersionPoint>> {
    check_dispersion_geometry(length)?;
    check_theta(theta)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
    }
    if n < 1 {
        return Err(Error::invalid("n", "winding number must be ≥ 1"));
    }
    let nu = n as f64 / radius;
    let f = transverse_secular(length, nu, theta);
    // ω = 0 is a structural zero of the relation (both terms vanish), not a
    // branch point; scan strictly positive frequencies at the same 512
    // samples per π/L bracket as the circle-constant branches.
    let spans = (omega_cap / (PI / length)).ceil().max(1.0) as usize;
    let samples = 512 * spans;
    let start = omega_cap / samples as f64;
    let roots = scan_roots(&f, start, omega_cap, samples);
    Ok(roots
        .into_iter()
        .map(|omega| DispersionPoint {
            omega,
            eta: (omega * omega + nu * nu).sqrt(),
        })
        .collect())
}

/// `p`-th root of the winding-`n` dispersion relation,
/// `η_{n,p}(θ) = √(ω_p² + n²/r²) > n/r`.
pub fn dispersion_n(
    length: f64,
    radius: f64,
    n: usize,
    theta: f64,
    p: usize,
) -> Result<DispersionPoint> {
    if p < 1 {
        return Err(Error::invalid("p", "root index must be ≥ 1"));
    }
    let omega_cap = (p + 2) as f64 * PI / length;
    let roots = transverse_roots(length, radius, n, theta, omega_cap)?;
    roots.get(p - 1).copied().ok_or_else(|| Error::RootBracketing {
        detail: format!(
            "only {} roots of the winding-{n} relation below ω = {omega_cap}, need p = {p}",
            roots.len()
        ),
    })
}

// ---------------------------------------------------------------------------
// Dispersion curves, limit bands, gaps
// ---------------------------------------------------------------------------

/// Identifier of one dispersion branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchId {
    /// Constant around the cross-section circle; `ω_m ∈ [mπ/L, (m+1)π/L]`.
    Longitudinal { m: usize },
    /// Winding `n ≥ 1` around the circle, `p`-th axial root.
    Transverse { n: usize, p: usize },
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchId::Longitudinal { m } => write!(f, "omega_{m}"),
            BranchId::Transverse { n, p } => write!(f, "eta_{n}_{p}"),
        }
    }
}

/// Sampled dispersion branch: `ω_m(θ)` for longitudinal branches,
/// `η_{n,p}(θ)` for transverse ones — in both cases the plotted `√λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurve {
    pub branch: BranchId,
    /// Insert length `L` (period normalized to 1, so the link is `1 − L`).
    pub length: f64,
    /// Cross-section radius `r`.
    pub radius: f64,
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
}

/// Interval swept by `λ` along one branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitBand {
    pub branch: BranchId,
    pub lo: f64,
    pub hi: f64,
}

/// Exact band/gap structure of the two-dimensional limit model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Limit2DBands {
    pub length: f64,
    pub radius: f64,
    pub lambda_max: f64,
    pub curves: Vec<DispersionCurve>,
    pub bands: Vec<LimitBand>,
    pub gaps: GapReport,
    /// Bracket intervals where the sign scan saw an unexpected root count
    /// (assumed simple roots; anomalies are reported, not fatal).
    pub warnings: Vec<String>,
}

/// Sweep every branch of the two-dimensional limit model over `θ ∈ [0, π]`
/// (`T` samples) and assemble band intervals and gaps below `λ_max`.
///
/// Longitudinal branches enter while their floor `(mπ/L)²` is below `λ_max`.
/// A winding-`n` family is a candidate while its hard floor `n²/r²` is below
/// `λ_max`; its first root is always swept (the floor alone certifies where
/// the family can reach), higher `p` only while the previous root's band
/// still dips below `λ_max`.
pub fn limit2d_bands(length: f64, radius: f64, lambda_max: f64, t: usize) -> Result<Limit2DBands> {
    check_dispersion_geometry(length)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
    }
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::invalid("lambda_max", format!("need λ_max > 0, got {lambda_max}")));
    }
    if t < 9 {
        return Err(Error::invalid("T", format!("need at least 9 θ samples, got {t}")));
    }
    let theta = ThetaGrid::half_zone(t)?;
    let mut curves = Vec::new();
    let mut bands = Vec::new();
    let mut warnings = Vec::new();

    // Longitudinal branches with floor (mπ/L)² ≤ λ_max.
    let m_max = (length * lambda_max.sqrt() / PI).floor() as usize;
    for m in 0..=m_max {
        let mut values = Vec::with_capacity(t);
        for &th in &theta.values {
            let (omega, count) = longitudinal_root(length, th, m)?;
            if count != 1 {
                warnings.push(format!(
                    "branch omega_{m}: {count} roots in its bracket at θ = {th}"
                ));
            }
            values.push(omega);
        }
        push_band(&mut bands, &mut curves, BranchId::Longitudinal { m }, length, radius, &theta, values);
    }

    // Transverse families with floor n²/r² ≤ λ_max.
    let n_max = (radius * lambda_max.sqrt()).floor() as usize;
    for n in 1..=n_max {
        let nu = n as f64 / radius;
        // Roots with η² ≤ λ_max satisfy ω² ≤ λ_max − ν²; pad by two brackets
        // so the first root is found even when the family only pays off
        // above λ_max.
        let omega_cap = (lambda_max - nu * nu).max(0.0).sqrt() + 2.0 * PI / length;
        let per_theta: Vec<Vec<DispersionPoint>> = theta
            .values
            .iter()
            .map(|&th| transverse_roots(length, radius, n, th, omega_cap))
            .collect::<Result<_>>()?;
        let available = per_theta.iter().map(Vec::len).min().unwrap_or(0);
        if available == 0 {
            warnings.push(format!("winding-{n} family: no roots below ω = {omega_cap}"));
            continue;
        }
        for p in 1..=available {
            let values: Vec<f64> = per_theta.iter().map(|roots| roots[p - 1].eta).collect();
            let floor = values.iter().map(|&e| e * e).fold(f64::INFINITY, f64::min);
            // p = 1 is always kept; deeper roots only while they still reach
            // below the cap.
            if p > 1 && floor > lambda_max {
                break;
            }
            push_band(&mut bands, &mut curves, BranchId::Transverse { n, p }, length, radius, &theta, values);
        }
    }

    let as_floquet: Vec<Band> = bands
        .iter()
        .enumerate()
        .map(|(i, b)| Band { index: i + 1, lo: b.lo, hi: b.hi })
        .collect();
    let gaps = detect_gaps(&as_floquet, lambda_max)?;

    Ok(Limit2DBands {
        length,
        radius,
        lambda_max,
        curves,
        bands,
        gaps,
        warnings,
    })
}

fn push_band(
    bands: &mut Vec<LimitBand>,
    curves: &mut Vec<DispersionCurve>,
    branch: BranchId,
    length: f64,
    radius: f64,
    theta: &ThetaGrid,
    values: Vec<f64>,
) {
    let lo = values.iter().map(|&v| v * v).fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(|&v| v * v).fold(f64::NEG_INFINITY, f64::max);
    bands.push(LimitBand { branch, lo, hi });
    curves.push(DispersionCurve {
        branch,
        length,
        radius,
        theta: theta.values.clone(),
        values,
    });
}

/// The six branches of the reference dispersion plot (`L = 0.5`,
/// `r = 1/13`): longitudinal `m = 0..4` and the first winding branch, all as
/// `√λ` over `θ ∈ [0, π]` at `T` samples.
pub fn figure3_curves(t: usize) -> Result<Vec<DispersionCurve>> {
    let (length, radius) = (0.5, 1.0 / 13.0);
    if t < 9 {
        return Err(Error::invalid("T", format!("need at least 9 θ samples, got {t}")));
    }
    let theta = ThetaGrid::half_zone(t)?;
    let mut curves = Vec::new();
    for m in 0..=4 {
        let values = theta
            .values
            .iter()
            .map(|&th| dispersion_n0(length, th, m))
            .collect::<Result<Vec<_>>>()?;
        curves.push(DispersionCurve {
            branch: BranchId::Longitudinal { m },
            length,
            radius,
            theta: theta.values.clone(),
            values,
        });
    }
    let values = theta
        .values
        .iter()
        .map(|&th| dispersion_n(length, radius, 1, th, 1).map(|point| point.eta))
        .collect::<Result<Vec<_>>>()?;
    curves.push(DispersionCurve {
        branch: BranchId::Transverse { n: 1, p: 1 },
        length,
        radius,
        theta: theta.values,
        values,
    });
    Ok(curves)
}

// ---------------------------------------------------------------------------
// Gap certificate
// ---------------------------------------------------------------------------

/// Sufficient condition for `m` spectral gaps of the two-dimensional model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub length: f64,
    pub radius: f64,
    /// Number of gaps the certificate is asked to guarantee.
    pub gaps_required: usize,
    /// Radius threshold `L/(mπ)`.
    pub threshold: f64,
    /// `true` iff `r ≤ L/(mπ)`.
    pub certified: bool,
}

/// Certify at least `m` spectral gaps: sufficient iff `r ≤ L/(mπ)` (the
/// winding families then stay above the first `m` longitudinal gaps).
pub fn gap_certificate(length: f64, radius: f64, m: usize) -> Result<GapCertificate> {
    if m < 1 {
        return Err(Error::invalid("m", "need at least one requested gap"));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::invalid("L", format!("must be positive, got {length}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
    }
    let threshold = length / (m as f64 * PI);
    Ok(GapCertificate {
        length,
        radius,
        gaps_required: m,
        threshold,
        certified: radius <= threshold,
    })
}

// ---------------------------------------------------------------------------
