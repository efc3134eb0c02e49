//! Period cells and geometric diagnostics.
//!
//! Two cell families are supported, both rotationally symmetric with a single
//! period generator:
//!
//! * [`ProfileCell`] — a warped product `ds² + f(s)² dσ²` over `s ∈ [0, S]`
//!   with cross-section sphere `S^{d-1}`. Constructors build the dumbbell
//!   chain (spheres joined by thin necks), the cylinder-linked chain (a flat
//!   cylinder of length `L` inserted between the spheres), and the undeformed
//!   flat cylinder.
//! * [`ConformalCell`] — a flat cylinder `[0,1] × S^{d-1}_r` carrying the
//!   conformally deformed metric `ρ(x)² g_flat`, where the factor `ρ` is 1 on
//!   an undisturbed band `[a, b]` and collapses to `ε` outside a thin
//!   transition zone.
//!
//! Cells are plain sampled data (grid + coefficient samples), immutable after
//! construction and serializable to JSON for golden-file tests.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Minimum number of grid intervals required inside the constant collar
/// `[0, ε/2]` of a neck (and inside each conformal transition zone).
pub const MIN_COLLAR_INTERVALS: usize = 8;

/// Default number of body-zone intervals per cell length (spacing `S/400`).
pub const DEFAULT_BODY_INTERVALS: usize = 400;

// ---------------------------------------------------------------------------
// Smoothing functions
// ---------------------------------------------------------------------------

/// Quintic smoothstep `q(t) = 6t⁵ − 15t⁴ + 10t³`, clamped to 0 for `t ≤ 0`
/// and 1 for `t ≥ 1`. C² across both ends.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (6.0 * t - 15.0))
    }
}

/// Neck cutoff `χ_ε(s)`: 0 for `s ≤ ε`, 1 for `s ≥ 2ε`, smoothstep between.
pub fn neck_cutoff(s: f64, eps: f64) -> f64 {
    smoothstep((s - eps) / eps)
}

/// Smoothed distance-to-junction radius `r_ε(s)`: exactly `ε` on `[0, ε]`,
/// exactly `s` for `s ≥ 2ε`, monotone non-decreasing in between.
///
/// The raw smoothstep blend between the constants `ε` and the identity dips
/// below `ε` on part of `(ε/2, ε)`; the clamp `max(ε, ·)` restores
/// monotonicity (at the cost of a slope kink where the clamp releases).
pub fn smoothed_radius(s: f64, eps: f64) -> f64 {
    let q = smoothstep((s - 0.5 * eps) / (1.5 * eps));
    ((1.0 - q) * eps + q * s).max(eps)
}

/// Dumbbell profile on `[0, π]`: the unit-sphere radius `sin s` away from the
/// junctions, blended into the constant neck radius `ε` near both ends:
/// `f = χ_ε(s̃)·sin s + (1 − χ_ε(s̃))·r_ε(s̃)` with `s̃ = min(s, π − s)`.
pub fn dumbbell_radius(s: f64, eps: f64) -> f64 {
    let sm = s.min(PI - s); // distance to the nearer junction
    let chi = neck_cutoff(sm, eps);
    if chi <= 0.0 {
        smoothed_radius(sm, eps)
    } else if chi >= 1.0 {
        s.sin()
    } else {
        chi * s.sin() + (1.0 - chi) * smoothed_radius(sm, eps)
    }
}

/// Conformal factor `ρ(x)` on `[0, 1]`: 1 on the undisturbed band `[a, b]`,
/// `ε` at distance ≥ `width` from it, smoothstep transition in between.
pub fn conformal_factor_at(x: f64, a: f64, b: f64, width: f64, eps: f64) -> f64 {
    if (a..=b).contains(&x) {
        1.0
    } else if x < a {
        eps + (1.0 - eps) * smoothstep((x - (a - width)) / width)
    } else {
        eps + (1.0 - eps) * smoothstep(((b + width) - x) / width)
    }
}

// ---------------------------------------------------------------------------
// Meshing
// ---------------------------------------------------------------------------

/// Mesh parameters for cell constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    /// Target spacing away from necks/transitions; `None` = cell length / 400.
    pub body_spacing: Option<f64>,
    /// Neck refinement factor: blend zones get spacing `ε / collar_factor`,
    /// the constant collar `[0, ε/2]` gets `ε / (2·collar_factor)` so that it
    /// contains at least `collar_factor` intervals. Must be ≥ 8.
    pub collar_factor: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            body_spacing: None,
            collar_factor: MIN_COLLAR_INTERVALS as f64,
        }
    }
}

impl MeshSpec {
    fn body_spacing_for(&self, cell_length: f64) -> Result<f64> {
        let h = self
            .body_spacing
            .unwrap_or(cell_length / DEFAULT_BODY_INTERVALS as f64);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("body_spacing", format!("must be positive, got {h}")));
        }
        Ok(h)
    }

    fn checked_collar_factor(&self) -> Result<f64> {
        if self.collar_factor < MIN_COLLAR_INTERVALS as f64 {
            return Err(Error::MeshTooCoarse(format!(
                "collar_factor {} puts fewer than {} intervals in the collar [0, eps/2]",
                self.collar_factor, MIN_COLLAR_INTERVALS
            )));
        }
        Ok(self.collar_factor)
    }
}

/// Build a grid from consecutive zones `(end, target_spacing)` starting at 0;
/// each zone is subdivided uniformly with spacing ≤ its target. Zero-width
/// zones are skipped, zone ends land on the grid exactly.
fn graded_grid(zones: &[(f64, f64)]) -> Vec<f64> {
    let mut grid = vec![0.0];
    let mut start = 0.0;
    for &(end, target) in zones {
        if end - start <= 1e-14 {
            continue;
        }
        let n = ((end - start) / target).ceil().max(1.0) as usize;
        for i in 1..=n {
            grid.push(start + (end - start) * i as f64 / n as f64);
        }
        *grid.last_mut().unwrap() = end; // pin the breakpoint exactly
        start = end;
    }
    grid
}

// ---------------------------------------------------------------------------
// Profile cells
// ---------------------------------------------------------------------------

/// Which standard family a [`ProfileCell`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellKind {
    Dumbbell,
    CylinderLinked,
    FlatCylinder,
    Custom,
}

/// Sampled warped-product period cell `ds² + f(s)² dσ²` on `[0, length]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCell {
    /// Manifold dimension `d ≥ 2`; the cross-section is `S^{d-1}`.
    pub dimension: usize,
    /// Period-cell length `S`.
    pub length: f64,
    /// Strictly increasing grid `0 = s_0 < … < s_N = S`.
    pub grid: Vec<f64>,
    /// Radius samples `f(s_i) > 0`.
    pub profile: Vec<f64>,
    /// Declared collar half-width: `f ≡ ε` on `[0, collar]` and `[S − collar, S]`.
    pub collar: f64,
    /// Neck radius `ε` (for `FlatCylinder`, the cylinder radius).
    pub epsilon: f64,
    pub kind: CellKind,
}

impl ProfileCell {
    /// Wrap externally produced samples as a `Custom` cell (positivity and
    /// grid monotonicity are still enforced; no collar/glue requirements).
    pub fn from_samples(dimension: usize, grid: Vec<f64>, profile: Vec<f64>) -> Result<Self> {
        let length = *grid.last().ok_or_else(|| Error::invalid("grid", "empty grid"))?;
        let epsilon = profile.iter().copied().fold(f64::INFINITY, f64::min);
        let cell = ProfileCell {
            dimension,
            length,
            grid,
            profile,
            collar: 0.0,
            epsilon,
            kind: CellKind::Custom,
        };
        cell.validate()?;
        Ok(cell)
    }

    /// Check the structural invariants; constructors call this before
    /// returning a cell.
    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::invalid("dimension", format!("d ≥ 2 required, got {}", self.dimension)));
        }
        if self.grid.len() != self.profile.len() {
            return Err(Error::DimensionMismatch(format!(
                "grid has {} points but profile has {} samples",
                self.grid.len(),
                self.profile.len()
            )));
        }
        if self.grid.len() < 2 {
            return Err(Error::invalid("grid", "need at least 2 grid points"));
        }
        if self.grid[0] != 0.0 {
            return Err(Error::invalid("grid", "grid must start at 0"));
        }
        if !self.grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::invalid("grid", "grid must be strictly increasing"));
        }
        if let Some(f) = self.profile.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
            return Err(Error::invalid("profile", format!("radius must be positive and finite, got {f}")));
        }
        if self.kind != CellKind::Custom {
            // Smooth glue across the period boundary: matching values and
            // one-sided difference quotients.
            let n = self.grid.len() - 1;
            let df0 = (self.profile[1] - self.profile[0]) / (self.grid[1] - self.grid[0]);
            let dfn = (self.profile[n] - self.profile[n - 1]) / (self.grid[n] - self.grid[n - 1]);
            if (self.profile[0] - self.profile[n]).abs() > 1e-12
                || (df0 - dfn.abs() * dfn.signum()).abs() > 1e-9
            {
                return Err(Error::invalid("profile", "period-boundary glue broken (values or slopes differ)"));
            }
            // Declared collar really is constant.
            for (s, f) in self.grid.iter().zip(&self.profile) {
                let in_collar = *s <= self.collar + 1e-14 || *s >= self.length - self.collar - 1e-14;
                if in_collar && (f - self.epsilon).abs() > 1e-13 {
                    return Err(Error::invalid("profile", format!("collar sample f({s}) = {f} != eps = {}", self.epsilon)));
                }
            }
        }
        Ok(())
    }

    /// Number of whole grid intervals inside `[0, x]`.
    fn intervals_below(&self, x: f64) -> usize {
        self.grid.windows(2).take_while(|w| w[1] <= x + 1e-12).count()
    }

    /// End regions used for mass-localization diagnostics.
    pub fn mass_regions(&self, which: MassRegion) -> Result<Vec<(f64, f64)>> {
        let width = match which {
            MassRegion::Ends => 2.0 * self.epsilon,
            // Collar plus the full blend zone [collar, collar + 3ε/2].
            MassRegion::Neck => self.collar + 1.5 * self.epsilon,
            MassRegion::Explicit(w) => w,
        };
        if !(width > 0.0 && width <= 0.5 * self.length) {
            return Err(Error::invalid("region", format!("end width {width} outside (0, length/2]")));
        }
        Ok(vec![(0.0, width), (self.length - width, self.length)])
    }
}

/// Region selector for [`crate::floquet::end_mass_fraction`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassRegion {
    /// `[0, 2ε] ∪ [S − 2ε, S]` — the cylindrical ends.
    Ends,
    /// The full collapsing zone: collar plus blend, each side.
    Neck,
    /// Explicit end width per side (diagnostic override).
    Explicit(f64),
}

/// Dumbbell period cell: unit spheres joined by a neck of radius `ε`, cell
/// length `S = π`. Requires `2ε < π/4` (the hard-coded injectivity scale).
pub fn dumbbell_cell(dimension: usize, epsilon: f64, mesh: &MeshSpec) -> Result<ProfileCell> {
    build_chain_cell(dimension, epsilon, 0.0, mesh, CellKind::Dumbbell)
}

/// Cylinder-linked period cell: a flat cylinder of length `link ≥ 0` and
/// radius `ε` inserted between the dumbbell spheres (half at each cell end);
/// `link = 0` reproduces `dumbbell_cell` sample-for-sample.
pub fn cylinder_linked_cell(
    dimension: usize,
    epsilon: f64,
    link: f64,
    mesh: &MeshSpec,
) -> Result<ProfileCell> {
    if !(link >= 0.0 && link.is_finite()) {
        return Err(Error::invalid("link", format!("link length must be ≥ 0, got {link}")));
    }
    let kind = if link == 0.0 { CellKind::Dumbbell } else { CellKind::CylinderLinked };
    build_chain_cell(dimension, epsilon, link, mesh, kind)
}

fn build_chain_cell(
    dimension: usize,
    epsilon: f64,
    link: f64,
    mesh: &MeshSpec,
    kind: CellKind,
) -> Result<ProfileCell> {
    if dimension < 2 {
        return Err(Error::invalid("dimension", format!("d ≥ 2 required, got {dimension}")));
    }
    // 2ε < π/4: necks must stay clear of the sphere equator (injectivity scale).
    if !(epsilon > 0.0 && 2.0 * epsilon < 0.25 * PI) {
        return Err(Error::invalid("epsilon", format!("need 0 < 2ε < π/4, got ε = {epsilon}")));
    }
    let length = PI + link;
    let h_body = mesh.body_spacing_for(length)?;
    let cf = mesh.checked_collar_factor()?;
    let h_collar = (epsilon / (2.0 * cf)).min(h_body);
    let h_neck = (epsilon / cf).min(h_body);
    let half = 0.5 * link;
    // Build the left half only and mirror it, so the two necks subdivide
    // identically (independently computed zone widths can land on different
    // sides of a ceil() boundary).
    let zones = [
        (0.5 * epsilon, h_collar),      // constant collar
        (half + 0.5 * epsilon, h_neck), // inserted half-cylinder (empty if link = 0)
        (half + 2.0 * epsilon, h_neck), // blend zone
        (0.5 * length, h_body),         // sphere body up to the equator
    ];
    let left = graded_grid(&zones);
    let mut grid = left.clone();
    grid.extend(left.iter().rev().skip(1).map(|s| length - s));
    let profile = grid
        .iter()
        .map(|&s| {
            let u = (s - half).clamp(0.0, PI); // axial coordinate within the dumbbell part
            dumbbell_radius(u, epsilon)
        })
        .collect();
    let cell = ProfileCell {
        dimension,
        length,
        grid,
        profile,
        collar: half + 0.5 * epsilon,
        epsilon,
        kind,
    };
    cell.validate()?;
    if cell.intervals_below(0.5 * epsilon) < MIN_COLLAR_INTERVALS {
        return Err(Error::MeshTooCoarse(format!(
            "fewer than {MIN_COLLAR_INTERVALS} intervals inside the collar [0, {}]",
            0.5 * epsilon
        )));
    }
    Ok(cell)
}

/// Undeformed flat cylinder of the given radius and period length; uniform
/// grid at the body spacing.
pub fn flat_cylinder_cell(
    dimension: usize,
    radius: f64,
    length: f64,
    mesh: &MeshSpec,
) -> Result<ProfileCell> {
    if dimension < 2 {
        return Err(Error::invalid("dimension", format!("d ≥ 2 required, got {dimension}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", format!("radius must be positive, got {radius}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::invalid("length", format!("length must be positive, got {length}")));
    }
    let h = mesh.body_spacing_for(length)?;
    let grid = graded_grid(&[(length, h)]);
    let profile = vec![radius; grid.len()];
    let cell = ProfileCell {
        dimension,
        length,
        grid,
        profile,
        collar: 0.5 * length,
        epsilon: radius,
        kind: CellKind::FlatCylinder,
    };
    cell.validate()?;
    Ok(cell)
}

// ---------------------------------------------------------------------------
// Conformal cells
// ---------------------------------------------------------------------------

/// Sampled conformal factor `ρ` over the unit-period flat cylinder
/// `[0,1] × S^{d-1}_r`, metric `ρ(x)² (dx² + r² dσ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalCell {
    /// Manifold dimension `d ≥ 2`.
    pub dimension: usize,
    /// Base cylinder radius `r`.
    pub radius: f64,
    /// Strictly increasing grid `0 = x_0 < … < x_N = 1`.
    pub grid: Vec<f64>,
    /// Factor samples `ρ(x_i) ∈ [ε, 1]`.
    pub factor: Vec<f64>,
    /// Undisturbed band `[a, b]` where `ρ ≡ 1`.
    pub undisturbed: (f64, f64),
    /// Transition-zone width `ε^d`.
    pub transition: f64,
    /// Collapse factor `ε`.
    pub epsilon: f64,
}

impl ConformalCell {
    /// Wrap externally produced factor samples (degenerate/diagnostic cells);
    /// enforces grid monotonicity and `0 < ρ ≤ 1`.
    pub fn from_samples(
        dimension: usize,
        radius: f64,
        grid: Vec<f64>,
        factor: Vec<f64>,
        undisturbed: (f64, f64),
    ) -> Result<Self> {
        let epsilon = factor.iter().copied().fold(f64::INFINITY, f64::min);
        let cell = ConformalCell {
            dimension,
            radius,
            grid,
            factor,
            undisturbed,
            transition: 0.0,
            epsilon,
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::invalid("dimension", format!("d ≥ 2 required, got {}", self.dimension)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::invalid("radius", format!("radius must be positive, got {}", self.radius)));
        }
        if self.grid.len() != self.factor.len() {
            return Err(Error::DimensionMismatch(format!(
                "grid has {} points but factor has {} samples",
                self.grid.len(),
                self.factor.len()
            )));
        }
        if self.grid.len() < 2 || self.grid[0] != 0.0 || *self.grid.last().unwrap() != 1.0 {
            return Err(Error::invalid("grid", "grid must run from 0 to 1"));
        }
        if !self.grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::invalid("grid", "grid must be strictly increasing"));
        }
        if let Some(f) = self.factor.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(Error::invalid("factor", format!("factor must lie in (0, 1], got {f}")));
        }
        Ok(())
    }

    /// Complement of the undisturbed band, as end regions.
    pub fn mass_regions(&self, which: MassRegion) -> Result<Vec<(f64, f64)>> {
        let (a, b) = self.undisturbed;
        match which {
            MassRegion::Ends | MassRegion::Neck => Ok(vec![(0.0, a), (b, 1.0)]),
            MassRegion::Explicit(w) => {
                if !(w > 0.0 && w <= 0.5) {
                    return Err(Error::invalid("region", format!("end width {w} outside (0, 1/2]")));
                }
                Ok(vec![(0.0, w), (1.0 - w, 1.0)])
            }
        }
    }
}

/// Conformally deformed cylinder cell: `ρ ≡ 1` on `[a, b]`, `ρ ≡ ε` at
/// distance ≥ `ε^d` from it, quintic transition in between. Requires
/// `ε^d < min(a, 1 − b)` so the transition zones stay clear of the period
/// boundary, keeping the periodic continuation smooth.
pub fn conformal_cell(
    dimension: usize,
    radius: f64,
    a: f64,
    b: f64,
    epsilon: f64,
    mesh: &MeshSpec,
) -> Result<ConformalCell> {
    if dimension < 2 {
        return Err(Error::invalid("dimension", format!("d ≥ 2 required, got {dimension}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", format!("radius must be positive, got {radius}")));
    }
    if !(0.0 < a && a < b && b < 1.0) {
        return Err(Error::invalid("undisturbed", format!("need 0 < a < b < 1, got [{a}, {b}]")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon", format!("need 0 < ε < 1, got {epsilon}")));
    }
    let width = epsilon.powi(dimension as i32);
    if width >= a.min(1.0 - b) {
        return Err(Error::invalid(
            "epsilon",
            format!("transition width ε^d = {width} overlaps the period boundary (need < min(a, 1−b) = {})", a.min(1.0 - b)),
        ));
    }
    let h_body = mesh.body_spacing_for(1.0)?;
    let cf = mesh.checked_collar_factor()?;
    let h_zone = (width / cf).min(h_body);
    let zones = [
        (a - width, h_body),
        (a, h_zone),
        (b, h_body),
        (b + width, h_zone),
        (1.0, h_body),
    ];
    let grid = graded_grid(&zones);
    let factor = grid
        .iter()
        .map(|&x| conformal_factor_at(x, a, b, width, epsilon))
        .collect();
    let cell = ConformalCell {
        dimension,
        radius,
        grid,
        factor,
        undisturbed: (a, b),
        transition: width,
        epsilon,
    };
    cell.validate()?;
    Ok(cell)
}

// ---------------------------------------------------------------------------
// Curvature diagnostics
// ---------------------------------------------------------------------------

/// Sectional curvatures sampled over the cell grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub grid: Vec<f64>,
    /// Sections containing the axial direction.
    pub radial: Vec<f64>,
    /// Sections tangent to the cross-section sphere; `None` when `d = 2`.
    pub spherical: Option<Vec<f64>>,
    /// `max |K|` over all reported sections and grid points.
    pub max_abs: f64,
}

/// First and second derivatives on a non-uniform grid: 3-point stencils,
/// central in the interior and one-sided at the ends (exact for quadratics).
fn grid_derivatives(grid: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = grid.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let stencil = |i0: usize, at: usize| -> (f64, f64) {
        // Quadratic through nodes i0, i0+1, i0+2, differentiated at `at`.
        let (x0, x1, x2) = (grid[i0], grid[i0 + 1], grid[i0 + 2]);
        let (f0, f1, f2) = (values[i0], values[i0 + 1], values[i0 + 2]);
        let xa = grid[at];
        let c0 = ((xa - x1) + (xa - x2)) / ((x0 - x1) * (x0 - x2));
        let c1 = ((xa - x0) + (xa - x2)) / ((x1 - x0) * (x1 - x2));
        let c2 = ((xa - x0) + (xa - x1)) / ((x2 - x0) * (x2 - x1));
        let first = c0 * f0 + c1 * f1 + c2 * f2;
        let second = 2.0
            * (f0 / ((x0 - x1) * (x0 - x2))
                + f1 / ((x1 - x0) * (x1 - x2))
                + f2 / ((x2 - x0) * (x2 - x1)));
        (first, second)
    };
    for i in 0..n {
        let i0 = i.clamp(1, n - 2) - 1;
        let (first, second) = stencil(i0, i);
        d1[i] = first;
        d2[i] = second;
    }
    (d1, d2)
}

/// Sectional curvature of a warped-product cell: radial sections
/// `K_rad = −f̈/f` and (d ≥ 3) spherical sections `K_sph = (1 − ḟ²)/f²`,
/// with derivatives taken by finite differences on the cell grid.
pub fn sectional_curvature(cell: &ProfileCell) -> Result<CurvatureReport> {
    if cell.grid.len() < 3 {
        return Err(Error::InsufficientData(
            "curvature needs at least 3 grid points".into(),
        ));
    }
    let (d1, d2) = grid_derivatives(&cell.grid, &cell.profile);
    let radial: Vec<f64> = cell
        .profile
        .iter()
        .zip(&d2)
        .map(|(f, ddf)| -ddf / f)
        .collect();
    let spherical = (cell.dimension >= 3).then(|| {
        cell.profile
            .iter()
            .zip(&d1)
            .map(|(f, df)| (1.0 - df * df) / (f * f))
            .collect::<Vec<f64>>()
    });
    let max_abs = max_abs_of(&radial, spherical.as_deref());
    Ok(CurvatureReport {
        grid: cell.grid.clone(),
        radial,
        spherical,
        max_abs,
    })
}

/// Sectional curvature of a conformally deformed flat cylinder:
/// `K_rad = ρ⁵·(−ρ̈)` and (d ≥ 3) `K_sph = ρ⁶·(−ρ̇²)`, derivatives in the
/// flat background coordinate `x`.
pub fn conformal_curvature(cell: &ConformalCell) -> Result<CurvatureReport> {
    if cell.grid.len() < 3 {
        return Err(Error::InsufficientData(
            "curvature needs at least 3 grid points".into(),
        ));
    }
    let (d1, d2) = grid_derivatives(&cell.grid, &cell.factor);
    let radial: Vec<f64> = cell
        .factor
        .iter()
        .zip(&d2)
        .map(|(rho, ddr)| rho.powi(5) * (-ddr))
        .collect();
    let spherical = (cell.dimension >= 3).then(|| {
        cell.factor
            .iter()
            .zip(&d1)
            .map(|(rho, dr)| rho.powi(6) * (-(dr * dr)))
            .collect::<Vec<f64>>()
    });
    let max_abs = max_abs_of(&radial, spherical.as_deref());
    Ok(CurvatureReport {
        grid: cell.grid.clone(),
        radial,
        spherical,
        max_abs,
    })
}

fn max_abs_of(radial: &[f64], spherical: Option<&[f64]>) -> f64 {
    let m1 = radial.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let m2 = spherical
        .map(|s| s.iter().fold(0.0f64, |m, k| m.max(k.abs())))
        .unwrap_or(0.0);
    m1.max(m2)
}

// ---------------------------------------------------------------------------
// Isoperimetric diagnostic
// ---------------------------------------------------------------------------

/// Upper bound on the ν-isoperimetric constant from the slice family
/// `Ω = (s₁, s₂) × S^{d-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricBound {
    pub nu: f64,
    pub value: f64,
    /// The minimizing slice `(s₁, s₂)`.
    pub slice: (f64, f64),
}

/// Surface area of the unit sphere `S^n` (σ₀ = 2, σ₁ = 2π, recurrence
/// σ_n = 2π σ_{n−2} / (n − 1)).
pub fn unit_sphere_area(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * unit_sphere_area(n - 2),
    }
}

/// Minimize `vol(∂Ω)^ν / vol(Ω)^{ν−1}` over grid slices `Ω = (s₁, s₂) × S^{d-1}`:
/// an upper bound for the ν-isoperimetric constant of the periodic manifold.
pub fn isoperimetric_slice_bound(cell: &ProfileCell, nu: f64) -> Result<IsoperimetricBound> {
    if !(nu > 1.0) {
        return Err(Error::invalid("nu", format!("need ν > 1, got {nu}")));
    }
    let d = cell.dimension;
    let sigma = unit_sphere_area(d - 1);
    let fp: Vec<f64> = cell.profile.iter().map(|f| f.powi(d as i32 - 1)).collect();
    // Trapezoid prefix integral of f^{d-1}.
    let n = cell.grid.len();
    let mut prefix = vec![0.0; n];
    for i in 1..n {
        prefix[i] = prefix[i - 1] + 0.5 * (fp[i] + fp[i - 1]) * (cell.grid[i] - cell.grid[i - 1]);
    }
    let mut best = f64::INFINITY;
    let mut slice = (cell.grid[0], cell.grid[n - 1]);
    for i in 0..n {
        for j in (i + 1)..n {
            let boundary = sigma * (fp[i] + fp[j]);
            let volume = sigma * (prefix[j] - prefix[i]);
            let ratio = boundary.powf(nu) / volume.powf(nu - 1.0);
            if ratio < best {
                best = ratio;
                slice = (cell.grid[i], cell.grid[j]);
            }
        }
    }
    Ok(IsoperimetricBound { nu, value: best, slice })
}

// ---------------------------------------------------------------------------
