//! Angular-mode enumeration and reduction to 1-D Sturm–Liouville problems.
//!
//! Separation of variables on a rotationally symmetric cell turns the
//! Laplace–Beltrami operator into a direct sum over cross-section spherical
//! harmonics. Each [`AngularMode`] of `S^{d-1}` contributes an independent
//! 1-D problem `−(p u′)′ + q u = λ m u` on the cell grid whose coefficient
//! arrays depend on the cell family:
//!
//! * warped product `ds² + f(s)² dσ²`: `p = f^{d−1}`, `q = μ f^{d−3}`,
//!   `m = f^{d−1}`;
//! * conformal cylinder `ρ(x)²(dx² + r² dσ²)`: `p = ρ^{d−2}`,
//!   `q = μ ρ^{d−2}/r²`, `m = ρ^d` (for `d = 2` the stiffness is exactly 1,
//!   independent of the deformation — only the mass sees `ρ`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConformalCell, MassRegion, ProfileCell};

/// One boundary point of the 1-D problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndCondition {
    Dirichlet,
    Neumann,
}

/// Boundary condition of a reduced 1-D problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    /// `u(S) = e^{−iθ} u(0)` — one Floquet fiber, `θ ∈ [0, 2π)`.
    QuasiPeriodic(f64),
    /// Dirichlet at both ends.
    Dirichlet,
    /// Neumann (natural) at both ends.
    Neumann,
    /// Independent conditions at the left and right end.
    Mixed(EndCondition, EndCondition),
}

impl BoundaryCondition {
    /// End conditions for the decoupled cases; `None` when quasi-periodic.
    pub fn end_conditions(&self) -> Option<(EndCondition, EndCondition)> {
        match *self {
            BoundaryCondition::QuasiPeriodic(_) => None,
            BoundaryCondition::Dirichlet => Some((EndCondition::Dirichlet, EndCondition::Dirichlet)),
            BoundaryCondition::Neumann => Some((EndCondition::Neumann, EndCondition::Neumann)),
            BoundaryCondition::Mixed(l, r) => Some((l, r)),
        }
    }
}

/// A spherical-harmonic eigenspace of the cross-section `S^{d-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularMode {
    /// Harmonic degree `ℓ ≥ 0`.
    pub degree: usize,
    /// Cross-section eigenvalue `μ = ℓ(ℓ + d − 2)`.
    pub eigenvalue: f64,
    /// Eigenspace dimension.
    pub multiplicity: usize,
}

fn binomial(n: usize, k: usize) -> Result<usize> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::invalid("degree", format!("binomial({n}, {k}) overflows")))?
            / (i as u128 + 1);
    }
    usize::try_from(acc).map_err(|_| Error::invalid("degree", format!("binomial({n}, {k}) overflows")))
}

/// The degree-`ℓ` mode of `S^{d-1}`: eigenvalue `ℓ(ℓ+d−2)`, multiplicity
/// `C(ℓ+d−1, ℓ) − C(ℓ+d−3, ℓ−2)`.
pub fn angular_mode(dimension: usize, degree: usize) -> Result<AngularMode> {
    if dimension < 2 {
        return Err(Error::invalid("dimension", format!("d ≥ 2 required, got {dimension}")));
    }
    let (d, l) = (dimension, degree);
    let lower = if l >= 2 { binomial(l + d - 3, l - 2)? } else { 0 };
    let multiplicity = binomial(l + d - 1, l)? - lower;
    Ok(AngularMode {
        degree,
        eigenvalue: (l * (l + d - 2)) as f64,
        multiplicity,
    })
}

/// Reduced 1-D eigenproblem `∫ p|u′|² + q|u|² = λ ∫ m|u|²` on the cell grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SturmLiouvilleProblem {
    pub grid: Vec<f64>,
    /// Stiffness weight `p > 0` at grid points.
    pub stiffness: Vec<f64>,
    /// Potential weight `q ≥ 0` at grid points.
    pub potential: Vec<f64>,
    /// Mass weight `m > 0` at grid points.
    pub mass: Vec<f64>,
    pub boundary: BoundaryCondition,
}

impl SturmLiouvilleProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if n < 3 {
            return Err(Error::invalid("grid", "need at least 3 grid points"));
        }
        if self.stiffness.len() != n || self.potential.len() != n || self.mass.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "coefficient arrays ({}, {}, {}) not conformal with grid ({n})",
                self.stiffness.len(),
                self.potential.len(),
                self.mass.len()
            )));
        }
        if !self.grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::invalid("grid", "grid must be strictly increasing"));
        }
        if self.stiffness.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::invalid("stiffness", "p must be positive and finite"));
        }
        if self.mass.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::invalid("mass", "m must be positive and finite"));
        }
        if self.potential.iter().any(|q| !(*q >= 0.0 && q.is_finite())) {
            return Err(Error::invalid("potential", "q must be nonnegative and finite"));
        }
        Ok(())
    }

    /// Same coefficients under a different boundary condition.
    pub fn with_boundary(&self, boundary: BoundaryCondition) -> Self {
        SturmLiouvilleProblem {
            boundary,
            ..self.clone()
        }
    }
}

/// Reduce a warped-product cell to the mode-`ℓ` 1-D problem.
pub fn reduce_profile(
    cell: &ProfileCell,
    mode: &AngularMode,
    boundary: BoundaryCondition,
) -> SturmLiouvilleProblem {
    let d = cell.dimension as i32;
    let mu = mode.eigenvalue;
    SturmLiouvilleProblem {
        grid: cell.grid.clone(),
        stiffness: cell.profile.iter().map(|f| f.powi(d - 1)).collect(),
        potential: cell.profile.iter().map(|f| mu * f.powi(d - 3)).collect(),
        mass: cell.profile.iter().map(|f| f.powi(d - 1)).collect(),
        boundary,
    }
}

/// Reduce a conformally deformed cylinder to the mode-`ℓ` 1-D problem.
pub fn reduce_conformal(
    cell: &ConformalCell,
    mode: &AngularMode,
    boundary: BoundaryCondition,
) -> SturmLiouvilleProblem {
    let d = cell.dimension as i32;
    let mu = mode.eigenvalue;
    let r2 = cell.radius * cell.radius;
    SturmLiouvilleProblem {
        grid: cell.grid.clone(),
        stiffness: cell.factor.iter().map(|rho| rho.powi(d - 2)).collect(),
        potential: cell.factor.iter().map(|rho| mu * rho.powi(d - 2) / r2).collect(),
        mass: cell.factor.iter().map(|rho| rho.powi(d)).collect(),
        boundary,
    }
}

/// Common interface of the two cell families, used by the Floquet sweep.
pub trait ReducibleCell {
    fn dimension(&self) -> usize;
    /// Period-cell length.
    fn period(&self) -> f64;
    fn grid(&self) -> &[f64];
    /// Minimum of the mode potential `q/m` at `μ = 1`: every mode-`ℓ`
    /// eigenvalue is ≥ `μ_ℓ ·` this floor, so modes above
    /// `λ_max / floor` cannot contribute below `λ_max`.
    fn mode_floor(&self) -> f64;
    fn reduce(&self, mode: &AngularMode, boundary: BoundaryCondition) -> SturmLiouvilleProblem;
    fn mass_regions(&self, which: MassRegion) -> Result<Vec<(f64, f64)>>;
}

impl ReducibleCell for ProfileCell {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn period(&self) -> f64 {
        self.length
    }
    fn grid(&self) -> &[f64] {
        &self.grid
    }
    fn mode_floor(&self) -> f64 {
        // q/m = μ f^{−2} ⇒ floor at μ = 1 is 1 / max f².
        let fmax = self.profile.iter().copied().fold(0.0f64, f64::max);
        1.0 / (fmax * fmax)
    }
    fn reduce(&self, mode: &AngularMode, boundary: BoundaryCondition) -> SturmLiouvilleProblem {
        reduce_profile(self, mode, boundary)
    }
    fn mass_regions(&self, which: MassRegion) -> Result<Vec<(f64, f64)>> {
        ProfileCell::mass_regions(self, which)
    }
}

impl ReducibleCell for ConformalCell {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn period(&self) -> f64 {
        1.0
    }
    fn grid(&self) -> &[f64] {
        &self.grid
    }
    fn mode_floor(&self) -> f64 {
        // q/m = μ / (r² ρ²) ⇒ floor at μ = 1 is 1 / (r² max ρ²).
        let rmax = self.factor.iter().copied().fold(0.0f64, f64::max);
        1.0 / (self.radius * self.radius * rmax * rmax)
    }
    fn reduce(&self, mode: &AngularMode, boundary: BoundaryCondition) -> SturmLiouvilleProblem {
        reduce_conformal(self, mode, boundary)
    }
    fn mass_regions(&self, which: MassRegion) -> Result<Vec<(f64, f64)>> {
        ConformalCell::mass_regions(self, which)
    }
}

/// All angular modes that can contribute spectrum ≤ `lambda_max`: the modes
/// with `μ_ℓ · mode_floor ≤ λ_max`. Since `μ_ℓ` is strictly increasing the
/// returned list is an initial segment of degrees `0..=ℓ_max`.
pub fn enumerate_modes<C: ReducibleCell>(cell: &C, lambda_max: f64) -> Result<Vec<AngularMode>> {
    if !(lambda_max > 0.0) {
        return Err(Error::invalid("lambda_max", format!("need λ_max > 0, got {lambda_max}")));
    }
    if cell.grid().is_empty() {
        return Err(Error::invalid("cell", "empty grid"));
    }
    let floor = cell.mode_floor();
    let mut modes = Vec::new();
    for degree in 0.. {
        let mode = angular_mode(cell.dimension(), degree)?;
        if mode.eigenvalue * floor > lambda_max {
            break;
        }
        modes.push(mode);
    }
    Ok(modes)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        conformal_cell, dumbbell_cell, dumbbell_radius, flat_cylinder_cell, MeshSpec,
    };
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    #[test]
    fn multiplicities_match_known_tables() {
        // S¹: 1, 2, 2, 2, …
        for (l, want) in [(0, 1), (1, 2), (2, 2), (3, 2), (7, 2)] {
            assert_eq!(angular_mode(2, l).unwrap().multiplicity, want, "d=2, l={l}");
        }
        // S²: 2ℓ + 1
        for l in 0..8 {
            assert_eq!(angular_mode(3, l).unwrap().multiplicity, 2 * l + 1, "d=3, l={l}");
        }
        // S³: (ℓ + 1)²
        for l in 0..8 {
            assert_eq!(angular_mode(4, l).unwrap().multiplicity, (l + 1) * (l + 1), "d=4, l={l}");
        }
    }

    #[test]
    fn mode_eigenvalues_increase() {
        for d in 2..6 {
            let mut prev = -1.0;
            for l in 0..20 {
                let m = angular_mode(d, l).unwrap();
                assert!(m.eigenvalue > prev, "d={d}, l={l}");
                assert!(m.multiplicity >= 1);
                assert_eq!(m.eigenvalue, (l * (l + d - 2)) as f64);
                prev = m.eigenvalue;
            }
        }
        assert!(angular_mode(1, 0).is_err());
    }

    #[test]
    fn enumerate_flat_cylinder_modes() {
        let cell = flat_cylinder_cell(2, 0.2, 1.0, &MeshSpec::default()).unwrap();
        let modes = enumerate_modes(&cell, 30.0).unwrap();
        let degrees: Vec<usize> = modes.iter().map(|m| m.degree).collect();
        // μ₁ / 0.2² = 25 ≤ 30 < μ₂ / 0.2² = 100
        assert_eq!(degrees, vec![0, 1]);
        assert_relative_eq!(cell.mode_floor(), 25.0, epsilon = 1e-12);
    }

    #[test]
    fn enumerate_dumbbell_modes_boundary_case() {
        // Unit-sphere dumbbell: f ≤ 1 everywhere, so the floor is ≥ 1 and
        // μ₃ = 12 > 10 keeps ℓ = 3 out; ℓ = 2 stays (μ₂ · floor ≈ 6).
        let cell = dumbbell_cell(3, 0.1, &MeshSpec::default()).unwrap();
        let floor = cell.mode_floor();
        assert!(floor >= 1.0 && floor < 1.001, "floor = {floor}");
        let degrees: Vec<usize> = enumerate_modes(&cell, 10.0)
            .unwrap()
            .iter()
            .map(|m| m.degree)
            .collect();
        assert_eq!(degrees, vec![0, 1, 2]);
    }

    #[test]
    fn enumerate_rejects_nonpositive_lambda_max() {
        let cell = flat_cylinder_cell(2, 0.2, 1.0, &MeshSpec::default()).unwrap();
        assert!(enumerate_modes(&cell, -5.0).is_err());
        assert!(enumerate_modes(&cell, 0.0).is_err());
    }

    #[test]
    fn reduce_flat_profile_substitution() {
        let cell = flat_cylinder_cell(2, 0.2, 1.0, &MeshSpec::default()).unwrap();
        let mode = angular_mode(2, 1).unwrap();
        let slp = reduce_profile(&cell, &mode, BoundaryCondition::QuasiPeriodic(0.0));
        slp.validate().unwrap();
        for i in 0..slp.grid.len() {
            assert_abs_diff_eq!(slp.stiffness[i], 0.2, epsilon = 1e-15);
            assert_abs_diff_eq!(slp.potential[i], 5.0, epsilon = 1e-14);
            assert_abs_diff_eq!(slp.mass[i], 0.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn reduce_sin_profile_mode_zero() {
        let n = 100;
        let grid: Vec<f64> = (0..=n).map(|i| (PI - 0.6) * i as f64 / n as f64).collect();
        let profile: Vec<f64> = grid.iter().map(|s| (s + 0.3).sin()).collect();
        let cell = ProfileCell::from_samples(3, grid, profile).unwrap();
        let slp = reduce_profile(&cell, &angular_mode(3, 0).unwrap(), BoundaryCondition::Neumann);
        for (i, f) in cell.profile.iter().enumerate() {
            assert_eq!(slp.stiffness[i], f * f);
            assert_eq!(slp.mass[i], f * f);
            assert_eq!(slp.potential[i], 0.0);
        }
    }

    #[test]
    fn dumbbell_mode_one_potential_peaks_at_neck() {
        let cell = dumbbell_cell(2, 0.1, &MeshSpec::default()).unwrap();
        let slp = reduce_profile(&cell, &angular_mode(2, 1).unwrap(), BoundaryCondition::QuasiPeriodic(0.0));
        let qmax = slp.potential.iter().copied().fold(0.0f64, f64::max);
        assert_relative_eq!(qmax, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn conformal_dimension_two_stiffness_is_unit() {
        for eps in [0.4, 0.2, 0.1, 0.05] {
            let cell = conformal_cell(2, 0.5, 0.25, 0.75, eps, &MeshSpec::default()).unwrap();
            for mode in [angular_mode(2, 0).unwrap(), angular_mode(2, 1).unwrap()] {
                let slp = reduce_conformal(&cell, &mode, BoundaryCondition::QuasiPeriodic(0.0));
                assert!(slp.stiffness.iter().all(|p| *p == 1.0), "eps = {eps}");
                // potential is the constant μ/r², mass is ρ²
                for (i, rho) in cell.factor.iter().enumerate() {
                    assert_abs_diff_eq!(slp.potential[i], mode.eigenvalue / 0.25, epsilon = 1e-12);
                    assert_eq!(slp.mass[i], rho * rho);
                }
            }
        }
    }

    #[test]
    fn conformal_undeformed_mode_one() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let ones = vec![1.0; grid.len()];
        let cell = ConformalCell::from_samples(3, 1.0, grid, ones, (0.25, 0.75)).unwrap();
        let slp = reduce_conformal(&cell, &angular_mode(3, 1).unwrap(), BoundaryCondition::QuasiPeriodic(0.0));
        assert!(slp.stiffness.iter().all(|p| *p == 1.0));
        assert!(slp.potential.iter().all(|q| *q == 2.0));
        assert!(slp.mass.iter().all(|m| *m == 1.0));
    }

    #[test]
    fn conformal_constant_eps_scaling() {
        let eps = 0.3;
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
        let rho = vec![eps; grid.len()];
        let cell = ConformalCell::from_samples(4, 1.0, grid, rho, (0.25, 0.75)).unwrap();
        let slp = reduce_conformal(&cell, &angular_mode(4, 0).unwrap(), BoundaryCondition::QuasiPeriodic(0.0));
        for i in 0..slp.grid.len() {
            assert_relative_eq!(slp.stiffness[i] / slp.mass[i], eps.powi(-2), epsilon = 1e-12);
        }
    }

    #[test]
    fn reduction_commutes_with_refinement() {
        // Coefficients are pointwise in the profile, so reducing a midpoint
        // refinement agrees with the coarse reduction at shared nodes.
        let eps = 0.1;
        let coarse = dumbbell_cell(2, eps, &MeshSpec::default()).unwrap();
        let mut grid = Vec::new();
        for w in coarse.grid.windows(2) {
            grid.push(w[0]);
            grid.push(0.5 * (w[0] + w[1]));
        }
        grid.push(*coarse.grid.last().unwrap());
        let profile = grid.iter().map(|s| dumbbell_radius(*s, eps)).collect();
        let fine = ProfileCell::from_samples(2, grid, profile).unwrap();
        let mode = angular_mode(2, 1).unwrap();
        let slp_c = reduce_profile(&coarse, &mode, BoundaryCondition::QuasiPeriodic(0.0));
        let slp_f = reduce_profile(&fine, &mode, BoundaryCondition::QuasiPeriodic(0.0));
        for (i, _) in coarse.grid.iter().enumerate() {
            assert_eq!(slp_c.stiffness[i], slp_f.stiffness[2 * i]);
            assert_eq!(slp_c.potential[i], slp_f.potential[2 * i]);
            assert_eq!(slp_c.mass[i], slp_f.mass[2 * i]);
        }
    }

    #[test]
    fn slp_validation_errors() {
        let bad = SturmLiouvilleProblem {
            grid: vec![0.0, 0.5, 1.0],
            stiffness: vec![1.0, 1.0, 1.0],
            potential: vec![0.0, -1.0, 0.0],
            mass: vec![1.0, 1.0, 1.0],
            boundary: BoundaryCondition::Neumann,
        };
        assert!(bad.validate().is_err());
        let short = SturmLiouvilleProblem {
            grid: vec![0.0, 1.0],
            stiffness: vec![1.0, 1.0],
            potential: vec![0.0, 0.0],
            mass: vec![1.0, 1.0],
            boundary: BoundaryCondition::Neumann,
        };
        assert!(short.validate().is_err());
    }

    #[test]
    fn boundary_condition_end_split() {
        assert_eq!(
            BoundaryCondition::Mixed(EndCondition::Neumann, EndCondition::Dirichlet).end_conditions(),
            Some((EndCondition::Neumann, EndCondition::Dirichlet))
        );
        assert!(BoundaryCondition::QuasiPeriodic(1.0).end_conditions().is_none());
        assert_eq!(
            BoundaryCondition::Dirichlet.end_conditions(),
            Some((EndCondition::Dirichlet, EndCondition::Dirichlet))
        );
    }

    #[test]
    fn types_serde_round_trip() {
        let mode = angular_mode(3, 2).unwrap();
        let back: AngularMode = serde_json::from_str(&serde_json::to_string(&mode).unwrap()).unwrap();
        assert_eq!(mode, back);
        let cell = flat_cylinder_cell(2, 0.2, 1.0, &MeshSpec::default()).unwrap();
        let slp = reduce_profile(&cell, &mode, BoundaryCondition::QuasiPeriodic(PI));
        let back: SturmLiouvilleProblem =
            serde_json::from_str(&serde_json::to_string(&slp).unwrap()).unwrap();
        assert_eq!(slp, back);
    }
}
