//! Finite-element discretization and Hermitian generalized eigensolver.
//!
//! A [`SturmLiouvilleProblem`] is discretized with conforming piecewise-linear
//! elements: coefficients are interpolated to element midpoints, the basis
//! products are integrated exactly, so the discrete eigenvalues inherit the
//! variational min-max structure (Galerkin upper bounds for exactly
//! representable coefficients). Quasi-periodic conditions `u(S) = e^{−iθ}u(0)`
//! are imposed by eliminating the last node onto the first with a unimodular
//! phase, which makes the pencil Hermitian with two complex corner entries.
//!
//! The solve path is dense: Cholesky-reduce the mass matrix, run a Hermitian
//! eigendecomposition of the reduced matrix, and map the eigenvectors back —
//! appropriate at the `N ≤ 5000` scale of 1-D period cells.

pub mod minmax;

use nalgebra::{Complex, DMatrix};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::reduction::{BoundaryCondition, EndCondition, SturmLiouvilleProblem};

/// Discrete Hermitian pencil `(A, B)` with `B` positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPencil {
    /// Number of degrees of freedom.
    pub size: usize,
    /// Stiffness+potential matrix `A = A*`.
    pub stiffness: DMatrix<Complex<f64>>,
    /// Mass matrix `B = B* > 0`.
    pub mass: DMatrix<Complex<f64>>,
}

/// Eigenpairs of a pencil, ascending.
#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Lowest eigenvalues, ascending with multiplicity.
    pub eigenvalues: Vec<f64>,
    /// Matching `B`-orthonormal eigenvectors (columns), when requested.
    pub eigenvectors: Option<DMatrix<Complex<f64>>>,
    /// Relative residuals `‖Av − λBv‖ / ‖Bv‖` per pair (empty when
    /// eigenvectors were not requested).
    pub residuals: Vec<f64>,
}

struct DofMap {
    /// Per grid node: assigned dof and unimodular phase, or `None` when the
    /// node is eliminated by a Dirichlet condition.
    nodes: Vec<Option<(usize, Complex<f64>)>>,
    size: usize,
}

fn dof_map(n: usize, boundary: BoundaryCondition) -> Result<DofMap> {
    let one = Complex::new(1.0, 0.0);
    match boundary {
        BoundaryCondition::QuasiPeriodic(theta) => {
            if !theta.is_finite() {
                return Err(Error::invalid("theta", format!("must be finite, got {theta}")));
            }
            // Snap the phase to ±1 at the exact real fibers so the "real
            // pencil at θ ∈ {0, π}" invariant holds bit-exactly (sin π ≠ 0
            // in floating point).
            let tau = if theta == 0.0 {
                one
            } else if theta == PI {
                -one
            } else {
                Complex::new(theta.cos(), -theta.sin())
            };
            let mut nodes: Vec<Option<(usize, Complex<f64>)>> =
                (0..n - 1).map(|i| Some((i, one))).collect();
            nodes.push(Some((0, tau)));
            Ok(DofMap { nodes, size: n - 1 })
        }
        _ => {
            let (left, right) = boundary.end_conditions().expect("decoupled boundary");
            let mut nodes = Vec::with_capacity(n);
            let mut next = 0;
            for i in 0..n {
                let constrained = (i == 0 && left == EndCondition::Dirichlet)
                    || (i == n - 1 && right == EndCondition::Dirichlet);
                if constrained {
                    nodes.push(None);
                } else {
                    nodes.push(Some((next, one)));
                    next += 1;
                }
            }
            Ok(DofMap { nodes, size: next })
        }
    }
}

/// Assemble the piecewise-linear pencil of a 1-D problem: per element,
/// coefficients take their midpoint value and the basis products are
/// integrated exactly,
/// `k = (p/h)[[1,−1],[−1,1]] + (qh/6)[[2,1],[1,2]]`, `m = (mh/6)[[2,1],[1,2]]`.
pub fn assemble(slp: &SturmLiouvilleProblem) -> Result<HermitianPencil> {
    slp.validate()?;
    let n = slp.grid.len();
    let map = dof_map(n, slp.boundary)?;
    if map.size < 1 {
        return Err(Error::invalid("boundary", "no degrees of freedom left"));
    }
    let mut a = DMatrix::<Complex<f64>>::zeros(map.size, map.size);
    let mut b = DMatrix::<Complex<f64>>::zeros(map.size, map.size);
    for e in 0..n - 1 {
        let h = slp.grid[e + 1] - slp.grid[e];
        let pe = 0.5 * (slp.stiffness[e] + slp.stiffness[e + 1]);
        let qe = 0.5 * (slp.potential[e] + slp.potential[e + 1]);
        let me = 0.5 * (slp.mass[e] + slp.mass[e + 1]);
        if !(me > 0.0) {
            return Err(Error::MassNotPositiveDefinite);
        }
        let k_loc = [
            [pe / h + qe * h / 3.0, -pe / h + qe * h / 6.0],
            [-pe / h + qe * h / 6.0, pe / h + qe * h / 3.0],
        ];
        let m_loc = [
            [me * h / 3.0, me * h / 6.0],
            [me * h / 6.0, me * h / 3.0],
        ];
        for (al, node_a) in [e, e + 1].into_iter().enumerate() {
            let Some((da, pa)) = map.nodes[node_a] else { continue };
            for (bl, node_b) in [e, e + 1].into_iter().enumerate() {
                let Some((db, pb)) = map.nodes[node_b] else { continue };
                let weight = pa.conj() * pb;
                a[(da, db)] += weight * k_loc[al][bl];
                b[(da, db)] += weight * m_loc[al][bl];
            }
        }
    }
    Ok(HermitianPencil {
        size: map.size,
        stiffness: a,
        mass: b,
    })
}

/// Mass matrix restricted to the elements whose midpoint falls inside one of
/// the given regions, with the same dof layout as [`assemble`] — the
/// quadratic form `v* B_R v` measures how much `m`-weighted mass an
/// eigenvector carries inside the regions.
pub fn assemble_region_mass(
    slp: &SturmLiouvilleProblem,
    regions: &[(f64, f64)],
) -> Result<DMatrix<Complex<f64>>> {
    slp.validate()?;
    let n = slp.grid.len();
    let map = dof_map(n, slp.boundary)?;
    let mut b = DMatrix::<Complex<f64>>::zeros(map.size, map.size);
    for e in 0..n - 1 {
        let mid = 0.5 * (slp.grid[e] + slp.grid[e + 1]);
        if !regions.iter().any(|&(lo, hi)| mid >= lo && mid <= hi) {
            continue;
        }
        let h = slp.grid[e + 1] - slp.grid[e];
        let me = 0.5 * (slp.mass[e] + slp.mass[e + 1]);
        let m_loc = [
            [me * h / 3.0, me * h / 6.0],
            [me * h / 6.0, me * h / 3.0],
        ];
        for (al, node_a) in [e, e + 1].into_iter().enumerate() {
            let Some((da, pa)) = map.nodes[node_a] else { continue };
            for (bl, node_b) in [e, e + 1].into_iter().enumerate() {
                let Some((db, pb)) = map.nodes[node_b] else { continue };
                b[(da, db)] += pa.conj() * pb * m_loc[al][bl];
            }
        }
    }
    Ok(b)
}

/// All eigenvalues (ascending) and `B`-orthonormal eigenvectors of a
/// Hermitian pencil `(A, B)` via Cholesky reduction.
pub(crate) fn generalized_hermitian_eigen(
    a: &DMatrix<Complex<f64>>,
    b: &DMatrix<Complex<f64>>,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<DMatrix<Complex<f64>>>)> {
    let n = a.nrows();
    let chol = b.clone().cholesky().ok_or(Error::MassNotPositiveDefinite)?;
    let l = chol.l();
    // C = L⁻¹ A L⁻* (Hermitian); formed via two triangular solves.
    let y = l
        .solve_lower_triangular(a)
        .ok_or(Error::EigenSolverFailed { size: n })?;
    let mut c = l
        .solve_lower_triangular(&y.adjoint())
        .ok_or(Error::EigenSolverFailed { size: n })?;
    let ct = c.adjoint();
    c = (c + ct) * Complex::new(0.5, 0.0);
    if !want_vectors {
        let mut vals: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(|x, y| x.total_cmp(y));
        return Ok((vals, None));
    }
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let w = eig.eigenvectors.select_columns(order.iter());
    // Back-substitute v = L⁻* w; columns stay B-orthonormal.
    let v = l
        .adjoint()
        .solve_upper_triangular(&w)
        .ok_or(Error::EigenSolverFailed { size: n })?;
    Ok((vals, Some(v)))
}

/// Lowest `k` eigenpairs of the pencil, with eigenvectors and residuals.
pub fn solve(pencil: &HermitianPencil, k: usize) -> Result<EigenResult> {
    if k < 1 || k > pencil.size {
        return Err(Error::invalid(
            "k",
            format!("need 1 ≤ k ≤ {}, got {k}", pencil.size),
        ));
    }
    let (vals, vecs) = generalized_hermitian_eigen(&pencil.stiffness, &pencil.mass, true)?;
    let vecs = vecs.expect("vectors requested");
    let selected = vecs.columns(0, k).into_owned();
    let eigenvalues: Vec<f64> = vals[..k].to_vec();
    let mut residuals = Vec::with_capacity(k);
    for (j, lambda) in eigenvalues.iter().enumerate() {
        let v = selected.column(j);
        let bv = &pencil.mass * v;
        let av = &pencil.stiffness * v;
        let r = (&av - &bv * Complex::new(*lambda, 0.0)).norm() / bv.norm();
        residuals.push(r);
    }
    Ok(EigenResult {
        eigenvalues,
        eigenvectors: Some(selected),
        residuals,
    })
}

/// Lowest `k` eigenvalues only (no eigenvectors, no residuals) — the fast
/// path for band sweeps.
pub fn solve_values(pencil: &HermitianPencil, k: usize) -> Result<Vec<f64>> {
    if k < 1 || k > pencil.size {
        return Err(Error::invalid(
            "k",
            format!("need 1 ≤ k ≤ {}, got {k}", pencil.size),
        ));
    }
    let (vals, _) = generalized_hermitian_eigen(&pencil.stiffness, &pencil.mass, false)?;
    Ok(vals[..k].to_vec())
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLevel {
    pub h: f64,
    pub value: f64,
    pub error: f64,
}

/// Measured convergence of an eigenvalue against a known exact value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Levels sorted by decreasing `h`.
    pub levels: Vec<ConvergenceLevel>,
    /// Least-squares slope of `log error` against `log h`.
    pub order: f64,
}

/// Estimate the convergence order from `(h, λ_h)` samples and the exact
/// eigenvalue. Requires at least 3 levels and strictly decreasing errors
/// (anything else signals a discretization bug or an under-resolved
/// coefficient and is reported as an error).
pub fn convergence_order(samples: &[(f64, f64)], exact: f64) -> Result<ConvergenceReport> {
    if samples.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "convergence study needs ≥ 3 levels, got {}",
            samples.len()
        )));
    }
    let mut levels: Vec<ConvergenceLevel> = samples
        .iter()
        .map(|&(h, value)| ConvergenceLevel {
            h,
            value,
            error: (value - exact).abs(),
        })
        .collect();
    levels.sort_by(|a, b| b.h.total_cmp(&a.h));
    if levels.iter().any(|l| !(l.h > 0.0)) {
        return Err(Error::invalid("h", "mesh sizes must be positive"));
    }
    if levels.windows(2).any(|w| w[0].h == w[1].h) {
        return Err(Error::invalid("h", "mesh sizes must be distinct"));
    }
    for w in levels.windows(2) {
        if w[1].error >= w[0].error {
            return Err(Error::NonMonotoneConvergence(format!(
                "error {:.3e} at h = {:.3e} does not improve on {:.3e} at h = {:.3e}",
                w[1].error, w[1].h, w[0].error, w[0].h
            )));
        }
        if w[1].error == 0.0 {
            return Err(Error::NonMonotoneConvergence(
                "error hit zero exactly; order is undefined".into(),
            ));
        }
    }
    // Least-squares slope of log error vs log h.
    let pts: Vec<(f64, f64)> = levels.iter().map(|l| (l.h.ln(), l.error.ln())).collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(ConvergenceReport { levels, order })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dumbbell_cell, flat_cylinder_cell, MeshSpec};
    use crate::reduction::{angular_mode, reduce_profile};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::DVector;
    use proptest::prelude::*;

    /// p = m ≡ 1, q ≡ 0 on [0, 1] with n uniform elements.
    fn unit_slp(n: usize, boundary: BoundaryCondition) -> SturmLiouvilleProblem {
        let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        SturmLiouvilleProblem {
            stiffness: vec![1.0; n + 1],
            potential: vec![0.0; n + 1],
            mass: vec![1.0; n + 1],
            grid,
            boundary,
        }
    }

    #[test]
    fn periodic_stiffness_annihilates_constants_exactly() {
        // h = 1/64 and p ≡ 1 keep every entry a power of two, so the row
        // sums cancel with no rounding at all.
        let pencil = assemble(&unit_slp(64, BoundaryCondition::QuasiPeriodic(0.0))).unwrap();
        assert_eq!(pencil.size, 64);
        let ones = DVector::from_element(64, Complex::new(1.0, 0.0));
        let residual = &pencil.stiffness * &ones;
        assert!(residual.iter().all(|z| z.re == 0.0 && z.im == 0.0));
    }

    #[test]
    fn pencil_is_real_at_real_fibers() {
        for theta in [0.0, PI] {
            let pencil = assemble(&unit_slp(16, BoundaryCondition::QuasiPeriodic(theta))).unwrap();
            assert!(pencil.stiffness.iter().all(|z| z.im == 0.0), "theta = {theta}");
            assert!(pencil.mass.iter().all(|z| z.im == 0.0));
        }
        let pencil = assemble(&unit_slp(16, BoundaryCondition::QuasiPeriodic(1.0))).unwrap();
        assert!(pencil.stiffness.iter().any(|z| z.im != 0.0));
    }

    #[test]
    fn antiperiodic_ground_state_brackets_pi_squared() {
        let h = 1.0 / 64.0;
        let pencil = assemble(&unit_slp(64, BoundaryCondition::QuasiPeriodic(PI))).unwrap();
        let l1 = solve_values(&pencil, 1).unwrap()[0];
        assert!(l1 >= PI * PI, "λ₁ = {l1}");
        assert!(l1 <= PI * PI * (1.0 + h * h), "λ₁ = {l1}");
    }

    #[test]
    fn quasi_periodic_exact_eigenvalues() {
        // Exact values are (2πk ± θ)² on the unit interval.
        let theta = 1.3;
        let pencil = assemble(&unit_slp(256, BoundaryCondition::QuasiPeriodic(theta))).unwrap();
        let vals = solve_values(&pencil, 3).unwrap();
        let mut exact = vec![
            theta * theta,
            (2.0 * PI - theta) * (2.0 * PI - theta),
            (2.0 * PI + theta) * (2.0 * PI + theta),
        ];
        exact.sort_by(f64::total_cmp);
        for (got, want) in vals.iter().zip(&exact) {
            assert_relative_eq!(got, want, max_relative = 2e-3);
            assert!(got >= want, "Galerkin bound violated: {got} < {want}");
        }
    }

    #[test]
    fn flat_cylinder_modes_match_closed_forms() {
        let cell = flat_cylinder_cell(2, 0.2, 1.0, &MeshSpec { body_spacing: Some(0.01), collar_factor: 8.0 }).unwrap();
        let mode0 = angular_mode(2, 0).unwrap();
        let mode1 = angular_mode(2, 1).unwrap();

        // mode 0, θ = π: λ₁ → π²
        let p = assemble(&reduce_profile(&cell, &mode0, BoundaryCondition::QuasiPeriodic(PI))).unwrap();
        let l1 = solve_values(&p, 1).unwrap()[0];
        assert_relative_eq!(l1, PI * PI, max_relative = 1e-3);

        // mode 0, θ = 0: λ₁ = 0 within 1e−10 of the λ₂ scale, λ₂ → 4π²
        let p = assemble(&reduce_profile(&cell, &mode0, BoundaryCondition::QuasiPeriodic(0.0))).unwrap();
        let vals = solve_values(&p, 2).unwrap();
        assert!(vals[0].abs() <= 1e-10 * (1.0 + vals[1].abs()), "λ₁ = {}", vals[0]);
        assert_relative_eq!(vals[1], 4.0 * PI * PI, max_relative = 1e-2);

        // mode 1, θ = 0: λ₁ = μ₁ / r² = 25 (constant eigenfunction, exact)
        let p = assemble(&reduce_profile(&cell, &mode1, BoundaryCondition::QuasiPeriodic(0.0))).unwrap();
        let l1 = solve_values(&p, 1).unwrap()[0];
        assert_relative_eq!(l1, 25.0, max_relative = 1e-10);
    }

    #[test]
    fn dirichlet_half_interval() {
        let n = 128;
        let grid: Vec<f64> = (0..=n).map(|i| 0.5 * i as f64 / n as f64).collect();
        let slp = SturmLiouvilleProblem {
            stiffness: vec![1.0; n + 1],
            potential: vec![0.0; n + 1],
            mass: vec![1.0; n + 1],
            grid,
            boundary: BoundaryCondition::Dirichlet,
        };
        let pencil = assemble(&slp).unwrap();
        assert_eq!(pencil.size, n - 1);
        let l1 = solve_values(&pencil, 1).unwrap()[0];
        let exact = 4.0 * PI * PI;
        assert!(l1 >= exact && l1 <= exact * 1.01, "λ₁ = {l1}");
    }

    #[test]
    fn mixed_boundary_quarter_wave() {
        // Neumann left, Dirichlet right on [0, 1]: λ₁ = (π/2)².
        let slp = unit_slp(128, BoundaryCondition::Mixed(EndCondition::Neumann, EndCondition::Dirichlet));
        let pencil = assemble(&slp).unwrap();
        assert_eq!(pencil.size, 128);
        let l1 = solve_values(&pencil, 1).unwrap()[0];
        assert_relative_eq!(l1, PI * PI / 4.0, max_relative = 1e-4);
    }

    #[test]
    fn neumann_keeps_all_nodes() {
        let pencil = assemble(&unit_slp(32, BoundaryCondition::Neumann)).unwrap();
        assert_eq!(pencil.size, 33);
        let vals = solve_values(&pencil, 2).unwrap();
        assert!(vals[0].abs() <= 1e-10);
        assert_relative_eq!(vals[1], PI * PI, max_relative = 1e-3);
    }

    #[test]
    fn galerkin_values_decrease_under_nested_refinement() {
        let mut prev = f64::INFINITY;
        for n in [32, 64, 128, 256] {
            let pencil = assemble(&unit_slp(n, BoundaryCondition::QuasiPeriodic(PI))).unwrap();
            let l1 = solve_values(&pencil, 1).unwrap()[0];
            assert!(l1 >= PI * PI);
            assert!(l1 < prev, "λ₁ did not decrease at n = {n}");
            prev = l1;
        }
    }

    #[test]
    fn conjugation_symmetry_of_spectra() {
        let cell = dumbbell_cell(2, 0.1, &MeshSpec::default()).unwrap();
        let slp = reduce_profile(&cell, &angular_mode(2, 0).unwrap(), BoundaryCondition::QuasiPeriodic(0.0));
        let theta = 1.234;
        let a = assemble(&slp.with_boundary(BoundaryCondition::QuasiPeriodic(theta))).unwrap();
        let b = assemble(&slp.with_boundary(BoundaryCondition::QuasiPeriodic(2.0 * PI - theta))).unwrap();
        let va = solve_values(&a, 6).unwrap();
        let vb = solve_values(&b, 6).unwrap();
        for (x, y) in va.iter().zip(&vb) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9 * (1.0 + x.abs()));
        }
        // and the assembled matrices are entrywise conjugate
        for (x, y) in a.stiffness.iter().zip(b.stiffness.iter()) {
            assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-12 * (1.0 + x.re.abs()));
            assert_abs_diff_eq!(x.im, -y.im, epsilon = 1e-12 * (1.0 + x.im.abs()));
        }
    }

    #[test]
    fn residuals_and_orthonormality() {
        let cell = dumbbell_cell(2, 0.1, &MeshSpec::default()).unwrap();
        let slp = reduce_profile(&cell, &angular_mode(2, 0).unwrap(), BoundaryCondition::QuasiPeriodic(PI / 3.0));
        let pencil = assemble(&slp).unwrap();
        let result = solve(&pencil, 5).unwrap();
        assert_eq!(result.eigenvalues.len(), 5);
        assert!(result.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        for (lambda, r) in result.eigenvalues.iter().zip(&result.residuals) {
            assert!(*r <= 1e-8 * (1.0 + lambda.abs()), "residual {r} at λ = {lambda}");
        }
        // B-orthonormal columns
        let v = result.eigenvectors.as_ref().unwrap();
        let gram = v.adjoint() * &pencil.mass * v;
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[(i, j)].re, want, epsilon = 1e-10);
                assert_abs_diff_eq!(gram[(i, j)].im, 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn mode_ground_state_respects_enumeration_floor() {
        // Validates the truncation rule: mode-ℓ eigenvalues ≥ μ_ℓ · floor.
        let cell = dumbbell_cell(2, 0.1, &MeshSpec::default()).unwrap();
        use crate::reduction::ReducibleCell;
        let floor = cell.mode_floor();
        for l in [1usize, 2] {
            let mode = angular_mode(2, l).unwrap();
            let slp = reduce_profile(&cell, &mode, BoundaryCondition::QuasiPeriodic(0.0));
            let l1 = solve_values(&assemble(&slp).unwrap(), 1).unwrap()[0];
            assert!(
                l1 >= mode.eigenvalue * floor,
                "ℓ = {l}: λ₁ = {l1} below floor {}",
                mode.eigenvalue * floor
            );
        }
    }

    #[test]
    fn convergence_order_flat_cylinder() {
        let samples: Vec<(f64, f64)> = [64usize, 128, 256]
            .iter()
            .map(|&n| {
                let pencil = assemble(&unit_slp(n, BoundaryCondition::QuasiPeriodic(PI))).unwrap();
                (1.0 / n as f64, solve_values(&pencil, 1).unwrap()[0])
            })
            .collect();
        let report = convergence_order(&samples, PI * PI).unwrap();
        assert!((1.8..=2.2).contains(&report.order), "order = {}", report.order);
    }

    #[test]
    fn convergence_order_dirichlet_interval() {
        let samples: Vec<(f64, f64)> = [64usize, 128, 256]
            .iter()
            .map(|&n| {
                let grid: Vec<f64> = (0..=n).map(|i| 0.5 * i as f64 / n as f64).collect();
                let slp = SturmLiouvilleProblem {
                    stiffness: vec![1.0; n + 1],
                    potential: vec![0.0; n + 1],
                    mass: vec![1.0; n + 1],
                    grid,
                    boundary: BoundaryCondition::Dirichlet,
                };
                (0.5 / n as f64, solve_values(&assemble(&slp).unwrap(), 1).unwrap()[0])
            })
            .collect();
        let report = convergence_order(&samples, 4.0 * PI * PI).unwrap();
        assert!((1.8..=2.2).contains(&report.order), "order = {}", report.order);
    }

    #[test]
    fn constant_mode_error_is_flat_at_zero() {
        // θ = 0 ground state is the constant vector at machine precision for
        // every h — no order measurable, just a flat error floor.
        for n in [16usize, 64, 200] {
            let pencil = assemble(&unit_slp(n, BoundaryCondition::QuasiPeriodic(0.0))).unwrap();
            let l1 = solve_values(&pencil, 1).unwrap()[0];
            assert!(l1.abs() <= 1e-10, "n = {n}: λ₁ = {l1}");
        }
    }

    #[test]
    fn convergence_order_rejects_bad_input() {
        assert!(convergence_order(&[(0.1, 1.0), (0.05, 1.0)], 0.0).is_err());
        // non-monotone error sequence
        let samples = [(0.1, 1.1), (0.05, 1.2), (0.025, 1.05)];
        assert!(matches!(
            convergence_order(&samples, 1.0),
            Err(Error::NonMonotoneConvergence(_))
        ));
        // duplicate h
        let samples = [(0.1, 1.1), (0.1, 1.05), (0.025, 1.01)];
        assert!(convergence_order(&samples, 1.0).is_err());
    }

    #[test]
    fn solve_rejects_bad_k() {
        let pencil = assemble(&unit_slp(8, BoundaryCondition::QuasiPeriodic(0.0))).unwrap();
        assert!(solve(&pencil, 0).is_err());
        assert!(solve(&pencil, pencil.size + 1).is_err());
        assert!(solve_values(&pencil, pencil.size).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn constant_coefficient_galerkin_bracket(
            p in 0.1f64..10.0,
            q in 0.0f64..10.0,
            m in 0.1f64..10.0,
            theta in 0.05f64..3.1,
        ) {
            // Exact ground state on [0,1]: λ = (p θ² + q)/m; the discrete
            // value is a Galerkin upper bound within the O(h²) envelope.
            let n = 64;
            let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let slp = SturmLiouvilleProblem {
                stiffness: vec![p; n + 1],
                potential: vec![q; n + 1],
                mass: vec![m; n + 1],
                grid,
                boundary: BoundaryCondition::QuasiPeriodic(theta),
            };
            let l1 = solve_values(&assemble(&slp).unwrap(), 1).unwrap()[0];
            let exact = (p * theta * theta + q) / m;
            prop_assert!(l1 >= exact * (1.0 - 1e-12), "λ₁ = {l1} < exact = {exact}");
            prop_assert!(l1 <= exact * 1.05 + 1e-12, "λ₁ = {l1} ≫ exact = {exact}");
        }
    }
}
