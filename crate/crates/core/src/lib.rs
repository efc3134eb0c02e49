//! Floquet spectral bands and gaps of the Laplace–Beltrami operator on
//! periodic manifolds built from rotationally symmetric period cells.
//!
//! The library is organized as a pipeline:
//!
//! * [`geometry`] constructs period cells — warped products `ds² + f(s)²dσ²`
//!   (dumbbell chains, cylinder-linked chains, flat cylinders) and conformally
//!   deformed flat cylinders — as sampled profile data, plus curvature and
//!   isoperimetric diagnostics.
//! * [`reduction`] separates variables: each angular mode of the cross-section
//!   sphere turns a cell into a 1-D Sturm–Liouville problem with a
//!   quasi-periodic (or Dirichlet/Neumann) boundary condition.
//! * [`spectral`] discretizes a Sturm–Liouville problem with conforming P1
//!   elements, solves the complex Hermitian generalized eigenproblem, and
//!   hosts the abstract min-max comparison engine ([`spectral::minmax`]).
//! * [`floquet`] sweeps the dual-group parameter θ, merges modes into the full
//!   spectrum per θ, assembles bands `B_k = [min_θ λ_k(θ), max_θ λ_k(θ)]`, and
//!   detects spectral gaps.
//! * [`analytic`] provides closed-form oracles: limit spectra of the collapsing
//!   families and the exact 2-D dispersion relations of the deformed cylinder,
//!   including a gap-count certificate.
//!
//! All numerics are deterministic; the only randomness is the seeded instance
//! generator for the min-max self-test.

pub mod analytic;
pub mod error;
pub mod floquet;
pub mod geometry;
pub mod reduction;
pub mod spectral;

pub use error::{Error, Result};
