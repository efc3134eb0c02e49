//! Quantitative min-max comparison of two Hermitian form pairs.
//!
//! Given forms `(Q, G)` on a space `H` and `(Q′, G′)` on `H′` linked by a
//! transfer map `Φ : H → H′`, the engine measures how far `Φ` is from a
//! norm-preserving, form-non-increasing map on the span of the first `k`
//! eigenvectors, and turns the measurements into an explicit eigenvalue
//! shift: whenever the norm defect satisfies `δ′_k < 1` and the eigenvalue
//! cap `λ_k ≤ c_k` holds,
//!
//! ```text
//! λ′_k ≤ λ_k + δ_k,   δ_k = (c_k δ′_k + δ″_k) / (1 − δ′_k).
//! ```
//!
//! The inequality is a theorem; on any instance whose hypothesis flags pass,
//! a `Violated` verdict indicates a bug in the caller or this engine, never
//! legitimate data. Hypothesis failures are reported (`NotApplicable`), not
//! errors.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generalized_hermitian_eigen;
use crate::error::{Error, Result};

/// A comparison instance: two Hermitian form pairs and a transfer map.
#[derive(Debug, Clone)]
pub struct MinmaxInstance {
    /// Form `Q = Q* ⪰ 0` on `H` (N×N).
    pub quad: DMatrix<Complex<f64>>,
    /// Metric `G = G* > 0` on `H` (N×N).
    pub metric: DMatrix<Complex<f64>>,
    /// Form `Q′ = Q′* ⪰ 0` on `H′` (N′×N′).
    pub quad_prime: DMatrix<Complex<f64>>,
    /// Metric `G′ = G′* > 0` on `H′` (N′×N′).
    pub metric_prime: DMatrix<Complex<f64>>,
    /// Transfer map `Φ : H → H′` (N′×N).
    pub transfer: DMatrix<Complex<f64>>,
    /// Eigenvalue caps `c_k`, one per compared index; their number sets how
    /// many eigenvalues are compared.
    pub caps: Vec<f64>,
}

/// Outcome of the comparison at one index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Hypotheses hold and `λ′_k ≤ λ_k + δ_k` verified.
    Holds,
    /// Hypotheses hold but the inequality failed — a bug by construction.
    Violated,
    /// Hypotheses fail quantitatively (`δ′_k ≥ 1` or `λ_k > c_k`).
    NotApplicable,
}

/// Per-index defects, shifts and verdicts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinmaxReport {
    /// `λ_k` of `(Q, G)`, ascending.
    pub lambda: Vec<f64>,
    /// `λ′_k` of `(Q′, G′)`, ascending.
    pub lambda_prime: Vec<f64>,
    /// Norm defect `δ′_k = k · max_{i,j≤k} |δ_ij − ⟨Φφ_i, Φφ_j⟩_{G′}|`.
    pub norm_defect: Vec<f64>,
    /// Form defect `δ″_k = max(0, λ_max((Φ*Q′Φ − Q)|_{span φ_1..φ_k}))`.
    pub quad_defect: Vec<f64>,
    /// Shift `δ_k`; `None` when `δ′_k ≥ 1` leaves it undefined.
    pub shift: Vec<Option<f64>>,
    /// `λ_k ≤ c_k`?
    pub cap_ok: Vec<bool>,
    /// `δ′_k < 1`?
    pub defect_ok: Vec<bool>,
    pub verdict: Vec<Verdict>,
}

fn check_hermitian(m: &DMatrix<Complex<f64>>, name: &'static str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{name} is not square")));
    }
    let scale = m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    let defect = (m - m.adjoint()).iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if defect > 1e-8 * (1.0 + scale) {
        return Err(Error::invalid(name, format!("not Hermitian (defect {defect:.3e})")));
    }
    Ok(())
}

impl MinmaxInstance {
    pub fn validate(&self) -> Result<()> {
        check_hermitian(&self.quad, "quad")?;
        check_hermitian(&self.metric, "metric")?;
        check_hermitian(&self.quad_prime, "quad_prime")?;
        check_hermitian(&self.metric_prime, "metric_prime")?;
        let (n, np) = (self.quad.nrows(), self.quad_prime.nrows());
        if self.metric.nrows() != n || self.metric_prime.nrows() != np {
            return Err(Error::DimensionMismatch("metric sizes do not match forms".into()));
        }
        if self.transfer.nrows() != np || self.transfer.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "transfer is {}×{}, expected {np}×{n}",
                self.transfer.nrows(),
                self.transfer.ncols()
            )));
        }
        if self.caps.is_empty() || self.caps.len() > n.min(np) {
            return Err(Error::invalid(
                "caps",
                format!("need 1 ≤ #caps ≤ min(N, N′) = {}, got {}", n.min(np), self.caps.len()),
            ));
        }
        Ok(())
    }
}

/// Compare the two form pairs through the transfer map.
pub fn minmax_compare(instance: &MinmaxInstance) -> Result<MinmaxReport> {
    instance.validate()?;
    let kk = instance.caps.len();

    let (lambda_all, phi) = generalized_hermitian_eigen(&instance.quad, &instance.metric, true)?;
    let phi = phi.expect("vectors requested");
    let (lambda_prime_all, _) =
        generalized_hermitian_eigen(&instance.quad_prime, &instance.metric_prime, false)?;
    let psd_tol = 1e-8 * (1.0 + lambda_all.last().unwrap().abs());
    if lambda_all[0] < -psd_tol || lambda_prime_all[0] < -psd_tol {
        return Err(Error::invalid("quad", "form is not positive semi-definite"));
    }

    // Gram and form-difference matrices on the first kk eigenvectors.
    let v = phi.columns(0, kk).into_owned();
    let w = &instance.transfer * &v; // Φφ_i as columns
    let gram = w.adjoint() * &instance.metric_prime * &w; // ⟨Φφ_i, Φφ_j⟩_{G′}
    let diff = w.adjoint() * &instance.quad_prime * &w - v.adjoint() * &instance.quad * &v;

    let lambda: Vec<f64> = lambda_all[..kk].to_vec();
    let lambda_prime: Vec<f64> = lambda_prime_all[..kk].to_vec();
    let mut norm_defect = Vec::with_capacity(kk);
    let mut quad_defect = Vec::with_capacity(kk);
    let mut shift = Vec::with_capacity(kk);
    let mut cap_ok = Vec::with_capacity(kk);
    let mut defect_ok = Vec::with_capacity(kk);
    let mut verdict = Vec::with_capacity(kk);

    for k in 1..=kk {
        let mut gmax = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let delta = if i == j { 1.0 } else { 0.0 };
                gmax = gmax.max((gram[(i, j)] - Complex::new(delta, 0.0)).norm());
            }
        }
        let dp = k as f64 * gmax;

        let block = diff.view((0, 0), (k, k)).into_owned();
        let herm = (&block + block.adjoint()) * Complex::new(0.5, 0.0);
        let top = herm
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        let dpp = top.max(0.0);

        let c = instance.caps[k - 1];
        let l = lambda[k - 1];
        let lp = lambda_prime[k - 1];
        let cap = l <= c + 1e-12 * (1.0 + c.abs());
        let def = dp < 1.0;
        let d = def.then(|| (c * dp + dpp) / (1.0 - dp));
        let vd = if cap && def {
            let d = d.unwrap();
            if lp <= l + d + 1e-9 * (1.0 + l.abs() + d) {
                Verdict::Holds
            } else {
                Verdict::Violated
            }
        } else {
            Verdict::NotApplicable
        };
        norm_defect.push(dp);
        quad_defect.push(dpp);
        shift.push(d);
        cap_ok.push(cap);
        defect_ok.push(def);
        verdict.push(vd);
    }

    Ok(MinmaxReport {
        lambda,
        lambda_prime,
        norm_defect,
        quad_defect,
        shift,
        cap_ok,
        defect_ok,
        verdict,
    })
}

fn random_hermitian_psd(rng: &mut ChaCha8Rng, n: usize, ridge: f64) -> DMatrix<Complex<f64>> {
    let s = DMatrix::from_fn(n, n, |_, _| {
        Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let mut m = s.adjoint() * &s;
    for i in 0..n {
        m[(i, i)] += Complex::new(ridge, 0.0);
    }
    m
}

/// Deterministic random instance for the self-test harness: identity metrics,
/// an isometric transfer (QR of a random tall matrix, so `δ′ ≈ 0`) and
/// `Q′ = Φ(Q − E)Φ*` with `0 ⪯ E ⪯ 0.9·Q` (so `Φ*Q′Φ − Q ⪯ 0`, `δ″ ≈ 0`).
/// Every hypothesis holds by construction and the comparison must come out
/// `Holds` at each index.
pub fn random_instance(seed: u64) -> MinmaxInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(6..=10);
    let np = n + rng.gen_range(0..=5);
    let kk = 4.min(n);

    let quad = random_hermitian_psd(&mut rng, n, 0.1);
    let metric = DMatrix::identity(n, n);
    let metric_prime = DMatrix::identity(np, np);

    // Isometric transfer: thin Q factor of a random N′×N matrix.
    let raw = DMatrix::from_fn(np, n, |_, _| {
        Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let transfer = raw.qr().q();

    // E ⪯ 0.9·Q via the largest eigenvalue of the pencil (E₀, Q).
    let e0 = random_hermitian_psd(&mut rng, n, 0.0);
    let (pencil_vals, _) =
        generalized_hermitian_eigen(&e0, &quad, false).expect("Q is positive definite");
    let mu = pencil_vals.last().copied().unwrap_or(0.0).max(1e-12);
    let scale = 0.9 * rng.gen_range(0.1..1.0) / mu;
    let e = &e0 * Complex::new(scale, 0.0);

    let inner = &quad - &e;
    let qp = &transfer * inner * transfer.adjoint();
    let quad_prime = (&qp + qp.adjoint()) * Complex::new(0.5, 0.0);

    // Generous caps: any upper bound on λ_k works; use tr(Q) + 1.
    let cap = quad.diagonal().iter().map(|z| z.re).sum::<f64>() + 1.0;
    MinmaxInstance {
        quad,
        metric,
        quad_prime,
        metric_prime,
        transfer,
        caps: vec![cap; kk],
    }
}

// ---------------------------------------------------------------------------
