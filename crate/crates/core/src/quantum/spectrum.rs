//! Lowest two levels of `H(s)` and the gap profile along the schedule.
//!
//! The iterative path is restarted Lanczos with full reorthogonalization.
//! The second level comes from a second run deflated against the converged
//! ground vector, so a degenerate ground space yields `e1 = e0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{build_final, build_initial, interpolate, HamiltonianSpec};
use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::ising::IsingModel;
use crate::linalg::{symmetric_eigen, tridiagonal_eigen};
use crate::scalar::{Real, Scalar};

/// Largest register the dense cross-check path accepts.
pub const MAX_DENSE_QUBITS: usize = 10;

/// Default constant in `T = c / g_min²`.
pub const DEFAULT_ADIABATIC_C: f64 = 10.0;

/// Fraction of gap samples that must succeed for a profile to be returned.
pub const MIN_SAMPLE_SUCCESS: f64 = 0.8;

#[derive(Debug, Clone, Copy)]
pub struct EigenConfig<R> {
    /// Residual tolerance `‖Hy − θy‖ ≤ tol · max(1, |θ|)`.
    pub tol: R,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Seed of the deterministic start vector.
    pub seed: u64,
}

impl<R: Real> Default for EigenConfig<R> {
    fn default() -> Self {
        Self {
            tol: R::eigen_tolerance(),
            krylov_dim: 80,
            max_restarts: 200,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Lanczos,
    Dense,
}

/// Keeps the Krylov basis within roughly 256 MiB.
fn basis_budget<R>(dim: usize) -> usize {
    let bytes = std::mem::size_of::<R>().max(1) * dim;
    ((256usize << 20) / bytes).max(8)
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn axpy<R: Real>(y: &mut [R], a: R, x: &[R]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

fn project_out<R: Real>(w: &mut [R], basis: &[Vec<R>]) {
    for q in basis {
        let c = dot(q, w);
        axpy(w, -c, q);
    }
}

/// Lowest eigenpair of `h` on the orthogonal complement of `locked`.
fn lanczos_lowest<R: Real>(
    h: &HamiltonianSpec<R>,
    locked: &[Vec<R>],
    cfg: &EigenConfig<R>,
) -> Result<(R, Vec<R>)> {
    let dim = h.dim();
    if locked.len() >= dim {
        return Err(Error::InvalidArgument("nothing left after deflation".into()));
    }
    let m_max = cfg
        .krylov_dim
        .min(dim - locked.len())
        .min(basis_budget::<R>(dim))
        .max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (locked.len() as u64).wrapping_mul(0x9e37_79b9));
    let mut start: Vec<R> = (0..dim).map(|_| R::lit(rng.gen_range(-1.0..1.0))).collect();
    let mut w = vec![R::zero(); dim];
    let mut last_residual = R::infinity();
    let mut total_iters = 0;

    for _restart in 0..=cfg.max_restarts {
        project_out(&mut start, locked);
        project_out(&mut start, locked);
        let nrm = dot(&start, &start).sqrt();
        if !(nrm > R::zero()) {
            return Err(Error::NoConvergence {
                iterations: total_iters,
                residual: f64::NAN,
            });
        }
        let mut basis: Vec<Vec<R>> = vec![start.iter().map(|&x| x / nrm).collect()];
        let mut alphas: Vec<R> = Vec::new();
        let mut betas: Vec<R> = Vec::new();
        let mut ritz: Option<(R, Vec<R>)> = None;

        for j in 0..m_max {
            total_iters += 1;
            h.apply_real_into(&basis[j], &mut w);
            let alpha = dot(&basis[j], &w);
            alphas.push(alpha);
            for _ in 0..2 {
                project_out(&mut w, locked);
                project_out(&mut w, &basis);
            }
            let beta = dot(&w, &w).sqrt();
            let scale = R::one() + alphas.iter().fold(R::zero(), |m, a| m.max(a.abs()));
            let invariant = beta <= R::epsilon() * R::lit(64.0) * scale;
            let eig = tridiagonal_eigen(&alphas, &betas, true)?;
            let theta = eig.values[0];
            let estimate = beta * eig.vector_entry(j, 0).abs();
            let last = j + 1 == m_max;
            if invariant || last || estimate <= cfg.tol * R::one().max(theta.abs()) {
                let mut y = vec![R::zero(); dim];
                for (k, q) in basis.iter().enumerate() {
                    axpy(&mut y, eig.vector_entry(k, 0), q);
                }
                ritz = Some((theta, y));
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|&x| x / beta).collect());
        }

        let (_, mut y) = ritz.expect("loop always produces a Ritz pair");
        project_out(&mut y, locked);
        let ny = dot(&y, &y).sqrt();
        for x in &mut y {
            *x = *x / ny;
        }
        h.apply_real_into(&y, &mut w);
        project_out(&mut w, locked);
        let theta = dot(&y, &w);
        axpy(&mut w, -theta, &y);
        let residual = dot(&w, &w).sqrt();
        last_residual = residual;
        if residual <= cfg.tol * R::one().max(theta.abs()) {
            return Ok((theta, y));
        }
        start = y;
    }
    Err(Error::NoConvergence {
        iterations: total_iters,
        residual: last_residual.to_f64_lossy(),
    })
}

/// Snaps `e1` onto `e0` when the two agree within the solver tolerance.
fn finish_pair<R: Real>(e0: R, e1: R, tol: R) -> (R, R) {
    let e1 = e1.max(e0);
    if e1 - e0 <= tol * R::lit(10.0) * R::one().max(e0.abs()) {
        (e0, e0)
    } else {
        (e0, e1)
    }
}

/// Two smallest eigenvalues, with multiplicity, by deflated Lanczos.
pub fn lowest_two<R: Real>(h: &HamiltonianSpec<R>, cfg: &EigenConfig<R>) -> Result<(R, R)> {
    let (e0, v0) = lanczos_lowest(h, &[], cfg)?;
    let (e1, _) = lanczos_lowest(h, &[v0], cfg)?;
    Ok(finish_pair(e0, e1, cfg.tol))
}

/// Dense cross-check path for registers of at most [`MAX_DENSE_QUBITS`].
pub fn lowest_two_dense<R: Real>(h: &HamiltonianSpec<R>) -> Result<(R, R)> {
    if h.n() > MAX_DENSE_QUBITS {
        return Err(Error::SizeLimit {
            what: "qubits for dense diagonalization",
            value: h.n(),
            limit: MAX_DENSE_QUBITS,
        });
    }
    let m = h.to_dense()?;
    let eig = symmetric_eigen(&m, h.dim(), false)?;
    Ok(finish_pair(eig.values[0], eig.values[1], R::epsilon() * R::lit(100.0)))
}

pub fn lowest_two_with<R: Real>(
    h: &HamiltonianSpec<R>,
    method: EigenMethod,
    cfg: &EigenConfig<R>,
) -> Result<(R, R)> {
    match method {
        EigenMethod::Lanczos => lowest_two(h, cfg),
        EigenMethod::Dense => lowest_two_dense(h),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSample<R> {
    pub s: R,
    pub e0: R,
    pub e1: R,
    pub gap: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapProfile<R> {
    pub samples: Vec<GapSample<R>>,
    /// Schedule points where the eigensolver failed.
    pub failed: Vec<R>,
    /// Smallest gap over the samples, leaving out a closed gap at `s = 1`
    /// (a degenerate final ground space).
    pub min_gap: R,
    pub argmin_s: R,
}

impl<R: Real> GapProfile<R> {
    /// Builds the summary fields from samples ordered by `s`.
    pub fn from_samples(samples: Vec<GapSample<R>>, failed: Vec<R>) -> Result<Self> {
        let candidates = samples
            .iter()
            .filter(|x| !(x.s == R::one() && x.gap == R::zero()));
        let best = candidates
            .min_by(|a, b| a.gap.partial_cmp(&b.gap).unwrap_or(std::cmp::Ordering::Equal))
            .ok_or_else(|| Error::Gap("no usable samples".into()))?;
        let (min_gap, argmin_s) = (best.gap, best.s);
        Ok(Self {
            samples,
            failed,
            min_gap,
            argmin_s,
        })
    }

    /// `s,e0,e1,gap` with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,e0,e1,gap\n");
        for x in &self.samples {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_sig(x.s.to_f64_lossy(), 12),
                fmt_sig(x.e0.to_f64_lossy(), 12),
                fmt_sig(x.e1.to_f64_lossy(), 12),
                fmt_sig(x.gap.to_f64_lossy(), 12)
            ));
        }
        out
    }
}

/// Samples `s = k/(num_samples−1)` for `k = 0..num_samples`.
pub fn gap_profile<R: Real, S: Scalar>(
    model: &IsingModel<S>,
    num_samples: usize,
    method: EigenMethod,
    cfg: &EigenConfig<R>,
) -> Result<GapProfile<R>> {
    if num_samples < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 gap samples, got {num_samples}"
        )));
    }
    let h0 = build_initial::<R>(model.n())?;
    let h1 = build_final::<R, S>(model)?;
    let denom = R::from_usize_lossy(num_samples - 1);
    let results: Vec<(R, Result<(R, R)>)> = (0..num_samples)
        .into_par_iter()
        .map(|k| {
            let s = if k + 1 == num_samples {
                R::one()
            } else {
                R::from_usize_lossy(k) / denom
            };
            let pair = interpolate(&h0, &h1, s).and_then(|h| lowest_two_with(&h, method, cfg));
            (s, pair)
        })
        .collect();
    let mut samples = Vec::with_capacity(num_samples);
    let mut failed = Vec::new();
    for (s, r) in results {
        match r {
            Ok((e0, e1)) => samples.push(GapSample {
                s,
                e0,
                e1,
                gap: e1 - e0,
            }),
            Err(_) => failed.push(s),
        }
    }
    let ok = samples.len() as f64 / num_samples as f64;
    if ok < MIN_SAMPLE_SUCCESS {
        return Err(Error::Gap(format!(
            "{} of {num_samples} samples failed to converge",
            failed.len()
        )));
    }
    GapProfile::from_samples(samples, failed)
}

/// `T = c / g_min²`.
pub fn estimate_adiabatic_time<R: Real>(profile: &GapProfile<R>, c: R) -> Result<R> {
    if !(c > R::zero()) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    let g = profile.min_gap;
    if !(g > R::zero()) || !g.is_finite() {
        return Err(Error::Gap(format!(
            "minimum gap {g} at s = {} leaves no adiabatic time scale",
            profile.argmin_s
        )));
    }
    Ok(c / (g * g))
}
