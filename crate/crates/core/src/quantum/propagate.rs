//! Time-ordered evolution as an ordered product of short-step propagators.
//!
//! Each step freezes `H` at the step midpoint and applies `exp(−i H dt)` with
//! a Lanczos (Krylov) approximation whose degree grows until the a posteriori
//! error estimate falls below tolerance. With full reorthogonalization the
//! projected exponential is unitary, so each step preserves the norm to
//! rounding.

use num_complex::Complex;

use super::hamiltonian::HamiltonianSpec;
use super::state::{inner, norm, QuantumState};
use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigen;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct PropagatorConfig<R> {
    /// Per-step truncation tolerance of the Krylov expansion.
    pub krylov_tol: R,
    /// Largest Krylov dimension before a step is split in half.
    pub max_krylov_dim: usize,
    /// Accepted norm drift over one `propagate` call.
    pub norm_tol: R,
}

impl<R: Real> Default for PropagatorConfig<R> {
    fn default() -> Self {
        Self {
            krylov_tol: R::epsilon() * R::lit(1000.0),
            max_krylov_dim: 40,
            norm_tol: R::norm_tolerance(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Propagation<R> {
    pub state: QuantumState<R>,
    /// `|‖ψ‖ − 1|` before the final renormalization.
    pub norm_drift: R,
    pub steps: usize,
    pub matvecs: usize,
}

const MAX_SPLIT_DEPTH: u32 = 24;

/// Evolves `state0` from `t0` to `t1` under `schedule(t)` with `steps`
/// midpoint-frozen steps.
pub fn propagate<R, F>(
    schedule: F,
    state0: &QuantumState<R>,
    t0: R,
    t1: R,
    steps: usize,
    cfg: &PropagatorConfig<R>,
) -> Result<Propagation<R>>
where
    R: Real,
    F: Fn(R) -> Result<HamiltonianSpec<R>>,
{
    if steps == 0 {
        return Err(Error::InvalidArgument("step count must be at least 1".into()));
    }
    if !(t1 > t0) {
        return Err(Error::InvalidArgument(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    let n0 = state0.norm();
    if (n0 - R::one()).abs() > cfg.norm_tol {
        return Err(Error::NotNormalized(n0.to_f64_lossy()));
    }
    let dt = (t1 - t0) / R::from_usize_lossy(steps);
    let half = R::half();
    let mut psi = state0.amplitudes().to_vec();
    let mut matvecs = 0;
    for k in 0..steps {
        let tm = t0 + (R::from_usize_lossy(k) + half) * dt;
        let h = schedule(tm)?;
        if h.dim() != psi.len() {
            return Err(Error::LengthMismatch {
                expected: psi.len(),
                got: h.dim(),
            });
        }
        matvecs += expm_step(&h, &mut psi, dt, cfg, 0)?;
    }
    let nrm = norm(&psi);
    let drift = (nrm - R::one()).abs();
    if !(drift <= cfg.norm_tol) {
        return Err(Error::NormDrift {
            drift: drift.to_f64_lossy(),
            tol: cfg.norm_tol.to_f64_lossy(),
        });
    }
    for a in &mut psi {
        *a = *a / nrm;
    }
    Ok(Propagation {
        state: QuantumState::from_raw(state0.n_qubits(), psi),
        norm_drift: drift,
        steps,
        matvecs,
    })
}

/// Evolution under a time-independent `H`.
pub fn propagate_constant<R: Real>(
    h: &HamiltonianSpec<R>,
    state0: &QuantumState<R>,
    t: R,
    steps: usize,
    cfg: &PropagatorConfig<R>,
) -> Result<Propagation<R>> {
    propagate(|_| Ok(h.clone()), state0, R::zero(), t, steps, cfg)
}

/// `psi ← exp(−i H dt) psi`; returns the number of matrix-vector products.
fn expm_step<R: Real>(
    h: &HamiltonianSpec<R>,
    psi: &mut Vec<Complex<R>>,
    dt: R,
    cfg: &PropagatorConfig<R>,
    depth: u32,
) -> Result<usize> {
    match krylov_expm(h, psi, dt, cfg)? {
        (Some(next), used) => {
            *psi = next;
            Ok(used)
        }
        (None, used) if depth < MAX_SPLIT_DEPTH => {
            let half = dt * R::half();
            let a = expm_step(h, psi, half, cfg, depth + 1)?;
            let b = expm_step(h, psi, half, cfg, depth + 1)?;
            Ok(used + a + b)
        }
        (None, used) => Err(Error::NoConvergence {
            iterations: used,
            residual: f64::NAN,
        }),
    }
}

/// One Krylov approximation of `exp(−i H dt) v`. Returns `None` when the
/// error estimate did not converge within `max_krylov_dim`.
fn krylov_expm<R: Real>(
    h: &HamiltonianSpec<R>,
    v: &[Complex<R>],
    dt: R,
    cfg: &PropagatorConfig<R>,
) -> Result<(Option<Vec<Complex<R>>>, usize)> {
    let zero = Complex::new(R::zero(), R::zero());
    let beta0 = norm(v);
    if beta0 == R::zero() {
        return Ok((Some(v.to_vec()), 0));
    }
    let m_max = cfg.max_krylov_dim.min(v.len()).max(1);
    let mut basis: Vec<Vec<Complex<R>>> = Vec::with_capacity(m_max);
    basis.push(v.iter().map(|&a| a / beta0).collect());
    let mut alphas: Vec<R> = Vec::with_capacity(m_max);
    let mut betas: Vec<R> = Vec::with_capacity(m_max);
    let mut w = vec![zero; v.len()];
    let breakdown = R::epsilon() * R::lit(64.0);

    for j in 0..m_max {
        h.apply_into(&basis[j], &mut w);
        let alpha = inner(&basis[j], &w).re;
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi = *wi - *qi * c;
                }
            }
        }
        alphas.push(alpha);
        let beta = norm(&w);
        let scale = R::one() + alphas.iter().fold(R::zero(), |m, a| m.max(a.abs()));
        let invariant = beta <= breakdown * scale;

        let coeffs = small_expm(&alphas, &betas, dt)?;
        let err = beta * coeffs[j].norm() * beta0;
        if invariant || err <= cfg.krylov_tol {
            let mut out = vec![zero; v.len()];
            for (c, q) in coeffs.iter().zip(&basis) {
                let c = *c * beta0;
                for (o, qi) in out.iter_mut().zip(q) {
                    *o = *o + *qi * c;
                }
            }
            return Ok((Some(out), j + 1));
        }
        if j + 1 == m_max {
            return Ok((None, j + 1));
        }
        betas.push(beta);
        basis.push(w.iter().map(|&a| a / beta).collect());
    }
    Ok((None, m_max))
}

/// `exp(−i T dt) e_1` for the real symmetric tridiagonal `T`.
fn small_expm<R: Real>(alphas: &[R], betas: &[R], dt: R) -> Result<Vec<Complex<R>>> {
    let m = alphas.len();
    let eig = tridiagonal_eigen(alphas, &betas[..m - 1], true)?;
    Ok((0..m)
        .map(|k| {
            (0..m).fold(Complex::new(R::zero(), R::zero()), |acc, l| {
                let phase = Complex::new(R::zero(), -eig.values[l] * dt).exp();
                acc + phase * (eig.vector_entry(k, l) * eig.vector_entry(0, l))
            })
        })
        .collect())
}
