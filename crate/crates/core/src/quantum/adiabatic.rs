use serde::{Deserialize, Serialize};

use super::hamiltonian::{build_final, build_initial, interpolate};
use super::propagate::{propagate, PropagatorConfig};
use super::state::QuantumState;
use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone)]
pub struct AdiabaticResult<R> {
    pub final_state: QuantumState<R>,
    /// Weight of the final state on the (possibly degenerate) ground space
    /// of `H_final`.
    pub success_prob: R,
    pub t_adiabatic: R,
    pub steps: usize,
    pub norm_drift: R,
    pub degeneracy: usize,
}

/// The JSON artifact of an adiabatic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSummary {
    pub t_adiabatic: f64,
    pub steps: usize,
    pub success_prob: f64,
    pub norm_drift: f64,
}

impl<R: Real> AdiabaticResult<R> {
    pub fn summary(&self) -> AdiabaticSummary {
        AdiabaticSummary {
            t_adiabatic: self.t_adiabatic.to_f64_lossy(),
            steps: self.steps,
            success_prob: self.success_prob.to_f64_lossy(),
            norm_drift: self.norm_drift.to_f64_lossy(),
        }
    }
}

/// `max(1000, ⌈100·T⌉)`
pub fn default_steps(t_adiabatic: f64) -> usize {
    (100.0 * t_adiabatic).ceil().max(1000.0) as usize
}

/// Indices of the minimal entries of `diag`, with a relative tie tolerance.
pub fn ground_indices<R: Real>(diag: &[R]) -> Vec<usize> {
    let min = diag.iter().copied().fold(R::infinity(), R::min);
    let tol = R::lit(1e-9) * R::one().max(min.abs());
    diag.iter()
        .enumerate()
        .filter(|(_, &d)| d - min <= tol)
        .map(|(b, _)| b)
        .collect()
}

/// Linear schedule `s(t) = t / T`.
pub fn adiabatic_run<R: Real, S: Scalar>(
    model: &IsingModel<S>,
    t_adiabatic: R,
    steps: usize,
    cfg: &PropagatorConfig<R>,
) -> Result<AdiabaticResult<R>> {
    adiabatic_run_with_schedule(model, t_adiabatic, steps, |u| u, cfg)
}

/// Evolves the uniform superposition under `H(shape(t/T))`. `shape` maps
/// `[0, 1]` onto `[0, 1]`. `T = 0` is the sudden limit: the state is left
/// untouched.
pub fn adiabatic_run_with_schedule<R, S, F>(
    model: &IsingModel<S>,
    t_adiabatic: R,
    steps: usize,
    shape: F,
    cfg: &PropagatorConfig<R>,
) -> Result<AdiabaticResult<R>>
where
    R: Real,
    S: Scalar,
    F: Fn(R) -> R,
{
    if !(t_adiabatic >= R::zero()) || !t_adiabatic.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "t_adiabatic must be finite and nonnegative, got {t_adiabatic}"
        )));
    }
    let n = model.n();
    let h0 = build_initial::<R>(n)?;
    let h1 = build_final::<R, S>(model)?;
    let ground = ground_indices(&h1.diagonal().expect("final Hamiltonian is diagonal"));
    let psi0 = QuantumState::<R>::uniform(n)?;

    let (final_state, norm_drift) = if t_adiabatic == R::zero() {
        (psi0, R::zero())
    } else {
        let schedule = |t: R| {
            let s = shape(t / t_adiabatic).max(R::zero()).min(R::one());
            interpolate(&h0, &h1, s)
        };
        let out = propagate(schedule, &psi0, R::zero(), t_adiabatic, steps, cfg)?;
        (out.state, out.norm_drift)
    };
    let success_prob = final_state.probability_of(ground.iter().copied());
    Ok(AdiabaticResult {
        final_state,
        success_prob,
        t_adiabatic,
        steps,
        norm_drift,
        degeneracy: ground.len(),
    })
}
