//! State-vector simulation over the `2^N` spin basis: the transverse-field
//! and problem Hamiltonians, their interpolation, time-ordered propagation,
//! the lowest two levels, and the adiabatic run built from them.
//!
//! Natural units with ħ = 1 throughout.

mod adiabatic;
mod hamiltonian;
mod propagate;
mod spectrum;
mod state;

pub use adiabatic::{
    adiabatic_run, adiabatic_run_with_schedule, default_steps, ground_indices, AdiabaticResult,
    AdiabaticSummary,
};
pub use hamiltonian::{build_final, build_initial, interpolate, HamiltonianKind, HamiltonianSpec};
pub use propagate::{propagate, propagate_constant, Propagation, PropagatorConfig};
pub use spectrum::{
    estimate_adiabatic_time, gap_profile, lowest_two, lowest_two_dense, lowest_two_with, EigenConfig,
    EigenMethod, GapProfile, GapSample, DEFAULT_ADIABATIC_C, MAX_DENSE_QUBITS, MIN_SAMPLE_SUCCESS,
};
pub use state::{QuantumState, MAX_QUBITS};
