//! Satisfiability instances, their Ising encodings, and state-vector
//! simulation of adiabatic evolution toward the encoded ground states.
//!
//! Numerical code is generic over the scalar type. The aliases at the crate
//! root fix the common choices: `f64` for simulation and [`Rational`] for
//! exact penalty arithmetic.

pub mod cnf;
pub mod decohere;
pub mod error;
pub mod format;
pub mod ising;
pub mod linalg;
pub mod quantum;
pub mod race;
pub mod reduction;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Rational, Real, Scalar};

pub type IsingModel = ising::IsingModel<f64>;
pub type ExactIsingModel = ising::IsingModel<Rational>;
pub type GroundResult = ising::GroundResult<f64>;
pub type QuantumState = quantum::QuantumState<f64>;
pub type HamiltonianSpec = quantum::HamiltonianSpec<f64>;
pub type GapProfile = quantum::GapProfile<f64>;
pub type AdiabaticResult = quantum::AdiabaticResult<f64>;
pub type DensityMatrix = decohere::DensityMatrix<f64>;
pub type EnvGram = decohere::EnvGram<f64>;
pub type DephasingModel = decohere::DephasingModel<f64>;
