use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::{check_qubits, QuantumState};
use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::scalar::{Real, Scalar};

const PAR_MIN_DIM: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    Initial,
    Final,
    Interpolated,
}

/// `H = diagonal_weight · D − transverse_weight · Σ_j σ_x^j`, applied
/// matrix-free. `D` is a shared table of classical energies, so interpolating
/// along a schedule never copies it.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec<R> {
    kind: HamiltonianKind,
    n: usize,
    diagonal: Option<Arc<Vec<R>>>,
    diagonal_weight: R,
    transverse_weight: R,
    s: Option<R>,
}

/// `H_init = −Σ_j σ_x^j`.
pub fn build_initial<R: Real>(n: usize) -> Result<HamiltonianSpec<R>> {
    check_qubits(n)?;
    Ok(HamiltonianSpec {
        kind: HamiltonianKind::Initial,
        n,
        diagonal: None,
        diagonal_weight: R::zero(),
        transverse_weight: R::one(),
        s: None,
    })
}

/// Diagonal operator whose entry `b` is the classical energy of basis
/// configuration `b`.
pub fn build_final<R: Real, S: Scalar>(model: &IsingModel<S>) -> Result<HamiltonianSpec<R>> {
    check_qubits(model.n())?;
    let diag = model
        .energy_table()
        .into_iter()
        .map(|e| R::from_f64(e.to_f64_lossy()).ok_or_else(|| Error::InvalidModel(format!("{e:?}"))))
        .collect::<Result<Vec<R>>>()?;
    HamiltonianSpec::from_diagonal(model.n(), diag)
}

/// `H(s) = (1 − s) h0 + s h1`.
pub fn interpolate<R: Real>(
    h0: &HamiltonianSpec<R>,
    h1: &HamiltonianSpec<R>,
    s: R,
) -> Result<HamiltonianSpec<R>> {
    if !(s >= R::zero() && s <= R::one()) {
        return Err(Error::InvalidArgument(format!("s = {s} outside [0, 1]")));
    }
    if h0.n != h1.n {
        return Err(Error::LengthMismatch {
            expected: h0.n,
            got: h1.n,
        });
    }
    let u = R::one() - s;
    let (diagonal, diagonal_weight) = match (&h0.diagonal, &h1.diagonal) {
        (None, None) => (None, R::zero()),
        (Some(d), None) => (Some(d.clone()), u * h0.diagonal_weight),
        (None, Some(d)) => (Some(d.clone()), s * h1.diagonal_weight),
        (Some(a), Some(b)) if Arc::ptr_eq(a, b) => (
            Some(a.clone()),
            u * h0.diagonal_weight + s * h1.diagonal_weight,
        ),
        (Some(a), Some(b)) => {
            let (wa, wb) = (u * h0.diagonal_weight, s * h1.diagonal_weight);
            let merged = a.iter().zip(b.iter()).map(|(&x, &y)| wa * x + wb * y).collect();
            (Some(Arc::new(merged)), R::one())
        }
    };
    Ok(HamiltonianSpec {
        kind: HamiltonianKind::Interpolated,
        n: h0.n,
        diagonal,
        diagonal_weight,
        transverse_weight: u * h0.transverse_weight + s * h1.transverse_weight,
        s: Some(s),
    })
}

impl<R: Real> HamiltonianSpec<R> {
    pub fn from_diagonal(n: usize, diagonal: Vec<R>) -> Result<Self> {
        check_qubits(n)?;
        if diagonal.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                got: diagonal.len(),
            });
        }
        Ok(Self {
            kind: HamiltonianKind::Final,
            n,
            diagonal: Some(Arc::new(diagonal)),
            diagonal_weight: R::one(),
            transverse_weight: R::zero(),
            s: None,
        })
    }

    /// The zero operator on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self {
            kind: HamiltonianKind::Final,
            n,
            diagonal: None,
            diagonal_weight: R::zero(),
            transverse_weight: R::zero(),
            s: None,
        })
    }

    pub fn kind(&self) -> HamiltonianKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn transverse_weight(&self) -> R {
        self.transverse_weight
    }

    pub fn s(&self) -> Option<R> {
        self.s
    }

    /// Effective diagonal entry, weight included.
    #[inline]
    pub fn diagonal_entry(&self, b: usize) -> R {
        match &self.diagonal {
            Some(d) => self.diagonal_weight * d[b],
            None => R::zero(),
        }
    }

    /// Materialized diagonal, `None` when the operator has no diagonal part.
    pub fn diagonal(&self) -> Option<Vec<R>> {
        self.diagonal
            .as_ref()
            .map(|d| d.iter().map(|&x| self.diagonal_weight * x).collect())
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// `H·ψ`, unnormalized.
    pub fn apply(&self, state: &QuantumState<R>) -> Result<Vec<Complex<R>>> {
        self.apply_slice(state.amplitudes())
    }

    pub fn apply_slice(&self, x: &[Complex<R>]) -> Result<Vec<Complex<R>>> {
        self.check_dim(x.len())?;
        let mut out = vec![Complex::new(R::zero(), R::zero()); x.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// `out = H·x` for complex vectors of the right length.
    pub(crate) fn apply_into(&self, x: &[Complex<R>], out: &mut [Complex<R>]) {
        let n = self.n;
        let tw = self.transverse_weight;
        let kernel = |(b, o): (usize, &mut Complex<R>)| {
            let mut acc = x[b] * self.diagonal_entry(b);
            if tw != R::zero() {
                let mut flips = Complex::new(R::zero(), R::zero());
                for j in 0..n {
                    flips = flips + x[b ^ (1 << j)];
                }
                acc = acc - flips * tw;
            }
            *o = acc;
        };
        if out.len() >= PAR_MIN_DIM {
            out.par_iter_mut().enumerate().for_each(kernel);
        } else {
            out.iter_mut().enumerate().for_each(kernel);
        }
    }

    /// Real-vector version for the symmetric eigensolver.
    pub(crate) fn apply_real_into(&self, x: &[R], out: &mut [R]) {
        let n = self.n;
        let tw = self.transverse_weight;
        let kernel = |(b, o): (usize, &mut R)| {
            let mut acc = self.diagonal_entry(b) * x[b];
            if tw != R::zero() {
                let mut flips = R::zero();
                for j in 0..n {
                    flips = flips + x[b ^ (1 << j)];
                }
                acc = acc - tw * flips;
            }
            *o = acc;
        };
        if out.len() >= PAR_MIN_DIM {
            out.par_iter_mut().enumerate().for_each(kernel);
        } else {
            out.iter_mut().enumerate().for_each(kernel);
        }
    }

    /// `⟨ψ|H|ψ⟩`, real because `H` is Hermitian.
    pub fn expectation(&self, state: &QuantumState<R>) -> Result<R> {
        let hpsi = self.apply(state)?;
        Ok(super::state::inner(state.amplitudes(), &hpsi).re)
    }

    /// Dense row-major matrix; only for small registers.
    pub fn to_dense(&self) -> Result<Vec<R>> {
        const MAX_DENSE_QUBITS: usize = 12;
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::SizeLimit {
                what: "qubits for dense materialization",
                value: self.n,
                limit: MAX_DENSE_QUBITS,
            });
        }
        let dim = self.dim();
        let mut m = vec![R::zero(); dim * dim];
        for b in 0..dim {
            m[b * dim + b] = self.diagonal_entry(b);
            for j in 0..self.n {
                m[b * dim + (b ^ (1 << j))] = -self.transverse_weight;
            }
        }
        Ok(m)
    }
}
