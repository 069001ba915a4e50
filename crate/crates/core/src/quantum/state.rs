use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest register the state-vector code accepts.
pub const MAX_QUBITS: usize = 20;

/// Unit-norm amplitudes over the `2^n` spin basis. Bit `j` of a basis index
/// is clear when spin `j+1` points up (`σ = +1`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState<R> {
    n_qubits: usize,
    amplitudes: Vec<Complex<R>>,
}

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::SizeLimit {
            what: "qubits",
            value: n,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

pub(crate) fn norm<R: Real>(v: &[Complex<R>]) -> R {
    v.iter().map(|z| z.norm_sqr()).sum::<R>().sqrt()
}

/// `⟨a|b⟩`
pub(crate) fn inner<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> Complex<R> {
    a.iter()
        .zip(b)
        .fold(Complex::new(R::zero(), R::zero()), |acc, (x, y)| acc + x.conj() * y)
}

impl<R: Real> QuantumState<R> {
    /// Wraps amplitudes that must already be normalized.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex<R>>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::LengthMismatch {
                expected: 1 << n_qubits,
                got: amplitudes.len(),
            });
        }
        let nrm = norm(&amplitudes);
        if (nrm - R::one()).abs() > R::norm_tolerance() {
            return Err(Error::NotNormalized(nrm.to_f64_lossy()));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(n_qubits: usize, mut amplitudes: Vec<Complex<R>>) -> Result<Self> {
        let nrm = norm(&amplitudes);
        if !(nrm > R::zero()) || !nrm.is_finite() {
            return Err(Error::NotNormalized(nrm.to_f64_lossy()));
        }
        for a in &mut amplitudes {
            *a = *a / nrm;
        }
        Self::new(n_qubits, amplitudes)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        if index >= 1 << n_qubits {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex::new(R::zero(), R::zero()); 1 << n_qubits];
        amplitudes[index] = Complex::new(R::one(), R::zero());
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Equal superposition, the ground state of the transverse field.
    pub fn uniform(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let a = R::one() / R::from_usize_lossy(dim).sqrt();
        Ok(Self {
            n_qubits,
            amplitudes: vec![Complex::new(a, R::zero()); dim],
        })
    }

    /// Random state with independent uniform real and imaginary parts.
    pub fn random<G: Rng + ?Sized>(n_qubits: usize, rng: &mut G) -> Result<Self> {
        check_qubits(n_qubits)?;
        let amps = (0..1usize << n_qubits)
            .map(|_| {
                Complex::new(
                    R::lit(rng.gen_range(-1.0..1.0)),
                    R::lit(rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        Self::normalized(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<R>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<R>> {
        self.amplitudes
    }

    pub fn norm(&self) -> R {
        norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Result<Complex<R>> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Total probability on the given basis indices.
    pub fn probability_of(&self, indices: impl IntoIterator<Item = usize>) -> R {
        indices
            .into_iter()
            .map(|b| self.amplitudes[b].norm_sqr())
            .sum()
    }

    /// Builds a state without the normalization check; callers guarantee it.
    pub(crate) fn from_raw(n_qubits: usize, amplitudes: Vec<Complex<R>>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        Self {
            n_qubits,
            amplitudes,
        }
    }
}
