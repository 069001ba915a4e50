//! Reduced states of a register split into a collective system `C` and its
//! environment `E`.
//!
//! A collective basis index packs the spins of `C` in the order given by
//! [`Partition::collective`], the first listed qubit in bit 0. Environment
//! indices pack the remaining qubits in ascending order.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::ising::IsingModel;
use crate::linalg::hermitian_eigenvalues;
use crate::quantum::{build_final, propagate_constant, PropagatorConfig, QuantumState, MAX_QUBITS};
use crate::scalar::Real;

pub const MAX_COLLECTIVE_QUBITS: usize = 10;
pub const MAX_DEPHASING_QUBITS: usize = 16;
pub const DENSITY_TOL: f64 = 1e-10;
pub const TRAJECTORY_CSV_HEADER: &str = "t,purity,entropy,max_offdiag";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    n_total: usize,
    collective: Vec<usize>,
    environment: Vec<usize>,
}

impl Partition {
    /// `collective` lists 1-based qubit labels; everything else is environment.
    pub fn new(n_total: usize, collective: Vec<usize>) -> Result<Self> {
        if n_total == 0 || n_total > MAX_QUBITS {
            return Err(Error::SizeLimit {
                what: "qubits",
                value: n_total,
                limit: MAX_QUBITS,
            });
        }
        if collective.len() > MAX_COLLECTIVE_QUBITS {
            return Err(Error::SizeLimit {
                what: "collective qubits",
                value: collective.len(),
                limit: MAX_COLLECTIVE_QUBITS,
            });
        }
        let mut seen = vec![false; n_total + 1];
        for &q in &collective {
            if q == 0 || q > n_total {
                return Err(Error::InvalidArgument(format!(
                    "qubit {q} outside 1..={n_total}"
                )));
            }
            if seen[q] {
                return Err(Error::InvalidArgument(format!("qubit {q} listed twice")));
            }
            seen[q] = true;
        }
        let environment = (1..=n_total).filter(|&q| !seen[q]).collect();
        Ok(Self {
            n_total,
            collective,
            environment,
        })
    }

    /// The first `n_collective` qubits form `C`.
    pub fn leading(n_total: usize, n_collective: usize) -> Result<Self> {
        Self::new(n_total, (1..=n_collective.min(n_total)).collect())
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn collective(&self) -> &[usize] {
        &self.collective
    }

    pub fn environment(&self) -> &[usize] {
        &self.environment
    }

    pub fn collective_dim(&self) -> usize {
        1 << self.collective.len()
    }

    pub fn environment_dim(&self) -> usize {
        1 << self.environment.len()
    }

    fn scatter(bits: usize, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .fold(0, |acc, (_, &q)| acc | 1 << (q - 1))
    }

    /// Full-register index of collective index `a` and environment index `e`.
    pub fn full_index(&self, a: usize, e: usize) -> usize {
        Self::scatter(a, &self.collective) | Self::scatter(e, &self.environment)
    }

    fn check_state<R: Real>(&self, state: &QuantumState<R>) -> Result<()> {
        if state.n_qubits() != self.n_total {
            return Err(Error::LengthMismatch {
                expected: self.n_total,
                got: state.n_qubits(),
            });
        }
        Ok(())
    }

    /// Amplitudes reshaped as `M[a][e] = ψ(a, e)`.
    fn branches<R: Real>(&self, state: &QuantumState<R>) -> Result<Vec<Vec<Complex<R>>>> {
        self.check_state(state)?;
        let psi = state.amplitudes();
        let env_dim = self.environment_dim();
        let collective_offsets: Vec<usize> = (0..self.collective_dim())
            .map(|a| Self::scatter(a, &self.collective))
            .collect();
        let env_offsets: Vec<usize> = (0..env_dim)
            .map(|e| Self::scatter(e, &self.environment))
            .collect();
        Ok(collective_offsets
            .iter()
            .map(|&ca| env_offsets.iter().map(|&ce| psi[ca | ce]).collect())
            .collect())
    }
}

fn dot<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> Complex<R> {
    a.iter()
        .zip(b)
        .fold(Complex::new(R::zero(), R::zero()), |acc, (x, y)| acc + x.conj() * y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<R> {
    dim: usize,
    entries: Vec<Complex<R>>,
}

impl<R: Real> DensityMatrix<R> {
    /// Validates Hermiticity, unit trace and positivity within `1e-10`.
    pub fn new(dim: usize, entries: Vec<Complex<R>>) -> Result<Self> {
        let rho = Self::unchecked(dim, entries)?;
        rho.validate(R::lit(DENSITY_TOL).max(R::norm_tolerance()))?;
        Ok(rho)
    }

    fn unchecked(dim: usize, entries: Vec<Complex<R>>) -> Result<Self> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "density matrix dimension {dim} is not a power of two"
            )));
        }
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn pure(state: &QuantumState<R>) -> Self {
        let psi = state.amplitudes();
        let dim = psi.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in psi {
            for b in psi {
                entries.push(*a * b.conj());
            }
        }
        Self { dim, entries }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        let mut entries = vec![Complex::new(R::zero(), R::zero()); dim * dim];
        let w = R::one() / R::from_usize_lossy(dim.max(1));
        for i in 0..dim {
            entries[i * dim + i] = Complex::new(w, R::zero());
        }
        Self::unchecked(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<R>] {
        &self.entries
    }

    pub fn get(&self, a: usize, b: usize) -> Complex<R> {
        self.entries[a * self.dim + b]
    }

    pub fn trace(&self) -> Complex<R> {
        (0..self.dim).fold(Complex::new(R::zero(), R::zero()), |acc, i| acc + self.get(i, i))
    }

    pub fn populations(&self) -> Vec<R> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// `max |ρ[a,b] − conj ρ[b,a]|`
    pub fn hermiticity_error(&self) -> R {
        let mut worst = R::zero();
        for a in 0..self.dim {
            for b in a..self.dim {
                worst = worst.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        worst
    }

    /// Largest off-diagonal magnitude.
    pub fn max_offdiag(&self) -> R {
        let mut worst = R::zero();
        for a in 0..self.dim {
            for b in 0..self.dim {
                if a != b {
                    worst = worst.max(self.get(a, b).norm());
                }
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Result<Vec<R>> {
        hermitian_eigenvalues(&self.entries, self.dim)
    }

    pub fn validate(&self, tol: R) -> Result<()> {
        let herm = self.hermiticity_error();
        if !(herm <= tol) {
            return Err(Error::InvalidModel(format!("not Hermitian: deviation {herm}")));
        }
        let tr = self.trace();
        if !((tr.re - R::one()).abs() <= tol && tr.im.abs() <= tol) {
            return Err(Error::InvalidModel(format!("trace {} + {}i", tr.re, tr.im)));
        }
        let lowest = self.eigenvalues()?.first().copied().unwrap_or(R::zero());
        if !(lowest >= -tol) {
            return Err(Error::InvalidModel(format!("negative eigenvalue {lowest}")));
        }
        Ok(())
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> R {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Von Neumann entropy in bits.
    /// Eigenvalues within rounding of zero or one contribute nothing.
    pub fn entropy(&self) -> Result<R> {
        let floor = R::epsilon() * R::lit(16.0) * R::from_usize_lossy(self.dim);
        let s = self
            .eigenvalues()?
            .into_iter()
            .filter(|&l| l > floor && l < R::one() - floor)
            .map(|l| -l * l.log2())
            .sum::<R>();
        Ok(s.max(R::zero()))
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim)
            .map(|a| {
                (0..self.dim)
                    .map(|b| {
                        let z = self.get(a, b);
                        [z.re.to_f64_lossy(), z.im.to_f64_lossy()]
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string(&rows).expect("plain arrays always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(text)?;
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            entries.extend(row.into_iter().map(|[re, im]| Complex::new(R::lit(re), R::lit(im))));
        }
        Self::new(dim, entries)
    }
}

/// `ρ_C = Tr_E |ψ⟩⟨ψ|`
pub fn partial_trace<R: Real>(state: &QuantumState<R>, partition: &Partition) -> Result<DensityMatrix<R>> {
    let m = partition.branches(state)?;
    let dim = m.len();
    let mut entries = vec![Complex::new(R::zero(), R::zero()); dim * dim];
    for a in 0..dim {
        for b in a..dim {
            let v = dot(&m[b], &m[a]);
            entries[a * dim + b] = v;
            entries[b * dim + a] = v.conj();
        }
    }
    DensityMatrix::unchecked(dim, entries)
}

/// Conditional environment states of each collective branch.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvGram<R> {
    dim: usize,
    /// `c_n = ‖ψ(n, ·)‖`
    pub weights: Vec<R>,
    entries: Vec<Option<Complex<R>>>,
}

impl<R: Real> EnvGram<R> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `⟨ε_n|ε_m⟩`, or `None` when either branch carries no weight.
    pub fn get(&self, n: usize, m: usize) -> Option<Complex<R>> {
        self.entries[n * self.dim + m]
    }

    pub fn is_defined(&self, n: usize) -> bool {
        self.entries[n * self.dim + n].is_some()
    }

    /// `c_n c_m G[m, n]`, treating undefined branches as weightless.
    pub fn reconstruct(&self) -> Vec<Complex<R>> {
        let mut out = vec![Complex::new(R::zero(), R::zero()); self.dim * self.dim];
        for n in 0..self.dim {
            for m in 0..self.dim {
                if let Some(g) = self.get(m, n) {
                    out[n * self.dim + m] = g * (self.weights[n] * self.weights[m]);
                }
            }
        }
        out
    }
}

pub fn env_gram<R: Real>(state: &QuantumState<R>, partition: &Partition) -> Result<EnvGram<R>> {
    let m = partition.branches(state)?;
    let dim = m.len();
    let cutoff = R::epsilon() * R::epsilon();
    let weights: Vec<R> = m.iter().map(|row| dot(row, row).re.sqrt()).collect();
    let conditionals: Vec<Option<Vec<Complex<R>>>> = m
        .iter()
        .zip(&weights)
        .map(|(row, &c)| (c * c >= cutoff).then(|| row.iter().map(|&z| z / c).collect()))
        .collect();
    let mut entries = vec![None; dim * dim];
    for n in 0..dim {
        for k in 0..dim {
            if let (Some(en), Some(ek)) = (&conditionals[n], &conditionals[k]) {
                entries[n * dim + k] = Some(if n == k {
                    Complex::new(R::one(), R::zero())
                } else {
                    dot(en, ek)
                });
            }
        }
    }
    Ok(EnvGram {
        dim,
        weights,
        entries,
    })
}

/// A state returned together with the number of amplitudes that had to be
/// stored to hold it.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery<R> {
    pub state: QuantumState<R>,
    pub cost_amplitudes: u64,
}

pub fn recover_information<R: Real>(state: &QuantumState<R>, partition: &Partition) -> Result<Recovery<R>> {
    partition.check_state(state)?;
    Ok(Recovery {
        state: state.clone(),
        cost_amplitudes: 1u64 << partition.n_total(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DephasingRow<R> {
    pub t: R,
    pub purity: R,
    pub entropy: R,
    pub max_offdiag: R,
    pub populations: Vec<R>,
}

/// `H = Σ g_jk σz^j σz^k` between every collective qubit `j` and every
/// environment qubit `k`, started from `|+…+⟩`.
#[derive(Debug, Clone)]
pub struct DephasingModel<R> {
    n_collective: usize,
    n_env: usize,
    couplings: Vec<(usize, usize, R)>,
}

impl<R: Real> DephasingModel<R> {
    /// Couplings drawn uniformly from `[0.5, 1.5]`.
    pub fn new(n_collective: usize, n_env: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut couplings = Vec::with_capacity(n_collective * n_env);
        for j in 1..=n_collective {
            for k in n_collective + 1..=n_collective + n_env {
                couplings.push((j, k, R::lit(rng.gen_range(0.5..=1.5))));
            }
        }
        Self::with_couplings(n_collective, n_env, couplings)
    }

    pub fn with_couplings(n_collective: usize, n_env: usize, couplings: Vec<(usize, usize, R)>) -> Result<Self> {
        let total = n_collective + n_env;
        if n_collective == 0 || total > MAX_DEPHASING_QUBITS {
            return Err(Error::SizeLimit {
                what: "dephasing qubits",
                value: total,
                limit: MAX_DEPHASING_QUBITS,
            });
        }
        if n_collective > MAX_COLLECTIVE_QUBITS {
            return Err(Error::SizeLimit {
                what: "collective qubits",
                value: n_collective,
                limit: MAX_COLLECTIVE_QUBITS,
            });
        }
        for &(j, k, _) in &couplings {
            if !(1..=n_collective).contains(&j) || !(n_collective + 1..=total).contains(&k) {
                return Err(Error::InvalidArgument(format!(
                    "coupling ({j}, {k}) does not join C to E"
                )));
            }
        }
        Ok(Self {
            n_collective,
            n_env,
            couplings,
        })
    }

    pub fn couplings(&self) -> &[(usize, usize, R)] {
        &self.couplings
    }

    pub fn partition(&self) -> Result<Partition> {
        Partition::leading(self.n_collective + self.n_env, self.n_collective)
    }

    fn row(&self, t: R, state: &QuantumState<R>, partition: &Partition) -> Result<DephasingRow<R>> {
        let rho = partial_trace(state, partition)?;
        Ok(DephasingRow {
            t,
            purity: rho.purity(),
            entropy: rho.entropy()?,
            max_offdiag: rho.max_offdiag(),
            populations: rho.populations(),
        })
    }

    /// Records `steps + 1` equally spaced snapshots on `[0, t]`.
    pub fn run(&self, t: R, steps: usize) -> Result<Vec<DephasingRow<R>>> {
        if steps == 0 {
            return Err(Error::InvalidArgument("step count must be at least 1".into()));
        }
        if !(t >= R::zero()) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid duration {t}")));
        }
        let n = self.n_collective + self.n_env;
        let partition = self.partition()?;
        let mut model = IsingModel::<R>::new(n)?;
        for &(j, k, g) in &self.couplings {
            model.add_coupling(j, k, -g)?;
        }
        let h = build_final::<R, R>(&model)?;
        let cfg = PropagatorConfig::default();
        let mut state = QuantumState::uniform(n)?;
        let mut rows = vec![self.row(R::zero(), &state, &partition)?];
        let dt = t / R::from_usize_lossy(steps);
        for k in 1..=steps {
            if dt > R::zero() {
                state = propagate_constant(&h, &state, dt, 1, &cfg)?.state;
            }
            rows.push(self.row(dt * R::from_usize_lossy(k), &state, &partition)?);
        }
        Ok(rows)
    }
}

pub fn trajectory_csv<R: Real>(rows: &[DephasingRow<R>]) -> String {
    let mut out = String::from(TRAJECTORY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [r.t, r.purity, r.entropy, r.max_offdiag].map(|x| fmt_sig(x.to_f64_lossy(), 12));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
