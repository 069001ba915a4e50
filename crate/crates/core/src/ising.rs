//! Classical Ising energies
//!
//! `E(σ) = −Σ_{j<k} C_jk σ_j σ_k − A Σ_j B_j σ_j + offset`
//!
//! Spins are 1-based in the public API. Basis index `b` encodes spin `j` in
//! bit `j−1`, with a clear bit meaning `σ_j = +1`; the quantum module uses the
//! same convention for its diagonal.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest spin count [`IsingModel::ground_states`] will enumerate.
pub const MAX_GROUND_SPINS: usize = 24;

/// Default tolerance of the zero-ground decision.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinConfig {
    spins: Vec<i8>,
}

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!("spin value {bad} is not ±1")));
        }
        Ok(Self { spins })
    }

    pub fn from_index(index: u64, n: usize) -> Self {
        Self {
            spins: (0..n)
                .map(|j| if (index >> j) & 1 == 0 { 1 } else { -1 })
                .collect(),
        }
    }

    pub fn to_index(&self) -> u64 {
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == -1)
            .fold(0, |acc, (j, _)| acc | (1 << j))
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn flipped(&self) -> Self {
        Self {
            spins: self.spins.iter().map(|s| -s).collect(),
        }
    }

    /// Lexicographic order from spin 1, with `+1` ranked before `−1`.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        other.spins.cmp(&self.spins)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundResult<S> {
    pub energy: S,
    pub configs: Vec<SpinConfig>,
}

impl<S> GroundResult<S> {
    pub fn degeneracy(&self) -> usize {
        self.configs.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel<S> {
    n: usize,
    couplings: BTreeMap<(usize, usize), S>,
    fields: Vec<S>,
    field_scale: S,
    offset: S,
}

impl<S: Scalar> IsingModel<S> {
    /// All-zero model on `n` spins with `A = 1`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("spin count must be positive".into()));
        }
        Ok(Self {
            n,
            couplings: BTreeMap::new(),
            fields: vec![S::zero(); n],
            field_scale: S::one(),
            offset: S::zero(),
        })
    }

    pub fn from_parts(
        n: usize,
        couplings: impl IntoIterator<Item = ((usize, usize), S)>,
        fields: Vec<S>,
        field_scale: S,
        offset: S,
    ) -> Result<Self> {
        let mut model = Self::new(n)?;
        if fields.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: fields.len(),
            });
        }
        model.fields = fields;
        model.field_scale = field_scale;
        model.offset = offset;
        for ((j, k), c) in couplings {
            model.add_coupling(j, k, c)?;
        }
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), S> {
        &self.couplings
    }

    pub fn coupling(&self, j: usize, k: usize) -> S {
        let key = if j < k { (j, k) } else { (k, j) };
        self.couplings.get(&key).copied().unwrap_or_else(S::zero)
    }

    pub fn fields(&self) -> &[S] {
        &self.fields
    }

    pub fn field_scale(&self) -> S {
        self.field_scale
    }

    pub fn offset(&self) -> S {
        self.offset
    }

    pub fn set_field_scale(&mut self, a: S) {
        self.field_scale = a;
    }

    pub fn set_offset(&mut self, offset: S) {
        self.offset = offset;
    }

    pub fn add_offset(&mut self, delta: S) {
        self.offset = self.offset + delta;
    }

    fn check_spin(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.n {
            return Err(Error::InvalidModel(format!(
                "spin index {j} outside 1..={}",
                self.n
            )));
        }
        Ok(())
    }

    /// Accumulates `c` into `C_jk`. Order of `j` and `k` does not matter.
    pub fn add_coupling(&mut self, j: usize, k: usize, c: S) -> Result<()> {
        self.check_spin(j)?;
        self.check_spin(k)?;
        if j == k {
            return Err(Error::InvalidModel(format!("self-coupling on spin {j}")));
        }
        let key = (j.min(k), j.max(k));
        let entry = self.couplings.entry(key).or_insert_with(S::zero);
        *entry = *entry + c;
        Ok(())
    }

    pub fn set_coupling(&mut self, j: usize, k: usize, c: S) -> Result<()> {
        self.check_spin(j)?;
        self.check_spin(k)?;
        if j == k {
            return Err(Error::InvalidModel(format!("self-coupling on spin {j}")));
        }
        self.couplings.insert((j.min(k), j.max(k)), c);
        Ok(())
    }

    /// Accumulates `b` into `B_j`.
    pub fn add_field(&mut self, j: usize, b: S) -> Result<()> {
        self.check_spin(j)?;
        self.fields[j - 1] = self.fields[j - 1] + b;
        Ok(())
    }

    pub fn set_field(&mut self, j: usize, b: S) -> Result<()> {
        self.check_spin(j)?;
        self.fields[j - 1] = b;
        Ok(())
    }

    /// Drops couplings that accumulated to exactly zero.
    pub fn prune_zero_couplings(&mut self) {
        self.couplings.retain(|_, c| !c.is_zero());
    }

    pub fn energy(&self, config: &SpinConfig) -> Result<S> {
        if config.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: config.len(),
            });
        }
        Ok(self.energy_of_index(config.to_index()))
    }

    /// Energy of the configuration encoded by basis index `b`.
    pub fn energy_of_index(&self, b: u64) -> S {
        let spin = |j: usize| -> bool { (b >> (j - 1)) & 1 == 0 };
        let mut coupling_sum = S::zero();
        for (&(j, k), &c) in &self.couplings {
            if spin(j) == spin(k) {
                coupling_sum = coupling_sum + c;
            } else {
                coupling_sum = coupling_sum - c;
            }
        }
        let mut field_sum = S::zero();
        for (j, &bj) in self.fields.iter().enumerate() {
            if spin(j + 1) {
                field_sum = field_sum + bj;
            } else {
                field_sum = field_sum - bj;
            }
        }
        self.offset - coupling_sum - self.field_scale * field_sum
    }

    /// Energies of all `2^n` basis configurations.
    pub fn energy_table(&self) -> Vec<S> {
        (0..1u64 << self.n)
            .into_par_iter()
            .map(|b| self.energy_of_index(b))
            .collect()
    }

    /// Exact ground energy and every minimizer, by full enumeration.
    pub fn ground_states(&self) -> Result<GroundResult<S>> {
        if self.n > MAX_GROUND_SPINS {
            return Err(Error::SizeLimit {
                what: "spins",
                value: self.n,
                limit: MAX_GROUND_SPINS,
            });
        }
        let total = 1u64 << self.n;
        let chunk = 1u64 << self.n.min(14);
        let (energy, mut indices) = (0..total / chunk)
            .into_par_iter()
            .map(|c| {
                let mut best: Option<S> = None;
                let mut hits = Vec::new();
                for b in c * chunk..(c + 1) * chunk {
                    let e = self.energy_of_index(b);
                    match best.map(|m| e.partial_cmp(&m)) {
                        None | Some(Some(Ordering::Less)) => {
                            best = Some(e);
                            hits.clear();
                            hits.push(b);
                        }
                        Some(Some(Ordering::Equal)) => hits.push(b),
                        _ => {}
                    }
                }
                (best.expect("chunk is non-empty"), hits)
            })
            .reduce_with(|(e1, mut h1), (e2, h2)| match e1.partial_cmp(&e2) {
                Some(Ordering::Less) => (e1, h1),
                Some(Ordering::Equal) => {
                    h1.extend(h2);
                    (e1, h1)
                }
                _ => (e2, h2),
            })
            .expect("at least one chunk");
        indices.sort_unstable();
        let mut configs: Vec<SpinConfig> = indices
            .into_iter()
            .map(|b| SpinConfig::from_index(b, self.n))
            .collect();
        configs.sort_by(|a, b| a.lex_cmp(b));
        Ok(GroundResult { energy, configs })
    }

    /// Decision form: is the ground energy zero within `tol`?
    pub fn has_zero_ground(&self, tol: S) -> Result<bool> {
        let ground = self.ground_states()?;
        Ok(ground.energy.abs() <= tol)
    }

    /// Converts every coefficient through `f64`.
    pub fn cast<T: Scalar>(&self) -> Result<IsingModel<T>> {
        let conv = |x: S| {
            T::from_f64(x.to_f64_lossy())
                .ok_or_else(|| Error::InvalidModel(format!("coefficient {x:?} not representable")))
        };
        IsingModel::from_parts(
            self.n,
            self.couplings
                .iter()
                .map(|(&k, &c)| conv(c).map(|c| (k, c)))
                .collect::<Result<Vec<_>>>()?,
            self.fields.iter().map(|&b| conv(b)).collect::<Result<_>>()?,
            conv(self.field_scale)?,
            conv(self.offset)?,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&IsingJson::from_model(self)).expect("plain data serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&IsingJson::from_model(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: IsingJson = serde_json::from_str(text)?;
        raw.into_model()
    }
}

/// On-disk form: `{"n", "A", "B", "C": [[j, k, c], ...], "offset"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsingJson {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub offset: f64,
}

impl IsingJson {
    pub fn from_model<S: Scalar>(model: &IsingModel<S>) -> Self {
        Self {
            n: model.n,
            a: model.field_scale.to_f64_lossy(),
            b: model.fields.iter().map(|x| x.to_f64_lossy()).collect(),
            c: model
                .couplings
                .iter()
                .map(|(&(j, k), c)| (j, k, c.to_f64_lossy()))
                .collect(),
            offset: model.offset.to_f64_lossy(),
        }
    }

    pub fn into_model<S: Scalar>(self) -> Result<IsingModel<S>> {
        let conv = |x: f64| {
            if !x.is_finite() {
                return Err(Error::InvalidModel(format!("non-finite coefficient {x}")));
            }
            S::from_f64(x).ok_or_else(|| Error::InvalidModel(format!("coefficient {x}")))
        };
        let mut model = IsingModel::new(self.n)?;
        if self.b.len() != self.n {
            return Err(Error::InvalidModel(format!(
                "B has {} entries for n = {}",
                self.b.len(),
                self.n
            )));
        }
        for (j, &b) in self.b.iter().enumerate() {
            model.fields[j] = conv(b)?;
        }
        model.field_scale = conv(self.a)?;
        model.offset = conv(self.offset)?;
        for (j, k, c) in self.c {
            if !(1 <= j && j < k && k <= self.n) {
                return Err(Error::InvalidModel(format!(
                    "coupling key ({j}, {k}) must satisfy 1 <= j < k <= {}",
                    self.n
                )));
            }
            model.add_coupling(j, k, conv(c)?)?;
        }
        Ok(model)
    }
}
