//! 3-CNF-SAT to Ising, such that the formula is satisfiable iff the ground
//! energy is exactly zero.
//!
//! Convention: `σ = +1` means "variable true". For a literal `l` write
//! `z = (1 − l)/2 ∈ {0, 1}`, the indicator that the literal is false. A clause
//! is violated iff the product of its `z`s is 1. Widths 1 and 2 use that
//! product directly. Width 3 uses one ancilla `w ∈ {0, 1}` with
//!
//! ```text
//! z1 z2 z3 = min_w [ w (1 − z1 − z2 − z3) + z1 z2 + z1 z3 + z2 z3 ]
//! ```
//!
//! and every value of the bracket is a nonnegative integer, so the summed
//! model takes nonnegative integer values and its ground energy equals the
//! minimum number of violated clauses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, CnfFormula};
use crate::error::{Error, Result};
use crate::ising::{IsingModel, SpinConfig};
use crate::scalar::Scalar;

/// Ising-convention terms of one clause penalty: the contribution to the
/// energy is `−Σ C σ_j σ_k − Σ B σ_j + offset` (field scale 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyTerms<S> {
    pub offset: S,
    pub fields: Vec<(usize, S)>,
    pub couplings: Vec<((usize, usize), S)>,
}

impl<S: Scalar> PenaltyTerms<S> {
    /// Penalty value with `spins[j-1]` holding spin `j`.
    pub fn evaluate(&self, spins: &[i8]) -> S {
        let s = |j: usize| S::from_i8(spins[j - 1]).expect("±1 fits");
        let mut e = self.offset;
        for &(j, b) in &self.fields {
            e = e - b * s(j);
        }
        for &((j, k), c) in &self.couplings {
            e = e - c * s(j) * s(k);
        }
        e
    }
}

/// Multilinear polynomial in the spins, at most quadratic.
#[derive(Debug, Clone)]
struct Quadratic<S> {
    constant: S,
    linear: BTreeMap<usize, S>,
    quadratic: BTreeMap<(usize, usize), S>,
}

/// `constant + coef · σ_spin`
#[derive(Debug, Clone, Copy)]
struct Affine<S> {
    constant: S,
    spin: Option<(usize, S)>,
}

impl<S: Scalar> Affine<S> {
    /// Indicator that `literal` (on spin `spin`) is false: `(1 − sign·σ)/2`.
    fn falsity(literal: i32, spin: usize) -> Self {
        let half = S::half();
        let coef = if literal > 0 { -half } else { half };
        Self {
            constant: half,
            spin: Some((spin, coef)),
        }
    }
}

impl<S: Scalar> Quadratic<S> {
    fn zero() -> Self {
        Self {
            constant: S::zero(),
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
        }
    }

    fn add_linear(&mut self, spin: usize, c: S) {
        let e = self.linear.entry(spin).or_insert_with(S::zero);
        *e = *e + c;
    }

    fn add_affine(&mut self, a: &Affine<S>, scale: S) {
        self.constant = self.constant + scale * a.constant;
        if let Some((j, c)) = a.spin {
            self.add_linear(j, scale * c);
        }
    }

    /// Adds `scale · a · b` for affine forms on distinct spins.
    fn add_product(&mut self, a: &Affine<S>, b: &Affine<S>, scale: S) {
        self.constant = self.constant + scale * a.constant * b.constant;
        if let Some((j, c)) = a.spin {
            self.add_linear(j, scale * c * b.constant);
        }
        if let Some((k, c)) = b.spin {
            self.add_linear(k, scale * c * a.constant);
        }
        if let (Some((j, cj)), Some((k, ck))) = (a.spin, b.spin) {
            debug_assert_ne!(j, k);
            let e = self
                .quadratic
                .entry((j.min(k), j.max(k)))
                .or_insert_with(S::zero);
            *e = *e + scale * cj * ck;
        }
    }

    fn into_terms(self) -> PenaltyTerms<S> {
        PenaltyTerms {
            offset: self.constant,
            fields: self
                .linear
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| (j, -c))
                .collect(),
            couplings: self
                .quadratic
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (k, -c))
                .collect(),
        }
    }
}

/// Penalty of one clause, with variable `v` living on spin `v`.
///
/// An empty clause can never be satisfied and yields the constant 1.
pub fn clause_penalty<S: Scalar>(literals: &[i32], ancilla: Option<usize>) -> Result<PenaltyTerms<S>> {
    if literals.len() > 3 {
        return Err(Error::ClauseTooWide(literals.len()));
    }
    for (i, &l) in literals.iter().enumerate() {
        if l == 0 {
            return Err(Error::InvalidArgument("literal 0".into()));
        }
        if literals[..i].iter().any(|&m| m.unsigned_abs() == l.unsigned_abs()) {
            return Err(Error::DuplicateVariable(l.unsigned_abs()));
        }
    }
    let z: Vec<Affine<S>> = literals
        .iter()
        .map(|&l| Affine::falsity(l, l.unsigned_abs() as usize))
        .collect();
    let mut poly = Quadratic::zero();
    match z.as_slice() {
        [] => poly.constant = S::one(),
        [z1] => poly.add_affine(z1, S::one()),
        [z1, z2] => poly.add_product(z1, z2, S::one()),
        [z1, z2, z3] => {
            let a = ancilla.ok_or_else(|| {
                Error::InvalidArgument("width-3 clause needs an ancilla spin".into())
            })?;
            if literals.iter().any(|l| l.unsigned_abs() as usize == a) {
                return Err(Error::InvalidArgument(format!(
                    "ancilla spin {a} collides with a clause variable"
                )));
            }
            // w = (1 − σ_a)/2, so the ancilla is "on" at σ_a = −1
            let w = Affine {
                constant: S::half(),
                spin: Some((a, -S::half())),
            };
            let one = S::one();
            poly.add_affine(&w, one);
            for zi in [z1, z2, z3] {
                poly.add_product(&w, zi, -one);
            }
            poly.add_product(z1, z2, one);
            poly.add_product(z1, z3, one);
            poly.add_product(z2, z3, one);
        }
        _ => unreachable!(),
    }
    Ok(poly.into_terms())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinRole {
    /// 1-based variable index.
    Variable(usize),
    /// 0-based clause index.
    Ancilla(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionMap {
    pub formula_vars: usize,
    pub total_spins: usize,
    /// Ancilla spin (1-based) per clause; `None` for clauses narrower than 3.
    pub ancilla_of_clause: Vec<Option<usize>>,
    #[serde(skip_serializing, default)]
    pub var_of_spin: Vec<SpinRole>,
}

impl ReductionMap {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut map: ReductionMap = serde_json::from_str(text)?;
        map.rebuild_roles()?;
        Ok(map)
    }

    fn rebuild_roles(&mut self) -> Result<()> {
        let mut roles: Vec<Option<SpinRole>> = (1..=self.total_spins)
            .map(|j| (j <= self.formula_vars).then_some(SpinRole::Variable(j)))
            .collect();
        for (c, a) in self.ancilla_of_clause.iter().enumerate() {
            if let Some(a) = *a {
                match roles.get_mut(a.wrapping_sub(1)) {
                    Some(slot @ None) => *slot = Some(SpinRole::Ancilla(c)),
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "ancilla spin {a} of clause {c} is invalid"
                        )))
                    }
                }
            }
        }
        self.var_of_spin = roles
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument("unassigned spin in reduction map".into()))?;
        Ok(())
    }
}

/// Builds the Ising model whose zero-energy ground states are exactly the
/// satisfying assignments (extended by optimal ancillas).
pub fn reduce_3sat<S: Scalar>(formula: &CnfFormula) -> Result<(IsingModel<S>, ReductionMap)> {
    if formula.max_clause_width() > 3 {
        return Err(Error::ClauseTooWide(formula.max_clause_width()));
    }
    let n_vars = formula.num_vars();
    let mut ancilla_of_clause = Vec::with_capacity(formula.num_clauses());
    let mut roles: Vec<SpinRole> = (1..=n_vars).map(SpinRole::Variable).collect();
    for (c, clause) in formula.clauses().iter().enumerate() {
        if clause.len() == 3 {
            roles.push(SpinRole::Ancilla(c));
            ancilla_of_clause.push(Some(roles.len()));
        } else {
            ancilla_of_clause.push(None);
        }
    }
    let total_spins = roles.len();
    let mut model = IsingModel::<S>::new(total_spins)?;
    for (clause, ancilla) in formula.clauses().iter().zip(&ancilla_of_clause) {
        let terms = clause_penalty::<S>(clause, *ancilla)?;
        model.add_offset(terms.offset);
        for (j, b) in terms.fields {
            model.add_field(j, b)?;
        }
        for ((j, k), c) in terms.couplings {
            model.add_coupling(j, k, c)?;
        }
    }
    model.prune_zero_couplings();
    Ok((
        model,
        ReductionMap {
            formula_vars: n_vars,
            total_spins,
            ancilla_of_clause,
            var_of_spin: roles,
        },
    ))
}

/// Reads variable values off the first `formula_vars` spins.
pub fn decode(config: &SpinConfig, map: &ReductionMap) -> Result<Assignment> {
    if config.len() != map.total_spins {
        return Err(Error::LengthMismatch {
            expected: map.total_spins,
            got: config.len(),
        });
    }
    Ok(Assignment::new(
        config.spins()[..map.formula_vars]
            .iter()
            .map(|&s| s == 1)
            .collect(),
    ))
}
