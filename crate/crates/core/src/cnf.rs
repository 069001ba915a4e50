//! k-CNF formulas: DIMACS parsing, evaluation, and exhaustive enumeration.
//!
//! Assignments are enumerated as integers with variable 1 in the least
//! significant bit, starting from all-false. That order is what makes the
//! `assignments_checked` count of a first-witness search reproducible.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default enumeration bound for [`brute_force_sat`] and [`count_models`].
pub const DEFAULT_MAX_VARS: usize = 30;

const CHUNK_BITS: u32 = 16;

/// Non-fatal conditions noticed while building a formula.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfWarnings {
    pub tautologies_dropped: usize,
    pub duplicate_literals_removed: usize,
    /// `(declared, found)` when the DIMACS header disagrees with the body.
    pub clause_count_mismatch: Option<(usize, usize)>,
}

impl CnfWarnings {
    pub fn is_empty(&self) -> bool {
        *self == CnfWarnings::default()
    }
}

#[derive(Debug, Clone)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
    max_clause_width: usize,
    warnings: CnfWarnings,
}

/// Equality ignores parse warnings: two formulas are equal when they
/// constrain the same variables with the same clause list.
impl PartialEq for CnfFormula {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.clauses == other.clauses
    }
}

impl Eq for CnfFormula {}

#[derive(Serialize, Deserialize)]
struct CnfJson {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    /// Builds a formula, dropping tautological clauses and repeated literals.
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        let mut warnings = CnfWarnings::default();
        let mut kept = Vec::with_capacity(clauses.len());
        for clause in clauses {
            let mut lits: Vec<i32> = Vec::with_capacity(clause.len());
            let mut tautology = false;
            for lit in clause {
                let var = lit.unsigned_abs() as usize;
                if lit == 0 || var > num_vars {
                    return Err(Error::VariableOutOfRange {
                        var: var as u64,
                        num_vars,
                    });
                }
                if lits.contains(&lit) {
                    warnings.duplicate_literals_removed += 1;
                    continue;
                }
                if lits.contains(&-lit) {
                    tautology = true;
                }
                lits.push(lit);
            }
            if tautology {
                warnings.tautologies_dropped += 1;
            } else {
                kept.push(lits);
            }
        }
        let max_clause_width = kept.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            num_vars,
            clauses: kept,
            max_clause_width,
            warnings,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn max_clause_width(&self) -> usize {
        self.max_clause_width
    }

    pub fn warnings(&self) -> &CnfWarnings {
        &self.warnings
    }

    /// Writes DIMACS text that [`parse_dimacs`] reads back to an equal formula.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                let _ = write!(out, "{lit} ");
            }
            out.push_str("0\n");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CnfJson {
            num_vars: self.num_vars,
            clauses: self.clauses.clone(),
        })
        .expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CnfJson = serde_json::from_str(text)?;
        Self::new(raw.num_vars, raw.clauses)
    }

    /// `true` iff every clause has a satisfied literal.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool> {
        if assignment.len() != self.num_vars {
            return Err(Error::LengthMismatch {
                expected: self.num_vars,
                got: assignment.len(),
            });
        }
        Ok(self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|&lit| assignment.values[lit.unsigned_abs() as usize - 1] == (lit > 0))
        }))
    }
}

/// Truth values for variables `1..=n`, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    pub values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Self { values }
    }

    /// Decodes an enumeration index: bit `v-1` holds variable `v`.
    pub fn from_index(index: u64, num_vars: usize) -> Self {
        Self {
            values: (0..num_vars).map(|v| (index >> v) & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    FirstWitness,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatResult {
    pub satisfiable: bool,
    pub witness: Option<Assignment>,
    pub assignments_checked: u64,
    /// Number of models; only known in exhaustive mode.
    pub model_count: Option<u64>,
    pub wall_time_s: f64,
}

/// Parses DIMACS CNF text.
///
/// Comment lines start with `c`, a `%` line ends the input (SATLIB files), and
/// clauses may span lines. A clause count that disagrees with the header is
/// recorded in [`CnfWarnings::clause_count_mismatch`] rather than rejected.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "duplicate header".into(),
                });
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(Error::Parse {
                line: line_no,
                msg: "clause before `p cnf` header".into(),
            });
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad literal `{tok}`"),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            let var = lit.unsigned_abs();
            if var as usize > num_vars || var > i32::MAX as u64 {
                return Err(Error::VariableOutOfRange { var, num_vars });
            }
            current.push(lit as i32);
        }
    }

    let Some((num_vars, declared)) = header else {
        return Err(Error::Parse {
            line: last_line,
            msg: "missing `p cnf` header".into(),
        });
    };
    if !current.is_empty() {
        return Err(Error::Parse {
            line: last_line,
            msg: "last clause is missing its terminating 0".into(),
        });
    }
    let found = clauses.len();
    let mut formula = CnfFormula::new(num_vars, clauses)?;
    if found != declared {
        formula.warnings.clause_count_mismatch = Some((declared, found));
    }
    Ok(formula)
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let bad = |msg: &str| Error::Parse {
        line: line_no,
        msg: format!("malformed header `{line}`: {msg}"),
    };
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "p" || toks[1] != "cnf" {
        return Err(bad("expected `p cnf <vars> <clauses>`"));
    }
    let vars = toks[2].parse().map_err(|_| bad("variable count"))?;
    let clauses = toks[3].parse().map_err(|_| bad("clause count"))?;
    if vars == 0 {
        return Err(bad("variable count must be positive"));
    }
    Ok((vars, clauses))
}

/// Bitmask form of a formula for fast enumeration (at most 64 variables).
struct Masks {
    pos: Vec<u64>,
    neg: Vec<u64>,
}

impl Masks {
    fn new(formula: &CnfFormula) -> Self {
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for clause in &formula.clauses {
            let (mut p, mut n) = (0u64, 0u64);
            for &lit in clause {
                let bit = 1u64 << (lit.unsigned_abs() - 1);
                if lit > 0 {
                    p |= bit;
                } else {
                    n |= bit;
                }
            }
            pos.push(p);
            neg.push(n);
        }
        Self { pos, neg }
    }

    #[inline]
    fn satisfies(&self, a: u64) -> bool {
        self.pos
            .iter()
            .zip(&self.neg)
            .all(|(&p, &n)| (a & p) != 0 || (!a & n) != 0)
    }
}

fn check_limit(formula: &CnfFormula, max_vars: usize) -> Result<()> {
    if formula.num_vars > max_vars.min(63) {
        return Err(Error::SizeLimit {
            what: "num_vars",
            value: formula.num_vars,
            limit: max_vars.min(63),
        });
    }
    Ok(())
}

/// Counts models and finds the lowest satisfying index, in parallel chunks.
fn enumerate_all(formula: &CnfFormula) -> (u64, Option<u64>) {
    let masks = Masks::new(formula);
    let total = 1u64 << formula.num_vars;
    let chunk = 1u64 << CHUNK_BITS.min(formula.num_vars as u32);
    let chunks = total / chunk;
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut count = 0u64;
            let mut first = None;
            for a in c * chunk..(c + 1) * chunk {
                if masks.satisfies(a) {
                    count += 1;
                    first.get_or_insert(a);
                }
            }
            (count, first)
        })
        .reduce(
            || (0, None),
            |(c1, f1), (c2, f2)| {
                let first = match (f1, f2) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
                (c1 + c2, first)
            },
        )
}

/// The trivial exact algorithm: try assignments in enumeration order.
pub fn brute_force_sat(formula: &CnfFormula, mode: SolveMode) -> Result<SatResult> {
    brute_force_sat_with_limit(formula, mode, DEFAULT_MAX_VARS)
}

pub fn brute_force_sat_with_limit(
    formula: &CnfFormula,
    mode: SolveMode,
    max_vars: usize,
) -> Result<SatResult> {
    check_limit(formula, max_vars)?;
    let start = Instant::now();
    let n = formula.num_vars;
    let total = 1u64 << n;
    let (checked, witness, count) = match mode {
        SolveMode::FirstWitness => {
            let masks = Masks::new(formula);
            let hit = (0..total).find(|&a| masks.satisfies(a));
            let checked = hit.map_or(total, |a| a + 1);
            (checked, hit, None)
        }
        SolveMode::Exhaustive => {
            let (count, first) = enumerate_all(formula);
            (total, first, Some(count))
        }
    };
    Ok(SatResult {
        satisfiable: witness.is_some(),
        witness: witness.map(|a| Assignment::from_index(a, n)),
        assignments_checked: checked,
        model_count: count,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Exact number of satisfying assignments.
pub fn count_models(formula: &CnfFormula) -> Result<u64> {
    check_limit(formula, DEFAULT_MAX_VARS)?;
    Ok(enumerate_all(formula).0)
}

/// Uniform random k-CNF: each clause picks `k` distinct variables and
/// independent signs.
pub fn random_kcnf<R: Rng + ?Sized>(
    num_vars: usize,
    num_clauses: usize,
    k: usize,
    rng: &mut R,
) -> Result<CnfFormula> {
    if k == 0 || k > num_vars {
        return Err(Error::InvalidArgument(format!(
            "clause width {k} needs 1 <= k <= num_vars = {num_vars}"
        )));
    }
    let clauses = (0..num_clauses)
        .map(|_| {
            let mut vars: Vec<usize> = sample(rng, num_vars, k).into_vec();
            vars.sort_unstable();
            vars.into_iter()
                .map(|v| {
                    let lit = v as i32 + 1;
                    if rng.gen_bool(0.5) {
                        lit
                    } else {
                        -lit
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula::new(num_vars, clauses)
}
