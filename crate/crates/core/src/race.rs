//! The experimenter against the theoretician.
//!
//! The theoretician's cost is the exhaustive brute-force solve, timed on the
//! wall clock. The experimenter's cost is the adiabatic running time
//! `c / g_min²` in natural units, turned into seconds by a configurable
//! factor. The race is won by the theoretician when `0 < T_wall < t_obs`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cnf::{brute_force_sat, random_kcnf, CnfFormula, SolveMode};
use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::ising::MAX_GROUND_SPINS;
use crate::quantum::{
    estimate_adiabatic_time, gap_profile, EigenConfig, EigenMethod, DEFAULT_ADIABATIC_C, MAX_QUBITS,
};
use crate::reduction::reduce_3sat;

pub const MAX_GAP_SPINS: usize = MAX_QUBITS;
pub const DEFAULT_GAP_SAMPLES: usize = 21;
pub const DEFAULT_CLAUSE_RATIO: f64 = 4.26;
pub const MIN_SWEEP_VARS: usize = 4;
pub const MAX_SWEEP_VARS: usize = 24;
pub const MAX_SWEEP_VARS_WITH_GAP: usize = 14;
pub const SWEEP_CSV_HEADER: &str = "n_vars,instances,mean_ops,max_ops,mean_min_gap,mean_wall_s";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaceConfig {
    pub c: f64,
    /// Deadline in seconds. When absent the experiment's own duration is used.
    pub observation_time: Option<f64>,
    pub gap_samples: usize,
    /// Seconds per natural time unit when `t_adiabatic` becomes a deadline.
    pub seconds_per_unit: f64,
    pub eigen_tol: f64,
}

impl Default for RaceConfig {
    fn default() -> Self {
        Self {
            c: DEFAULT_ADIABATIC_C,
            observation_time: None,
            gap_samples: DEFAULT_GAP_SAMPLES,
            seconds_per_unit: 1.0,
            eigen_tol: EigenConfig::<f64>::default().tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Undetermined,
}

/// `0 < wall < t_obs`; undetermined without a usable deadline.
pub fn verdict(wall_s: f64, observation_time: Option<f64>) -> Verdict {
    match observation_time {
        Some(t) if !t.is_nan() && !wall_s.is_nan() => {
            if 0.0 < wall_s && wall_s < t {
                Verdict::Satisfied
            } else {
                Verdict::Violated
            }
        }
        _ => Verdict::Undetermined,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadlineSource {
    User,
    AdiabaticTime,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceReport {
    pub instance_id: String,
    pub n_vars: usize,
    pub n_clauses: usize,
    pub n_spins: usize,
    pub brute_force_ops: u64,
    pub brute_force_wall_s: f64,
    pub satisfiable: bool,
    pub model_count: u64,
    pub zero_energy_ground: Option<bool>,
    pub min_gap: Option<f64>,
    pub argmin_s: Option<f64>,
    pub t_adiabatic: Option<f64>,
    pub gap_note: Option<String>,
    pub observation_time: Option<f64>,
    pub observation_source: DeadlineSource,
    pub seconds_per_unit: f64,
    pub verdict: Verdict,
    pub determinism_satisfied: Option<bool>,
}

impl RaceReport {
    /// Re-evaluates the verdict against another deadline.
    pub fn with_observation_time(&self, observation_time: Option<f64>) -> Self {
        let mut out = self.clone();
        out.observation_time = observation_time;
        out.observation_source = if observation_time.is_some() {
            DeadlineSource::User
        } else {
            DeadlineSource::Unavailable
        };
        out.verdict = verdict(out.brute_force_wall_s, observation_time);
        out.determinism_satisfied = match out.verdict {
            Verdict::Undetermined => None,
            v => Some(v == Verdict::Satisfied),
        };
        out
    }
}

struct GapOutcome {
    min_gap: Option<f64>,
    argmin_s: Option<f64>,
    t_adiabatic: Option<f64>,
    note: Option<String>,
}

fn gap_outcome(formula: &CnfFormula, n_spins: usize, config: &RaceConfig) -> Result<GapOutcome> {
    let skipped = |note: String| GapOutcome {
        min_gap: None,
        argmin_s: None,
        t_adiabatic: None,
        note: Some(note),
    };
    if n_spins == 0 {
        return Ok(skipped("no spins to evolve".into()));
    }
    if n_spins > MAX_GAP_SPINS {
        return Ok(skipped(format!(
            "{n_spins} spins exceeds the {MAX_GAP_SPINS}-spin state-vector limit"
        )));
    }
    let (model, _) = reduce_3sat::<f64>(formula)?;
    let cfg = EigenConfig {
        tol: config.eigen_tol,
        ..EigenConfig::default()
    };
    let profile = match gap_profile::<f64, f64>(&model, config.gap_samples, EigenMethod::Lanczos, &cfg) {
        Ok(p) => p,
        Err(e) => return Ok(skipped(format!("eigensolver failed: {e}"))),
    };
    let (min_gap, argmin_s) = (Some(profile.min_gap), Some(profile.argmin_s));
    Ok(match estimate_adiabatic_time(&profile, config.c) {
        Ok(t) => GapOutcome {
            min_gap,
            argmin_s,
            t_adiabatic: Some(t),
            note: None,
        },
        Err(e) => GapOutcome {
            min_gap,
            argmin_s,
            t_adiabatic: None,
            note: Some(e.to_string()),
        },
    })
}

pub fn run_race(formula: &CnfFormula, instance_id: &str, config: &RaceConfig) -> Result<RaceReport> {
    if config.gap_samples < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 gap samples, got {}",
            config.gap_samples
        )));
    }
    if !(config.c > 0.0) || !(config.seconds_per_unit > 0.0) {
        return Err(Error::InvalidArgument(
            "c and seconds_per_unit must be positive".into(),
        ));
    }
    let (model, map) = reduce_3sat::<f64>(formula)?;
    let n_spins = map.total_spins;
    let zero_energy_ground = (n_spins <= MAX_GROUND_SPINS)
        .then(|| model.has_zero_ground(1e-9))
        .transpose()?;
    let gap = gap_outcome(formula, n_spins, config)?;
    let sat = brute_force_sat(formula, SolveMode::Exhaustive)?;

    let (observation_time, observation_source) = match (config.observation_time, gap.t_adiabatic) {
        (Some(t), _) => (Some(t), DeadlineSource::User),
        (None, Some(t)) => (Some(t * config.seconds_per_unit), DeadlineSource::AdiabaticTime),
        (None, None) => (None, DeadlineSource::Unavailable),
    };
    let v = verdict(sat.wall_time_s, observation_time);
    Ok(RaceReport {
        instance_id: instance_id.to_string(),
        n_vars: formula.num_vars(),
        n_clauses: formula.num_clauses(),
        n_spins,
        brute_force_ops: sat.assignments_checked,
        brute_force_wall_s: sat.wall_time_s,
        satisfiable: sat.satisfiable,
        model_count: sat.model_count.unwrap_or(0),
        zero_energy_ground,
        min_gap: gap.min_gap,
        argmin_s: gap.argmin_s,
        t_adiabatic: gap.t_adiabatic,
        gap_note: gap.note,
        observation_time,
        observation_source,
        seconds_per_unit: config.seconds_per_unit,
        verdict: v,
        determinism_satisfied: match v {
            Verdict::Undetermined => None,
            v => Some(v == Verdict::Satisfied),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub instances_per_n: usize,
    pub clause_ratio: f64,
    pub seed: u64,
    pub with_gap: bool,
    pub gap_samples: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_min: MIN_SWEEP_VARS,
            n_max: 12,
            instances_per_n: 5,
            clause_ratio: DEFAULT_CLAUSE_RATIO,
            seed: 0,
            with_gap: false,
            gap_samples: 11,
        }
    }
}

impl SweepConfig {
    pub fn clauses_for(&self, n: usize) -> usize {
        (self.clause_ratio * n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let cap = if self.with_gap {
            MAX_SWEEP_VARS_WITH_GAP
        } else {
            MAX_SWEEP_VARS
        };
        if self.n_min < MIN_SWEEP_VARS || self.n_max > cap || self.n_min > self.n_max {
            return Err(Error::InvalidArgument(format!(
                "need {MIN_SWEEP_VARS} <= n_min <= n_max <= {cap}, got {}..={}",
                self.n_min, self.n_max
            )));
        }
        if self.instances_per_n == 0 {
            return Err(Error::InvalidArgument("instances_per_n must be positive".into()));
        }
        if !(self.clause_ratio > 0.0) || !self.clause_ratio.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "clause_ratio must be positive, got {}",
                self.clause_ratio
            )));
        }
        if self.with_gap {
            let spins = self.n_max + self.clauses_for(self.n_max);
            if spins > MAX_GAP_SPINS {
                return Err(Error::SizeLimit {
                    what: "spins in gap-enabled sweep",
                    value: spins,
                    limit: MAX_GAP_SPINS,
                });
            }
            if self.gap_samples < 3 {
                return Err(Error::InvalidArgument("need at least 3 gap samples".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_vars: usize,
    pub instances: usize,
    pub mean_ops: f64,
    pub max_ops: u64,
    pub mean_min_gap: Option<f64>,
    pub mean_wall_s: f64,
}

struct InstanceCost {
    ops: u64,
    wall_s: f64,
    min_gap: Option<f64>,
}

fn instance_cost(formula: &CnfFormula, config: &SweepConfig) -> Result<InstanceCost> {
    let sat = brute_force_sat(formula, SolveMode::Exhaustive)?;
    let min_gap = if config.with_gap {
        let (model, _) = reduce_3sat::<f64>(formula)?;
        let profile = gap_profile::<f64, f64>(
            &model,
            config.gap_samples,
            EigenMethod::Lanczos,
            &EigenConfig::default(),
        )?;
        Some(profile.min_gap)
    } else {
        None
    };
    Ok(InstanceCost {
        ops: sat.assignments_checked,
        wall_s: sat.wall_time_s,
        min_gap,
    })
}

/// Random 3-CNF instances with `round(ratio·n)` clauses for each `n`. All
/// instances are drawn from one stream seeded by `config.seed` before any is
/// solved.
pub fn scaling_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut batches = Vec::new();
    for n in config.n_min..=config.n_max {
        let m = config.clauses_for(n);
        let batch = (0..config.instances_per_n)
            .map(|_| random_kcnf(n, m, 3, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        batches.push((n, batch));
    }
    batches
        .into_iter()
        .map(|(n, batch)| {
            let costs = batch
                .par_iter()
                .map(|f| instance_cost(f, config))
                .collect::<Result<Vec<_>>>()?;
            let count = costs.len() as f64;
            let gaps: Vec<f64> = costs.iter().filter_map(|c| c.min_gap).collect();
            Ok(SweepRow {
                n_vars: n,
                instances: costs.len(),
                mean_ops: costs.iter().map(|c| c.ops as f64).sum::<f64>() / count,
                max_ops: costs.iter().map(|c| c.ops).max().unwrap_or(0),
                mean_min_gap: (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64),
                mean_wall_s: costs.iter().map(|c| c.wall_s).sum::<f64>() / count,
            })
        })
        .collect()
}

/// CSV with 12 significant digits. A missing gap is an empty cell.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n_vars,
            r.instances,
            fmt_sig(r.mean_ops, 12),
            r.max_ops,
            r.mean_min_gap.map(|g| fmt_sig(g, 12)).unwrap_or_default(),
            fmt_sig(r.mean_wall_s, 12)
        ));
    }
    out
}

/// Least-squares slope of `log2(max_ops)` against `n_vars`.
pub fn log2_ops_slope(rows: &[SweepRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.n_vars as f64, (r.max_ops as f64).log2()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
