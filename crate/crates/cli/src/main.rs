mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adiabench::cnf::{brute_force_sat, parse_dimacs, CnfFormula, SolveMode};
use adiabench::decohere::{trajectory_csv, DephasingModel};
use adiabench::ising::IsingModel;
use adiabench::quantum::{
    adiabatic_run, default_steps, estimate_adiabatic_time, gap_profile, EigenConfig, EigenMethod,
    GapProfile, PropagatorConfig, DEFAULT_ADIABATIC_C,
};
use adiabench::race::{
    run_race, scaling_sweep, sweep_csv, RaceConfig, SweepConfig, DEFAULT_CLAUSE_RATIO, DEFAULT_GAP_SAMPLES,
};
use adiabench::reduction::reduce_3sat;
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use output::{emit_data, emit_json, map_path, read_text, with_config, write_atomic};

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;

/// SAT instances, their Ising encodings, and simulated adiabatic evolution.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "adiabench", version)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file. Reports go to standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Eigensolver residual tolerance and zero-energy tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    FirstWitness,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    Lanczos,
    Dense,
}

impl From<Method> for EigenMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Lanczos => EigenMethod::Lanczos,
            Method::Dense => EigenMethod::Dense,
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
enum Command {
    /// Brute-force a DIMACS file. Exits 10 when satisfiable, 20 otherwise.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::FirstWitness)]
        mode: Mode,
    },
    /// Encode a DIMACS file as an Ising model plus a spin map.
    Reduce { input: PathBuf },
    /// Exact ground states of an Ising JSON model.
    Ground {
        input: PathBuf,
        /// Largest number of ground configurations listed.
        #[arg(long, default_value_t = 64)]
        max_configs: usize,
    },
    /// Spectral gap along the interpolation, as CSV.
    Gap {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GAP_SAMPLES)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Method::Lanczos)]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_ADIABATIC_C)]
        c: f64,
    },
    /// Adiabatic evolution from the transverse-field ground state.
    Evolve {
        input: PathBuf,
        /// Total time. Estimated as c / g_min² when omitted; 0 is the sudden limit.
        #[arg(long)]
        t: Option<f64>,
        /// Propagator steps. Defaults to max(1000, ⌈100·T⌉).
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_GAP_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_ADIABATIC_C)]
        c: f64,
    },
    /// Brute-force cost against the adiabatic running time for one instance.
    Race {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ADIABATIC_C)]
        c: f64,
        /// Deadline in seconds. Defaults to T_adiabatic scaled by --seconds-per-unit.
        #[arg(long)]
        observation_time: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GAP_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 1.0)]
        seconds_per_unit: f64,
    },
    /// Brute-force cost over seeded random 3-CNF batches, as CSV.
    Sweep {
        #[arg(long, default_value_t = 4)]
        n_min: usize,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 5)]
        instances: usize,
        #[arg(long, default_value_t = DEFAULT_CLAUSE_RATIO)]
        clause_ratio: f64,
        /// Also record the mean minimum gap per row.
        #[arg(long)]
        gap: bool,
        #[arg(long, default_value_t = 11)]
        samples: usize,
    },
    /// Dephasing of a collective register coupled to an environment, as CSV.
    Decohere {
        #[arg(long, default_value_t = 2)]
        nc: usize,
        #[arg(long, default_value_t = 4)]
        ne: usize,
        #[arg(long, default_value_t = 5.0)]
        t: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
}

fn read_cnf(path: &Path) -> Result<CnfFormula> {
    let text = read_text(path)?;
    let formula = parse_dimacs(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some((declared, found)) = formula.warnings().clause_count_mismatch {
        eprintln!("warning: header declares {declared} clauses, found {found}");
    }
    Ok(formula)
}

fn read_ising(path: &Path) -> Result<IsingModel<f64>> {
    let text = read_text(path)?;
    IsingModel::from_json(&text).with_context(|| format!("in {}", path.display()))
}

fn eigen_config(cli: &Cli) -> EigenConfig<f64> {
    EigenConfig {
        tol: cli.tol,
        ..EigenConfig::default()
    }
}

fn profile(cli: &Cli, model: &IsingModel<f64>, samples: usize, method: EigenMethod) -> Result<GapProfile<f64>> {
    Ok(gap_profile::<f64, f64>(model, samples, method, &eigen_config(cli))?)
}

fn config_of(cli: &Cli) -> Result<Value> {
    Ok(serde_json::to_value(cli)?)
}

fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn cmd_solve(cli: &Cli, input: &Path, mode: Mode) -> Result<u8> {
    let formula = read_cnf(input)?;
    let mode = match mode {
        Mode::FirstWitness => SolveMode::FirstWitness,
        Mode::Exhaustive => SolveMode::Exhaustive,
    };
    let result = brute_force_sat(&formula, mode)?;
    println!("{}", serde_json::to_string(&result)?);
    if let Some(out) = &cli.out {
        write_atomic(out, &with_config(&result, &config_of(cli)?)?)?;
    }
    Ok(if result.satisfiable { EXIT_SAT } else { EXIT_UNSAT })
}

fn cmd_reduce(cli: &Cli, input: &Path) -> Result<u8> {
    let formula = read_cnf(input)?;
    let (model, map) = reduce_3sat::<f64>(&formula)?;
    let out = cli.out.clone().unwrap_or_else(|| {
        let stem = instance_id(input);
        input.with_file_name(format!("{stem}.ising.json"))
    });
    let config = config_of(cli)?;
    emit_data(Some(&out), &(model.to_json_pretty() + "\n"), &config)?;
    write_atomic(&map_path(&out), &(map.to_json() + "\n"))?;
    eprintln!(
        "{} spins ({} variables, {} ancillas) -> {}",
        map.total_spins,
        map.formula_vars,
        map.total_spins - map.formula_vars,
        out.display()
    );
    Ok(0)
}

#[derive(Serialize)]
struct GroundReport {
    n_spins: usize,
    energy: f64,
    degeneracy: usize,
    zero_energy: bool,
    configs: Vec<Vec<i8>>,
    configs_truncated: bool,
}

fn cmd_ground(cli: &Cli, input: &Path, max_configs: usize) -> Result<u8> {
    let model = read_ising(input)?;
    let ground = model.ground_states()?;
    let report = GroundReport {
        n_spins: model.n(),
        energy: ground.energy,
        degeneracy: ground.degeneracy(),
        zero_energy: ground.energy.abs() <= cli.tol.max(f64::EPSILON),
        configs: ground
            .configs
            .iter()
            .take(max_configs)
            .map(|c| c.spins().to_vec())
            .collect(),
        configs_truncated: ground.degeneracy() > max_configs,
    };
    emit_json(cli.out.as_deref(), &with_config(&report, &config_of(cli)?)?)?;
    Ok(0)
}

fn cmd_gap(cli: &Cli, input: &Path, samples: usize, method: Method, c: f64) -> Result<u8> {
    let model = read_ising(input)?;
    let p = profile(cli, &model, samples, method.into())?;
    emit_data(cli.out.as_deref(), &p.to_csv(), &config_of(cli)?)?;
    let t = estimate_adiabatic_time(&p, c)
        .map(|t| t.to_string())
        .unwrap_or_else(|e| format!("undefined ({e})"));
    eprintln!("min gap {} at s = {}; T = {}", p.min_gap, p.argmin_s, t);
    if !p.failed.is_empty() {
        eprintln!("warning: {} samples did not converge: {:?}", p.failed.len(), p.failed);
    }
    Ok(0)
}

#[derive(Serialize)]
struct EvolveReport {
    t_adiabatic: f64,
    steps: usize,
    success_prob: f64,
    norm_drift: f64,
    degeneracy: usize,
    n_spins: usize,
    min_gap: Option<f64>,
    argmin_s: Option<f64>,
}

fn cmd_evolve(cli: &Cli, input: &Path, t: Option<f64>, steps: Option<usize>, samples: usize, c: f64) -> Result<u8> {
    let model = read_ising(input)?;
    let (t, gap) = match t {
        Some(t) => (t, None),
        None => {
            let p = profile(cli, &model, samples, EigenMethod::Lanczos)?;
            (estimate_adiabatic_time(&p, c)?, Some((p.min_gap, p.argmin_s)))
        }
    };
    let steps = steps.unwrap_or_else(|| default_steps(t));
    if steps == 0 {
        bail!("--steps must be at least 1");
    }
    let result = adiabatic_run(&model, t, steps, &PropagatorConfig::default())?;
    let report = EvolveReport {
        t_adiabatic: t,
        steps,
        success_prob: result.success_prob,
        norm_drift: result.norm_drift,
        degeneracy: result.degeneracy,
        n_spins: model.n(),
        min_gap: gap.map(|g| g.0),
        argmin_s: gap.map(|g| g.1),
    };
    let mut effective = cli.clone();
    effective.command = Command::Evolve {
        input: input.to_path_buf(),
        t: Some(t),
        steps: Some(steps),
        samples,
        c,
    };
    emit_json(cli.out.as_deref(), &with_config(&report, &config_of(&effective)?)?)?;
    Ok(0)
}

fn cmd_race(cli: &Cli, input: &Path, config: RaceConfig) -> Result<u8> {
    let formula = read_cnf(input)?;
    let report = run_race(&formula, &instance_id(input), &config)?;
    let mut echo = config_of(cli)?;
    echo["race"] = serde_json::to_value(config)?;
    emit_json(cli.out.as_deref(), &with_config(&report, &echo)?)?;
    Ok(0)
}

fn cmd_sweep(cli: &Cli, config: SweepConfig) -> Result<u8> {
    let rows = scaling_sweep(&config)?;
    let mut echo = config_of(cli)?;
    echo["sweep"] = serde_json::to_value(config)?;
    emit_data(cli.out.as_deref(), &sweep_csv(&rows), &echo)?;
    Ok(0)
}

fn cmd_decohere(cli: &Cli, nc: usize, ne: usize, t: f64, steps: usize) -> Result<u8> {
    let model = DephasingModel::<f64>::new(nc, ne, cli.seed)?;
    let rows = model.run(t, steps)?;
    let mut echo = config_of(cli)?;
    echo["couplings"] = json!(model.couplings());
    emit_data(cli.out.as_deref(), &trajectory_csv(&rows), &echo)?;
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    match &cli.command {
        Command::Solve { input, mode } => cmd_solve(cli, input, *mode),
        Command::Reduce { input } => cmd_reduce(cli, input),
        Command::Ground { input, max_configs } => cmd_ground(cli, input, *max_configs),
        Command::Gap {
            input,
            samples,
            method,
            c,
        } => cmd_gap(cli, input, *samples, *method, *c),
        Command::Evolve {
            input,
            t,
            steps,
            samples,
            c,
        } => cmd_evolve(cli, input, *t, *steps, *samples, *c),
        Command::Race {
            input,
            c,
            observation_time,
            samples,
            seconds_per_unit,
        } => cmd_race(
            cli,
            input,
            RaceConfig {
                c: *c,
                observation_time: *observation_time,
                gap_samples: *samples,
                seconds_per_unit: *seconds_per_unit,
                eigen_tol: cli.tol,
            },
        ),
        Command::Sweep {
            n_min,
            n_max,
            instances,
            clause_ratio,
            gap,
            samples,
        } => cmd_sweep(
            cli,
            SweepConfig {
                n_min: *n_min,
                n_max: *n_max,
                instances_per_n: *instances,
                clause_ratio: *clause_ratio,
                seed: cli.seed,
                with_gap: *gap,
                gap_samples: *samples,
            },
        ),
        Command::Decohere { nc, ne, t, steps } => cmd_decohere(cli, *nc, *ne, *t, *steps),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
