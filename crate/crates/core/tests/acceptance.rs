//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line;
//! the process exits nonzero if any fails. Pass criterion numbers as
//! arguments to run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use adiabench::cnf::{brute_force_sat, count_models, CnfFormula, SolveMode};
use adiabench::decohere::{env_gram, partial_trace, DephasingModel, Partition};
use adiabench::ising::IsingModel;
use adiabench::quantum::{
    adiabatic_run, build_final, build_initial, default_steps, estimate_adiabatic_time, gap_profile,
    interpolate, lowest_two, lowest_two_dense, propagate_constant, EigenConfig, EigenMethod,
    HamiltonianSpec, PropagatorConfig, QuantumState,
};
use adiabench::race::{log2_ops_slope, run_race, scaling_sweep, sweep_csv, RaceConfig, SweepConfig};
use adiabench::reduction::{decode, reduce_3sat};
use adiabench::Rational;
use num_complex::Complex;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C64 = Complex<f64>;
type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------------------
// independent oracles

/// Every clause over variables `1..=n` of width 1 to 3 with distinct variables.
fn all_clauses(n: usize) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let vars: Vec<i32> = (0..n as i32).filter(|v| mask >> v & 1 == 1).map(|v| v + 1).collect();
        if vars.len() > 3 {
            continue;
        }
        for signs in 0u32..(1 << vars.len()) {
            out.push(
                vars.iter()
                    .enumerate()
                    .map(|(i, &v)| if signs >> i & 1 == 1 { -v } else { v })
                    .collect(),
            );
        }
    }
    out
}

/// Multisets of size `k` drawn from `0..len`, as nondecreasing index lists.
fn multisets(len: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, len: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..len {
            cur.push(i);
            go(i, len, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, len, k, &mut Vec::new(), &mut out);
    out
}

fn literal_true(lit: i32, bits: u64) -> bool {
    let v = (bits >> (lit.unsigned_abs() - 1)) & 1 == 1;
    if lit > 0 {
        v
    } else {
        !v
    }
}

fn oracle_satisfiable(n: usize, clauses: &[Vec<i32>]) -> bool {
    (0..1u64 << n).any(|bits| clauses.iter().all(|c| c.iter().any(|&l| literal_true(l, bits))))
}

fn random_formula(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CnfFormula {
    let vars: Vec<i32> = (1..=n as i32).collect();
    let clauses = (0..m)
        .map(|_| {
            let w = rng.gen_range(1..=n.min(3));
            vars.choose_multiple(rng, w)
                .map(|&v| if rng.gen_bool(0.5) { v } else { -v })
                .collect()
        })
        .collect();
    CnfFormula::new(n, clauses).unwrap()
}

/// Raw Ising coefficients kept alongside the model so the energy oracle does
/// not go through the library.
struct RawIsing {
    n: usize,
    a: f64,
    b: Vec<f64>,
    c: Vec<(usize, usize, f64)>,
    offset: f64,
}

impl RawIsing {
    fn random(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let mut c = Vec::new();
        for j in 1..=n {
            for k in j + 1..=n {
                if rng.gen_bool(0.6) {
                    c.push((j, k, rng.gen_range(-2.0..2.0)));
                }
            }
        }
        Self {
            n,
            a: rng.gen_range(0.5..1.5),
            b: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            c,
            offset: rng.gen_range(-1.0..1.0),
        }
    }

    fn model(&self) -> IsingModel<f64> {
        let mut m = IsingModel::new(self.n).unwrap();
        m.set_field_scale(self.a);
        for (j, &b) in self.b.iter().enumerate() {
            m.set_field(j + 1, b).unwrap();
        }
        for &(j, k, c) in &self.c {
            m.set_coupling(j, k, c).unwrap();
        }
        m.set_offset(self.offset);
        m
    }

    fn energy(&self, bits: usize) -> f64 {
        let spin = |j: usize| if bits >> (j - 1) & 1 == 0 { 1.0 } else { -1.0 };
        let mut e = self.offset;
        for &(j, k, c) in &self.c {
            e -= c * spin(j) * spin(k);
        }
        for j in 1..=self.n {
            e -= self.a * self.b[j - 1] * spin(j);
        }
        e
    }
}

struct Dense {
    dim: usize,
    m: Vec<C64>,
}

impl Dense {
    fn identity(dim: usize) -> Self {
        let mut m = vec![C64::zero(); dim * dim];
        for i in 0..dim {
            m[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self { dim, m }
    }

    fn kron(&self, other: &Dense) -> Dense {
        let dim = self.dim * other.dim;
        let mut m = vec![C64::zero(); dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        m[(i * other.dim + k) * dim + j * other.dim + l] =
                            self.m[i * self.dim + j] * other.m[k * other.dim + l];
                    }
                }
            }
        }
        Dense { dim, m }
    }

    fn scaled_add(&mut self, other: &Dense, w: C64) {
        for (a, b) in self.m.iter_mut().zip(&other.m) {
            *a += w * b;
        }
    }

    fn mul(&self, other: &Dense) -> Dense {
        let d = self.dim;
        let mut m = vec![C64::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.m[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    m[i * d + j] += a * other.m[k * d + j];
                }
            }
        }
        Dense { dim: d, m }
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.m[i * self.dim + j] * x[j]).sum())
            .collect()
    }

    fn norm1(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.m[i * self.dim + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `exp(self)` by scaling, a 40-term Taylor series, and squaring.
    fn expm(&self) -> Dense {
        let mut squarings = 0;
        let mut scale = 1.0;
        while self.norm1() * scale > 0.25 {
            scale *= 0.5;
            squarings += 1;
        }
        let mut a = Dense { dim: self.dim, m: self.m.clone() };
        for z in &mut a.m {
            *z *= scale;
        }
        let mut sum = Dense::identity(self.dim);
        let mut term = Dense::identity(self.dim);
        for k in 1..=40 {
            term = term.mul(&a);
            for z in &mut term.m {
                *z /= k as f64;
            }
            sum.scaled_add(&term, C64::new(1.0, 0.0));
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }
}

/// `(1 − s)(−Σ σx) + s·diag(E)` from Kronecker products.
fn dense_interpolated(raw: &RawIsing, s: f64) -> Dense {
    let n = raw.n;
    let dim = 1 << n;
    let sx = Dense {
        dim: 2,
        m: vec![C64::zero(), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::zero()],
    };
    let id2 = Dense::identity(2);
    let mut h = Dense { dim, m: vec![C64::zero(); dim * dim] };
    for q in 0..n {
        // qubit q+1 sits in bit q: the leftmost Kronecker factor is the top bit
        let mut op = Dense::identity(1);
        for bit in (0..n).rev() {
            op = op.kron(if bit == q { &sx } else { &id2 });
        }
        h.scaled_add(&op, C64::new(-(1.0 - s), 0.0));
    }
    for b in 0..dim {
        h.m[b * dim + b] += C64::new(s * raw.energy(b), 0.0);
    }
    h
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// criteria

struct Corpus {
    formulas: Vec<CnfFormula>,
}

fn small_corpus() -> Corpus {
    let mut formulas = Vec::new();
    for n in 1..=3 {
        let pool = all_clauses(n);
        for k in 0..=4 {
            for pick in multisets(pool.len(), k) {
                formulas.push(CnfFormula::new(n, pick.iter().map(|&i| pool[i].clone()).collect()).unwrap());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc1);
    for _ in 0..500 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(0..=8);
        formulas.push(random_formula(&mut rng, n, m));
    }
    Corpus { formulas }
}

fn criterion_1(corpus: &Corpus) -> Outcome {
    let mut sat = 0;
    for f in &corpus.formulas {
        let by_count = count_models(f).map_err(|e| e.to_string())? > 0;
        let by_oracle = oracle_satisfiable(f.num_vars(), f.clauses());
        let (model, _) = reduce_3sat::<f64>(f).map_err(|e| e.to_string())?;
        let zero = model.has_zero_ground(1e-9).map_err(|e| e.to_string())?;
        ensure!(
            by_count == by_oracle && by_count == zero,
            "disagreement on {:?}: count {by_count}, oracle {by_oracle}, ground {zero}",
            f.clauses()
        );
        sat += by_count as usize;
    }
    Ok(format!("{} formulas, {sat} satisfiable", corpus.formulas.len()))
}

fn criterion_2(corpus: &Corpus) -> Outcome {
    let mut checked = 0usize;
    for f in &corpus.formulas {
        let (model, map) = reduce_3sat::<Rational>(f).map_err(|e| e.to_string())?;
        let ground = model.ground_states().map_err(|e| e.to_string())?;
        if ground.energy != Rational::zero() {
            continue;
        }
        for config in &ground.configs {
            let a = decode(config, &map).map_err(|e| e.to_string())?;
            ensure!(
                f.evaluate(&a).map_err(|e| e.to_string())?,
                "{:?} decodes {:?} to a falsifying assignment",
                f.clauses(),
                config.spins()
            );
            checked += 1;
        }
    }
    Ok(format!("{checked} zero-energy configurations decoded"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc3);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let n = 1 + i % 8;
        let raw = RawIsing::random(&mut rng, n);
        let s = match i % 5 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..1.0),
        };
        let h0 = build_initial::<f64>(n).unwrap();
        let h1 = build_final::<f64, f64>(&raw.model()).unwrap();
        let h = interpolate(&h0, &h1, s).unwrap();
        let psi = QuantumState::<f64>::random(n, &mut rng).unwrap();
        let fast = h.apply(&psi).unwrap();
        let slow = dense_interpolated(&raw, s).apply(psi.amplitudes());
        worst = worst.max(max_diff(&fast, &slow));
    }
    ensure!(worst <= 1e-12, "max abs error {worst:e} > 1e-12");
    Ok(format!("50 operators, max abs error {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc4);
    let cfg = PropagatorConfig::default();
    let mut worst: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    for n in 1..=6 {
        let raw = RawIsing::random(&mut rng, n);
        let s = rng.gen_range(0.0..1.0);
        let h = interpolate(
            &build_initial::<f64>(n).unwrap(),
            &build_final::<f64, f64>(&raw.model()).unwrap(),
            s,
        )
        .unwrap();
        let psi = QuantumState::<f64>::random(n, &mut rng).unwrap();
        let out = propagate_constant(&h, &psi, 1.0, 1000, &cfg).map_err(|e| e.to_string())?;
        let mut a = dense_interpolated(&raw, s);
        for z in &mut a.m {
            *z *= C64::new(0.0, -1.0);
        }
        let exact = a.expm().apply(psi.amplitudes());
        worst = worst.max(max_diff(out.state.amplitudes(), &exact));
        worst_drift = worst_drift.max(out.norm_drift);
    }
    ensure!(worst <= 1e-6, "propagator differs from exp(-iHt) by {worst:e}");

    // H = σz from |+⟩: ⟨σx⟩(t) = cos 2t
    let hz = HamiltonianSpec::from_diagonal(1, vec![1.0, -1.0]).unwrap();
    let plus = QuantumState::<f64>::uniform(1).unwrap();
    let mut worst_z: f64 = 0.0;
    for k in 1..=20 {
        let t = 0.37 * k as f64;
        let out = propagate_constant(&hz, &plus, t, 50, &cfg).map_err(|e| e.to_string())?;
        let a = out.state.amplitudes();
        let sx = 2.0 * (a[0].conj() * a[1]).re;
        worst_z = worst_z.max((sx - (2.0 * t).cos()).abs());
        worst_drift = worst_drift.max(out.norm_drift);
    }
    ensure!(worst_z <= 1e-8, "<σx>(t) off by {worst_z:e}");
    ensure!(worst_drift <= 1e-9, "norm drift {worst_drift:e}");
    Ok(format!(
        "expm error {worst:.2e}, cos(2t) error {worst_z:.2e}, drift {worst_drift:.2e}"
    ))
}

fn criterion_5() -> Outcome {
    let mut spin = IsingModel::<f64>::new(1).unwrap();
    spin.set_field(1, 1.0).unwrap();
    let profile = gap_profile::<f64, f64>(&spin, 11, EigenMethod::Lanczos, &EigenConfig::default())
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for x in &profile.samples {
        let exact = 2.0 * ((1.0 - x.s).powi(2) + x.s * x.s).sqrt();
        worst = worst.max((x.gap - exact).abs());
    }
    ensure!(profile.samples.len() == 11, "{} samples", profile.samples.len());
    ensure!(worst <= 1e-10, "single-qubit gap off by {worst:e}");
    ensure!(
        (profile.min_gap - 2f64.sqrt()).abs() <= 1e-10 && (profile.argmin_s - 0.5).abs() < 1e-15,
        "min gap {} at s = {}",
        profile.min_gap,
        profile.argmin_s
    );

    let mut rng = ChaCha8Rng::seed_from_u64(0xacc5);
    let mut worst_pair: f64 = 0.0;
    let mut instances = 0;
    let mut spins_seen = Vec::new();
    while instances < 20 {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(1..=6);
        let f = random_formula(&mut rng, n, m);
        let (model, map) = reduce_3sat::<f64>(&f).unwrap();
        if map.total_spins > 10 {
            continue;
        }
        instances += 1;
        spins_seen.push(map.total_spins);
        let h0 = build_initial::<f64>(model.n()).unwrap();
        let h1 = build_final::<f64, f64>(&model).unwrap();
        for s in [0.1, 0.35, 0.5, 0.8, 0.95] {
            let h = interpolate(&h0, &h1, s).unwrap();
            let it = lowest_two(&h, &EigenConfig::default()).map_err(|e| e.to_string())?;
            let de = lowest_two_dense(&h).map_err(|e| e.to_string())?;
            worst_pair = worst_pair.max((it.0 - de.0).abs()).max((it.1 - de.1).abs());
        }
    }
    ensure!(worst_pair <= 1e-8, "Lanczos and dense differ by {worst_pair:e}");
    Ok(format!(
        "closed-form error {worst:.2e}; Lanczos vs dense {worst_pair:.2e} over 20 instances ({}..={} spins)",
        spins_seen.iter().min().unwrap(),
        spins_seen.iter().max().unwrap()
    ))
}

/// Seeded satisfiable instances of at most 10 spins whose reduced model has a
/// single ground configuration.
fn adiabatic_instances() -> Vec<CnfFormula> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc6);
    let mut out = Vec::new();
    while out.len() < 10 {
        let n = rng.gen_range(4..=7);
        let m = rng.gen_range(3..=8);
        let f = random_formula(&mut rng, n, m);
        let (model, map) = reduce_3sat::<Rational>(&f).unwrap();
        if map.total_spins > 10 {
            continue;
        }
        let ground = model.ground_states().unwrap();
        if ground.energy == Rational::zero() && ground.degeneracy() == 1 {
            out.push(f);
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let cfg = PropagatorConfig::default();
    let mut lines = Vec::new();
    let mut worst_sudden: f64 = 0.0;
    let mut lowest_success: f64 = 1.0;
    for f in adiabatic_instances() {
        let (model, map) = reduce_3sat::<f64>(&f).unwrap();
        let profile = gap_profile::<f64, f64>(&model, 21, EigenMethod::Lanczos, &EigenConfig::default())
            .map_err(|e| e.to_string())?;
        let t_star = estimate_adiabatic_time(&profile, 10.0).map_err(|e| e.to_string())?;
        let mut probs = Vec::new();
        for mult in [1.0, 2.0, 4.0] {
            let t = t_star * mult;
            let r = adiabatic_run(&model, t, default_steps(t), &cfg).map_err(|e| e.to_string())?;
            ensure!(r.norm_drift <= 1e-9, "norm drift {:e}", r.norm_drift);
            probs.push(r.success_prob);
        }
        lowest_success = lowest_success.min(probs[0]);
        ensure!(
            probs[0] >= 0.9,
            "success {:.4} < 0.9 at T* = {t_star:.3} for {:?}",
            probs[0],
            f.clauses()
        );
        ensure!(
            probs[1] >= probs[0] - 0.02 && probs[2] >= probs[1] - 0.02,
            "success not monotone in T: {probs:?} for {:?}",
            f.clauses()
        );
        let sudden = adiabatic_run(&model, 0.0, 1, &cfg).map_err(|e| e.to_string())?;
        let expect = sudden.degeneracy as f64 / (1u64 << map.total_spins) as f64;
        worst_sudden = worst_sudden.max((sudden.success_prob - expect).abs());
        let brief = adiabatic_run(&model, 1e-6, 1, &cfg).map_err(|e| e.to_string())?;
        worst_sudden = worst_sudden.max((brief.success_prob - expect).abs());
        lines.push(format!(
            "{}sp g={:.3} T*={:.1} p={:.3}/{:.3}/{:.3}",
            map.total_spins, profile.min_gap, t_star, probs[0], probs[1], probs[2]
        ));
    }
    ensure!(worst_sudden <= 1e-9, "sudden limit off by {worst_sudden:e}");
    Ok(format!(
        "min success at T* {lowest_success:.4}; sudden error {worst_sudden:.1e}; [{}]",
        lines.join("; ")
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc7);
    let mut rows = Vec::new();
    for n in 8..=20 {
        let f = adiabench::cnf::random_kcnf(n, (4.26 * n as f64).round() as usize, 3, &mut rng)
            .map_err(|e| e.to_string())?;
        let r = brute_force_sat(&f, SolveMode::Exhaustive).map_err(|e| e.to_string())?;
        ensure!(
            r.assignments_checked == 1u64 << n,
            "n = {n}: {} assignments checked",
            r.assignments_checked
        );
        rows.push((n as f64, (r.assignments_checked as f64).log2(), r.wall_time_s));
    }
    let k = rows.len() as f64;
    let mx = rows.iter().map(|r| r.0).sum::<f64>() / k;
    let my = rows.iter().map(|r| r.1).sum::<f64>() / k;
    let slope = rows.iter().map(|r| (r.0 - mx) * (r.1 - my)).sum::<f64>()
        / rows.iter().map(|r| (r.0 - mx).powi(2)).sum::<f64>();
    ensure!(slope == 1.0, "fitted slope {slope}");

    let sweep = scaling_sweep(&SweepConfig {
        n_min: 8,
        n_max: 20,
        instances_per_n: 2,
        seed: 7,
        ..SweepConfig::default()
    })
    .map_err(|e| e.to_string())?;
    ensure!(
        sweep.iter().all(|r| r.max_ops == 1u64 << r.n_vars),
        "sweep max_ops differ from 2^n"
    );
    ensure!(log2_ops_slope(&sweep) == Some(1.0), "sweep slope {:?}", log2_ops_slope(&sweep));
    Ok(format!(
        "2^n ops for n = 8..=20, slope {slope}; wall {:.2e} s at n = 20",
        rows.last().unwrap().2
    ))
}

/// `Tr_E |ψ⟩⟨ψ|` from the full outer product.
fn dense_partial_trace(psi: &[C64], n: usize, collective: &[usize]) -> Vec<C64> {
    let env: Vec<usize> = (1..=n).filter(|q| !collective.contains(q)).collect();
    let dc = 1 << collective.len();
    let full: Vec<C64> = psi.iter().flat_map(|a| psi.iter().map(move |b| a * b.conj())).collect();
    let dim = psi.len();
    let place = |bits: usize, qs: &[usize]| -> usize {
        qs.iter().enumerate().map(|(i, q)| ((bits >> i) & 1) << (q - 1)).sum()
    };
    let mut rho = vec![C64::zero(); dc * dc];
    for a in 0..dc {
        for b in 0..dc {
            for e in 0..1 << env.len() {
                let i = place(a, collective) + place(e, &env);
                let j = place(b, collective) + place(e, &env);
                rho[a * dc + b] += full[i * dim + j];
            }
        }
    }
    rho
}

fn criterion_8() -> Outcome {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = QuantumState::new(2, vec![C64::new(h, 0.0), C64::zero(), C64::zero(), C64::new(h, 0.0)]).unwrap();
    let rho = partial_trace(&bell, &Partition::new(2, vec![1]).unwrap()).map_err(|e| e.to_string())?;
    let mixed = [0.5, 0.0, 0.0, 0.5].map(|x| C64::new(x, 0.0));
    let bell_err = max_diff(rho.entries(), &mixed);
    ensure!(bell_err <= 1e-12, "Bell reduced state off by {bell_err:e}");

    let mut rng = ChaCha8Rng::seed_from_u64(0xacc8);
    let mut worst_recon: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for i in 0..1000 {
        let n = 1 + i % 8;
        let psi = QuantumState::<f64>::random(n, &mut rng).unwrap();
        let mut qubits: Vec<usize> = (1..=n).collect();
        qubits.shuffle(&mut rng);
        qubits.truncate(rng.gen_range(0..=n.min(4)));
        let p = Partition::new(n, qubits.clone()).unwrap();
        let rho = partial_trace(&psi, &p).map_err(|e| e.to_string())?;
        rho.validate(1e-10).map_err(|e| format!("state {i}: {e}"))?;
        let dim = rho.dim() as f64;
        let purity = rho.purity();
        let s = rho.entropy().map_err(|e| e.to_string())?;
        ensure!(
            purity >= 1.0 / dim - 1e-10 && purity <= 1.0 + 1e-10,
            "state {i}: purity {purity}"
        );
        ensure!(s >= 0.0 && s <= dim.log2() + 1e-10, "state {i}: entropy {s}");
        ensure!(
            (s.abs() <= 1e-8) == ((purity - 1.0).abs() <= 1e-8),
            "state {i}: entropy {s} vs purity {purity}"
        );
        let g = env_gram(&psi, &p).map_err(|e| e.to_string())?;
        worst_recon = worst_recon.max(max_diff(&g.reconstruct(), rho.entries()));
        if n == 8 {
            let oracle = dense_partial_trace(psi.amplitudes(), n, &qubits);
            worst_oracle = worst_oracle.max(max_diff(&oracle, rho.entries()));
        }
    }
    ensure!(worst_recon <= 1e-10, "Gram reconstruction off by {worst_recon:e}");
    ensure!(worst_oracle <= 1e-12, "partial trace differs from outer-product oracle by {worst_oracle:e}");

    let mut worst_cos: f64 = 0.0;
    for g in [0.5f64, 0.77, 1.0, 1.5] {
        let rows = DephasingModel::with_couplings(1, 1, vec![(1, 2, g)])
            .unwrap()
            .run(4.0, 40)
            .map_err(|e| e.to_string())?;
        for r in rows {
            worst_cos = worst_cos.max((r.max_offdiag - (2.0 * g * r.t).cos().abs() / 2.0).abs());
        }
    }
    ensure!(worst_cos <= 1e-8, "two-qubit dephasing off by {worst_cos:e}");

    let rows = DephasingModel::<f64>::new(2, 6, 8)
        .unwrap()
        .run(10.0, 50)
        .map_err(|e| e.to_string())?;
    let start = rows[0].populations.clone();
    let worst_pop = rows
        .iter()
        .flat_map(|r| r.populations.iter().zip(&start).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    ensure!(worst_pop <= 1e-8, "populations drift by {worst_pop:e}");
    ensure!(
        rows.last().unwrap().entropy > rows[0].entropy,
        "no entropy growth under dephasing"
    );
    Ok(format!(
        "Bell {bell_err:.1e}; 1000 states ok, Gram {worst_recon:.1e}, oracle {worst_oracle:.1e}; cos {worst_cos:.1e}; populations {worst_pop:.1e}"
    ))
}

fn criterion_9() -> Outcome {
    let base = run_race(
        &CnfFormula::new(4, vec![vec![1, -2, 3], vec![-1, 4]]).unwrap(),
        "prop",
        &RaceConfig {
            gap_samples: 5,
            ..RaceConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let mut runner = TestRunner::new(Config {
        cases: 2000,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(
            &(prop_oneof![Just(0.0), -1.0f64..10.0], 0.0f64..10.0, 0.0f64..10.0),
            |(wall, t, extra)| {
                let mut r = base.clone();
                r.brute_force_wall_s = wall;
                let now = r.with_observation_time(Some(t));
                prop_assert_eq!(now.determinism_satisfied, Some(0.0 < wall && wall < t));
                if now.determinism_satisfied == Some(true) {
                    let later = r.with_observation_time(Some(t + extra));
                    prop_assert_eq!(later.determinism_satisfied, Some(true));
                }
                let none = r.with_observation_time(None);
                prop_assert_eq!(none.determinism_satisfied, None);
                Ok(())
            },
        )
        .map_err(|e| e.to_string())?;

    let cfg = SweepConfig {
        n_min: 4,
        n_max: 12,
        instances_per_n: 3,
        seed: 99,
        ..SweepConfig::default()
    };
    let strip = |csv: String| -> String {
        csv.lines()
            .map(|l| l.rsplit_once(',').map(|x| x.0).unwrap_or(l).to_string())
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = strip(sweep_csv(&scaling_sweep(&cfg).map_err(|e| e.to_string())?));
    let b = strip(sweep_csv(&scaling_sweep(&cfg).map_err(|e| e.to_string())?));
    ensure!(a == b, "sweep CSV differs between identical runs");
    Ok(format!("2000 generated reports; sweep CSV reproducible ({} bytes)", a.len()))
}

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |k: usize| wanted.is_empty() || wanted.contains(&k);
    let corpus = (want(1) || want(2)).then(small_corpus);
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "reduction soundness", Box::new(|| criterion_1(corpus.as_ref().unwrap()))),
        (2, "witness decoding", Box::new(|| criterion_2(corpus.as_ref().unwrap()))),
        (3, "matrix-free apply", Box::new(criterion_3)),
        (4, "propagator accuracy", Box::new(criterion_4)),
        (5, "spectrum", Box::new(criterion_5)),
        (6, "adiabatic success", Box::new(criterion_6)),
        (7, "brute-force scaling", Box::new(criterion_7)),
        (8, "decoherence identities", Box::new(criterion_8)),
        (9, "race verdict logic", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (k, name, check) in &criteria {
        if !want(*k) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panic".into())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {k} ({name}): PASS [{secs:.1}s] {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {k} ({name}): FAIL [{secs:.1}s] {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
