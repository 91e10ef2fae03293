//! Fast simulated annealing on binary assignments, used as the classical
//! baseline, and the benchmark harness around it.
//!
//! Each run restarts the temperature schedule `cycles` times. Within a
//! cycle the temperature falls from `t_init` to `t_final` following the
//! generalized visiting-distribution schedule (or `1/(1+k)` in fast mode),
//! and at each temperature a chain of proposals flips a heavy-tailed number
//! of random bits, accepted by the Metropolis rule on `−cost`.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::graph::{brute_force_solve, costs_equal, Assignment, GraphError, ProblemGraph, BRUTE_FORCE_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SaError {
    #[error("invalid annealing configuration: {0}")]
    Config(String),
    #[error("{0} vertices exceed the 64-bit assignment limit")]
    TooLarge(usize),
    #[error("benchmark family is empty")]
    EmptyFamily,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoolingSchedule {
    /// `(2^{q−1} − 1) / ((k+2)^{q−1} − 1)` shape with `q = visiting`.
    #[default]
    Generalized,
    /// `1 / (1 + k)` shape.
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaConfig {
    pub t_init: f64,
    pub t_final: f64,
    /// Visiting-distribution parameter `q_v` in (1, 3).
    pub visiting: f64,
    pub schedule: CoolingSchedule,
    pub cycles: usize,
    pub max_fcalls_per_iteration: usize,
    /// Temperature steps per run, shared across cycles.
    pub iterations: usize,
    pub runs: usize,
    pub seed: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            t_init: 0.4,
            t_final: 0.01,
            visiting: 2.62,
            schedule: CoolingSchedule::Generalized,
            cycles: 50,
            max_fcalls_per_iteration: 2000,
            iterations: 5000,
            runs: 50,
            seed: 0,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<(), SaError> {
        if !(self.t_init > self.t_final && self.t_final > 0.0) {
            return Err(SaError::Config("need t_init > t_final > 0".into()));
        }
        if !(self.visiting > 1.0 && self.visiting < 3.0) {
            return Err(SaError::Config("visiting parameter must lie in (1, 3)".into()));
        }
        if self.cycles == 0 || self.max_fcalls_per_iteration == 0 || self.iterations < 2 || self.runs == 0 {
            return Err(SaError::Config("budgets must be positive (iterations ≥ 2)".into()));
        }
        Ok(())
    }

    /// Steps in each cycle; every cycle gets at least two.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let cycles = self.cycles.min(self.iterations / 2).max(1);
        let base = self.iterations / cycles;
        let extra = self.iterations % cycles;
        (0..cycles).map(|c| base + usize::from(c < extra)).collect()
    }
}

/// Temperatures for one cycle of `len ≥ 2` steps, strictly decreasing from
/// `t_init` to `t_final`.
pub fn temperature_schedule(cfg: &SaConfig, len: usize) -> Vec<f64> {
    let shape = |k: usize| match cfg.schedule {
        CoolingSchedule::Generalized => {
            let a = cfg.visiting - 1.0;
            (2f64.powf(a) - 1.0) / ((k as f64 + 2.0).powf(a) - 1.0)
        }
        CoolingSchedule::Fast => 1.0 / (1.0 + k as f64),
    };
    if len < 2 {
        return vec![cfg.t_init; len];
    }
    let (g0, g1) = (shape(0), shape(len - 1));
    (0..len).map(|k| cfg.t_final + (cfg.t_init - cfg.t_final) * (shape(k) - g1) / (g0 - g1)).collect()
}

/// Metropolis acceptance for a change `delta` of the minimised energy.
pub fn acceptance_probability(delta: f64, temperature: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else {
        (-delta / temperature).exp()
    }
}

/// Sampler for the Tsallis visiting distribution at a given temperature.
#[derive(Debug, Clone, Copy)]
struct Visiting {
    q: f64,
    sigma: f64,
}

impl Visiting {
    fn new(q: f64, temperature: f64) -> Self {
        let f1 = (temperature.ln() / (q - 1.0)).exp();
        let f2 = ((4.0 - q) * (q - 1.0).ln()).exp();
        let f3 = ((2.0 - q) * 2f64.ln() / (q - 1.0)).exp();
        let f4 = std::f64::consts::PI.sqrt() * f1 * f2 / (f3 * (3.0 - q));
        let f5 = 1.0 / (q - 1.0) - 0.5;
        let d1 = 2.0 - f5;
        let f6 = std::f64::consts::PI * (1.0 - f5) / (std::f64::consts::PI * (1.0 - f5)).sin() / ln_gamma(d1).exp();
        let sigma = (-(q - 1.0) * (f6 / f4).ln() / (3.0 - q)).exp();
        Self { q, sigma }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let x: f64 = rng.sample::<f64, _>(StandardNormal) * self.sigma;
        let y: f64 = rng.sample(StandardNormal);
        let den = ((self.q - 1.0) * y.abs().ln() / (3.0 - self.q)).exp();
        x / den
    }

    /// Bits to flip: `1 + ⌊|v|⌋`, truncated to `n`.
    fn flips<R: Rng>(&self, rng: &mut R, n: usize) -> usize {
        let v = self.sample(rng).abs();
        if v.is_finite() && v < n as f64 { 1 + v as usize } else { n }.min(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub best_index: u64,
    pub best_cost: f64,
    /// `(global step, cost)` each time the best improved.
    pub improvements: Vec<(usize, f64)>,
    pub evaluations: usize,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaResult {
    pub best_assignment: Assignment,
    pub best_cost: f64,
    pub runs: Vec<RunRecord>,
    pub c_opt: Option<f64>,
    /// Fraction of runs reaching `c_opt`; `None` when no oracle was
    /// available.
    pub p_success: Option<f64>,
}

impl SaResult {
    pub fn run_bests(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.best_cost).collect()
    }

    pub fn mean_runtime_s(&self) -> f64 {
        self.runs.iter().map(|r| r.runtime_s).sum::<f64>() / self.runs.len() as f64
    }

    /// The result with wall-clock fields zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.runs.iter_mut().for_each(|run| run.runtime_s = 0.0);
        r
    }
}

fn run_seed(seed: u64, run: usize) -> u64 {
    seed.wrapping_add((run as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn single_run(g: &ProblemGraph, cfg: &SaConfig, seed: u64) -> RunRecord {
    let start = Instant::now();
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state: u64 = if n == 64 { rng.random() } else { rng.random::<u64>() & ((1u64 << n) - 1) };
    let mut cost = g.cost_of_index(state);
    let mut evaluations = 1;
    let mut best = (state, cost);
    let mut improvements = vec![(0, cost)];
    let chain = n.min(cfg.max_fcalls_per_iteration).max(1);
    let mut step = 0;
    for len in cfg.cycle_lengths() {
        for t in temperature_schedule(cfg, len) {
            let visit = Visiting::new(cfg.visiting, t);
            for _ in 0..chain {
                let m = visit.flips(&mut rng, n);
                let mut candidate = state;
                for j in sample(&mut rng, n, m) {
                    candidate ^= 1 << j;
                }
                let c = g.cost_of_index(candidate);
                evaluations += 1;
                if rng.random::<f64>() < acceptance_probability(cost - c, t) {
                    state = candidate;
                    cost = c;
                    if cost > best.1 {
                        best = (state, cost);
                        improvements.push((step, cost));
                    }
                }
            }
            step += 1;
        }
    }
    RunRecord {
        seed,
        best_index: best.0,
        best_cost: best.1,
        improvements,
        evaluations,
        runtime_s: start.elapsed().as_secs_f64(),
    }
}

/// Runs `cfg.runs` independent annealing runs and judges success against
/// the brute-force optimum when the graph is small enough.
pub fn fast_sa(g: &ProblemGraph, cfg: &SaConfig) -> Result<SaResult, SaError> {
    let c_opt = if g.n() <= BRUTE_FORCE_CAP { Some(brute_force_solve(g)?.c_opt) } else { None };
    fast_sa_with_optimum(g, cfg, c_opt)
}

/// As [`fast_sa`] with a known optimum (or none).
pub fn fast_sa_with_optimum(g: &ProblemGraph, cfg: &SaConfig, c_opt: Option<f64>) -> Result<SaResult, SaError> {
    cfg.validate()?;
    if g.n() > 64 {
        return Err(SaError::TooLarge(g.n()));
    }
    let runs: Vec<RunRecord> =
        (0..cfg.runs).into_par_iter().map(|r| single_run(g, cfg, run_seed(cfg.seed, r))).collect();
    let best = runs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.best_cost.total_cmp(&b.1.best_cost).then(b.0.cmp(&a.0)))
        .map(|(_, r)| r)
        .expect("at least one run");
    let p_success =
        c_opt.map(|c| runs.iter().filter(|r| costs_equal(r.best_cost, c)).count() as f64 / runs.len() as f64);
    Ok(SaResult {
        best_assignment: Assignment::from_index(best.best_index, g.n()),
        best_cost: best.best_cost,
        c_opt,
        p_success,
        runs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub graph_name: String,
    pub n: usize,
    pub iterations: usize,
    pub p_failure: Option<f64>,
    pub mean_runtime_s: Option<f64>,
    /// Binomial standard error of `p_failure`.
    pub stderr: Option<f64>,
    pub error: Option<String>,
}

fn row(g: &ProblemGraph, label: String, cfg: &SaConfig) -> BenchmarkRow {
    match fast_sa(g, cfg) {
        Ok(r) => {
            let p_failure = r.p_success.map(|p| 1.0 - p);
            BenchmarkRow {
                graph_name: label,
                n: g.n(),
                iterations: cfg.iterations,
                p_failure,
                mean_runtime_s: Some(r.mean_runtime_s()),
                stderr: p_failure.map(|p| (p * (1.0 - p) / cfg.runs as f64).sqrt()),
                error: None,
            }
        }
        Err(e) => BenchmarkRow {
            graph_name: label,
            n: g.n(),
            iterations: cfg.iterations,
            p_failure: None,
            mean_runtime_s: None,
            stderr: None,
            error: Some(e.to_string()),
        },
    }
}

fn label(g: &ProblemGraph, i: usize) -> String {
    g.name().map_or_else(|| format!("graph_{i}"), str::to_string)
}

/// One row per graph; failures leave gaps rather than aborting.
pub fn sa_benchmark(family: &[ProblemGraph], cfg: &SaConfig) -> Result<Vec<BenchmarkRow>, SaError> {
    if family.is_empty() {
        return Err(SaError::EmptyFamily);
    }
    cfg.validate()?;
    Ok(family.iter().enumerate().map(|(i, g)| row(g, label(g, i), cfg)).collect())
}

/// One row per iteration budget on a single graph.
pub fn sa_iteration_sweep(g: &ProblemGraph, cfg: &SaConfig, budgets: &[usize]) -> Result<Vec<BenchmarkRow>, SaError> {
    if budgets.is_empty() {
        return Err(SaError::EmptyFamily);
    }
    budgets
        .iter()
        .map(|&iterations| {
            let c = SaConfig { iterations, ..*cfg };
            c.validate()?;
            Ok(row(g, label(g, 0), &c))
        })
        .collect()
}

/// CSV with columns `graph_name,N,iterations,p_failure,mean_runtime_s,stderr`.
pub fn benchmark_csv(rows: &[BenchmarkRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    let mut out = String::from("graph_name,N,iterations,p_failure,mean_runtime_s,stderr\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.graph_name,
            r.n,
            r.iterations,
            opt(r.p_failure),
            opt(r.mean_runtime_s),
            opt(r.stderr)
        );
    }
    out
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankCorrelation {
    pub rho: f64,
    /// Two-sided p-value from the t approximation with `n − 2` degrees of
    /// freedom.
    pub p_value: f64,
}

/// Spearman rank correlation with tie-averaged ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<RankCorrelation> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (a, b) = (rx[i] - mean, ry[i] - mean);
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let rho = sxy / (sxx * syy).sqrt();
    let df = n as f64 - 2.0;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Some(RankCorrelation { rho, p_value })
}
