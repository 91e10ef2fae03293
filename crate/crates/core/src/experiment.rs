//! End-to-end drivers: encode → embed → optimise the pulse → evaluate, and
//! the comparison and noise studies built on top.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{
    embed_layout_with, encode_with, realized_interactions, validate_embedding, AtomLayout, DeviceParams, EmbedOptions,
    EncodingError, EncodingResult, FeasibilityReport, InteractionMatrix, ScalePolicy,
};
use crate::evolution::{
    decode_solutions, evolve, expectation_energy, fidelity, propagate, EvolutionError, IntegratorSettings,
    RecordingOptions, Trajectory, DEFAULT_POPULATION_THRESHOLD, DEFAULT_SAMPLES,
};
use crate::graph::{
    approximation_ratio, brute_force_solve, hardness_convergence_scan, ExactSolution, GraphError, HardnessScan,
    ProblemGraph, SPECTRUM_CAP,
};
use crate::hamiltonian::{
    build_target, ground_space, DiagonalHamiltonian, HamiltonianError, StateVector, GROUND_SPACE_TOL,
};
use crate::optimize::{bnb_pipeline, Bounds, Objective, OptimizeError, OptimizerReport, PipelineConfig};
use crate::pulse::{
    build_schedule, initial_guess, inject_noise, ControlVector, NoiseMode, NoiseSpec, PulseError, PulseSchedule,
    RampShape, SlewReport, DEFAULT_DELTA_G0, KNOTS,
};
use crate::sa::{fast_sa_with_optimum, SaConfig, SaError};

/// Largest register the drivers will simulate.
pub const MAX_SIMULATED_ATOMS: usize = 16;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("encoding: {0}")]
    Encoding(#[source] EncodingError),
    #[error("embedding: {0}")]
    Embedding(#[source] EncodingError),
    #[error("embedding validation failed: max degree {max_degree}, max edge error {max_edge_error:.3e}, unwanted ratio {unwanted_ratio:.3e}")]
    Infeasible { max_degree: usize, max_edge_error: f64, unwanted_ratio: f64 },
    #[error("oracle: {0}")]
    Oracle(#[source] GraphError),
    #[error("hamiltonian: {0}")]
    Hamiltonian(#[source] HamiltonianError),
    #[error("pulse: {0}")]
    Pulse(#[source] PulseError),
    #[error("optimisation: {0}")]
    Optimize(#[source] OptimizeError),
    #[error("evolution: {0}")]
    Evolution(#[source] EvolutionError),
    #[error("simulated annealing: {0}")]
    Annealing(#[source] SaError),
    #[error("configuration: {0}")]
    Config(String),
}

impl ExperimentError {
    /// Whether the failure means the instance cannot be realised on the
    /// device, as opposed to an internal failure.
    pub fn is_infeasibility(&self) -> bool {
        matches!(self, Self::Encoding(_) | Self::Embedding(_) | Self::Infeasible { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    /// Total time T in μs.
    pub duration: f64,
    /// Peak of the initial Ω guess, 2π·MHz.
    pub amplitude: f64,
    pub delta_g0: f64,
    pub ramp: RampShape,
    /// Upper bound on Ω knots during optimisation.
    pub omega_max: f64,
    pub delta_g_min: f64,
    pub delta_g_max: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            duration: 3.5,
            amplitude: 20.0,
            delta_g0: DEFAULT_DELTA_G0,
            ramp: RampShape::Linear,
            omega_max: 80.0,
            delta_g_min: -3.0,
            delta_g_max: 3.0,
        }
    }
}

impl ProtocolConfig {
    pub fn bounds(&self) -> Bounds {
        let mut lower = vec![0.0; KNOTS];
        lower.extend(std::iter::repeat_n(self.delta_g_min, KNOTS));
        let mut upper = vec![self.omega_max; KNOTS];
        upper.extend(std::iter::repeat_n(self.delta_g_max, KNOTS));
        Bounds { lower, upper }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub device: DeviceParams,
    pub scale: ScalePolicy,
    pub embed: EmbedOptions,
    /// Abort when the layout fails validation.
    pub require_feasible: bool,
    pub protocol: ProtocolConfig,
    pub integrator: IntegratorSettings,
    pub pipeline: PipelineConfig,
    /// Skip optimisation and evaluate the initial guess.
    pub optimize: bool,
    pub seed: u64,
    pub samples: usize,
    pub population_threshold: f64,
    /// Record this many instantaneous eigenvalues along the trajectory.
    pub spectrum_levels: Option<usize>,
    pub hardness_cutoffs: Vec<u64>,
    pub hardness_tol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            device: DeviceParams::default(),
            scale: ScalePolicy::default(),
            embed: EmbedOptions::default(),
            require_feasible: true,
            protocol: ProtocolConfig::default(),
            integrator: IntegratorSettings::default(),
            pipeline: PipelineConfig::default(),
            optimize: true,
            seed: 0,
            samples: DEFAULT_SAMPLES,
            population_threshold: DEFAULT_POPULATION_THRESHOLD,
            spectrum_levels: None,
            hardness_cutoffs: (0..=16).collect(),
            hardness_tol: 1e-3,
        }
    }
}

/// In-loop noise: the objective averages over a fixed set of noise draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InLoopNoise {
    pub spec: NoiseSpec,
    pub seeds: Vec<u64>,
}

/// `E(T)` of the target Hamiltonian as a function of the flattened control
/// vector.
pub struct AnnealingObjective {
    pub template: ControlVector,
    pub final_detunings: Vec<f64>,
    pub realized_v: InteractionMatrix,
    pub target: DiagonalHamiltonian,
    pub integrator: IntegratorSettings,
    pub noise: Option<InLoopNoise>,
}

impl AnnealingObjective {
    pub fn schedule(&self, x: &[f64]) -> Result<PulseSchedule, PulseError> {
        build_schedule(&self.template.with_flat(x), &self.final_detunings, &self.realized_v)
    }

    pub fn final_state(&self, sched: &PulseSchedule) -> Result<StateVector, EvolutionError> {
        let init = StateVector::ground(self.final_detunings.len())?;
        evolve(&init, sched, self.integrator.steps_for(self.template.duration), self.integrator.method)
    }

    pub fn energy_of(&self, sched: &PulseSchedule) -> Result<f64, String> {
        let psi = self.final_state(sched).map_err(|e| e.to_string())?;
        expectation_energy(&psi, &self.target).map_err(|e| e.to_string())
    }
}

impl Objective for AnnealingObjective {
    fn dim(&self) -> usize {
        2 * KNOTS
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, String> {
        let sched = self.schedule(x).map_err(|e| e.to_string())?;
        match &self.noise {
            Some(noise) if noise.spec.level > 0.0 && !noise.seeds.is_empty() => {
                let mut total = 0.0;
                for &seed in &noise.seeds {
                    let noisy = inject_noise(&sched, &noise.spec.with_seed(seed)).map_err(|e| e.to_string())?;
                    total += self.energy_of(&noisy)?;
                }
                Ok(total / noise.seeds.len() as f64)
            }
            _ => self.energy_of(&sched),
        }
    }
}

/// Everything fixed before the pulse is optimised.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: ProblemGraph,
    pub encoding: EncodingResult,
    pub layout: AtomLayout,
    pub embedding_residual: f64,
    pub feasibility: FeasibilityReport,
    pub realized_v: InteractionMatrix,
    pub target: DiagonalHamiltonian,
    pub exact: ExactSolution,
    pub ground_set: Vec<u64>,
    pub ground_energy: f64,
    pub guess: ControlVector,
}

pub fn prepare(g: &ProblemGraph, cfg: &SolveConfig) -> Result<Prepared, ExperimentError> {
    if g.n() > MAX_SIMULATED_ATOMS {
        return Err(ExperimentError::Config(format!(
            "{} atoms exceed the simulation limit of {MAX_SIMULATED_ATOMS}",
            g.n()
        )));
    }
    let encoding = encode_with(g, &cfg.device, cfg.scale).map_err(ExperimentError::Encoding)?;
    let (layout, embedding_residual) =
        embed_layout_with(&encoding, &cfg.device, cfg.seed, &cfg.embed).map_err(ExperimentError::Embedding)?;
    let feasibility = validate_embedding(&layout, &encoding, &cfg.device, &cfg.embed);
    if cfg.require_feasible && !feasibility.passes {
        return Err(ExperimentError::Infeasible {
            max_degree: feasibility.max_degree,
            max_edge_error: feasibility.max_edge_error,
            unwanted_ratio: feasibility.unwanted_ratio,
        });
    }
    let realized_v = realized_interactions(&layout, &cfg.device).map_err(ExperimentError::Embedding)?;
    let target = build_target(g, encoding.scale).map_err(ExperimentError::Hamiltonian)?;
    let exact = brute_force_solve(g).map_err(ExperimentError::Oracle)?;
    let (ground_energy, ground_set) = ground_space(&target, GROUND_SPACE_TOL);
    let p = &cfg.protocol;
    let guess = initial_guess(p.duration, p.amplitude, p.delta_g0, p.ramp).map_err(ExperimentError::Pulse)?;
    Ok(Prepared {
        graph: g.clone(),
        encoding,
        layout,
        embedding_residual,
        feasibility,
        realized_v,
        target,
        exact,
        ground_set,
        ground_energy,
        guess,
    })
}

impl Prepared {
    pub fn objective(&self, integrator: IntegratorSettings, noise: Option<InLoopNoise>) -> AnnealingObjective {
        AnnealingObjective {
            template: self.guess.clone(),
            final_detunings: self.encoding.final_detunings.clone(),
            realized_v: self.realized_v.clone(),
            target: self.target.clone(),
            integrator,
            noise,
        }
    }

    /// Final-state metrics of a schedule.
    pub fn evaluate(
        &self,
        sched: &PulseSchedule,
        integrator: IntegratorSettings,
    ) -> Result<FinalMetrics, ExperimentError> {
        let obj = self.objective(integrator, None);
        let psi = obj.final_state(sched).map_err(ExperimentError::Evolution)?;
        self.metrics(&psi)
    }

    pub fn metrics(&self, psi: &StateVector) -> Result<FinalMetrics, ExperimentError> {
        let energy = expectation_energy(psi, &self.target).map_err(ExperimentError::Hamiltonian)?;
        let fid = fidelity(psi, &self.ground_set).map_err(ExperimentError::Hamiltonian)?;
        let top = decode_solutions(psi, 0.0);
        let (best, p_top) = top.first().cloned().ok_or_else(|| ExperimentError::Config("empty state".into()))?;
        let top_cost = self.graph.cost(&best).map_err(ExperimentError::Oracle)?;
        let c_opt = self.exact.c_opt;
        let ratio = approximation_ratio(top_cost, c_opt).ok();
        let expected_cost: f64 =
            psi.probabilities().iter().enumerate().map(|(b, p)| p * self.graph.cost_of_index(b as u64)).sum();
        Ok(FinalMetrics {
            energy,
            ground_energy: self.ground_energy,
            fidelity: fid,
            top_assignment: best.to_string(),
            top_probability: p_top,
            top_cost,
            c_opt,
            approximation_ratio: ratio,
            expected_approximation_ratio: approximation_ratio(expected_cost, c_opt).ok(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalMetrics {
    pub energy: f64,
    pub ground_energy: f64,
    pub fidelity: f64,
    /// Most probable basis state, vertex 0 first.
    pub top_assignment: String,
    pub top_probability: f64,
    pub top_cost: f64,
    pub c_opt: f64,
    /// `top_cost / c_opt`; absent when `c_opt ≤ 0`.
    pub approximation_ratio: Option<f64>,
    /// Population-weighted cost over `c_opt`.
    pub expected_approximation_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedSolution {
    pub assignment: String,
    pub ket: String,
    pub probability: f64,
    pub cost: f64,
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub prepare_s: f64,
    pub optimize_s: f64,
    pub final_run_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveRecord {
    pub graph_name: Option<String>,
    pub n: usize,
    pub encoding: EncodingResult,
    pub layout: AtomLayout,
    pub embedding_residual: f64,
    pub feasibility: FeasibilityReport,
    pub realized_interactions: InteractionMatrix,
    pub c_opt: f64,
    pub d_opt: u64,
    pub hardness: Option<HardnessScan>,
    pub initial: FinalMetrics,
    pub optimizer: Option<OptimizerReport>,
    pub control: ControlVector,
    pub slew: SlewReport,
    pub result: FinalMetrics,
    pub decoded: Vec<DecodedSolution>,
    pub populated_states: usize,
    pub max_norm_drift: f64,
    pub renormalizations: usize,
    pub timings: Timings,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
    #[serde(skip)]
    pub schedule: Option<PulseSchedule>,
}

/// Runs the full protocol on one graph.
pub fn solve(g: &ProblemGraph, cfg: &SolveConfig) -> Result<SolveRecord, ExperimentError> {
    let t0 = Instant::now();
    let prep = prepare(g, cfg)?;
    let guess_sched = build_schedule(&prep.guess, &prep.encoding.final_detunings, &prep.realized_v)
        .map_err(ExperimentError::Pulse)?;
    let initial = prep.evaluate(&guess_sched, cfg.integrator)?;
    let prepare_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let (control, optimizer) = if cfg.optimize {
        let report = optimize_control(&prep, cfg, None)?;
        (prep.guess.with_flat(&report.best_x), Some(report))
    } else {
        (prep.guess.clone(), None)
    };
    let optimize_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let sched =
        build_schedule(&control, &prep.encoding.final_detunings, &prep.realized_v).map_err(ExperimentError::Pulse)?;
    let record = RecordingOptions {
        samples: cfg.samples,
        target: Some(prep.target.clone()),
        ground_set: Some(prep.ground_set.clone()),
        population_threshold: Some(cfg.population_threshold),
        spectrum_levels: cfg.spectrum_levels,
    };
    let init = StateVector::ground(g.n()).map_err(ExperimentError::Hamiltonian)?;
    let traj = propagate(&init, &sched, cfg.integrator.steps_for(control.duration), cfg.integrator.method, &record)
        .map_err(ExperimentError::Evolution)?;
    // Final metrics come from the same propagation path the objective uses,
    // so they reproduce the optimiser's value exactly; the recorded
    // trajectory agrees to rounding.
    let final_state = prep.objective(cfg.integrator, None).final_state(&sched).map_err(ExperimentError::Evolution)?;
    let result = prep.metrics(&final_state)?;
    let decoded = decode_solutions(&final_state, cfg.population_threshold)
        .into_iter()
        .map(|(a, p)| DecodedSolution {
            assignment: a.to_string(),
            ket: a.ket(),
            probability: p,
            cost: g.cost(&a).unwrap_or(f64::NAN),
            optimal: prep.exact.is_optimal(&a),
        })
        .collect::<Vec<_>>();
    let final_run_s = t2.elapsed().as_secs_f64();

    let hardness = if g.n() <= SPECTRUM_CAP && prep.exact.c_opt > 0.0 && !cfg.hardness_cutoffs.is_empty() {
        Some(hardness_convergence_scan(g, &cfg.hardness_cutoffs, cfg.hardness_tol).map_err(ExperimentError::Oracle)?)
    } else {
        None
    };

    Ok(SolveRecord {
        graph_name: g.name().map(str::to_string),
        n: g.n(),
        encoding: prep.encoding.clone(),
        layout: prep.layout.clone(),
        embedding_residual: prep.embedding_residual,
        feasibility: prep.feasibility.clone(),
        realized_interactions: prep.realized_v.clone(),
        c_opt: prep.exact.c_opt,
        d_opt: prep.exact.d_opt(),
        hardness,
        initial,
        optimizer,
        slew: sched.slew_rates(),
        control,
        result,
        populated_states: decoded.len(),
        decoded,
        max_norm_drift: traj.max_norm_drift,
        renormalizations: traj.renormalizations,
        timings: Timings { prepare_s, optimize_s, final_run_s },
        trajectory: Some(traj),
        schedule: Some(sched),
    })
}

/// Runs the pipeline from the prepared guess, optionally with in-loop noise
/// (which scales the budgets).
pub fn optimize_control(
    prep: &Prepared,
    cfg: &SolveConfig,
    noise: Option<InLoopNoise>,
) -> Result<OptimizerReport, ExperimentError> {
    let noisy = noise.as_ref().is_some_and(|n| n.spec.level > 0.0 && !n.seeds.is_empty());
    let objective = prep.objective(cfg.integrator, noise);
    bnb_pipeline(&objective, &prep.guess.to_flat(), Some(cfg.protocol.bounds()), &cfg.pipeline.scaled(noisy))
        .map_err(ExperimentError::Optimize)
}

fn derived_seed(base: u64, stream: u64, i: u64) -> u64 {
    base ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03) ^ (i + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseStudyConfig {
    pub level: f64,
    /// Draws used to evaluate both protocols.
    pub draws: usize,
    /// Draws averaged by the objective during in-loop optimisation.
    pub in_loop_draws: usize,
    pub seed: u64,
    pub granularity: crate::pulse::NoiseGranularity,
}

impl Default for NoiseStudyConfig {
    fn default() -> Self {
        Self { level: 0.08, draws: 50, in_loop_draws: 4, seed: 0, granularity: Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseDraw {
    pub seed: u64,
    pub energy: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseArm {
    pub mode: NoiseMode,
    /// Noise-free metrics of the protocol this arm optimised.
    pub clean: FinalMetrics,
    pub control: ControlVector,
    pub draws: Vec<NoiseDraw>,
    pub median_energy: f64,
    pub median_fidelity: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub level: f64,
    pub draw_seeds: Vec<u64>,
    pub in_loop_seeds: Vec<u64>,
    pub post_hoc: NoiseArm,
    pub in_loop: NoiseArm,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn noise_arm(
    prep: &Prepared,
    cfg: &SolveConfig,
    mode: NoiseMode,
    report: &OptimizerReport,
    spec: NoiseSpec,
    seeds: &[u64],
) -> Result<NoiseArm, ExperimentError> {
    let control = prep.guess.with_flat(&report.best_x);
    let sched =
        build_schedule(&control, &prep.encoding.final_detunings, &prep.realized_v).map_err(ExperimentError::Pulse)?;
    let clean = prep.evaluate(&sched, cfg.integrator)?;
    let draws = seeds
        .par_iter()
        .map(|&seed| {
            let noisy = inject_noise(&sched, &spec.with_seed(seed)).map_err(ExperimentError::Pulse)?;
            let m = prep.evaluate(&noisy, cfg.integrator)?;
            Ok(NoiseDraw { seed, energy: m.energy, fidelity: m.fidelity })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let e: Vec<f64> = draws.iter().map(|d| d.energy).collect();
    let f: Vec<f64> = draws.iter().map(|d| d.fidelity).collect();
    Ok(NoiseArm {
        mode,
        clean,
        control,
        median_energy: median(&e),
        median_fidelity: median(&f),
        draws,
        evaluations: report.evaluations,
    })
}

/// Optimises once without noise and once with in-loop noise, then scores
/// both protocols on the same noise draws.
pub fn noise_study(
    g: &ProblemGraph,
    cfg: &SolveConfig,
    study: &NoiseStudyConfig,
) -> Result<NoiseReport, ExperimentError> {
    if g.n() > 12 {
        return Err(ExperimentError::Config("noise studies are limited to 12 atoms".into()));
    }
    if study.draws == 0 {
        return Err(ExperimentError::Config("need at least one noise draw".into()));
    }
    let spec =
        NoiseSpec { level: study.level, mode: NoiseMode::PostHoc, seed: study.seed, granularity: study.granularity };
    spec.validate().map_err(ExperimentError::Pulse)?;
    let prep = prepare(g, cfg)?;
    let draw_seeds: Vec<u64> = (0..study.draws as u64).map(|i| derived_seed(study.seed, 1, i)).collect();
    let in_loop_seeds: Vec<u64> = (0..study.in_loop_draws as u64).map(|i| derived_seed(study.seed, 2, i)).collect();

    let clean_report = optimize_control(&prep, cfg, None)?;
    let in_loop_spec = NoiseSpec { mode: NoiseMode::InLoop, ..spec };
    let noisy_report =
        optimize_control(&prep, cfg, Some(InLoopNoise { spec: in_loop_spec, seeds: in_loop_seeds.clone() }))?;

    Ok(NoiseReport {
        level: study.level,
        post_hoc: noise_arm(&prep, cfg, NoiseMode::PostHoc, &clean_report, spec, &draw_seeds)?,
        in_loop: noise_arm(&prep, cfg, NoiseMode::InLoop, &noisy_report, spec, &draw_seeds)?,
        draw_seeds,
        in_loop_seeds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub graph_name: String,
    pub n: usize,
    pub hp: Option<f64>,
    pub quantum_error: Option<f64>,
    pub quantum_fidelity: Option<f64>,
    /// `1 − R` of the first annealing run alone.
    pub sa_single_error: Option<f64>,
    /// Mean over runs of `1 − R`.
    pub sa_mean_error: Option<f64>,
    pub error: Option<String>,
}

/// Quantum protocol and simulated annealing side by side on each graph.
/// Failures on one graph are recorded in its row.
pub fn compare(family: &[ProblemGraph], cfg: &SolveConfig, sa: &SaConfig) -> Vec<ComparisonRow> {
    family
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let name = g.name().map_or_else(|| format!("graph_{i}"), str::to_string);
            let mut row = ComparisonRow {
                graph_name: name,
                n: g.n(),
                hp: None,
                quantum_error: None,
                quantum_fidelity: None,
                sa_single_error: None,
                sa_mean_error: None,
                error: None,
            };
            let mut errors = Vec::new();
            match solve(g, cfg) {
                Ok(rec) => {
                    row.hp = rec.hardness.as_ref().map(HardnessScan::converged_value);
                    row.quantum_error = rec.result.approximation_ratio.map(|r| 1.0 - r);
                    row.quantum_fidelity = Some(rec.result.fidelity);
                }
                Err(e) => errors.push(e.to_string()),
            }
            match brute_force_solve(g).map_err(|e| e.to_string()).and_then(|exact| {
                fast_sa_with_optimum(g, sa, Some(exact.c_opt)).map(|r| (r, exact.c_opt)).map_err(|e| e.to_string())
            }) {
                Ok((r, c_opt)) if c_opt > 0.0 => {
                    let errs: Vec<f64> = r.runs.iter().map(|run| 1.0 - run.best_cost / c_opt).collect();
                    row.sa_single_error = errs.first().copied();
                    row.sa_mean_error = Some(errs.iter().sum::<f64>() / errs.len() as f64);
                }
                Ok(_) => errors.push("optimum is zero; ratio undefined".into()),
                Err(e) => errors.push(e),
            }
            if !errors.is_empty() {
                row.error = Some(errors.join("; "));
            }
            row
        })
        .collect()
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    use std::fmt::Write as _;
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    let mut out = String::from("graph_name,N,HP,quantum_error,quantum_fidelity,sa_single_error,sa_mean_error,error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.graph_name,
            r.n,
            opt(r.hp),
            opt(r.quantum_error),
            opt(r.quantum_fidelity),
            opt(r.sa_single_error),
            opt(r.sa_mean_error),
            r.error.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn bounds_cover_guess() {
        let p = ProtocolConfig::default();
        let b = p.bounds();
        let guess = initial_guess(p.duration, p.amplitude, p.delta_g0, p.ramp).unwrap().to_flat();
        assert_eq!(b.dim(), 2 * KNOTS);
        assert_eq!(b.projected(&guess), guess);
    }

    #[test]
    fn seeds_are_distinct_per_stream() {
        let a: Vec<u64> = (0..50).map(|i| derived_seed(0, 1, i)).collect();
        let b: Vec<u64> = (0..50).map(|i| derived_seed(0, 2, i)).collect();
        let mut all = a.clone();
        all.extend(&b);
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 100);
    }

    #[test]
    fn too_many_atoms_rejected() {
        let g = crate::graph::path(crate::graph::ProblemKind::MaxCut, MAX_SIMULATED_ATOMS + 1).unwrap();
        assert!(matches!(prepare(&g, &SolveConfig::default()), Err(ExperimentError::Config(_))));
    }
}
