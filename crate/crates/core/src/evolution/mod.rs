//! Time evolution under `H(t) = Σ_j Δ_G(t) Δ_j(T) n_j + Σ_{j<k} V_jk n_j n_k
//! + (Ω(t)/2) Σ_j σˣ_j`, plus observables on the evolving state.

mod spectrum;

pub use spectrum::{instantaneous_spectrum, SpectrumError, DENSE_SPECTRUM_LIMIT, SPECTRUM_LIMIT};

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::InteractionMatrix;
use crate::graph::{bitstring, Assignment};
use crate::hamiltonian::{
    apply_hamiltonian_into, rydberg_diagonal, DiagonalHamiltonian, HamiltonianError, StateVector,
};

/// Drift above which the state is renormalised (and the event recorded).
pub const RENORMALIZE_THRESHOLD: f64 = 1e-9;
/// Drift above which propagation is aborted.
pub const NORM_FAILURE_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_STEPS_PER_US: f64 = 2000.0;
pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_POPULATION_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("norm drift {drift:.3e} at t = {time:.6} μs exceeds {NORM_FAILURE_THRESHOLD:.0e}; use more steps")]
    NormDrift { drift: f64, time: f64 },
    #[error("step count must be at least 1")]
    NoSteps,
    #[error("schedule has {schedule} atoms, state has {state}")]
    SizeMismatch { schedule: usize, state: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// A drive protocol: `Δ_j(t) = Δ_G(t)·Δ_j(T)` and a global `Ω(t)`.
pub trait Schedule: Sync {
    fn duration(&self) -> f64;
    fn omega(&self, t: f64) -> f64;
    fn delta_g(&self, t: f64) -> f64;
    fn final_detunings(&self) -> &[f64];
    fn interactions(&self) -> &InteractionMatrix;

    fn n(&self) -> usize {
        self.final_detunings().len()
    }

    /// Detunings `Δ_G(t)·Δ_j(T)`.
    fn detunings(&self, t: f64) -> Vec<f64> {
        let g = self.delta_g(t);
        self.final_detunings().iter().map(|d| g * d).collect()
    }
}

/// Constant `Ω` and `Δ_G` over `[0, T]`, mainly for checks against closed
/// forms.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSchedule {
    pub duration: f64,
    pub omega: f64,
    pub delta_g: f64,
    pub final_detunings: Vec<f64>,
    pub interactions: InteractionMatrix,
}

impl Schedule for ConstantSchedule {
    fn duration(&self) -> f64 {
        self.duration
    }
    fn omega(&self, _: f64) -> f64 {
        self.omega
    }
    fn delta_g(&self, _: f64) -> f64 {
        self.delta_g
    }
    fn final_detunings(&self) -> &[f64] {
        &self.final_detunings
    }
    fn interactions(&self) -> &InteractionMatrix {
        &self.interactions
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Fourth-order symmetric splitting: the interaction diagonal is applied
    /// as exact phases and the drive plus detunings as exact single-atom
    /// rotations, composed with triple-jump coefficients. Unitary by
    /// construction.
    #[default]
    Splitting4,
    /// Classical Runge-Kutta on the full Hamiltonian.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorSettings {
    pub steps_per_us: f64,
    pub method: Integrator,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self { steps_per_us: DEFAULT_STEPS_PER_US, method: Integrator::default() }
    }
}

impl IntegratorSettings {
    pub fn steps_for(&self, duration: f64) -> usize {
        ((duration * self.steps_per_us).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordingOptions {
    /// Interior sample count; t = 0 and t = T are always sampled.
    pub samples: usize,
    /// Energies E(t) are measured against this diagonal.
    pub target: Option<DiagonalHamiltonian>,
    /// Fidelity F(t) is measured on these basis indices.
    pub ground_set: Option<Vec<u64>>,
    /// Record sparse populations above this probability.
    pub population_threshold: Option<f64>,
    /// Record this many lowest instantaneous eigenvalues of H(t).
    pub spectrum_levels: Option<usize>,
}

impl RecordingOptions {
    pub fn standard(target: DiagonalHamiltonian, ground_set: Vec<u64>) -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            target: Some(target),
            ground_set: Some(ground_set),
            population_threshold: Some(DEFAULT_POPULATION_THRESHOLD),
            spectrum_levels: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationEntry {
    pub bitstring: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSnapshot {
    pub time: f64,
    pub entries: Vec<PopulationEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub norm_drift: Vec<f64>,
    pub populations: Vec<PopulationSnapshot>,
    pub spectra: Vec<Vec<f64>>,
    pub final_state: StateVector,
    pub max_norm_drift: f64,
    pub renormalizations: usize,
}

impl Trajectory {
    /// CSV with columns `t,E,F,norm_drift`; missing observables are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,E,F,norm_drift\n");
        for i in 0..self.times.len() {
            let e = self.energy.get(i).map(|v| format!("{v:.12e}")).unwrap_or_default();
            let f = self.fidelity.get(i).map(|v| format!("{v:.12e}")).unwrap_or_default();
            let _ = writeln!(out, "{:.9},{e},{f},{:.3e}", self.times[i], self.norm_drift[i]);
        }
        out
    }

    /// CSV with columns `t,bitstring,probability`; bitstrings list atom 0
    /// first.
    pub fn populations_csv(&self) -> String {
        let mut out = String::from("t,bitstring,probability\n");
        for snap in &self.populations {
            for e in &snap.entries {
                let _ = writeln!(out, "{:.9},{},{:.12e}", snap.time, e.bitstring, e.probability);
            }
        }
        out
    }

    /// CSV with columns `t,level,eigenvalue`.
    pub fn spectra_csv(&self) -> String {
        let mut out = String::from("t,level,eigenvalue\n");
        for (t, levels) in self.times.iter().zip(&self.spectra) {
            for (k, e) in levels.iter().enumerate() {
                let _ = writeln!(out, "{t:.9},{k},{e:.12e}");
            }
        }
        out
    }
}

/// Per-atom rotation for `exp(−iτ [[0, b], [b, a]])` on the `(g, e)` pair.
#[derive(Clone, Copy)]
struct Rotation {
    u00: Complex64,
    u01: Complex64,
    u11: Complex64,
}

impl Rotation {
    fn new(a: f64, b: f64, tau: f64) -> Self {
        let r = (a * a / 4.0 + b * b).sqrt();
        let (s, c) = (tau * r).sin_cos();
        // sin(τr)/r → τ as r → 0.
        let sr = if r > 0.0 { s / r } else { tau };
        let phase = Complex64::from_polar(1.0, -tau * a / 2.0);
        Self {
            u00: phase * Complex64::new(c, sr * a / 2.0),
            u11: phase * Complex64::new(c, -sr * a / 2.0),
            u01: phase * Complex64::new(0.0, -sr * b),
        }
    }

    #[inline]
    fn apply(&self, amps: &mut [Complex64], j: usize) {
        let stride = 1usize << j;
        for block in amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (x0, x1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a0, a1) = (*x0, *x1);
                *x0 = self.u00 * a0 + self.u01 * a1;
                *x1 = self.u01 * a0 + self.u11 * a1;
            }
        }
    }
}

const GAMMA1: f64 = 1.351_207_191_959_657_8; // 1 / (2 − 2^{1/3})
const GAMMA2: f64 = 1.0 - 2.0 * GAMMA1;

/// Pre-tabulated pieces of H(t) shared across steps.
struct Propagator<'s, S: Schedule + ?Sized> {
    sched: &'s S,
    n: usize,
    /// Interaction part of the diagonal, Σ V n n.
    interaction: Vec<f64>,
    /// Detuning part per unit Δ_G, Σ Δ_j(T) n_j.
    detuning: Vec<f64>,
    steps: usize,
    h: f64,
    method: Integrator,
    phases: [Vec<Complex64>; 3],
    scratch: [Vec<Complex64>; 5],
}

impl<'s, S: Schedule + ?Sized> Propagator<'s, S> {
    fn new(sched: &'s S, steps: usize, method: Integrator) -> Result<Self, EvolutionError> {
        let n = sched.n();
        let zeros = vec![0.0; n];
        let interaction = rydberg_diagonal(&zeros, sched.interactions())?.energies().to_vec();
        let detuning = rydberg_diagonal(sched.final_detunings(), &InteractionMatrix::zeros(n))?.energies().to_vec();
        let h = sched.duration() / steps as f64;
        let phase =
            |tau: f64| -> Vec<Complex64> { interaction.iter().map(|e| Complex64::from_polar(1.0, -tau * e)).collect() };
        let (phases, scratch) = match method {
            Integrator::Splitting4 => {
                ([phase(GAMMA1 * h / 2.0), phase((GAMMA1 + GAMMA2) * h / 2.0), phase(GAMMA1 * h)], Default::default())
            }
            Integrator::Rk4 => {
                let z = vec![Complex64::new(0.0, 0.0); 1 << n];
                (Default::default(), [z.clone(), z.clone(), z.clone(), z.clone(), z])
            }
        };
        Ok(Self { sched, n, interaction, detuning, steps, h, method, phases, scratch })
    }

    fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.sched.duration()
        } else {
            k as f64 * self.h
        }
    }

    fn rotate_all(&self, amps: &mut [Complex64], t: f64, tau: f64) {
        let omega = self.sched.omega(t);
        let g = self.sched.delta_g(t);
        for (j, d) in self.sched.final_detunings().iter().enumerate() {
            Rotation::new(g * d, omega / 2.0, tau).apply(amps, j);
        }
    }

    fn phase(amps: &mut [Complex64], p: &[Complex64]) {
        for (a, q) in amps.iter_mut().zip(p) {
            *a *= q;
        }
    }

    /// Advances one step from step index `k`. For the splitting scheme the
    /// leading half phase of the first step and trailing half phase of the
    /// last are handled by `open`/`close`.
    fn step(&mut self, amps: &mut [Complex64], k: usize) {
        let t = k as f64 * self.h;
        match self.method {
            Integrator::Splitting4 => {
                let h = self.h;
                let (t1, t2, t3) = (
                    t + GAMMA1 * h / 2.0,
                    t + GAMMA1 * h + GAMMA2 * h / 2.0,
                    t + (GAMMA1 + GAMMA2) * h + GAMMA1 * h / 2.0,
                );
                self.rotate_all(amps, t1, GAMMA1 * h);
                Self::phase(amps, &self.phases[1]);
                self.rotate_all(amps, t2, GAMMA2 * h);
                Self::phase(amps, &self.phases[1]);
                self.rotate_all(amps, t3, GAMMA1 * h);
            }
            Integrator::Rk4 => self.rk4_step(amps, t),
        }
    }

    fn diag_at(&self, t: f64, out: &mut Vec<f64>) {
        let g = self.sched.delta_g(t);
        out.clear();
        out.extend(self.interaction.iter().zip(&self.detuning).map(|(v, d)| v + g * d));
    }

    /// `dψ/dt = −i H(t) ψ`.
    fn derivative(&self, psi: &[Complex64], t: f64, diag: &mut Vec<f64>, out: &mut [Complex64]) {
        self.diag_at(t, diag);
        apply_hamiltonian_into(psi, self.sched.omega(t), diag, out).expect("dimensions fixed at construction");
        for v in out.iter_mut() {
            *v = Complex64::new(v.im, -v.re);
        }
    }

    fn rk4_step(&mut self, amps: &mut [Complex64], t: f64) {
        let h = self.h;
        let mut diag = Vec::with_capacity(amps.len());
        let [k1, k2, k3, k4, tmp] = std::mem::take(&mut self.scratch);
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (k1, k2, k3, k4, tmp);
        self.derivative(amps, t, &mut diag, &mut k1);
        for ((o, a), k) in tmp.iter_mut().zip(amps.iter()).zip(&k1) {
            *o = a + k * (h / 2.0);
        }
        self.derivative(&tmp, t + h / 2.0, &mut diag, &mut k2);
        for ((o, a), k) in tmp.iter_mut().zip(amps.iter()).zip(&k2) {
            *o = a + k * (h / 2.0);
        }
        self.derivative(&tmp, t + h / 2.0, &mut diag, &mut k3);
        for ((o, a), k) in tmp.iter_mut().zip(amps.iter()).zip(&k3) {
            *o = a + k * h;
        }
        self.derivative(&tmp, t + h, &mut diag, &mut k4);
        for (i, a) in amps.iter_mut().enumerate() {
            *a += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        self.scratch = [k1, k2, k3, k4, tmp];
    }

    fn open(&self, amps: &mut [Complex64]) {
        if self.method == Integrator::Splitting4 {
            Self::phase(amps, &self.phases[0]);
        }
    }

    /// Joins two steps (a full γ₁h phase) or closes the last one.
    fn between(&self, amps: &mut [Complex64]) {
        if self.method == Integrator::Splitting4 {
            Self::phase(amps, &self.phases[2]);
        }
    }

    fn close(&self, amps: &mut [Complex64]) {
        if self.method == Integrator::Splitting4 {
            Self::phase(amps, &self.phases[0]);
        }
    }
}

/// Sample step indices: t = 0, `samples` interior points, t = T.
fn sample_steps(steps: usize, samples: usize) -> Vec<usize> {
    let m = samples + 1;
    let mut s: Vec<usize> = (0..=m).map(|i| ((i as f64 / m as f64) * steps as f64).round() as usize).collect();
    s.dedup();
    s
}

struct Recorder<'r> {
    opts: &'r RecordingOptions,
    traj_times: Vec<f64>,
    energy: Vec<f64>,
    fidelity: Vec<f64>,
    norm_drift: Vec<f64>,
    populations: Vec<PopulationSnapshot>,
    spectra: Vec<Vec<f64>>,
}

impl<'r> Recorder<'r> {
    fn record<S: Schedule + ?Sized>(
        &mut self,
        state: &StateVector,
        t: f64,
        drift: f64,
        sched: &S,
    ) -> Result<(), EvolutionError> {
        self.traj_times.push(t);
        self.norm_drift.push(drift);
        if let Some(target) = &self.opts.target {
            self.energy.push(expectation_energy(state, target)?);
        }
        if let Some(gs) = &self.opts.ground_set {
            self.fidelity.push(fidelity(state, gs)?);
        }
        if let Some(th) = self.opts.population_threshold {
            self.populations.push(PopulationSnapshot { time: t, entries: population_snapshot(state, th) });
        }
        if let Some(k) = self.opts.spectrum_levels {
            let diag = rydberg_diagonal(&sched.detunings(t), sched.interactions())?;
            self.spectra.push(instantaneous_spectrum(sched.omega(t), &diag, k)?);
        }
        Ok(())
    }
}

/// Integrates the Schrödinger equation with `steps` fixed steps.
pub fn propagate<S: Schedule + ?Sized>(
    initial: &StateVector,
    sched: &S,
    steps: usize,
    method: Integrator,
    record: &RecordingOptions,
) -> Result<Trajectory, EvolutionError> {
    run(initial, sched, steps, method, Some(record)).map(|(t, _)| t.expect("recording requested"))
}

/// Final state only, without observables.
pub fn evolve<S: Schedule + ?Sized>(
    initial: &StateVector,
    sched: &S,
    steps: usize,
    method: Integrator,
) -> Result<StateVector, EvolutionError> {
    run(initial, sched, steps, method, None).map(|(_, s)| s)
}

fn run<S: Schedule + ?Sized>(
    initial: &StateVector,
    sched: &S,
    steps: usize,
    method: Integrator,
    record: Option<&RecordingOptions>,
) -> Result<(Option<Trajectory>, StateVector), EvolutionError> {
    if steps == 0 {
        return Err(EvolutionError::NoSteps);
    }
    if sched.n() != initial.n() {
        return Err(EvolutionError::SizeMismatch { schedule: sched.n(), state: initial.n() });
    }
    if !(sched.duration() > 0.0) || !sched.duration().is_finite() {
        return Err(EvolutionError::InvalidSchedule(format!("duration {} must be positive", sched.duration())));
    }
    let mut prop = Propagator::new(sched, steps, method)?;
    debug_assert_eq!(prop.n, initial.n());
    let mut state = initial.clone();
    let reference = state.norm_sqr();

    let sample_at = record.map(|r| sample_steps(steps, r.samples)).unwrap_or_default();
    let mut next_sample = 0;
    let mut rec = record.map(|opts| Recorder {
        opts,
        traj_times: Vec::new(),
        energy: Vec::new(),
        fidelity: Vec::new(),
        norm_drift: Vec::new(),
        populations: Vec::new(),
        spectra: Vec::new(),
    });
    let mut max_drift: f64 = 0.0;
    let mut renormalizations = 0;

    // Samples need the state at a step boundary, so the splitting scheme's
    // trailing half phase is applied before recording and the leading one
    // after.
    let mut open = false;
    for k in 0..=steps {
        let is_sample = next_sample < sample_at.len() && sample_at[next_sample] == k;
        if is_sample || k == steps {
            if open {
                prop.close(state.amplitudes_mut());
                open = false;
            }
            let drift = (state.norm_sqr() - reference).abs();
            max_drift = max_drift.max(drift);
            let t = prop.time(k);
            if drift > NORM_FAILURE_THRESHOLD {
                return Err(EvolutionError::NormDrift { drift, time: t });
            }
            if let Some(r) = rec.as_mut() {
                if is_sample {
                    r.record(&state, t, drift, sched)?;
                    next_sample += 1;
                }
            }
            if drift > RENORMALIZE_THRESHOLD {
                state.normalize();
                renormalizations += 1;
            }
        }
        if k == steps {
            break;
        }
        if open {
            prop.between(state.amplitudes_mut());
        } else {
            prop.open(state.amplitudes_mut());
            open = true;
        }
        prop.step(state.amplitudes_mut(), k);
        if method == Integrator::Rk4 {
            let drift = (state.norm_sqr() - reference).abs();
            max_drift = max_drift.max(drift);
            if drift > NORM_FAILURE_THRESHOLD {
                return Err(EvolutionError::NormDrift { drift, time: prop.time(k + 1) });
            }
            if drift > RENORMALIZE_THRESHOLD {
                state.normalize();
                renormalizations += 1;
            }
        }
    }

    let traj = rec.map(|r| Trajectory {
        times: r.traj_times,
        energy: r.energy,
        fidelity: r.fidelity,
        norm_drift: r.norm_drift,
        populations: r.populations,
        spectra: r.spectra,
        final_state: state.clone(),
        max_norm_drift: max_drift,
        renormalizations,
    });
    Ok((traj, state))
}

/// `Σ_b |ψ_b|² E_b`.
pub fn expectation_energy(state: &StateVector, target: &DiagonalHamiltonian) -> Result<f64, HamiltonianError> {
    if state.dim() != target.energies().len() {
        return Err(HamiltonianError::DimensionMismatch { expected: target.energies().len(), found: state.dim() });
    }
    Ok(state.amplitudes().iter().zip(target.energies()).map(|(a, e)| a.norm_sqr() * e).sum())
}

/// `Σ_{g∈gs} |ψ_g|²`.
pub fn fidelity(state: &StateVector, gs: &[u64]) -> Result<f64, HamiltonianError> {
    if gs.is_empty() {
        return Err(HamiltonianError::EmptyGroundSet);
    }
    let amps = state.amplitudes();
    gs.iter()
        .map(|&g| {
            amps.get(g as usize)
                .map(Complex64::norm_sqr)
                .ok_or(HamiltonianError::IndexOutOfRange { index: g, n: state.n() })
        })
        .sum()
}

/// Basis states with probability above `threshold`, most probable first.
pub fn population_snapshot(state: &StateVector, threshold: f64) -> Vec<PopulationEntry> {
    populated(state, threshold)
        .into_iter()
        .map(|(b, p)| PopulationEntry { bitstring: bitstring(b, state.n()), probability: p })
        .collect()
}

/// [`population_snapshot`] decoded to assignments (bit 1 ↔ |e⟩ ↔ X = 1).
pub fn decode_solutions(state: &StateVector, threshold: f64) -> Vec<(Assignment, f64)> {
    populated(state, threshold).into_iter().map(|(b, p)| (Assignment::from_index(b, state.n()), p)).collect()
}

fn populated(state: &StateVector, threshold: f64) -> Vec<(u64, f64)> {
    let mut out: Vec<(u64, f64)> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(b, a)| (b as u64, a.norm_sqr()))
        .filter(|(_, p)| *p > threshold)
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::DiagonalLabel;

    fn rabi(omega: f64, duration: f64) -> ConstantSchedule {
        ConstantSchedule {
            duration,
            omega,
            delta_g: 0.0,
            final_detunings: vec![0.0],
            interactions: InteractionMatrix::zeros(1),
        }
    }

    fn populations_only() -> RecordingOptions {
        RecordingOptions { samples: 20, population_threshold: Some(0.0), ..Default::default() }
    }

    #[test]
    fn diagonal_drive_keeps_populations() {
        let mut v = InteractionMatrix::zeros(3);
        v.set(0, 2, 5.0);
        let sched = ConstantSchedule {
            duration: 2.0,
            omega: 0.0,
            delta_g: 0.7,
            final_detunings: vec![-1.0, 3.0, -2.0],
            interactions: v.clone(),
        };
        let target = rydberg_diagonal(&[-1.0, 3.0, -2.0], &v).unwrap();
        let init = StateVector::basis(3, 5).unwrap();
        for method in [Integrator::Splitting4, Integrator::Rk4] {
            let rec = RecordingOptions { samples: 10, target: Some(target.clone()), ..Default::default() };
            let traj = propagate(&init, &sched, 400, method, &rec).unwrap();
            assert!((traj.final_state.probabilities()[5] - 1.0).abs() < 1e-9);
            assert!(traj.energy.iter().all(|e| (e - target.energies()[5]).abs() < 1e-9));
        }
    }

    #[test]
    fn rabi_oscillation() {
        let omega = 2.0;
        let sched = rabi(omega, 3.0);
        let init = StateVector::ground(1).unwrap();
        let traj = propagate(&init, &sched, 6000, Integrator::Splitting4, &populations_only()).unwrap();
        for (t, snap) in traj.times.iter().zip(&traj.populations) {
            let pe = snap.entries.iter().find(|e| e.bitstring == "1").map_or(0.0, |e| e.probability);
            assert!((pe - (omega * t / 2.0).sin().powi(2)).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn sample_steps_cover_ends() {
        assert_eq!(sample_steps(10, 1), vec![0, 5, 10]);
        let s = sample_steps(1000, 200);
        assert_eq!(s.len(), 202);
        assert_eq!((s[0], *s.last().unwrap()), (0, 1000));
        assert_eq!(sample_steps(2, 5), vec![0, 1, 2]);
    }

    #[test]
    fn zero_steps_rejected() {
        let init = StateVector::ground(1).unwrap();
        assert_eq!(evolve(&init, &rabi(1.0, 1.0), 0, Integrator::Splitting4), Err(EvolutionError::NoSteps));
    }

    #[test]
    fn expectation_examples() {
        let d = DiagonalHamiltonian::new(vec![1.0, -1.0], DiagonalLabel::Custom).unwrap();
        assert_eq!(expectation_energy(&StateVector::basis(1, 1).unwrap(), &d).unwrap(), -1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = StateVector::from_amplitudes(vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)]).unwrap();
        assert!(expectation_energy(&s, &d).unwrap().abs() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let s = StateVector::basis(2, 1).unwrap();
        assert_eq!(fidelity(&s, &[1, 2]).unwrap(), 1.0);
        assert_eq!(fidelity(&s, &[0, 3]).unwrap(), 0.0);
        assert_eq!(fidelity(&s, &[]), Err(HamiltonianError::EmptyGroundSet));
        let h = 0.5f64.sqrt();
        let sup = StateVector::from_amplitudes(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(0.0, -h),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        assert!((fidelity(&sup, &[1, 2]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn snapshot_and_decoding() {
        let s = StateVector::basis(5, 0b00101).unwrap();
        let snap = population_snapshot(&s, 0.01);
        assert_eq!(snap, vec![PopulationEntry { bitstring: "10100".into(), probability: 1.0 }]);
        let dec = decode_solutions(&s, 0.01);
        assert_eq!(dec[0].0.ket(), "|egegg⟩");
        assert_eq!(dec[0].0.to_string(), "10100");
        let s = StateVector::basis(5, 0b10001).unwrap();
        assert_eq!(decode_solutions(&s, 0.01)[0].0.to_string(), "10001");
        assert_eq!(decode_solutions(&StateVector::ground(4).unwrap(), 0.01)[0].0, Assignment::zeros(4));

        let n = 3;
        let amp = Complex64::new((1.0 / 8.0f64).sqrt(), 0.0);
        let uniform = StateVector::from_amplitudes(vec![amp; 1 << n]).unwrap();
        let all = population_snapshot(&uniform, 1.0 / 16.0);
        assert_eq!(all.len(), 8);
        assert!(all.iter().map(|e| e.probability).sum::<f64>() <= 1.0 + 1e-12);
    }
}
