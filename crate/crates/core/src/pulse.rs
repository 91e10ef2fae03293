//! Pulse parameterisation: eight interior knots each for `Ω(t)` and
//! `Δ_G(t)`, natural cubic splines through the knots and pinned endpoints,
//! initial guesses, and multiplicative laser noise.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::InteractionMatrix;
use crate::evolution::Schedule;
use crate::hamiltonian::{ground_space, rydberg_diagonal, HamiltonianError, GROUND_SPACE_TOL};

pub const KNOTS: usize = 8;
pub const DEFAULT_DELTA_G0: f64 = -1.0;
pub const DEFAULT_PLATEAU_FRACTION: f64 = 0.3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("duration must be positive and finite, got {0}")]
    Duration(f64),
    #[error("amplitude must be positive and finite, got {0}")]
    Amplitude(f64),
    #[error("initial detuning factor must be nonzero and finite, got {0}")]
    DeltaG0(f64),
    #[error("expected {KNOTS} knot values each, got {omega} and {delta}")]
    KnotCount { omega: usize, delta: usize },
    #[error("knot values must be finite")]
    NonFinite,
    #[error(
        "|g…g⟩ is not a ground state at t = 0 with Δ_G(0) = {delta_g0}: lowest energy {min_energy:.4e} < 0; flip the sign of delta_g0"
    )]
    SignDiagnostic { delta_g0: f64, min_energy: f64 },
    #[error("noise level must lie in [0, 1), got {0}")]
    NoiseLevel(f64),
    #[error("plateau fraction must lie in [0, 1), got {0}")]
    Plateau(f64),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RampShape {
    #[default]
    Linear,
    /// Holds `delta_g0` for the first `plateau_fraction` of the run, then
    /// ramps linearly to 1.
    FlatTopRamp { plateau_fraction: f64 },
}

/// Optimisable pulse parameters. Knot `i` (0-based) sits at `t = (i+1)·T/9`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlVector {
    pub omega_points: Vec<f64>,
    pub delta_points: Vec<f64>,
    pub duration: f64,
    /// Pinned value of `Δ_G(0)`.
    pub delta_g0: f64,
}

impl ControlVector {
    pub fn knot_times(duration: f64) -> Vec<f64> {
        (1..=KNOTS).map(|i| i as f64 * duration / (KNOTS + 1) as f64).collect()
    }

    /// `[Ω knots…, Δ_G knots…]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.omega_points.iter().chain(&self.delta_points).copied().collect()
    }

    /// Inverse of [`to_flat`](Self::to_flat), keeping `duration` and
    /// `delta_g0` of `self`.
    pub fn with_flat(&self, x: &[f64]) -> Self {
        Self {
            omega_points: x[..KNOTS].to_vec(),
            delta_points: x[KNOTS..2 * KNOTS].to_vec(),
            duration: self.duration,
            delta_g0: self.delta_g0,
        }
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(PulseError::Duration(self.duration));
        }
        if self.delta_g0 == 0.0 || !self.delta_g0.is_finite() {
            return Err(PulseError::DeltaG0(self.delta_g0));
        }
        if self.omega_points.len() != KNOTS || self.delta_points.len() != KNOTS {
            return Err(PulseError::KnotCount { omega: self.omega_points.len(), delta: self.delta_points.len() });
        }
        if self.omega_points.iter().chain(&self.delta_points).any(|v| !v.is_finite()) {
            return Err(PulseError::NonFinite);
        }
        Ok(())
    }
}

/// `Ω(t) = A (1 − cos(2πt/T))² / 4`, zero at both ends with peak `A` at
/// `T/2`.
pub fn omega_guess(t: f64, duration: f64, amplitude: f64) -> f64 {
    let c = 1.0 - (2.0 * std::f64::consts::PI * t / duration).cos();
    amplitude * c * c / 4.0
}

pub fn ramp_value(t: f64, duration: f64, delta_g0: f64, shape: RampShape) -> f64 {
    match shape {
        RampShape::Linear => delta_g0 + (1.0 - delta_g0) * t / duration,
        RampShape::FlatTopRamp { plateau_fraction } => {
            let start = plateau_fraction * duration;
            if t <= start {
                delta_g0
            } else {
                delta_g0 + (1.0 - delta_g0) * (t - start) / (duration - start)
            }
        }
    }
}

/// Samples the guess shapes at the knot times. A positive `delta_g0` is
/// flipped so the protocol starts from `|g…g⟩` as its ground state.
pub fn initial_guess(
    duration: f64,
    amplitude: f64,
    delta_g0: f64,
    shape: RampShape,
) -> Result<ControlVector, PulseError> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(PulseError::Duration(duration));
    }
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(PulseError::Amplitude(amplitude));
    }
    if delta_g0 == 0.0 || !delta_g0.is_finite() {
        return Err(PulseError::DeltaG0(delta_g0));
    }
    if let RampShape::FlatTopRamp { plateau_fraction } = shape {
        if !(0.0..1.0).contains(&plateau_fraction) {
            return Err(PulseError::Plateau(plateau_fraction));
        }
    }
    let delta_g0 = -delta_g0.abs();
    let times = ControlVector::knot_times(duration);
    Ok(ControlVector {
        omega_points: times.iter().map(|&t| omega_guess(t, duration, amplitude)).collect(),
        delta_points: times.iter().map(|&t| ramp_value(t, duration, delta_g0, shape)).collect(),
        duration,
        delta_g0,
    })
}

/// Natural cubic spline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the nodes.
    m: Vec<f64>,
}

impl CubicSpline {
    /// `x` strictly increasing, at least two nodes.
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n, "spline needs matching node lists");
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let (h0, h1) = (x[i + 1] - x[i], x[i + 2] - x[i + 1]);
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Self { x, y, m }
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }
}

/// Piecewise-linear multiplicative factor on a uniform grid, 1 at both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SampleNoise {
    omega: Vec<f64>,
    delta: Vec<f64>,
}

fn grid_factor(f: &[f64], t: f64, duration: f64) -> f64 {
    let segs = f.len() - 1;
    let u = (t / duration).clamp(0.0, 1.0) * segs as f64;
    let i = (u.floor() as usize).min(segs - 1);
    let w = u - i as f64;
    f[i] * (1.0 - w) + f[i + 1] * w
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub control: ControlVector,
    pub final_detunings: Vec<f64>,
    pub realized_v: InteractionMatrix,
    omega_spline: CubicSpline,
    delta_spline: CubicSpline,
    sample_noise: Option<SampleNoise>,
}

pub fn build_schedule(
    cv: &ControlVector,
    final_detunings: &[f64],
    realized_v: &InteractionMatrix,
) -> Result<PulseSchedule, PulseError> {
    cv.validate()?;
    let diag0 = rydberg_diagonal(&final_detunings.iter().map(|d| cv.delta_g0 * d).collect::<Vec<_>>(), realized_v)?;
    let (min_energy, gs) = ground_space(&diag0, GROUND_SPACE_TOL);
    if gs.first() != Some(&0) {
        return Err(PulseError::SignDiagnostic { delta_g0: cv.delta_g0, min_energy });
    }
    let mut times = vec![0.0];
    times.extend(ControlVector::knot_times(cv.duration));
    times.push(cv.duration);
    let pinned = |first: f64, interior: &[f64], last: f64| {
        let mut v = vec![first];
        v.extend_from_slice(interior);
        v.push(last);
        v
    };
    Ok(PulseSchedule {
        control: cv.clone(),
        final_detunings: final_detunings.to_vec(),
        realized_v: realized_v.clone(),
        omega_spline: CubicSpline::natural(times.clone(), pinned(0.0, &cv.omega_points, 0.0)),
        delta_spline: CubicSpline::natural(times, pinned(cv.delta_g0, &cv.delta_points, 1.0)),
        sample_noise: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlewReport {
    /// Largest peak `|dΔ_j/dt|` over atoms, in 2π·MHz/μs.
    pub max_rate: f64,
    /// Smallest peak `|dΔ_j/dt|` over atoms with nonzero final detuning.
    pub min_rate: f64,
}

impl PulseSchedule {
    pub fn delta_g0(&self) -> f64 {
        self.control.delta_g0
    }

    pub fn slew_rates(&self) -> SlewReport {
        let samples = 2000;
        let peak = (0..=samples)
            .map(|i| self.delta_g_rate(i as f64 * self.control.duration / samples as f64).abs())
            .fold(0.0, f64::max);
        let mags: Vec<f64> = self.final_detunings.iter().map(|d| d.abs()).filter(|d| *d > 0.0).collect();
        SlewReport {
            max_rate: peak * mags.iter().copied().fold(0.0, f64::max),
            min_rate: peak * mags.iter().copied().fold(f64::INFINITY, f64::min).min(f64::MAX),
        }
    }

    pub fn delta_g_rate(&self, t: f64) -> f64 {
        let base = self.delta_spline.derivative(t);
        match &self.sample_noise {
            None => base,
            Some(sn) => {
                // Product rule with the piecewise-linear factor.
                let d = self.control.duration;
                let segs = (sn.delta.len() - 1) as f64;
                let u = (t / d).clamp(0.0, 1.0) * segs;
                let i = (u.floor() as usize).min(sn.delta.len() - 2);
                let slope = (sn.delta[i + 1] - sn.delta[i]) * segs / d;
                base * grid_factor(&sn.delta, t, d) + self.delta_spline.eval(t) * slope
            }
        }
    }

    /// Knot table (`t,omega,delta_g`) followed by a blank line and a dense
    /// table with the same columns.
    pub fn to_csv(&self, dense_samples: usize) -> String {
        let mut out = String::from("# knots\nt,omega,delta_g\n");
        for (i, t) in self.omega_spline.x.iter().enumerate() {
            let _ = writeln!(out, "{t:.9},{:.12e},{:.12e}", self.omega_spline.y[i], self.delta_spline.y[i]);
        }
        out.push_str("\n# samples\nt,omega,delta_g\n");
        let n = dense_samples.max(1);
        for i in 0..=n {
            let t = i as f64 * self.control.duration / n as f64;
            let _ = writeln!(out, "{t:.9},{:.12e},{:.12e}", self.omega(t), self.delta_g(t));
        }
        out
    }
}

impl Schedule for PulseSchedule {
    fn duration(&self) -> f64 {
        self.control.duration
    }

    fn omega(&self, t: f64) -> f64 {
        let base = self.omega_spline.eval(t).max(0.0);
        match &self.sample_noise {
            None => base,
            Some(sn) => base * grid_factor(&sn.omega, t, self.control.duration),
        }
    }

    fn delta_g(&self, t: f64) -> f64 {
        let base = self.delta_spline.eval(t);
        match &self.sample_noise {
            None => base,
            Some(sn) => base * grid_factor(&sn.delta, t, self.control.duration),
        }
    }

    fn final_detunings(&self) -> &[f64] {
        &self.final_detunings
    }

    fn interactions(&self) -> &InteractionMatrix {
        &self.realized_v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Noise added to an already optimised protocol.
    #[default]
    PostHoc,
    /// Noise added to every evaluation during optimisation.
    InLoop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NoiseGranularity {
    /// One factor per interior knot, then re-splined.
    #[default]
    Knot,
    /// Factors on a uniform time grid, interpolated linearly and fixed to 1
    /// at both ends.
    Sample { segments: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// Factors are `1 + η`, `η ~ U[−level, level]`.
    pub level: f64,
    pub mode: NoiseMode,
    pub seed: u64,
    pub granularity: NoiseGranularity,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { level: 0.0, mode: NoiseMode::PostHoc, seed: 0, granularity: NoiseGranularity::Knot }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), PulseError> {
        if !(0.0..1.0).contains(&self.level) {
            return Err(PulseError::NoiseLevel(self.level));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Multiplies `Ω` and `Δ_G` by seeded random factors. Endpoint pins are
/// untouched; level 0 returns the schedule unchanged.
pub fn inject_noise(sched: &PulseSchedule, spec: &NoiseSpec) -> Result<PulseSchedule, PulseError> {
    spec.validate()?;
    if spec.level == 0.0 {
        return Ok(sched.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut factor = || 1.0 + rng.random_range(-spec.level..=spec.level);
    match spec.granularity {
        NoiseGranularity::Knot => {
            let mut cv = sched.control.clone();
            cv.omega_points.iter_mut().for_each(|v| *v *= factor());
            cv.delta_points.iter_mut().for_each(|v| *v *= factor());
            let mut noisy = build_schedule(&cv, &sched.final_detunings, &sched.realized_v)?;
            noisy.sample_noise = sched.sample_noise.clone();
            Ok(noisy)
        }
        NoiseGranularity::Sample { segments } => {
            let segments = segments.max(1);
            let mut grid = |_: ()| {
                let mut f: Vec<f64> = (0..=segments).map(|_| factor()).collect();
                f[0] = 1.0;
                f[segments] = 1.0;
                f
            };
            let omega = grid(());
            let delta = grid(());
            let mut noisy = sched.clone();
            noisy.sample_noise = Some(SampleNoise { omega, delta });
            Ok(noisy)
        }
    }
}
