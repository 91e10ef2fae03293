mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rydberg_anneal::encoding::{embed_layout, encode, realized_interactions, DeviceParams, InteractionMatrix};
use rydberg_anneal::evolution::{
    evolve, propagate, ConstantSchedule, Integrator, IntegratorSettings, RecordingOptions, Schedule,
};
use rydberg_anneal::hamiltonian::{rydberg_diagonal, StateVector};
use rydberg_anneal::pulse::{build_schedule, initial_guess, ControlVector, PulseSchedule, RampShape};

/// Same Hamiltonian run backwards in time.
struct Reversed<'a, S>(&'a S);

impl<S: Schedule> Schedule for Reversed<'_, S> {
    fn duration(&self) -> f64 {
        self.0.duration()
    }
    fn omega(&self, t: f64) -> f64 {
        self.0.omega(self.0.duration() - t)
    }
    fn delta_g(&self, t: f64) -> f64 {
        self.0.delta_g(self.0.duration() - t)
    }
    fn final_detunings(&self) -> &[f64] {
        self.0.final_detunings()
    }
    fn interactions(&self) -> &InteractionMatrix {
        self.0.interactions()
    }
}

fn conjugate(s: &StateVector) -> StateVector {
    StateVector::from_amplitudes(s.amplitudes().iter().map(|a| a.conj()).collect()).unwrap()
}

/// Schedule on a realised layout for the given fixture graph.
fn fixture_schedule(g: &rydberg_anneal::graph::ProblemGraph, control: &ControlVector) -> PulseSchedule {
    let dev = DeviceParams::default();
    let enc = encode(g, &dev).unwrap();
    let layout = embed_layout(&enc, &dev, 0).unwrap();
    let v = realized_interactions(&layout, &dev).unwrap();
    build_schedule(control, &enc.final_detunings, &v).unwrap()
}

fn two_atom_schedule(control: &ControlVector) -> PulseSchedule {
    let mut v = InteractionMatrix::zeros(2);
    v.set(0, 1, 37.0);
    build_schedule(control, &[-25.0, -31.0], &v).unwrap()
}

/// Dense `4×4` Hamiltonian with `H = Ω/2 Σ X_j + diag`.
fn dense_h(omega: f64, diag: &[f64]) -> DMatrix<Complex64> {
    let dim = diag.len();
    let n = dim.trailing_zeros() as usize;
    let mut h = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for b in 0..dim {
        h[(b, b)] = Complex64::new(diag[b], 0.0);
        for j in 0..n {
            h[(b ^ (1 << j), b)] += Complex64::new(omega / 2.0, 0.0);
        }
    }
    h
}

/// Sub-stepped midpoint matrix exponentials.
fn dense_oracle(sched: &dyn Schedule, substeps: usize) -> Vec<Complex64> {
    let dim = 1 << sched.n();
    let mut psi = nalgebra::DVector::from_element(dim, Complex64::new(0.0, 0.0));
    psi[0] = Complex64::new(1.0, 0.0);
    let dt = sched.duration() / substeps as f64;
    for k in 0..substeps {
        let t = (k as f64 + 0.5) * dt;
        let diag = rydberg_diagonal(&sched.detunings(t), sched.interactions()).unwrap();
        let u = (dense_h(sched.omega(t), diag.energies()) * Complex64::new(0.0, -dt)).exp();
        psi = u * psi;
    }
    psi.iter().copied().collect()
}

#[test]
fn rabi_oscillation_over_ten_microseconds() {
    let omega = 2.0 * std::f64::consts::PI * 1.3;
    let sched = ConstantSchedule {
        duration: 10.0,
        omega,
        delta_g: 0.0,
        final_detunings: vec![0.0],
        interactions: InteractionMatrix::zeros(1),
    };
    for method in [Integrator::Splitting4, Integrator::Rk4] {
        let rec = RecordingOptions { samples: 400, ground_set: Some(vec![1]), ..Default::default() };
        let traj = propagate(&StateVector::ground(1).unwrap(), &sched, 20_000, method, &rec).unwrap();
        for (t, p) in traj.times.iter().zip(&traj.fidelity) {
            let exact = (omega * t / 2.0).sin().powi(2);
            assert!((p - exact).abs() < 1e-6, "{method:?} t={t}: {p} vs {exact}");
        }
    }
}

#[test]
fn two_atoms_match_dense_exponential() {
    let mut control = initial_guess(2.0, 18.0, -1.0, RampShape::Linear).unwrap();
    // Make the pulse less regular than the default guess.
    for (i, w) in control.omega_points.iter_mut().enumerate() {
        *w *= 1.0 + 0.2 * (i as f64).sin();
    }
    for (i, d) in control.delta_points.iter_mut().enumerate() {
        *d += 0.15 * (1.7 * i as f64).cos();
    }
    let sched = two_atom_schedule(&control);
    let oracle = dense_oracle(&sched, 40_000);
    for method in [Integrator::Splitting4, Integrator::Rk4] {
        let psi = evolve(&StateVector::ground(2).unwrap(), &sched, 4000, method).unwrap();
        let err = psi.amplitudes().iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{method:?}: max amplitude error {err:e}");
    }
}

#[test]
fn norm_drift_small_over_fifteen_microseconds() {
    let g = &common::weighted_n5()[0];
    let control = initial_guess(15.0, 20.0, -1.0, RampShape::Linear).unwrap();
    let sched = fixture_schedule(g, &control);
    let steps = IntegratorSettings::default().steps_for(15.0);
    let rec = RecordingOptions { samples: 50, ..Default::default() };
    let traj = propagate(&StateVector::ground(5).unwrap(), &sched, steps, Integrator::default(), &rec).unwrap();
    assert!(traj.max_norm_drift < 1e-8, "drift {:e}", traj.max_norm_drift);
    assert_eq!(traj.renormalizations, 0);
}

#[test]
fn integrators_agree_at_default_resolution() {
    let g = &common::weighted_n5()[3];
    let sched = fixture_schedule(g, &initial_guess(3.5, 20.0, -1.0, RampShape::Linear).unwrap());
    let steps = IntegratorSettings::default().steps_for(3.5);
    let init = StateVector::ground(5).unwrap();
    let a = evolve(&init, &sched, steps, Integrator::Splitting4).unwrap();
    let b = evolve(&init, &sched, 4 * steps, Integrator::Rk4).unwrap();
    assert!(a.distance(&b) < 1e-5, "distance {:e}", a.distance(&b));
}

#[test]
fn splitting_converges_at_fourth_order() {
    let g = &common::weighted_n5()[1];
    let sched = fixture_schedule(g, &initial_guess(2.0, 25.0, -1.0, RampShape::Linear).unwrap());
    let init = StateVector::ground(5).unwrap();
    let run = |s| evolve(&init, &sched, s, Integrator::Splitting4).unwrap();
    let (a, b, c) = (run(500), run(1000), run(2000));
    let ratio = a.distance(&b) / b.distance(&c);
    assert!(ratio > 12.0 && ratio < 20.0, "error ratio {ratio}");
}

#[test]
fn evolution_is_deterministic() {
    let g = &common::weighted_n5()[2];
    let sched = fixture_schedule(g, &initial_guess(3.5, 20.0, -1.0, RampShape::Linear).unwrap());
    let init = StateVector::ground(5).unwrap();
    let a = evolve(&init, &sched, 3000, Integrator::default()).unwrap();
    let b = evolve(&init, &sched, 3000, Integrator::default()).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Conjugating the final state and running the schedule backwards
    /// returns the conjugated initial state.
    #[test]
    fn time_reversal(
        omegas in prop::collection::vec(0.0f64..30.0, 8),
        deltas in prop::collection::vec(-1.5f64..1.5, 8),
        v01 in 5.0f64..80.0,
        v12 in 5.0f64..80.0,
        v02 in 0.0f64..5.0,
    ) {
        let mut control = initial_guess(1.5, 10.0, -1.0, RampShape::Linear).unwrap();
        control.omega_points = omegas;
        control.delta_points = deltas;
        let mut v = InteractionMatrix::zeros(3);
        v.set(0, 1, v01);
        v.set(1, 2, v12);
        v.set(0, 2, v02);
        let sched = build_schedule(&control, &[-20.0, -35.0, -15.0], &v).unwrap();
        let init = StateVector::ground(3).unwrap();
        let fwd = evolve(&init, &sched, 3000, Integrator::Splitting4).unwrap();
        let back = evolve(&conjugate(&fwd), &Reversed(&sched), 3000, Integrator::Splitting4).unwrap();
        prop_assert!(conjugate(&back).distance(&init) < 1e-8);
    }

    /// Halving the step leaves the state unchanged to integration accuracy.
    #[test]
    fn step_halving_stable(
        omegas in prop::collection::vec(0.0f64..30.0, 8),
        deltas in prop::collection::vec(-1.5f64..1.5, 8),
    ) {
        let mut control = initial_guess(1.0, 10.0, -1.0, RampShape::Linear).unwrap();
        control.omega_points = omegas;
        control.delta_points = deltas;
        let sched = two_atom_schedule(&control);
        let init = StateVector::ground(2).unwrap();
        let a = evolve(&init, &sched, 2000, Integrator::Splitting4).unwrap();
        let b = evolve(&init, &sched, 4000, Integrator::Splitting4).unwrap();
        prop_assert!(a.distance(&b) < 1e-5);
    }
}
