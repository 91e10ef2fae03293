mod common;

use rydberg_anneal::experiment::{
    compare, comparison_csv, noise_study, solve, ExperimentError, NoiseStudyConfig, SolveConfig,
};
use rydberg_anneal::graph::{path, random_gnp, Edge, ProblemGraph, ProblemKind};
use rydberg_anneal::optimize::PipelineConfig;
use rydberg_anneal::sa::SaConfig;

fn quick_config() -> SolveConfig {
    let mut cfg = SolveConfig::default();
    cfg.integrator.steps_per_us = 500.0;
    cfg.pipeline = PipelineConfig {
        stage1_max_iter: 2,
        nm_max_iter: 40,
        nm_max_fev: 40,
        stage3_max_iter: 1,
        ..Default::default()
    };
    cfg.samples = 20;
    cfg
}

#[test]
fn single_edge_is_solved() {
    let g = ProblemGraph::new(ProblemKind::MaxCut, 2, None, vec![Edge { a: 0, b: 1, weight: 1.0 }]).unwrap();
    let rec = solve(&g, &SolveConfig::default()).unwrap();
    assert_eq!(rec.result.approximation_ratio, Some(1.0));
    assert!(rec.result.fidelity >= 0.99, "F = {}", rec.result.fidelity);
    assert!(rec.result.energy <= rec.initial.energy);
    assert!(rec.decoded.iter().any(|d| d.optimal));
}

#[test]
fn weight_spread_beyond_device_is_infeasible() {
    let edges = vec![Edge { a: 0, b: 1, weight: 1.0 }, Edge { a: 1, b: 2, weight: 1e6 }];
    let g = ProblemGraph::new(ProblemKind::MaxCut, 3, None, edges).unwrap();
    let err = solve(&g, &quick_config()).unwrap_err();
    assert!(matches!(err, ExperimentError::Encoding(_)), "{err}");
    assert!(err.is_infeasibility());
}

#[test]
fn record_is_self_consistent() {
    let g = &common::weighted_n5()[4];
    let rec = solve(g, &quick_config()).unwrap();
    let top = rec.decoded.first().expect("populated states");
    assert_eq!(top.assignment, rec.result.top_assignment);
    let r = top.cost / rec.c_opt;
    assert!((r - rec.result.approximation_ratio.unwrap()).abs() <= 1e-12);
    let traj = rec.trajectory.as_ref().unwrap();
    assert!((traj.fidelity.last().unwrap() - rec.result.fidelity).abs() < 1e-12);
    assert!((traj.energy.last().unwrap() - rec.result.energy).abs() < 1e-9);
    let opt = rec.optimizer.as_ref().unwrap();
    assert!(opt.best_value <= opt.initial_value);
    assert_eq!(opt.best_value, rec.result.energy);
    assert!(rec.hardness.is_some());
}

#[test]
fn solve_is_deterministic() {
    let g = path(ProblemKind::Mis, 4).unwrap();
    let a = solve(&g, &quick_config()).unwrap();
    let b = solve(&g, &quick_config()).unwrap();
    assert_eq!(a.control, b.control);
    assert_eq!(a.result, b.result);
    assert_eq!(a.layout, b.layout);
    assert_eq!(a.optimizer.as_ref().unwrap().log, b.optimizer.as_ref().unwrap().log);
}

#[test]
fn zero_noise_reproduces_clean_run() {
    let g = path(ProblemKind::MaxCut, 4).unwrap();
    let cfg = quick_config();
    let clean = solve(&g, &cfg).unwrap();
    let study = NoiseStudyConfig { level: 0.0, draws: 5, in_loop_draws: 2, ..Default::default() };
    let rep = noise_study(&g, &cfg, &study).unwrap();
    assert_eq!(rep.draw_seeds.len(), 5);
    for arm in [&rep.post_hoc, &rep.in_loop] {
        assert_eq!(arm.control, clean.control);
        assert_eq!(arm.clean.energy.to_bits(), clean.result.energy.to_bits());
        assert!(arm.draws.iter().all(|d| d.energy.to_bits() == clean.result.energy.to_bits()));
    }
}

#[test]
fn noise_study_rejects_large_registers() {
    let g = random_gnp(ProblemKind::MaxCut, 13, 0.3, None, 1).unwrap();
    assert!(noise_study(&g, &quick_config(), &NoiseStudyConfig::default()).is_err());
}

#[test]
fn comparison_table_is_complete() {
    let family: Vec<ProblemGraph> = (4..=9).map(|n| path(ProblemKind::MaxCut, n).unwrap()).collect();
    let mut cfg = quick_config();
    cfg.optimize = false;
    let rows = compare(&family, &cfg, &SaConfig { runs: 10, ..SaConfig::default() });
    assert_eq!(rows.len(), 6);
    for (row, g) in rows.iter().zip(&family) {
        assert!(row.error.is_none(), "{row:?}");
        assert_eq!(row.n, g.n());
        let scan =
            rydberg_anneal::graph::hardness_convergence_scan(g, &cfg.hardness_cutoffs, cfg.hardness_tol).unwrap();
        assert_eq!(row.hp, Some(scan.converged_value()));
        assert!(row.quantum_error.is_some() && row.sa_single_error.is_some() && row.sa_mean_error.is_some());
    }
    assert_eq!(comparison_csv(&rows).lines().count(), 7);
}

/// Regression: the optimised pulse reaches the optimum on these weighted
/// instances, so its error never exceeds that of one short SA run.
#[test]
fn quantum_matches_or_beats_single_sa_run() {
    let graphs: Vec<ProblemGraph> = common::weighted_n5().into_iter().take(3).collect();
    let sa = SaConfig { iterations: 4, runs: 1, ..SaConfig::default() };
    let rows = compare(&graphs, &SolveConfig::default(), &sa);
    for row in rows {
        let (q, s) = (row.quantum_error.unwrap(), row.sa_single_error.unwrap());
        assert!(q <= s + 1e-12, "{row:?}");
    }
}
