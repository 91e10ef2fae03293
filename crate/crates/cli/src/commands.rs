//! Subcommand implementations. Each writes its artefacts under the output
//! directory and returns a short summary for stdout.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rydberg_anneal::encoding::{
    embed_layout_with, encode_with, realized_interactions, validate_embedding, AtomLayout, EncodingResult,
    FeasibilityReport, InteractionMatrix,
};
use rydberg_anneal::experiment::{self, ComparisonRow, NoiseReport, SolveRecord};
use rydberg_anneal::graph::{
    brute_force_solve, degeneracy_spectrum, hardness_convergence_scan, CostSpectrum, HardnessScan, SPECTRUM_CAP,
};
use rydberg_anneal::sa::{benchmark_csv, sa_benchmark, sa_iteration_sweep};
use serde::Serialize;

use crate::config::RunConfig;

/// Marks failures that mean "this instance cannot be realised" (exit code 2).
#[derive(Debug)]
pub struct Infeasible(pub String);

impl std::fmt::Display for Infeasible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Infeasible {}

fn lift(e: experiment::ExperimentError) -> anyhow::Error {
    if e.is_infeasibility() {
        Infeasible(e.to_string()).into()
    } else {
        anyhow::Error::new(e)
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    write(dir, name, &serde_json::to_string_pretty(value)?)
}

/// Full record of one `solve` run.
#[derive(Debug, Serialize)]
pub struct RunRecord<'a> {
    pub version: &'static str,
    pub config: &'a RunConfig,
    #[serde(flatten)]
    pub record: &'a SolveRecord,
}

pub fn solve(cfg: &RunConfig) -> Result<String> {
    let g = cfg.single_graph()?;
    let rec = experiment::solve(&g, &cfg.solve).map_err(lift)?;
    let run = RunRecord { version: env!("CARGO_PKG_VERSION"), config: cfg, record: &rec };
    write_json(&cfg.out, "record.json", &run)?;
    if let Some(traj) = &rec.trajectory {
        write(&cfg.out, "trajectory.csv", &traj.to_csv())?;
        write(&cfg.out, "populations.csv", &traj.populations_csv())?;
        if !traj.spectra.is_empty() {
            write(&cfg.out, "spectra.csv", &traj.spectra_csv())?;
        }
    }
    if let Some(sched) = &rec.schedule {
        write(&cfg.out, "schedule.csv", &sched.to_csv(cfg.solve.samples.max(2)))?;
    }
    let r = rec.result.approximation_ratio.map_or_else(|| "n/a".into(), |r| format!("{r:.6}"));
    Ok(format!(
        "R = {r}  F = {:.6}  E(T) = {:.6}  top = {}  ({} evaluations)",
        rec.result.fidelity,
        rec.result.energy,
        rec.result.top_assignment,
        rec.optimizer.as_ref().map_or(0, |o| o.evaluations)
    ))
}

pub fn benchmark_sa(cfg: &RunConfig) -> Result<String> {
    let rows = if cfg.sa_budgets.is_empty() {
        sa_benchmark(&cfg.family_graphs()?, &cfg.sa)?
    } else {
        sa_iteration_sweep(&cfg.single_graph()?, &cfg.sa, &cfg.sa_budgets)?
    };
    write(&cfg.out, "sa_benchmark.csv", &benchmark_csv(&rows))?;
    Ok(format!("{} rows written to {}", rows.len(), cfg.out.join("sa_benchmark.csv").display()))
}

pub fn compare(cfg: &RunConfig) -> Result<String> {
    let family = cfg.family_graphs()?;
    let rows: Vec<ComparisonRow> = experiment::compare(&family, &cfg.solve, &cfg.sa);
    write(&cfg.out, "compare.csv", &experiment::comparison_csv(&rows))?;
    write_json(&cfg.out, "compare.json", &rows)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(format!("{} graphs compared, {failed} with errors", rows.len()))
}

#[derive(Debug, Serialize)]
struct NoiseRecord<'a> {
    version: &'static str,
    config: &'a RunConfig,
    report: &'a NoiseReport,
}

pub fn noise_study(cfg: &RunConfig) -> Result<String> {
    let g = cfg.single_graph()?;
    let report = experiment::noise_study(&g, &cfg.solve, &cfg.noise).map_err(lift)?;
    write_json(
        &cfg.out,
        "noise.json",
        &NoiseRecord { version: env!("CARGO_PKG_VERSION"), config: cfg, report: &report },
    )?;
    let mut csv = String::from("mode,seed,energy,fidelity\n");
    for arm in [&report.post_hoc, &report.in_loop] {
        let mode = match arm.mode {
            rydberg_anneal::pulse::NoiseMode::PostHoc => "post_hoc",
            rydberg_anneal::pulse::NoiseMode::InLoop => "in_loop",
        };
        for d in &arm.draws {
            csv.push_str(&format!("{mode},{},{},{}\n", d.seed, d.energy, d.fidelity));
        }
    }
    write(&cfg.out, "noise_draws.csv", &csv)?;
    Ok(format!(
        "median F: post-hoc {:.4}, in-loop {:.4}",
        report.post_hoc.median_fidelity, report.in_loop.median_fidelity
    ))
}

#[derive(Debug, Serialize)]
struct BruteForceRecord {
    n: usize,
    c_opt: f64,
    d_opt: u64,
    optima: Vec<String>,
    spectrum: Option<CostSpectrum>,
    hardness: Option<HardnessScan>,
}

pub fn brute_force(cfg: &RunConfig) -> Result<String> {
    let g = cfg.single_graph()?;
    let exact = brute_force_solve(&g)?;
    let (spectrum, hardness) = if g.n() <= SPECTRUM_CAP {
        let hardness = if exact.c_opt > 0.0 {
            Some(hardness_convergence_scan(&g, &cfg.solve.hardness_cutoffs, cfg.solve.hardness_tol)?)
        } else {
            None
        };
        (Some(degeneracy_spectrum(&g)?), hardness)
    } else {
        (None, None)
    };
    let record = BruteForceRecord {
        n: g.n(),
        c_opt: exact.c_opt,
        d_opt: exact.d_opt(),
        optima: exact.assignments().iter().map(ToString::to_string).collect(),
        spectrum,
        hardness,
    };
    write_json(&cfg.out, "brute_force.json", &record)?;
    Ok(format!("C_opt = {}  D_opt = {}  optima: {}", record.c_opt, record.d_opt, record.optima.join(" ")))
}

#[derive(Debug, Serialize)]
struct EmbedRecord<'a> {
    encoding: &'a EncodingResult,
    layout: &'a AtomLayout,
    residual: f64,
    feasibility: &'a FeasibilityReport,
    realized_interactions: &'a InteractionMatrix,
}

pub fn embed(cfg: &RunConfig) -> Result<String> {
    let g = cfg.single_graph()?;
    let s = &cfg.solve;
    let enc = encode_with(&g, &s.device, s.scale).map_err(|e| Infeasible(format!("encoding: {e}")))?;
    let (layout, residual) =
        embed_layout_with(&enc, &s.device, s.seed, &s.embed).map_err(|e| Infeasible(format!("embedding: {e}")))?;
    let feasibility = validate_embedding(&layout, &enc, &s.device, &s.embed);
    let realized = realized_interactions(&layout, &s.device)?;
    write_json(
        &cfg.out,
        "layout.json",
        &EmbedRecord {
            encoding: &enc,
            layout: &layout,
            residual,
            feasibility: &feasibility,
            realized_interactions: &realized,
        },
    )?;
    let summary = format!(
        "scale = {:.4}  max edge error = {:.3e}  unwanted ratio = {:.3e}",
        enc.scale, feasibility.max_edge_error, feasibility.unwanted_ratio
    );
    if feasibility.passes {
        Ok(summary)
    } else {
        Err(Infeasible(format!("layout fails validation: {summary}")).into())
    }
}
