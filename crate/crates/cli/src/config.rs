//! TOML run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rydberg_anneal::experiment::{NoiseStudyConfig, SolveConfig};
use rydberg_anneal::graph::{self, generators, ProblemGraph, ProblemKind};
use rydberg_anneal::sa::SaConfig;
use serde::{Deserialize, Serialize};

/// Longest anneal accepted from a config file, μs.
pub const MAX_DURATION_US: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Graph document, or a JSON array of them for family commands.
    pub graph: Option<PathBuf>,
    /// Extra graph files appended to the family.
    pub graphs: Vec<PathBuf>,
    /// Generated family, used by `benchmark-sa` and `compare`.
    pub family: Option<FamilySpec>,
    pub out: PathBuf,
    /// Overrides every per-module seed when set.
    pub seed: Option<u64>,
    pub solve: SolveConfig,
    pub noise: NoiseStudyConfig,
    pub sa: SaConfig,
    /// Iteration budgets for a single-graph SA sweep; empty runs the family
    /// benchmark instead.
    pub sa_budgets: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            graph: None,
            graphs: Vec::new(),
            family: None,
            out: PathBuf::from("out"),
            seed: None,
            solve: SolveConfig::default(),
            noise: NoiseStudyConfig::default(),
            sa: SaConfig::default(),
            sa_budgets: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Path,
    Cycle,
    Star,
    Gnp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub generator: Generator,
    pub kind: ProblemKind,
    pub n_min: usize,
    pub n_max: usize,
    /// Edge probability for `gnp`.
    #[serde(default = "default_p")]
    pub p: f64,
    /// Uniform weight range for `gnp`; unweighted when absent.
    #[serde(default)]
    pub weights: Option<(f64, f64)>,
    #[serde(default)]
    pub seed: u64,
}

fn default_p() -> f64 {
    0.5
}

impl FamilySpec {
    pub fn build(&self) -> Result<Vec<ProblemGraph>> {
        if self.n_min > self.n_max {
            bail!("family range {}..={} is empty", self.n_min, self.n_max);
        }
        (self.n_min..=self.n_max)
            .map(|n| {
                let g = match self.generator {
                    Generator::Path => generators::path(self.kind, n),
                    Generator::Cycle => generators::cycle(self.kind, n),
                    Generator::Star => generators::star(self.kind, n),
                    Generator::Gnp => generators::random_gnp(self.kind, n, self.p, self.weights, self.seed + n as u64),
                };
                g.with_context(|| format!("generating {:?} graph with {n} vertices", self.generator))
            })
            .collect()
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // Relative graph paths are taken relative to the config file.
        if let Some(dir) = path.parent() {
            let fix = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            };
            if let Some(g) = cfg.graph.as_mut() {
                fix(g);
            }
            cfg.graphs.iter_mut().for_each(fix);
        }
        Ok(cfg)
    }

    /// Applies command-line overrides.
    pub fn apply(&mut self, graph: Option<PathBuf>, seed: Option<u64>, out: Option<PathBuf>) {
        if let Some(g) = graph {
            self.graph = Some(g);
        }
        if let Some(o) = out {
            self.out = o;
        }
        if let Some(s) = seed.or(self.seed) {
            self.seed = Some(s);
            self.solve.seed = s;
            self.noise.seed = s;
            self.sa.seed = s;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.solve.protocol.duration;
        if !(t > 0.0 && t <= MAX_DURATION_US) {
            bail!("anneal duration {t} μs is outside (0, {MAX_DURATION_US}]");
        }
        for p in self.graph.iter().chain(&self.graphs) {
            if !p.exists() {
                bail!("graph file {} does not exist", p.display());
            }
        }
        self.solve.pipeline.validate().map_err(|e| anyhow::anyhow!("pipeline: {e}"))?;
        self.sa.validate().map_err(|e| anyhow::anyhow!("simulated annealing: {e}"))?;
        Ok(())
    }

    /// The single graph named by `graph`.
    pub fn single_graph(&self) -> Result<ProblemGraph> {
        let path = self.graph.as_ref().context("no graph given (use --graph or `graph` in the config)")?;
        let mut graphs = read_graphs(path)?;
        if graphs.len() != 1 {
            bail!("{} holds {} graphs; expected one", path.display(), graphs.len());
        }
        Ok(graphs.remove(0))
    }

    /// All graphs from `graph`, `graphs` and `family`, in that order.
    pub fn family_graphs(&self) -> Result<Vec<ProblemGraph>> {
        let mut out = Vec::new();
        for p in self.graph.iter().chain(&self.graphs) {
            out.extend(read_graphs(p)?);
        }
        if let Some(f) = &self.family {
            out.extend(f.build()?);
        }
        if out.is_empty() {
            bail!("the graph family is empty");
        }
        Ok(out)
    }
}

/// Reads one graph document or a JSON array of them.
pub fn read_graphs(path: &Path) -> Result<Vec<ProblemGraph>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading graph {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing graph {}", path.display()))?;
    let docs = match value {
        serde_json::Value::Array(items) => items,
        other => vec![other],
    };
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph").to_string();
    let multiple = docs.len() > 1;
    docs.into_iter()
        .enumerate()
        .map(|(i, doc)| {
            let g =
                graph::parse_graph(&doc.to_string()).with_context(|| format!("graph #{i} in {}", path.display()))?;
            Ok(match g.name() {
                Some(_) => g,
                None if multiple => g.with_name(format!("{stem}_{i}")),
                None => g.with_name(stem.clone()),
            })
        })
        .collect()
}
