//! Problem graphs for weighted Max-Cut and MIS, their classical cost
//! functions and the exhaustive oracle used to score every solver.
//!
//! Assignments map one-to-one onto computational basis states: vertex `j`
//! is bit `j` of the basis index (little-endian), `X_j = 1` is the Rydberg
//! state `|e⟩`. Bitstrings are printed with vertex 0 first, so `10100`
//! reads as `|egegg⟩`.

pub mod generators;

pub use generators::*;

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest graph the exhaustive oracle will enumerate.
pub const BRUTE_FORCE_CAP: usize = 24;
/// Largest graph for which the full cost table is materialised.
pub const SPECTRUM_CAP: usize = 20;
/// Relative tolerance used to decide that two cost values are equal.
pub const COST_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("malformed graph document: {0}")]
    Parse(String),
    #[error("edge #{index} ({a}, {b}) is a self-loop")]
    SelfLoop { index: usize, a: usize, b: usize },
    #[error("edge #{index} ({a}, {b}) duplicates an earlier edge")]
    DuplicateEdge { index: usize, a: usize, b: usize },
    #[error("edge #{index} ({a}, {b}) references a vertex outside 0..{n}")]
    VertexOutOfRange { index: usize, a: usize, b: usize, n: usize },
    #[error("edge #{index} ({a}, {b}) has non-positive weight {weight}")]
    NonPositiveEdgeWeight { index: usize, a: usize, b: usize, weight: f64 },
    #[error("vertex {vertex} has non-positive weight {weight}")]
    NonPositiveVertexWeight { vertex: usize, weight: f64 },
    #[error("edge #{index} ({a}, {b}) carries a weight, but MIS edges only mark adjacency")]
    WeightOnMisEdge { index: usize, a: usize, b: usize },
    #[error("expected {expected} vertex weights, got {found}")]
    VertexWeightCount { expected: usize, found: usize },
    #[error("a graph needs at least one vertex")]
    Empty,
    #[error("operation needs a {expected} graph, got {found}")]
    KindMismatch { expected: ProblemKind, found: ProblemKind },
    #[error("assignment has length {found}, graph has {expected} vertices")]
    AssignmentLength { expected: usize, found: usize },
    #[error("graph has {n} vertices, above the enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("approximation ratio undefined for optimal cost {c_opt}")]
    UndefinedRatio { c_opt: f64 },
    #[error("spectrum top level ({cost}, {degeneracy}) does not match C_opt={c_opt}, D_opt={d_opt}")]
    SpectrumMismatch { cost: f64, degeneracy: u64, c_opt: f64, d_opt: u64 },
    #[error("cutoff list is empty")]
    EmptyCutoffs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    #[serde(rename = "maxcut")]
    MaxCut,
    #[serde(rename = "mis")]
    Mis,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemKind::MaxCut => write!(f, "maxcut"),
            ProblemKind::Mis => write!(f, "mis"),
        }
    }
}

/// An undirected edge with `a < b`. For MIS graphs the weight is always 1
/// and carries no meaning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemGraph {
    kind: ProblemKind,
    name: Option<String>,
    vertex_weights: Vec<f64>,
    edges: Vec<Edge>,
}

impl ProblemGraph {
    /// Validates and builds a graph. Edge endpoints are normalised to
    /// `a < b`; MIS edge weights are reset to 1.
    pub fn new(
        kind: ProblemKind,
        n: usize,
        vertex_weights: Option<Vec<f64>>,
        edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let vertex_weights = match vertex_weights {
            Some(w) if w.len() != n => return Err(GraphError::VertexWeightCount { expected: n, found: w.len() }),
            Some(w) => w,
            None => vec![1.0; n],
        };
        for (vertex, &weight) in vertex_weights.iter().enumerate() {
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(GraphError::NonPositiveVertexWeight { vertex, weight });
            }
        }
        let mut seen = BTreeSet::new();
        let mut normalised = Vec::with_capacity(edges.len());
        for (index, e) in edges.into_iter().enumerate() {
            let (a, b) = (e.a.min(e.b), e.a.max(e.b));
            if b >= n {
                return Err(GraphError::VertexOutOfRange { index, a: e.a, b: e.b, n });
            }
            if a == b {
                return Err(GraphError::SelfLoop { index, a: e.a, b: e.b });
            }
            if !seen.insert((a, b)) {
                return Err(GraphError::DuplicateEdge { index, a: e.a, b: e.b });
            }
            let weight = match kind {
                ProblemKind::MaxCut => {
                    if !(e.weight > 0.0) || !e.weight.is_finite() {
                        return Err(GraphError::NonPositiveEdgeWeight { index, a: e.a, b: e.b, weight: e.weight });
                    }
                    e.weight
                }
                ProblemKind::Mis => 1.0,
            };
            normalised.push(Edge { a, b, weight });
        }
        Ok(Self { kind, name: None, vertex_weights, edges: normalised })
    }

    /// Max-Cut graph from `(a, b, weight)` triples.
    pub fn maxcut(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        let edges = edges.iter().map(|&(a, b, weight)| Edge { a, b, weight }).collect();
        Self::new(ProblemKind::MaxCut, n, None, edges)
    }

    /// MIS graph from vertex weights and adjacency pairs.
    pub fn mis(weights: Vec<f64>, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let n = weights.len();
        let edges = edges.iter().map(|&(a, b)| Edge { a, b, weight: 1.0 }).collect();
        Self::new(ProblemKind::Mis, n, Some(weights), edges)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn n(&self) -> usize {
        self.vertex_weights.len()
    }

    pub fn vertex_weights(&self) -> &[f64] {
        &self.vertex_weights
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (a, b) = (a.min(b), a.max(b));
        self.edges.iter().any(|e| e.a == a && e.b == b)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n()];
        for e in &self.edges {
            deg[e.a] += 1;
            deg[e.b] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    fn expect_kind(&self, expected: ProblemKind) -> Result<(), GraphError> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(GraphError::KindMismatch { expected, found: self.kind })
        }
    }

    fn check_len(&self, a: &Assignment) -> Result<(), GraphError> {
        if a.len() == self.n() {
            Ok(())
        } else {
            Err(GraphError::AssignmentLength { expected: self.n(), found: a.len() })
        }
    }

    /// Cost of the assignment encoded by basis index `index`, dispatched on
    /// the problem kind. No bounds checks; used in the enumeration hot loops.
    #[inline]
    pub fn cost_of_index(&self, index: u64) -> f64 {
        let bit = |j: usize| (index >> j) & 1;
        match self.kind {
            ProblemKind::MaxCut => self.edges.iter().filter(|e| bit(e.a) != bit(e.b)).map(|e| e.weight).sum(),
            ProblemKind::Mis => {
                let linear: f64 =
                    self.vertex_weights.iter().enumerate().filter(|&(j, _)| bit(j) == 1).map(|(_, w)| w).sum();
                let penalty: f64 = self
                    .edges
                    .iter()
                    .filter(|e| bit(e.a) == 1 && bit(e.b) == 1)
                    .map(|e| self.vertex_weights[e.a] * self.vertex_weights[e.b])
                    .sum();
                linear - penalty
            }
        }
    }

    /// Cost under whichever objective the graph's kind selects.
    pub fn cost(&self, a: &Assignment) -> Result<f64, GraphError> {
        match self.kind {
            ProblemKind::MaxCut => maxcut_cost(self, a),
            ProblemKind::Mis => mis_cost(self, a),
        }
    }
}

/// Binary assignment `X_j ∈ {0, 1}`, one entry per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![false; n] }
    }

    /// Decodes a little-endian basis index.
    pub fn from_index(index: u64, n: usize) -> Self {
        Self { bits: (0..n).map(|j| (index >> j) & 1 == 1).collect() }
    }

    /// Parses a bitstring written vertex 0 first, e.g. `"10100"`.
    pub fn from_bitstring(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' | 'g' => Some(false),
                '1' | 'e' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self::new)
    }

    pub fn index(&self) -> u64 {
        self.bits.iter().enumerate().filter(|(_, &b)| b).fold(0u64, |acc, (j, _)| acc | (1 << j))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, j: usize) -> bool {
        self.bits[j]
    }

    /// Global bit flip.
    pub fn complement(&self) -> Self {
        Self { bits: self.bits.iter().map(|b| !b).collect() }
    }

    /// Atomic-state label such as `|egegg⟩`.
    pub fn ket(&self) -> String {
        let inner: String = self.bits.iter().map(|&b| if b { 'e' } else { 'g' }).collect();
        format!("|{inner}⟩")
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Renders basis index `index` of an `n`-atom register, vertex 0 first.
pub fn bitstring(index: u64, n: usize) -> String {
    (0..n).map(|j| if (index >> j) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Weight of the cut: Σ_(j,k)∈E w_jk (X_j(1−X_k) + X_k(1−X_j)).
pub fn maxcut_cost(g: &ProblemGraph, a: &Assignment) -> Result<f64, GraphError> {
    g.expect_kind(ProblemKind::MaxCut)?;
    g.check_len(a)?;
    Ok(g.edges.iter().filter(|e| a.get(e.a) != a.get(e.b)).map(|e| e.weight).sum())
}

/// Σ_j w_j X_j − Σ_(j,k)∈E w_j w_k X_j X_k.
pub fn mis_cost(g: &ProblemGraph, a: &Assignment) -> Result<f64, GraphError> {
    g.expect_kind(ProblemKind::Mis)?;
    g.check_len(a)?;
    let w = g.vertex_weights();
    let linear: f64 = (0..g.n()).filter(|&j| a.get(j)).map(|j| w[j]).sum();
    let penalty: f64 = g.edges.iter().filter(|e| a.get(e.a) && a.get(e.b)).map(|e| w[e.a] * w[e.b]).sum();
    Ok(linear - penalty)
}

#[inline]
pub(crate) fn costs_equal(x: f64, y: f64) -> bool {
    (x - y).abs() <= COST_MERGE_TOL * x.abs().max(y.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub n: usize,
    pub c_opt: f64,
    /// Basis indices of every optimal assignment, ascending.
    pub optimal_indices: Vec<u64>,
}

impl ExactSolution {
    pub fn d_opt(&self) -> u64 {
        self.optimal_indices.len() as u64
    }

    pub fn assignments(&self) -> Vec<Assignment> {
        self.optimal_indices.iter().map(|&i| Assignment::from_index(i, self.n)).collect()
    }

    pub fn is_optimal(&self, a: &Assignment) -> bool {
        self.optimal_indices.binary_search(&a.index()).is_ok()
    }
}

const CHUNK: u64 = 1 << 14;

pub fn brute_force_solve(g: &ProblemGraph) -> Result<ExactSolution, GraphError> {
    brute_force_solve_capped(g, BRUTE_FORCE_CAP)
}

/// Exhaustive maximisation over all 2^N assignments. The space is streamed
/// in fixed chunks; the result does not depend on how chunks are scheduled.
pub fn brute_force_solve_capped(g: &ProblemGraph, cap: usize) -> Result<ExactSolution, GraphError> {
    let n = g.n();
    if n > cap || n > 63 {
        return Err(GraphError::TooLarge { n, cap });
    }
    let total = 1u64 << n;
    let chunks: Vec<(u64, u64)> = (0..total).step_by(CHUNK as usize).map(|lo| (lo, (lo + CHUNK).min(total))).collect();

    let c_opt = chunks
        .par_iter()
        .map(|&(lo, hi)| (lo..hi).map(|i| g.cost_of_index(i)).fold(f64::NEG_INFINITY, f64::max))
        .reduce(|| f64::NEG_INFINITY, f64::max);

    let optimal_indices: Vec<u64> = chunks
        .par_iter()
        .map(|&(lo, hi)| (lo..hi).filter(|&i| costs_equal(g.cost_of_index(i), c_opt)).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    Ok(ExactSolution { n, c_opt, optimal_indices })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLevel {
    pub cost: f64,
    pub degeneracy: u64,
}

/// Distinct cost values with their degeneracies, best (largest) first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpectrum {
    pub n: usize,
    pub levels: Vec<SpectrumLevel>,
}

impl CostSpectrum {
    pub fn total_degeneracy(&self) -> u64 {
        self.levels.iter().map(|l| l.degeneracy).sum()
    }

    pub fn top(&self) -> SpectrumLevel {
        self.levels[0]
    }
}

pub fn degeneracy_spectrum(g: &ProblemGraph) -> Result<CostSpectrum, GraphError> {
    let n = g.n();
    if n > SPECTRUM_CAP {
        return Err(GraphError::TooLarge { n, cap: SPECTRUM_CAP });
    }
    let mut costs: Vec<f64> = (0..1u64 << n).into_par_iter().map(|i| g.cost_of_index(i)).collect();
    costs.sort_unstable_by(|x, y| y.total_cmp(x));

    let mut levels: Vec<SpectrumLevel> = Vec::new();
    for c in costs {
        match levels.last_mut() {
            Some(level) if costs_equal(level.cost, c) => level.degeneracy += 1,
            _ => levels.push(SpectrumLevel { cost: c, degeneracy: 1 }),
        }
    }
    Ok(CostSpectrum { n, levels })
}

/// R = C_obt / C_opt.
pub fn approximation_ratio(c_obt: f64, c_opt: f64) -> Result<f64, GraphError> {
    if !(c_opt > 0.0) {
        return Err(GraphError::UndefinedRatio { c_opt });
    }
    Ok(c_obt / c_opt)
}

/// HP = Σ_{D > cutoff} D / (C_opt · D_opt), summing over the non-optimal
/// levels only; the solution space never enters the numerator.
pub fn hardness_parameter(spectrum: &CostSpectrum, c_opt: f64, d_opt: u64, d_cutoff: u64) -> Result<f64, GraphError> {
    let top = spectrum.top();
    if !costs_equal(top.cost, c_opt) || top.degeneracy != d_opt {
        return Err(GraphError::SpectrumMismatch { cost: top.cost, degeneracy: top.degeneracy, c_opt, d_opt });
    }
    if !(c_opt > 0.0) {
        return Err(GraphError::UndefinedRatio { c_opt });
    }
    let numerator: u64 = spectrum.levels[1..].iter().filter(|l| l.degeneracy > d_cutoff).map(|l| l.degeneracy).sum();
    Ok(numerator as f64 / (c_opt * d_opt as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessScan {
    /// `(cutoff, HP)` in the order the cutoffs were given.
    pub points: Vec<(u64, f64)>,
    /// First cutoff from which every later successive pair agrees within
    /// the relative tolerance.
    pub converged_at: Option<u64>,
}

impl HardnessScan {
    /// HP at the convergence cutoff, or at the last cutoff if the scan
    /// never settled.
    pub fn converged_value(&self) -> f64 {
        match self.converged_at {
            Some(c) => self.points.iter().find(|p| p.0 == c).map(|p| p.1).unwrap_or(0.0),
            None => self.points.last().map(|p| p.1).unwrap_or(0.0),
        }
    }
}

pub fn hardness_convergence_scan(g: &ProblemGraph, cutoffs: &[u64], rel_tol: f64) -> Result<HardnessScan, GraphError> {
    if cutoffs.is_empty() {
        return Err(GraphError::EmptyCutoffs);
    }
    let exact = brute_force_solve(g)?;
    let spectrum = degeneracy_spectrum(g)?;
    let points = if exact.c_opt > 0.0 {
        cutoffs
            .iter()
            .map(|&c| hardness_parameter(&spectrum, exact.c_opt, exact.d_opt(), c).map(|hp| (c, hp)))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        return Err(GraphError::UndefinedRatio { c_opt: exact.c_opt });
    };

    let settled = |i: usize| {
        let (a, b) = (points[i].1, points[i + 1].1);
        (a - b).abs() <= rel_tol * a.abs().max(b.abs())
    };
    let converged_at =
        (0..points.len().saturating_sub(1)).find(|&start| (start..points.len() - 1).all(settled)).map(|i| points[i].0);
    Ok(HardnessScan { points, converged_at })
}

/// On-disk graph document (JSON). Max-Cut edges are `[j, k, w]` or `[j, k]`
/// (unit weight); MIS edges are `[j, k]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub kind: ProblemKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub edges: Vec<Vec<serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn edge_from_json(kind: ProblemKind, index: usize, raw: &[serde_json::Value]) -> Result<Edge, GraphError> {
    let vertex = |v: &serde_json::Value| {
        v.as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| GraphError::Parse(format!("edge #{index}: vertex index {v} is not a non-negative integer")))
    };
    match (kind, raw.len()) {
        (_, 2) => Ok(Edge { a: vertex(&raw[0])?, b: vertex(&raw[1])?, weight: 1.0 }),
        (ProblemKind::MaxCut, 3) => {
            let weight = raw[2]
                .as_f64()
                .ok_or_else(|| GraphError::Parse(format!("edge #{index}: weight {} is not a number", raw[2])))?;
            Ok(Edge { a: vertex(&raw[0])?, b: vertex(&raw[1])?, weight })
        }
        (ProblemKind::Mis, 3) => Err(GraphError::WeightOnMisEdge { index, a: vertex(&raw[0])?, b: vertex(&raw[1])? }),
        (_, len) => Err(GraphError::Parse(format!("edge #{index} has {len} fields, expected [j, k] or [j, k, w]"))),
    }
}

impl GraphDocument {
    pub fn into_graph(self) -> Result<ProblemGraph, GraphError> {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, raw)| edge_from_json(self.kind, i, raw))
            .collect::<Result<Vec<_>, _>>()?;
        let g = ProblemGraph::new(self.kind, self.n, self.vertex_weights, edges)?;
        Ok(match self.name {
            Some(name) => g.with_name(name),
            None => g,
        })
    }

    pub fn from_graph(g: &ProblemGraph) -> Self {
        let edges = g
            .edges()
            .iter()
            .map(|e| match g.kind() {
                ProblemKind::MaxCut => vec![e.a.into(), e.b.into(), e.weight.into()],
                ProblemKind::Mis => vec![e.a.into(), e.b.into()],
            })
            .collect();
        let unit = g.vertex_weights().iter().all(|&w| w == 1.0);
        Self {
            kind: g.kind(),
            n: g.n(),
            vertex_weights: (!unit).then(|| g.vertex_weights().to_vec()),
            edges,
            name: g.name().map(str::to_owned),
        }
    }
}

pub fn parse_graph(text: &str) -> Result<ProblemGraph, GraphError> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    doc.into_graph()
}

pub fn graph_to_json(g: &ProblemGraph) -> String {
    serde_json::to_string_pretty(&GraphDocument::from_graph(g)).expect("graph document serialises")
}
