//! Local-detuning encoding: problem weights become final per-atom detunings
//! and pairwise van der Waals couplings, and the couplings become a 2D atom
//! layout.
//!
//! Detunings follow the light-shift sign convention used throughout the
//! crate: the diagonal Rydberg energy is `Σ_j Δ_j n_j + Σ_{j<k} V_jk n_j n_k`.
//! In that convention Max-Cut uses `Δ_j = −2 Σ_k w'_jk`, `V_jk = 4 w'_jk`
//! and MIS uses `Δ_j = −w'_j`, `V_jk = e_jk w'_j w'_k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ProblemGraph, ProblemKind};
use crate::optimize::bfgs_with_gradient;

/// Energies are angular frequencies in units of 2π·MHz (rad/μs with ℏ = 1),
/// lengths in μm, times in μs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviceParams {
    /// Dispersion coefficient, 2π·MHz·μm⁶ (139 GHz·μm⁶ for Cs 60S).
    pub c6: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Rydberg lifetime in μs. Informational only.
    pub lifetime: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self { c6: 139_000.0, r_min: 1.0, r_max: 7.0, lifetime: 234.0 }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<(), EncodingError> {
        if !(self.c6 > 0.0) || !(self.r_min > 0.0) || !(self.r_min < self.r_max) {
            return Err(EncodingError::InvalidDevice(*self));
        }
        Ok(())
    }

    /// Strongest coupling reachable inside the distance window.
    pub fn v_max(&self) -> f64 {
        self.c6 / self.r_min.powi(6)
    }

    /// Weakest coupling reachable inside the distance window.
    pub fn v_min(&self) -> f64 {
        self.c6 / self.r_max.powi(6)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("invalid device parameters {0:?}")]
    InvalidDevice(DeviceParams),
    #[error("weight spread needs coupling ratio {ratio:.4e}, but the distance window only allows {limit:.4e}")]
    InfeasibleScale { ratio: f64, limit: f64 },
    #[error("scale {scale} puts edge couplings outside [{v_min:.4}, {v_max:.4}]")]
    ScaleOutOfWindow { scale: f64, v_min: f64, v_max: f64 },
    #[error("interaction must be positive, got {0}")]
    NonPositiveInteraction(f64),
    #[error("atoms {a} and {b} coincide")]
    CoincidentAtoms { a: usize, b: usize },
    #[error("no 2D layout found: best residual stress {residual:.3e} exceeds {tolerance:.3e}")]
    EmbeddingFailed { residual: f64, tolerance: f64 },
    #[error("layout has {found} atoms, encoding has {expected}")]
    SizeMismatch { expected: usize, found: usize },
}

/// Dense symmetric N×N matrix with zero diagonal, in 2π·MHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    n: usize,
    data: Vec<f64>,
}

impl InteractionMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    /// Wraps row-major data without checking symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        Self { n, data: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.n + k]
    }

    pub fn set(&mut self, j: usize, k: usize, v: f64) {
        self.data[j * self.n + k] = v;
        self.data[k * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn is_symmetric_hollow(&self, tol: f64) -> bool {
        (0..self.n).all(|j| {
            self.get(j, j) == 0.0
                && (0..j).all(|k| {
                    let (a, b) = (self.get(j, k), self.get(k, j));
                    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
                })
        })
    }
}

/// How the dimensionless weights are converted to energies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalePolicy {
    /// Put the weakest edge coupling at the given energy (2π·MHz), clamped
    /// into the realisable window.
    Auto {
        min_edge_interaction: f64,
    },
    Fixed(f64),
}

pub const DEFAULT_MIN_EDGE_INTERACTION: f64 = 40.0;

impl Default for ScalePolicy {
    fn default() -> Self {
        ScalePolicy::Auto { min_edge_interaction: DEFAULT_MIN_EDGE_INTERACTION }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingResult {
    pub kind: ProblemKind,
    /// Δ_j(T) in 2π·MHz.
    pub final_detunings: Vec<f64>,
    pub target_interactions: InteractionMatrix,
    /// Edge list `(j, k)` the couplings belong to.
    pub edges: Vec<(usize, usize)>,
    /// Energy per unit weight.
    pub scale: f64,
}

impl EncodingResult {
    pub fn n(&self) -> usize {
        self.final_detunings.len()
    }

    pub fn is_edge(&self, j: usize, k: usize) -> bool {
        let (a, b) = (j.min(k), j.max(k));
        self.edges.contains(&(a, b))
    }

    pub fn min_edge_interaction(&self) -> Option<f64> {
        self.edges.iter().map(|&(j, k)| self.target_interactions.get(j, k)).min_by(f64::total_cmp)
    }
}

/// Couplings per unit scale: 4 w_jk (Max-Cut) or w_j w_k (MIS).
fn unit_couplings(g: &ProblemGraph) -> Vec<(usize, usize, f64)> {
    let w = g.vertex_weights();
    g.edges()
        .iter()
        .map(|e| {
            let u = match g.kind() {
                ProblemKind::MaxCut => 4.0 * e.weight,
                ProblemKind::Mis => w[e.a] * w[e.b],
            };
            (e.a, e.b, u)
        })
        .collect()
}

pub fn encode(g: &ProblemGraph, dev: &DeviceParams) -> Result<EncodingResult, EncodingError> {
    encode_with(g, dev, ScalePolicy::default())
}

pub fn encode_with(g: &ProblemGraph, dev: &DeviceParams, policy: ScalePolicy) -> Result<EncodingResult, EncodingError> {
    dev.validate()?;
    let couplings = unit_couplings(g);
    let u_min = couplings.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    let u_max = couplings.iter().map(|c| c.2).fold(0.0, f64::max);

    // Window of scales that keep every edge distance inside [r_min, r_max].
    let (lo, hi) = if couplings.is_empty() {
        (0.0, f64::INFINITY)
    } else {
        let limit = dev.v_max() / dev.v_min();
        let ratio = u_max / u_min;
        if ratio > limit * (1.0 + 1e-12) {
            return Err(EncodingError::InfeasibleScale { ratio, limit });
        }
        (dev.v_min() / u_min, dev.v_max() / u_max)
    };

    let scale = match policy {
        ScalePolicy::Fixed(s) => {
            if !(s > 0.0) || s < lo * (1.0 - 1e-12) || s > hi * (1.0 + 1e-12) {
                return Err(EncodingError::ScaleOutOfWindow { scale: s, v_min: dev.v_min(), v_max: dev.v_max() });
            }
            s
        }
        ScalePolicy::Auto { min_edge_interaction } => {
            let reference = if couplings.is_empty() {
                match g.kind() {
                    ProblemKind::Mis => g.vertex_weights().iter().copied().fold(f64::INFINITY, f64::min),
                    ProblemKind::MaxCut => 4.0,
                }
            } else {
                u_min
            };
            (min_edge_interaction / reference).clamp(lo, hi)
        }
    };

    let n = g.n();
    let mut v = InteractionMatrix::zeros(n);
    for &(a, b, u) in &couplings {
        v.set(a, b, scale * u);
    }
    let final_detunings = match g.kind() {
        ProblemKind::MaxCut => {
            let mut d = vec![0.0; n];
            for e in g.edges() {
                d[e.a] -= 2.0 * scale * e.weight;
                d[e.b] -= 2.0 * scale * e.weight;
            }
            d
        }
        ProblemKind::Mis => g.vertex_weights().iter().map(|w| -scale * w).collect(),
    };
    Ok(EncodingResult {
        kind: g.kind(),
        final_detunings,
        target_interactions: v,
        edges: couplings.iter().map(|c| (c.0, c.1)).collect(),
        scale,
    })
}

/// r = (C6 / V)^{1/6}.
pub fn edge_distance(v: f64, dev: &DeviceParams) -> Result<f64, EncodingError> {
    if !(v > 0.0) {
        return Err(EncodingError::NonPositiveInteraction(v));
    }
    Ok((dev.c6 / v).powf(1.0 / 6.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomLayout {
    /// Positions in μm.
    pub positions: Vec<[f64; 2]>,
}

impl AtomLayout {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn distance(&self, j: usize, k: usize) -> f64 {
        let (p, q) = (self.positions[j], self.positions[k]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    }
}

/// V_jk = C6 / r_jk⁶ over all pairs, edges or not.
pub fn realized_interactions(layout: &AtomLayout, dev: &DeviceParams) -> Result<InteractionMatrix, EncodingError> {
    let n = layout.n();
    let mut v = InteractionMatrix::zeros(n);
    for j in 0..n {
        for k in j + 1..n {
            let r = layout.distance(j, k);
            if !(r > 0.0) {
                return Err(EncodingError::CoincidentAtoms { a: j, b: k });
            }
            v.set(j, k, dev.c6 / r.powi(6));
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedOptions {
    pub restarts: usize,
    /// Allowed relative error of each realised edge coupling.
    pub edge_tolerance: f64,
    /// Allowed non-edge coupling as a fraction of the weakest edge coupling.
    pub unwanted_tolerance: f64,
    pub max_degree: usize,
    /// Residual stress accepted, relative to Σ r_target².
    pub stress_tolerance: f64,
    pub max_iter: usize,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            edge_tolerance: 0.01,
            unwanted_tolerance: 0.05,
            max_degree: 5,
            stress_tolerance: 1e-8,
            max_iter: 3000,
        }
    }
}

/// Non-edge pairs closer than this are penalised: the distance at which a
/// coupling drops to the unwanted bound, with a small safety margin.
pub fn exclusion_radius(enc: &EncodingResult, dev: &DeviceParams, unwanted_tolerance: f64) -> f64 {
    let bound = match enc.min_edge_interaction() {
        Some(v) => unwanted_tolerance * v,
        None => unwanted_tolerance * dev.v_min(),
    };
    (dev.c6 / bound).powf(1.0 / 6.0) * 1.001
}

struct StressModel {
    n: usize,
    /// (j, k, target distance) for edges, (j, k, exclusion radius) for
    /// non-edges.
    edges: Vec<(usize, usize, f64)>,
    non_edges: Vec<(usize, usize, f64)>,
}

impl StressModel {
    fn new(enc: &EncodingResult, dev: &DeviceParams, opts: &EmbedOptions) -> Result<Self, EncodingError> {
        let n = enc.n();
        let excl = exclusion_radius(enc, dev, opts.unwanted_tolerance);
        let mut edges = Vec::new();
        let mut non_edges = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                if enc.is_edge(j, k) {
                    edges.push((j, k, edge_distance(enc.target_interactions.get(j, k), dev)?));
                } else {
                    non_edges.push((j, k, excl));
                }
            }
        }
        Ok(Self { n, edges, non_edges })
    }

    fn normaliser(&self) -> f64 {
        self.edges.iter().map(|e| e.2 * e.2).sum::<f64>().max(1.0)
    }

    /// Stress and its gradient over flat `[x0, y0, x1, y1, …]` coordinates.
    fn stress(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        let mut term = |j: usize, k: usize, residual: f64, d: f64, dx: f64, dy: f64, grad: &mut [f64]| {
            total += residual * residual;
            if d > 0.0 {
                let c = 2.0 * residual / d;
                grad[2 * j] += c * dx;
                grad[2 * j + 1] += c * dy;
                grad[2 * k] -= c * dx;
                grad[2 * k + 1] -= c * dy;
            }
        };
        for &(j, k, target) in &self.edges {
            let (dx, dy) = (x[2 * j] - x[2 * k], x[2 * j + 1] - x[2 * k + 1]);
            let d = dx.hypot(dy);
            term(j, k, d - target, d, dx, dy, grad);
        }
        for &(j, k, radius) in &self.non_edges {
            let (dx, dy) = (x[2 * j] - x[2 * k], x[2 * j + 1] - x[2 * k + 1]);
            let d = dx.hypot(dy);
            if d < radius {
                term(j, k, d - radius, d, dx, dy, grad);
            }
        }
        total
    }
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Multi-start stress minimisation. Returns the best layout and its
/// relative residual stress.
pub fn embed_layout_with(
    enc: &EncodingResult,
    dev: &DeviceParams,
    seed: u64,
    opts: &EmbedOptions,
) -> Result<(AtomLayout, f64), EncodingError> {
    dev.validate()?;
    let model = StressModel::new(enc, dev, opts)?;
    let n = model.n;
    if n == 1 {
        return Ok((AtomLayout { positions: vec![[0.0, 0.0]] }, 0.0));
    }
    let side = n as f64 * dev.r_max / 2.0;
    let norm = model.normaliser();

    let runs: Vec<(f64, Vec<f64>)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(seed, r));
            let x0: Vec<f64> = (0..2 * n).map(|_| rng.random_range(0.0..side)).collect();
            let (x, f) = bfgs_with_gradient(|x, g| model.stress(x, g), &x0, opts.max_iter, 1e-14);
            (f / norm, x)
        })
        .collect();
    let (residual, x) = runs.into_iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("at least one restart");

    if residual > opts.stress_tolerance {
        return Err(EncodingError::EmbeddingFailed { residual, tolerance: opts.stress_tolerance });
    }
    let (cx, cy) =
        ((0..n).map(|j| x[2 * j]).sum::<f64>() / n as f64, (0..n).map(|j| x[2 * j + 1]).sum::<f64>() / n as f64);
    let positions = (0..n).map(|j| [x[2 * j] - cx, x[2 * j + 1] - cy]).collect();
    Ok((AtomLayout { positions }, residual))
}

pub fn embed_layout(enc: &EncodingResult, dev: &DeviceParams, seed: u64) -> Result<AtomLayout, EncodingError> {
    embed_layout_with(enc, dev, seed, &EmbedOptions::default()).map(|(layout, _)| layout)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeError {
    pub a: usize,
    pub b: usize,
    pub target: f64,
    pub realized: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub max_degree: usize,
    pub degree_ok: bool,
    pub edge_errors: Vec<EdgeError>,
    pub max_edge_error: f64,
    pub edges_ok: bool,
    /// max over non-edges of V_realised / min over edges of V_target.
    pub unwanted_ratio: f64,
    pub worst_unwanted_pair: Option<(usize, usize)>,
    pub unwanted_ok: bool,
    pub passes: bool,
}

pub fn validate_embedding(
    layout: &AtomLayout,
    enc: &EncodingResult,
    dev: &DeviceParams,
    opts: &EmbedOptions,
) -> FeasibilityReport {
    let n = enc.n();
    let mut degree = vec![0usize; n];
    for &(a, b) in &enc.edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let max_degree = degree.into_iter().max().unwrap_or(0);
    let degree_ok = max_degree <= opts.max_degree;

    let realized = |j: usize, k: usize| {
        if j < layout.n() && k < layout.n() {
            dev.c6 / layout.distance(j, k).powi(6)
        } else {
            f64::NAN
        }
    };
    let edge_errors: Vec<EdgeError> = enc
        .edges
        .iter()
        .map(|&(a, b)| {
            let target = enc.target_interactions.get(a, b);
            let realized = realized(a, b);
            EdgeError { a, b, target, realized, relative_error: (realized - target).abs() / target }
        })
        .collect();
    let max_edge_error = edge_errors.iter().map(|e| e.relative_error).fold(0.0, f64::max);
    let edges_ok = layout.n() == n && edge_errors.iter().all(|e| e.relative_error <= opts.edge_tolerance);

    let min_edge = enc.min_edge_interaction().unwrap_or(f64::INFINITY);
    let mut unwanted_ratio = 0.0;
    let mut worst_unwanted_pair = None;
    for j in 0..n.min(layout.n()) {
        for k in j + 1..n.min(layout.n()) {
            if !enc.is_edge(j, k) {
                let ratio = realized(j, k) / min_edge;
                if ratio > unwanted_ratio {
                    unwanted_ratio = ratio;
                    worst_unwanted_pair = Some((j, k));
                }
            }
        }
    }
    let unwanted_ok = unwanted_ratio <= opts.unwanted_tolerance;
    FeasibilityReport {
        max_degree,
        degree_ok,
        edge_errors,
        max_edge_error,
        edges_ok,
        unwanted_ratio,
        worst_unwanted_pair,
        unwanted_ok,
        passes: degree_ok && edges_ok && unwanted_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEV: DeviceParams = DeviceParams { c6: 139_000.0, r_min: 1.0, r_max: 7.0, lifetime: 234.0 };

    #[test]
    fn mis_isolated_vertices() {
        let g = ProblemGraph::mis(vec![1.0, 2.0, 3.0], &[]).unwrap();
        let enc = encode_with(&g, &DEV, ScalePolicy::Fixed(1.0)).unwrap();
        assert_eq!(enc.final_detunings, vec![-1.0, -2.0, -3.0]);
    }

    #[test]
    fn maxcut_star_detunings() {
        let g = ProblemGraph::maxcut(4, &[(0, 1, 1.0), (0, 2, 2.0), (0, 3, 3.0)]).unwrap();
        let enc = encode_with(&g, &DEV, ScalePolicy::Fixed(1.0)).unwrap();
        assert_eq!(enc.final_detunings, vec![-12.0, -2.0, -4.0, -6.0]);
        assert_eq!(enc.target_interactions.get(0, 3), 12.0);
        assert_eq!(enc.target_interactions.get(1, 2), 0.0);
    }

    #[test]
    fn single_edge_scale_window() {
        let g = ProblemGraph::maxcut(2, &[(0, 1, 1.0)]).unwrap();
        let (lo, hi) = (DEV.v_min() / 4.0, DEV.v_max() / 4.0);
        for s in [lo, (lo * hi).sqrt(), hi] {
            let enc = encode_with(&g, &DEV, ScalePolicy::Fixed(s)).unwrap();
            let r = edge_distance(enc.target_interactions.get(0, 1), &DEV).unwrap();
            assert!((1.0 - 1e-9..=7.0 + 1e-9).contains(&r), "r = {r}");
        }
        assert!(encode_with(&g, &DEV, ScalePolicy::Fixed(hi * 1.01)).is_err());
        assert!(encode_with(&g, &DEV, ScalePolicy::Fixed(lo * 0.99)).is_err());
        let auto = encode(&g, &DEV).unwrap();
        assert!((auto.target_interactions.get(0, 1) - DEFAULT_MIN_EDGE_INTERACTION).abs() < 1e-9);
    }

    #[test]
    fn infeasible_spread() {
        let g = ProblemGraph::maxcut(3, &[(0, 1, 1.0), (1, 2, 2e5)]).unwrap();
        assert!(matches!(encode(&g, &DEV), Err(EncodingError::InfeasibleScale { .. })));
    }

    #[test]
    fn edge_distance_examples() {
        assert!((edge_distance(139_000.0, &DEV).unwrap() - 1.0).abs() < 1e-12);
        assert!((edge_distance(139.0, &DEV).unwrap() - 1000f64.powf(1.0 / 6.0)).abs() < 1e-12);
        let v = 57.0;
        let r = edge_distance(v, &DEV).unwrap();
        let doubled = DEV.c6 / (2.0 * r).powi(6);
        assert!((v / doubled - 64.0).abs() < 1e-9);
        assert!(edge_distance(0.0, &DEV).is_err());
    }

    #[test]
    fn realized_interaction_examples() {
        let layout = AtomLayout { positions: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 7.0]] };
        let v = realized_interactions(&layout, &DEV).unwrap();
        assert!((v.get(0, 1) - 139_000.0).abs() < 1e-9);
        assert!((v.get(1, 2) - 1.181_480_5).abs() < 1e-6);
        assert!(v.is_symmetric_hollow(0.0));
        let clash = AtomLayout { positions: vec![[0.0, 0.0], [0.0, 0.0]] };
        assert!(matches!(realized_interactions(&clash, &DEV), Err(EncodingError::CoincidentAtoms { .. })));
    }

    #[test]
    fn triangle_embeds_equilateral() {
        let g = ProblemGraph::maxcut(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let enc = encode(&g, &DEV).unwrap();
        let (layout, stress) = embed_layout_with(&enc, &DEV, 1, &EmbedOptions::default()).unwrap();
        assert!(stress < 1e-9);
        let target = edge_distance(enc.target_interactions.get(0, 1), &DEV).unwrap();
        for (j, k) in [(0, 1), (1, 2), (0, 2)] {
            assert!((layout.distance(j, k) - target).abs() < 1e-5);
        }
    }

    #[test]
    fn single_edge_embeds_at_target() {
        let g = ProblemGraph::maxcut(2, &[(0, 1, 1.0)]).unwrap();
        // V = 4 s = 139 puts the pair at 1000^{1/6} μm.
        let enc = encode_with(&g, &DEV, ScalePolicy::Fixed(139.0 / 4.0)).unwrap();
        let layout = embed_layout(&enc, &DEV, 3).unwrap();
        assert!((layout.distance(0, 1) - 3.162_277_66).abs() < 1e-6);
    }

    #[test]
    fn weighted_four_vertex_ordering() {
        // w34 > w14 > w24 > w12 (1-based) must give r34 < r14 < r24 < r12.
        let g = ProblemGraph::maxcut(4, &[(2, 3, 1.6), (0, 3, 1.4), (1, 3, 1.2), (0, 1, 1.0)]).unwrap();
        let enc = encode(&g, &DEV).unwrap();
        let layout = embed_layout(&enc, &DEV, 11).unwrap();
        let r = |a: usize, b: usize| layout.distance(a - 1, b - 1);
        assert!(r(3, 4) < r(1, 4) && r(1, 4) < r(2, 4) && r(2, 4) < r(1, 2));
        assert!(validate_embedding(&layout, &enc, &DEV, &EmbedOptions::default()).passes);
    }

    #[test]
    fn unrealisable_graph_fails() {
        // K4 with equal weights needs four mutually equidistant points.
        let g =
            ProblemGraph::maxcut(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
                .unwrap();
        let enc = encode(&g, &DEV).unwrap();
        match embed_layout(&enc, &DEV, 5) {
            Err(EncodingError::EmbeddingFailed { residual, .. }) => assert!(residual > 1e-4),
            other => panic!("expected embedding failure, got {other:?}"),
        }
    }

    #[test]
    fn validation_two_atoms_exact() {
        let g = ProblemGraph::maxcut(2, &[(0, 1, 1.0)]).unwrap();
        let enc = encode(&g, &DEV).unwrap();
        let r = edge_distance(enc.target_interactions.get(0, 1), &DEV).unwrap();
        let layout = AtomLayout { positions: vec![[0.0, 0.0], [r, 0.0]] };
        let report = validate_embedding(&layout, &enc, &DEV, &EmbedOptions::default());
        assert!(report.max_edge_error < 1e-12);
        assert!(report.passes);
    }

    #[test]
    fn validation_flags_degree_six() {
        let g = crate::graph::star(ProblemKind::MaxCut, 7).unwrap();
        let enc = encode(&g, &DEV).unwrap();
        let layout = AtomLayout { positions: (0..7).map(|j| [10.0 * j as f64, 0.0]).collect() };
        let report = validate_embedding(&layout, &enc, &DEV, &EmbedOptions::default());
        assert_eq!(report.max_degree, 6);
        assert!(!report.degree_ok);
        assert!(!report.passes);
    }

    #[test]
    fn validation_flags_close_non_edge() {
        // Path 0–1–2 with weak edges; atoms 0 and 2 parked at r_min.
        let g = crate::graph::path(ProblemKind::MaxCut, 3).unwrap();
        let enc = encode_with(&g, &DEV, ScalePolicy::Fixed(1.0)).unwrap();
        let r = edge_distance(4.0, &DEV).unwrap();
        let half = 0.5;
        let h = (r * r - half * half).sqrt();
        let layout = AtomLayout { positions: vec![[-half, 0.0], [0.0, h], [half, 0.0]] };
        let report = validate_embedding(&layout, &enc, &DEV, &EmbedOptions::default());
        // V(1 μm) / V_edge = 139000 / 4
        assert!((report.unwanted_ratio - 139_000.0 / 4.0).abs() < 1e-6);
        assert_eq!(report.worst_unwanted_pair, Some((0, 2)));
        assert!(report.edges_ok && !report.unwanted_ok && !report.passes);
    }
}
