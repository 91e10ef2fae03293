//! Diagonal problem Hamiltonians, the driven Rydberg Hamiltonian, and state
//! vectors over the product basis.
//!
//! Basis index `b` has atom `j` excited iff bit `j` of `b` is set (atom 0 is
//! the least significant bit). Spins use `σ = +1` for `|g⟩` (bit 0) and
//! `σ = −1` for `|e⟩` (bit 1), and a set bit decodes to `X_j = 1`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::InteractionMatrix;
use crate::graph::{bitstring, ProblemGraph, ProblemKind};

/// Largest register the dense state-vector code accepts.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("expected a {expected} graph, got {found}")]
    KindMismatch { expected: ProblemKind, found: ProblemKind },
    #[error("interaction matrix is not symmetric with zero diagonal")]
    Asymmetric,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} qubits exceed the state-vector limit of {MAX_QUBITS}")]
    TooLarge(usize),
    #[error("state is not normalised: ‖ψ‖² = {0}")]
    NotNormalized(f64),
    #[error("ground set is empty")]
    EmptyGroundSet,
    #[error("basis index {index} out of range for {n} atoms")]
    IndexOutOfRange { index: u64, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|g…g⟩`.
    pub fn ground(n: usize) -> Result<Self, HamiltonianError> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: u64) -> Result<Self, HamiltonianError> {
        if n > MAX_QUBITS {
            return Err(HamiltonianError::TooLarge(n));
        }
        let dim = 1usize << n;
        if index as usize >= dim {
            return Err(HamiltonianError::IndexOutOfRange { index, n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Checks normalisation to 1e−9.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, HamiltonianError> {
        let n = qubits_for(amps.len())?;
        let s = Self { n, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(HamiltonianError::NotNormalized(norm));
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sqr().sqrt();
        if s > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= s);
        }
    }

    /// ‖ψ − φ‖₂.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

fn qubits_for(dim: usize) -> Result<usize, HamiltonianError> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(HamiltonianError::DimensionMismatch { expected: dim.next_power_of_two(), found: dim });
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(HamiltonianError::TooLarge(n));
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalLabel {
    TargetMaxCut,
    TargetMis,
    RydbergDiagonal,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalHamiltonian {
    n: usize,
    energies: Vec<f64>,
    label: DiagonalLabel,
}

impl DiagonalHamiltonian {
    pub fn new(energies: Vec<f64>, label: DiagonalLabel) -> Result<Self, HamiltonianError> {
        let n = qubits_for(energies.len())?;
        Ok(Self { n, energies, label })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn label(&self) -> DiagonalLabel {
        self.label
    }

    pub fn min_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with columns `index,bitstring,energy`; bitstrings list atom 0
    /// first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,bitstring,energy\n");
        for (b, e) in self.energies.iter().enumerate() {
            let _ = writeln!(out, "{b},{},{e:.17e}", bitstring(b as u64, self.n));
        }
        out
    }
}

fn check_size(n: usize) -> Result<(), HamiltonianError> {
    if n > MAX_QUBITS {
        Err(HamiltonianError::TooLarge(n))
    } else {
        Ok(())
    }
}

#[inline]
fn spin(b: usize, j: usize) -> f64 {
    if b >> j & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `E(b) = Σ_{(j,k)∈E} s·w_jk σ_j σ_k`.
pub fn build_target_maxcut(g: &ProblemGraph, scale: f64) -> Result<DiagonalHamiltonian, HamiltonianError> {
    if g.kind() != ProblemKind::MaxCut {
        return Err(HamiltonianError::KindMismatch { expected: ProblemKind::MaxCut, found: g.kind() });
    }
    check_size(g.n())?;
    let energies = (0..1usize << g.n())
        .map(|b| g.edges().iter().map(|e| scale * e.weight * spin(b, e.a) * spin(b, e.b)).sum())
        .collect();
    DiagonalHamiltonian::new(energies, DiagonalLabel::TargetMaxCut)
}

/// `E(b) = s [Σ_j (w_j/2 − ¼ Σ_k e_jk w_j w_k) σ_j + ¼ Σ_{(j,k)∈E} w_j w_k σ_j σ_k]`,
/// which equals `−s·C_MIS(b)` up to a constant.
pub fn build_target_mis(g: &ProblemGraph, scale: f64) -> Result<DiagonalHamiltonian, HamiltonianError> {
    if g.kind() != ProblemKind::Mis {
        return Err(HamiltonianError::KindMismatch { expected: ProblemKind::Mis, found: g.kind() });
    }
    check_size(g.n())?;
    let w = g.vertex_weights();
    let mut field: Vec<f64> = w.iter().map(|wj| wj / 2.0).collect();
    for e in g.edges() {
        let p = w[e.a] * w[e.b];
        field[e.a] -= p / 4.0;
        field[e.b] -= p / 4.0;
    }
    let energies = (0..1usize << g.n())
        .map(|b| {
            let linear: f64 = field.iter().enumerate().map(|(j, h)| h * spin(b, j)).sum();
            let quad: f64 = g.edges().iter().map(|e| w[e.a] * w[e.b] / 4.0 * spin(b, e.a) * spin(b, e.b)).sum();
            scale * (linear + quad)
        })
        .collect();
    DiagonalHamiltonian::new(energies, DiagonalLabel::TargetMis)
}

pub fn build_target(g: &ProblemGraph, scale: f64) -> Result<DiagonalHamiltonian, HamiltonianError> {
    match g.kind() {
        ProblemKind::MaxCut => build_target_maxcut(g, scale),
        ProblemKind::Mis => build_target_mis(g, scale),
    }
}

/// `E(b) = Σ_j Δ_j n_j + Σ_{j<k} V_jk n_j n_k`, with detunings in the
/// light-shift convention (negative values favour excitation).
pub fn rydberg_diagonal(detunings: &[f64], v: &InteractionMatrix) -> Result<DiagonalHamiltonian, HamiltonianError> {
    let n = detunings.len();
    if v.n() != n {
        return Err(HamiltonianError::DimensionMismatch { expected: n, found: v.n() });
    }
    if !v.is_symmetric_hollow(1e-12) {
        return Err(HamiltonianError::Asymmetric);
    }
    check_size(n)?;
    let dim = 1usize << n;
    let mut energies = vec![0.0; dim];
    // Build from the state with the highest set bit removed.
    for b in 1..dim {
        let j = (usize::BITS - 1 - b.leading_zeros()) as usize;
        let rest = b ^ (1 << j);
        let mut e = energies[rest] + detunings[j];
        let mut bits = rest;
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            e += v.get(j, k);
            bits &= bits - 1;
        }
        energies[b] = e;
    }
    DiagonalHamiltonian::new(energies, DiagonalLabel::RydbergDiagonal)
}

/// `(H|ψ⟩)_b = d_b ψ_b + (Ω/2) Σ_j ψ_{b⊕2^j}`.
pub fn apply_hamiltonian(
    state: &[Complex64],
    omega: f64,
    diag: &DiagonalHamiltonian,
) -> Result<Vec<Complex64>, HamiltonianError> {
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    apply_hamiltonian_into(state, omega, diag.energies(), &mut out)?;
    Ok(out)
}

pub(crate) fn apply_hamiltonian_into(
    state: &[Complex64],
    omega: f64,
    diag: &[f64],
    out: &mut [Complex64],
) -> Result<(), HamiltonianError> {
    if state.len() != diag.len() || out.len() != diag.len() {
        return Err(HamiltonianError::DimensionMismatch { expected: diag.len(), found: state.len() });
    }
    let n = diag.len().trailing_zeros() as usize;
    let half = omega / 2.0;
    for (b, o) in out.iter_mut().enumerate() {
        let mut acc = state[b] * diag[b];
        if half != 0.0 {
            let mut flips = Complex64::new(0.0, 0.0);
            for j in 0..n {
                flips += state[b ^ (1 << j)];
            }
            acc += flips * half;
        }
        *o = acc;
    }
    Ok(())
}

/// Minimum energy and every basis index within `tol·max(1, |E_min|)` of it.
pub fn ground_space(diag: &DiagonalHamiltonian, tol: f64) -> (f64, Vec<u64>) {
    let e_min = diag.min_energy();
    let window = tol * e_min.abs().max(1.0);
    let indices =
        diag.energies().iter().enumerate().filter(|(_, e)| **e - e_min <= window).map(|(b, _)| b as u64).collect();
    (e_min, indices)
}

pub const GROUND_SPACE_TOL: f64 = 1e-9;
