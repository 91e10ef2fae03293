//! Lowest eigenvalues of `H = diag + (Ω/2) Σ_j σˣ_j`, which is real
//! symmetric in the product basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hamiltonian::DiagonalHamiltonian;

/// Registers up to this size are diagonalised densely.
pub const DENSE_SPECTRUM_LIMIT: usize = 10;
/// Registers up to this size use deflated Lanczos; larger ones are refused.
pub const SPECTRUM_LIMIT: usize = 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("{n} atoms exceed the spectrum budget of {SPECTRUM_LIMIT}")]
    Budget { n: usize },
    #[error("Lanczos did not converge for level {level} (residual {residual:.3e})")]
    NotConverged { level: usize, residual: f64 },
}

/// Ascending `k` lowest eigenvalues (all of them if `k ≥ 2^N`).
pub fn instantaneous_spectrum(omega: f64, diag: &DiagonalHamiltonian, k: usize) -> Result<Vec<f64>, SpectrumError> {
    let n = diag.n();
    if n > SPECTRUM_LIMIT {
        return Err(SpectrumError::Budget { n });
    }
    let dim = 1usize << n;
    let k = k.min(dim);
    if n <= DENSE_SPECTRUM_LIMIT || k == dim {
        if n > DENSE_SPECTRUM_LIMIT + 2 {
            return Err(SpectrumError::Budget { n });
        }
        let mut values = dense(omega, diag);
        values.truncate(k);
        Ok(values)
    } else {
        lanczos_lowest(omega, diag, k)
    }
}

fn dense(omega: f64, diag: &DiagonalHamiltonian) -> Vec<f64> {
    let n = diag.n();
    let dim = 1usize << n;
    let e = diag.energies();
    let m = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            e[r]
        } else if (r ^ c).is_power_of_two() {
            omega / 2.0
        } else {
            0.0
        }
    });
    let mut values: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

fn matvec(omega: f64, e: &[f64], x: &[f64], out: &mut [f64]) {
    let n = e.len().trailing_zeros() as usize;
    let half = omega / 2.0;
    for b in 0..e.len() {
        let mut acc = e[b] * x[b];
        for j in 0..n {
            acc += half * x[b ^ (1 << j)];
        }
        out[b] = acc;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // Two passes keep the basis orthogonal to working precision.
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// Finds eigenpairs one at a time, each run restricted to the complement of
/// the vectors already found, so degenerate levels are resolved.
fn lanczos_lowest(omega: f64, diag: &DiagonalHamiltonian, k: usize) -> Result<Vec<f64>, SpectrumError> {
    let e = diag.energies();
    let dim = e.len();
    let scale = e.iter().fold(omega.abs(), |m, v| m.max(v.abs())).max(1.0);
    let tol = 1e-10 * scale;
    let max_krylov = 200.min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut found: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    let mut w = vec![0.0; dim];

    for level in 0..k {
        let mut start: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut best = (f64::INFINITY, f64::INFINITY, Vec::new());
        // Restart from the current Ritz vector until the residual is small.
        for _restart in 0..30 {
            orthogonalize(&mut start, &found);
            let norm = dot(&start, &start).sqrt();
            start.iter_mut().for_each(|x| *x /= norm);
            let mut q: Vec<Vec<f64>> = vec![start.clone()];
            let mut alpha = Vec::new();
            let mut beta: Vec<f64> = Vec::new();
            for j in 0..max_krylov.saturating_sub(found.len()) {
                matvec(omega, e, &q[j], &mut w);
                let a = dot(&w, &q[j]);
                alpha.push(a);
                orthogonalize(&mut w, &q);
                orthogonalize(&mut w, &found);
                let b = dot(&w, &w).sqrt();
                if b < 1e-12 * scale {
                    break;
                }
                beta.push(b);
                q.push(w.iter().map(|x| x / b).collect());
            }
            let m = alpha.len();
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c || c + 1 == r {
                    beta[r.min(c)]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let (i_min, theta) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, v)| (i, *v))
                .expect("non-empty Krylov space");
            let y: DVector<f64> = eig.eigenvectors.column(i_min).into_owned();
            let mut ritz = vec![0.0; dim];
            for (c, qv) in y.iter().zip(&q) {
                ritz.iter_mut().zip(qv).for_each(|(r, x)| *r += c * x);
            }
            orthogonalize(&mut ritz, &found);
            let nr = dot(&ritz, &ritz).sqrt();
            ritz.iter_mut().for_each(|x| *x /= nr);
            matvec(omega, e, &ritz, &mut w);
            let residual = w.iter().zip(&ritz).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
            if residual < best.1 {
                best = (theta, residual, ritz.clone());
            }
            if residual < tol {
                break;
            }
            start = ritz;
        }
        if best.1 > 1e-6 * scale {
            return Err(SpectrumError::NotConverged { level, residual: best.1 });
        }
        values.push(best.0);
        found.push(best.2);
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}
