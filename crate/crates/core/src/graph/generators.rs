//! Small graph families used by benchmarks and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, GraphError, ProblemGraph, ProblemKind};

fn unit_edges(pairs: impl IntoIterator<Item = (usize, usize)>) -> Vec<Edge> {
    pairs.into_iter().map(|(a, b)| Edge { a, b, weight: 1.0 }).collect()
}

/// Path 0–1–…–(n−1), unit weights.
pub fn path(kind: ProblemKind, n: usize) -> Result<ProblemGraph, GraphError> {
    let edges = unit_edges((1..n).map(|j| (j - 1, j)));
    Ok(ProblemGraph::new(kind, n, None, edges)?.with_name(format!("path{n}")))
}

/// Cycle on `n >= 3` vertices, unit weights. Smaller `n` degrade to a path.
pub fn cycle(kind: ProblemKind, n: usize) -> Result<ProblemGraph, GraphError> {
    if n < 3 {
        return path(kind, n);
    }
    let edges = unit_edges((0..n).map(|j| (j, (j + 1) % n)));
    Ok(ProblemGraph::new(kind, n, None, edges)?.with_name(format!("cycle{n}")))
}

/// Star with centre 0 and `n − 1` leaves.
pub fn star(kind: ProblemKind, n: usize) -> Result<ProblemGraph, GraphError> {
    let edges = unit_edges((1..n).map(|j| (0, j)));
    Ok(ProblemGraph::new(kind, n, None, edges)?.with_name(format!("star{n}")))
}

/// Erdős–Rényi G(n, p). With `weight_range = Some((lo, hi))` edge weights
/// (Max-Cut) or vertex weights (MIS) are drawn uniformly from `[lo, hi)`.
pub fn random_gnp(
    kind: ProblemKind,
    n: usize,
    p: f64,
    weight_range: Option<(f64, f64)>,
    seed: u64,
) -> Result<ProblemGraph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| match weight_range {
        Some((lo, hi)) => rng.random_range(lo..hi),
        None => 1.0,
    };
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < p {
                let weight = match kind {
                    ProblemKind::MaxCut => draw(&mut rng),
                    ProblemKind::Mis => 1.0,
                };
                edges.push(Edge { a, b, weight });
            }
        }
    }
    let vertex_weights = match kind {
        ProblemKind::Mis => Some((0..n).map(|_| draw(&mut rng)).collect()),
        ProblemKind::MaxCut => None,
    };
    Ok(ProblemGraph::new(kind, n, vertex_weights, edges)?.with_name(format!("gnp{n}_s{seed}")))
}
