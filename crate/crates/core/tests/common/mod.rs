#![allow(dead_code)]

use rydberg_anneal::graph::{parse_graph, ProblemGraph};

const FIXTURES: &str = include_str!("../data/fixtures.json");

fn fixtures() -> serde_json::Value {
    serde_json::from_str(FIXTURES).expect("fixture file parses")
}

fn graph(v: &serde_json::Value) -> ProblemGraph {
    parse_graph(&v.to_string()).expect("fixture graph is valid")
}

/// Ten weighted Max-Cut graphs on five vertices, degree at most three.
pub fn weighted_n5() -> Vec<ProblemGraph> {
    fixtures()["weighted_n5"].as_array().unwrap().iter().map(graph).collect()
}

pub fn weighted_n8() -> ProblemGraph {
    graph(&fixtures()["weighted_n8"])
}

pub fn weighted_n12() -> ProblemGraph {
    graph(&fixtures()["weighted_n12"])
}

use proptest::prelude::*;
use rydberg_anneal::graph::{Edge, ProblemKind};

/// Random Max-Cut or MIS instance with `n_range` vertices; weights are
/// either all one or drawn from `[0.5, 2)`.
pub fn arb_graph(n_range: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ProblemGraph> {
    (n_range, any::<bool>(), any::<bool>(), any::<u64>()).prop_map(|(n, maxcut, weighted, seed)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let kind = if maxcut { ProblemKind::MaxCut } else { ProblemKind::Mis };
        let w = |rng: &mut rand_chacha::ChaCha8Rng| if weighted { rng.random_range(0.5..2.0) } else { 1.0 };
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random::<f64>() < 0.5 {
                    let weight = if maxcut { w(&mut rng) } else { 1.0 };
                    edges.push(Edge { a, b, weight });
                }
            }
        }
        let vw = (!maxcut).then(|| (0..n).map(|_| w(&mut rng)).collect());
        ProblemGraph::new(kind, n, vw, edges).expect("valid random graph")
    })
}
