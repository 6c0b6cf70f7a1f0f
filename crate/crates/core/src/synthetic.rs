//! Seeded random networks for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{DirectedGraph, GraphError, LoadReport, NodeId};

/// `links` uniformly random `src → dst` pairs over `n` nodes. Self-loops and
/// repeats are dropped by the builder, so the graph may hold slightly fewer links.
pub fn uniform_graph(n: usize, links: usize, seed: u64) -> Result<(DirectedGraph, LoadReport), GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..links).map(move |_| {
        let s = rng.gen_range(0..n) as NodeId;
        let t = rng.gen_range(0..n) as NodeId;
        (s, t)
    });
    DirectedGraph::from_edges(n, edges)
}

/// Each ordered pair `(s, t)`, `s ≠ t`, is a link with probability `density`.
pub fn bernoulli_graph(n: usize, density: f64, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if s != t && rng.gen_bool(density) {
                edges.push((s as NodeId, t as NodeId));
            }
        }
    }
    DirectedGraph::from_edges(n, edges)
        .expect("ids below n")
        .0
}

/// Targets drawn with weight `(rank + 1)^-exponent` after a random shuffle,
/// giving a heavy-tailed in-degree like article networks.
pub fn skewed_graph(n: usize, links: usize, exponent: f64, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cumulative = Vec::with_capacity(n);
    let mut total = 0.0;
    for k in 0..n {
        total += ((k + 1) as f64).powf(-exponent);
        cumulative.push(total);
    }
    let mut label: Vec<NodeId> = (0..n as NodeId).collect();
    for i in (1..n).rev() {
        label.swap(i, rng.gen_range(0..=i));
    }
    let edges: Vec<(NodeId, NodeId)> = (0..links)
        .map(|_| {
            let s = rng.gen_range(0..n) as NodeId;
            let x = rng.gen::<f64>() * total;
            let k = cumulative.partition_point(|&c| c < x).min(n - 1);
            (s, label[k])
        })
        .collect();
    DirectedGraph::from_edges(n, edges).expect("ids below n").0
}
