//! Matrix-free Google operator `G = αS + (1 − α)/N`.
//!
//! `S` follows out-links uniformly (`S_ij = A_ij / k_out(j)`) and replaces
//! every dangling column by `1/N`. The dangling columns are never stored:
//! their combined effect on `G p` is the scalar `d = Σ_{j dangling} p_j`
//! spread uniformly over all nodes.
//!
//! The dual operator `G*` is the same construction over the reversed
//! network. [`Direction::Reversed`] reads the graph's transposed adjacency
//! in place of the forward one, which is exactly what [`DirectedGraph::reverse`]
//! stores, so both routes share every array and every arithmetic step.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Adjacency, DirectedGraph, NodeId};
use crate::numeric::{self, BLOCK, PARALLEL_THRESHOLD};

pub const DEFAULT_ALPHA: f64 = 0.85;

/// Tolerance on `Σp = 1` for vectors handed to [`StochasticOperator::apply`].
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("dimension mismatch: operator has {expected} nodes, vector has {found} entries")]
    Dimension { expected: usize, found: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

/// A column-stochastic linear map on probability vectors.
pub trait StochasticOperator: Sync {
    fn dimension(&self) -> usize;

    /// Writes `out = M p`. No validation; `out.len() == p.len() == dimension()`.
    fn apply_into(&self, p: &[f64], out: &mut [f64]);

    /// Validated application.
    fn apply(&self, p: &[f64]) -> Result<Vec<f64>, OperatorError> {
        check_probability_vector(p, self.dimension())?;
        let mut out = vec![0.0; p.len()];
        self.apply_into(p, &mut out);
        Ok(out)
    }
}

pub fn check_probability_vector(p: &[f64], n: usize) -> Result<(), OperatorError> {
    if p.len() != n {
        return Err(OperatorError::Dimension {
            expected: n,
            found: p.len(),
        });
    }
    if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| v.is_nan() || **v < 0.0 || !v.is_finite()) {
        return Err(OperatorError::Domain(format!(
            "entry {i} is {v}; probabilities must be finite and non-negative"
        )));
    }
    let mass = numeric::sum(p);
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(OperatorError::Domain(format!(
            "vector sums to {mass}, expected 1"
        )));
    }
    Ok(())
}

pub fn check_alpha(alpha: f64) -> Result<(), OperatorError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(OperatorError::Domain(format!(
            "damping factor {alpha} must lie strictly inside (0, 1)"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    /// `G`, following links as stored.
    Forward,
    /// `G*`, following every link backwards.
    Reversed,
}

#[derive(Debug, Clone)]
pub struct GoogleOperator<'g> {
    graph: &'g DirectedGraph,
    alpha: f64,
    direction: Direction,
    dangling: Vec<NodeId>,
}

impl<'g> GoogleOperator<'g> {
    pub fn new(
        graph: &'g DirectedGraph,
        alpha: f64,
        direction: Direction,
    ) -> Result<Self, OperatorError> {
        check_alpha(alpha)?;
        let dangling = match direction {
            Direction::Forward => graph.dangling_nodes(),
            Direction::Reversed => graph.source_nodes(),
        };
        Ok(Self {
            graph,
            alpha,
            direction,
            dangling,
        })
    }

    pub fn forward(graph: &'g DirectedGraph, alpha: f64) -> Result<Self, OperatorError> {
        Self::new(graph, alpha, Direction::Forward)
    }

    pub fn reversed(graph: &'g DirectedGraph, alpha: f64) -> Result<Self, OperatorError> {
        Self::new(graph, alpha, Direction::Reversed)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn graph(&self) -> &'g DirectedGraph {
        self.graph
    }

    /// Dangling nodes of the operated network (source nodes of the graph for `G*`).
    pub fn dangling(&self) -> &[NodeId] {
        &self.dangling
    }

    /// Links leaving each node of the operated network.
    fn outgoing(&self) -> &'g Adjacency {
        match self.direction {
            Direction::Forward => self.graph.out_adjacency(),
            Direction::Reversed => self.graph.in_adjacency(),
        }
    }

    /// Links arriving at each node of the operated network.
    fn incoming(&self) -> &'g Adjacency {
        match self.direction {
            Direction::Forward => self.graph.in_adjacency(),
            Direction::Reversed => self.graph.out_adjacency(),
        }
    }
}

impl StochasticOperator for GoogleOperator<'_> {
    fn dimension(&self) -> usize {
        self.graph.node_count()
    }

    fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        let n = self.dimension();
        let outgoing = self.outgoing();
        let incoming = self.incoming();
        let alpha = self.alpha;

        // Probability each node sends along one of its links.
        let mut share = vec![0.0f64; n];
        let fill_share = |(b, chunk): (usize, &mut [f64])| {
            let base = b * BLOCK;
            for (k, x) in chunk.iter_mut().enumerate() {
                let deg = outgoing.degree(base + k);
                *x = if deg == 0 { 0.0 } else { p[base + k] / deg as f64 };
            }
        };
        if n >= PARALLEL_THRESHOLD {
            share.par_chunks_mut(BLOCK).enumerate().for_each(fill_share);
        } else {
            share.chunks_mut(BLOCK).enumerate().for_each(fill_share);
        }

        let dangling = &self.dangling;
        let d = numeric::block_sum(dangling.len(), |k| p[dangling[k] as usize]);
        let teleport = (alpha * d + (1.0 - alpha)) / n as f64;

        let gather = |(b, chunk): (usize, &mut [f64])| {
            let base = b * BLOCK;
            for (k, q) in chunk.iter_mut().enumerate() {
                let mut acc = 0.0;
                for &j in incoming.neighbors(base + k) {
                    acc += share[j as usize];
                }
                *q = alpha * acc + teleport;
            }
        };
        if n >= PARALLEL_THRESHOLD {
            out.par_chunks_mut(BLOCK).enumerate().for_each(gather);
        } else {
            out.chunks_mut(BLOCK).enumerate().for_each(gather);
        }

        let mass = numeric::sum(out);
        if mass != 1.0 && mass > 0.0 {
            if n >= PARALLEL_THRESHOLD {
                out.par_iter_mut().for_each(|q| *q /= mass);
            } else {
                out.iter_mut().for_each(|q| *q /= mass);
            }
        }
    }
}

/// Applies `op` to uniform, basis and random probability vectors and reports
/// whether every image sums to one within `1e-10`.
pub fn column_sums_check<O: StochasticOperator + ?Sized>(op: &O, trials: usize) -> bool {
    let n = op.dimension();
    if n == 0 {
        return false;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut out = vec![0.0; n];
    let mut probe = |p: &[f64]| {
        op.apply_into(p, &mut out);
        (numeric::sum(&out) - 1.0).abs() <= 1e-10 && out.iter().all(|&q| q >= 0.0)
    };

    if !probe(&vec![1.0 / n as f64; n]) {
        return false;
    }
    for t in 0..trials.max(1) {
        let mut basis = vec![0.0; n];
        let k = if t == 0 { 0 } else { rng.gen_range(0..n) };
        basis[k] = 1.0;
        if !probe(&basis) {
            return false;
        }

        let mut p: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let total = numeric::sum(&p);
        p.iter_mut().for_each(|x| *x /= total);
        if !probe(&p) {
            return false;
        }
    }
    true
}
