//! PageRank, CheiRank and 2DRank by power iteration.
//!
//! Iteration runs `p ← G p` with two buffers until the L1 change between
//! successive iterates drops to the configured tolerance. Rank indices are
//! 1-based; equal probabilities are ordered by ascending node id.
//!
//! Nodes that tie exactly in the stationary vector can still come out a few
//! ulps apart, since their mass arrives along different paths. Probabilities
//! within [`TIE_RELATIVE`] of the largest value of their run are therefore
//! set to that value and treated as a tie.

use rayon::prelude::*;
use thiserror::Error;

use crate::gmatrix::{
    check_alpha, check_probability_vector, Direction, GoogleOperator, OperatorError,
    StochasticOperator, DEFAULT_ALPHA,
};
use crate::graph::{DirectedGraph, NodeId};
use crate::numeric;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;
pub const DEFAULT_STAGNATION_WINDOW: usize = 50;
/// Relative gap below which two probabilities count as equal.
pub const TIE_RELATIVE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankError {
    #[error("invalid rank configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("no convergence after {iterations} iterations (last L1 change {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("rank results cover {left} and {right} nodes")]
    Dimension { left: usize, right: usize },
}

/// Initial vector `P(0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum StartVector {
    Uniform,
    /// All mass on one node, `P_k(0) = 1`.
    Basis(NodeId),
    Supplied(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankConfig {
    pub alpha: f64,
    /// Stop once `Σ_i |p_i(t) − p_i(t−1)| ≤ tolerance`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub start: StartVector,
    /// Stop early, flagged as stagnated, when the residual has not improved
    /// on its best value for this many consecutive iterations.
    pub stagnation_window: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            start: StartVector::Uniform,
            stagnation_window: DEFAULT_STAGNATION_WINDOW,
        }
    }
}

impl RankConfig {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_start(mut self, start: StartVector) -> Self {
        self.start = start;
        self
    }

    pub fn validate(&self) -> Result<(), RankError> {
        check_alpha(self.alpha)?;
        if self.tolerance.is_nan() || self.tolerance <= 0.0 || !self.tolerance.is_finite() {
            return Err(RankError::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(RankError::Config("max_iterations must be at least 1".into()));
        }
        if self.stagnation_window == 0 {
            return Err(RankError::Config("stagnation_window must be at least 1".into()));
        }
        Ok(())
    }

    fn initial_vector(&self, n: usize) -> Result<Vec<f64>, RankError> {
        match &self.start {
            StartVector::Uniform => Ok(vec![1.0 / n as f64; n]),
            StartVector::Basis(k) => {
                if *k as usize >= n {
                    return Err(RankError::Config(format!(
                        "start node {k} outside 0..{n}"
                    )));
                }
                let mut p = vec![0.0; n];
                p[*k as usize] = 1.0;
                Ok(p)
            }
            StartVector::Supplied(p) => {
                check_probability_vector(p, n)?;
                Ok(p.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    /// Residual stopped improving above the tolerance (floating-point floor).
    Stagnated,
}

/// Stationary vector with its rank permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct RankResult {
    probabilities: Vec<f64>,
    order: Vec<NodeId>,
    index: Vec<usize>,
    iterations: usize,
    residual: f64,
    termination: Termination,
}

impl RankResult {
    /// Orders `probabilities` descending, ties by ascending node id. Near
    /// ties are first merged onto their leading value.
    pub fn from_probabilities(
        mut probabilities: Vec<f64>,
        iterations: usize,
        residual: f64,
        termination: Termination,
    ) -> Self {
        let order = rank_order(&mut probabilities);
        let mut index = vec![0usize; probabilities.len()];
        for (pos, &node) in order.iter().enumerate() {
            index[node as usize] = pos + 1;
        }
        Self {
            probabilities,
            order,
            index,
            iterations,
            residual,
            termination,
        }
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, node: NodeId) -> f64 {
        self.probabilities[node as usize]
    }

    /// Node ids from `K = 1` to `K = N`.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    /// `K` (or `K*`) of `node`, 1-based.
    pub fn rank_of(&self, node: NodeId) -> usize {
        self.index[node as usize]
    }

    pub fn index(&self) -> &[usize] {
        &self.index
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }
}

fn rank_order(probabilities: &mut [f64]) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..probabilities.len() as u64).map(|v| v as NodeId).collect();
    let p = &*probabilities;
    let cmp = |a: &NodeId, b: &NodeId| p[*b as usize].total_cmp(&p[*a as usize]).then(a.cmp(b));
    if order.len() >= numeric::PARALLEL_THRESHOLD {
        order.par_sort_unstable_by(cmp);
    } else {
        order.sort_unstable_by(cmp);
    }

    let mut start = 0;
    while start < order.len() {
        let lead = probabilities[order[start] as usize];
        let mut end = start + 1;
        while end < order.len() && lead - probabilities[order[end] as usize] <= TIE_RELATIVE * lead {
            end += 1;
        }
        let run = &mut order[start..end];
        if run.iter().any(|&v| probabilities[v as usize] != lead) {
            for &v in run.iter() {
                probabilities[v as usize] = lead;
            }
            run.sort_unstable();
        }
        start = end;
    }
    order
}

/// Runs `p ← op(p)` from the configured start vector.
pub fn power_iterate<O>(op: &O, config: &RankConfig) -> Result<RankResult, RankError>
where
    O: StochasticOperator + ?Sized,
{
    config.validate()?;
    let n = op.dimension();
    let mut current = config.initial_vector(n)?;
    let mut next = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;
    let mut residual = f64::INFINITY;

    for t in 1..=config.max_iterations {
        op.apply_into(&current, &mut next);
        residual = numeric::l1_distance(&next, &current);
        std::mem::swap(&mut current, &mut next);

        if residual <= config.tolerance {
            return Ok(RankResult::from_probabilities(
                current,
                t,
                residual,
                Termination::Converged,
            ));
        }
        if residual < best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.stagnation_window {
                return Ok(RankResult::from_probabilities(
                    current,
                    t,
                    residual,
                    Termination::Stagnated,
                ));
            }
        }
    }
    Err(RankError::Convergence {
        iterations: config.max_iterations,
        residual,
    })
}

/// Stationary vector `P` of `G`; the index is `K`.
pub fn pagerank(graph: &DirectedGraph, config: &RankConfig) -> Result<RankResult, RankError> {
    config.validate()?;
    let op = GoogleOperator::new(graph, config.alpha, Direction::Forward)?;
    power_iterate(&op, config)
}

/// Stationary vector `P*` of `G*`, built on the reversed network; the index is `K*`.
pub fn cheirank(graph: &DirectedGraph, config: &RankConfig) -> Result<RankResult, RankError> {
    config.validate()?;
    let op = GoogleOperator::new(graph, config.alpha, Direction::Reversed)?;
    power_iterate(&op, config)
}

/// `K₂ = max(K, K*)` per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoDRankResult {
    k2_index: Vec<usize>,
    order: Vec<NodeId>,
}

impl TwoDRankResult {
    pub fn k2(&self, node: NodeId) -> usize {
        self.k2_index[node as usize]
    }

    pub fn k2_index(&self) -> &[usize] {
        &self.k2_index
    }

    /// Node ids by ascending `K₂`, then `K + K*`, then id.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.k2_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k2_index.is_empty()
    }
}

pub fn two_d_rank(pr: &RankResult, cr: &RankResult) -> Result<TwoDRankResult, RankError> {
    two_d_rank_from_indices(pr.index(), cr.index())
}

/// Same as [`two_d_rank`] but from bare 1-based index vectors.
pub fn two_d_rank_from_indices(k: &[usize], k_star: &[usize]) -> Result<TwoDRankResult, RankError> {
    if k.len() != k_star.len() {
        return Err(RankError::Dimension {
            left: k.len(),
            right: k_star.len(),
        });
    }
    let k2_index: Vec<usize> = k.iter().zip(k_star).map(|(&a, &b)| a.max(b)).collect();
    let mut order: Vec<NodeId> = (0..k.len() as u64).map(|v| v as NodeId).collect();
    order.sort_unstable_by_key(|&v| {
        let v = v as usize;
        (k2_index[v], k[v] + k_star[v], v)
    });
    Ok(TwoDRankResult { k2_index, order })
}

/// Anything that yields node ids best-first.
pub trait NodeOrder {
    fn node_order(&self) -> &[NodeId];
}

impl NodeOrder for RankResult {
    fn node_order(&self) -> &[NodeId] {
        self.order()
    }
}

impl NodeOrder for TwoDRankResult {
    fn node_order(&self) -> &[NodeId] {
        self.order()
    }
}

impl NodeOrder for [NodeId] {
    fn node_order(&self) -> &[NodeId] {
        self
    }
}

impl NodeOrder for Vec<NodeId> {
    fn node_order(&self) -> &[NodeId] {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmatrix::GoogleOperator;

    fn graph(n: usize, edges: &[(NodeId, NodeId)]) -> DirectedGraph {
        DirectedGraph::from_edges(n, edges.iter().copied()).unwrap().0
    }

    #[test]
    fn near_ties_merge_onto_leader() {
        let x = 0.015;
        let p = vec![x * (1.0 - 4e-16), 0.5, x, x * (1.0 - 1e-9), 0.5 - x * 2.0 - 1e-3];
        let r = RankResult::from_probabilities(p, 0, 0.0, Termination::Converged);
        assert_eq!(r.order(), &[1, 4, 0, 2, 3]);
        assert_eq!(r.probability(0), x);
        assert_eq!(r.probability(3), x * (1.0 - 1e-9));
        let again = RankResult::from_probabilities(r.probabilities().to_vec(), 0, 0.0, Termination::Converged);
        assert_eq!(again, r);
    }

    #[test]
    fn two_node_cycle_is_symmetric() {
        let g = graph(2, &[(0, 1), (1, 0)]);
        let r = pagerank(&g, &RankConfig::default()).unwrap();
        assert_eq!(r.probabilities(), &[0.5, 0.5]);
        assert_eq!(r.rank_of(0), 1);
        assert_eq!(r.rank_of(1), 2);
        assert_eq!(r.termination(), Termination::Converged);
    }

    #[test]
    fn star_hub_leads_both_ways() {
        let inward = graph(4, &[(1, 0), (2, 0), (3, 0)]);
        let pr = pagerank(&inward, &RankConfig::default()).unwrap();
        assert_eq!(pr.rank_of(0), 1);
        assert_eq!(pr.order()[1..], [1, 2, 3]);

        let outward = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        let cr = cheirank(&outward, &RankConfig::default()).unwrap();
        assert_eq!(cr.rank_of(0), 1);
    }

    #[test]
    fn cheirank_is_pagerank_of_reverse() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 0), (3, 2), (4, 3), (5, 3), (1, 5)]);
        let cfg = RankConfig::default();
        let a = cheirank(&g, &cfg).unwrap();
        let b = pagerank(&g.reverse(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_convergence_reports_residual() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let cfg = RankConfig::default()
            .with_max_iterations(2)
            .with_start(StartVector::Basis(0));
        match pagerank(&g, &cfg) {
            Err(RankError::Convergence {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual > cfg.tolerance);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tiny_tolerance_stagnates_instead_of_spinning() {
        let edges: Vec<(NodeId, NodeId)> = (0..60 as NodeId)
            .flat_map(|v| [(v, (v * 7 + 3) % 60), (v, (v * 13 + 1) % 60)])
            .collect();
        let g = graph(60, &edges);
        let cfg = RankConfig::default()
            .with_tolerance(1e-17)
            .with_start(StartVector::Basis(0));
        let r = pagerank(&g, &cfg).unwrap();
        assert!(r.iterations() < cfg.max_iterations);
        if r.residual() > 1e-17 {
            assert_eq!(r.termination(), Termination::Stagnated);
        }
    }

    #[test]
    fn config_validation() {
        let g = graph(2, &[(0, 1)]);
        for cfg in [
            RankConfig::default().with_alpha(1.0),
            RankConfig::default().with_tolerance(0.0),
            RankConfig::default().with_max_iterations(0),
            RankConfig::default().with_start(StartVector::Basis(7)),
            RankConfig::default().with_start(StartVector::Supplied(vec![0.5])),
        ] {
            assert!(pagerank(&g, &cfg).is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn fixed_point_and_start_independence() {
        let edges: Vec<(NodeId, NodeId)> = (0..40 as NodeId)
            .flat_map(|v| [(v, (v * 3 + 1) % 40), (v, (v * v + 5) % 40)])
            .chain([(7, 0), (8, 0), (9, 0)])
            .collect();
        let g = graph(45, &edges);
        let cfg = RankConfig::default();
        let uniform = pagerank(&g, &cfg).unwrap();
        let basis = pagerank(&g, &cfg.clone().with_start(StartVector::Basis(3))).unwrap();
        let l1 = numeric::l1_distance(uniform.probabilities(), basis.probabilities());
        assert!(l1 <= 10.0 * cfg.tolerance, "{l1}");

        let op = GoogleOperator::forward(&g, cfg.alpha).unwrap();
        let image = op.apply(uniform.probabilities()).unwrap();
        assert!(numeric::l1_distance(&image, uniform.probabilities()) <= 10.0 * cfg.tolerance);
    }

    #[test]
    fn two_d_rank_takes_max() {
        let k = [3, 1, 2];
        let ks = [7, 1, 3];
        let r = two_d_rank_from_indices(&k, &ks).unwrap();
        assert_eq!(r.k2(0), 7);
        assert_eq!(r.k2(1), 1);
        assert_eq!(r.order(), &[1, 2, 0]);
        assert!(matches!(
            two_d_rank_from_indices(&k, &ks[..2]),
            Err(RankError::Dimension { .. })
        ));
    }

    #[test]
    fn two_d_rank_tie_breaks_by_sum_then_id() {
        // nodes 0 and 1 share K2 = 3; node 1 has the smaller K + K*.
        let k = [3, 1, 2, 4];
        let ks = [2, 3, 1, 4];
        let r = two_d_rank_from_indices(&k, &ks).unwrap();
        assert_eq!(r.order(), &[2, 1, 0, 3]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn index_is_a_bijection_consistent_with_order(
                probs in prop::collection::vec(0u8..5, 1..60)
            ) {
                let p: Vec<f64> = probs.iter().map(|&x| x as f64).collect();
                let r = RankResult::from_probabilities(p, 0, 0.0, Termination::Converged);
                let mut seen = vec![false; r.len()];
                for v in 0..r.len() {
                    let k = r.rank_of(v as NodeId);
                    prop_assert!(k >= 1 && k <= r.len() && !seen[k - 1]);
                    seen[k - 1] = true;
                }
                prop_assert_eq!(r.rank_of(r.order()[0]), 1);
                for w in r.order().windows(2) {
                    let (a, b) = (w[0], w[1]);
                    prop_assert!(r.probability(a) > r.probability(b)
                        || (r.probability(a) == r.probability(b) && a < b));
                }
            }

            #[test]
            fn ranking_is_idempotent(
                probs in prop::collection::vec(1u32..1000, 1..60),
                noise in prop::collection::vec(-4i32..4, 60)
            ) {
                let p: Vec<f64> = probs
                    .iter()
                    .zip(&noise)
                    .map(|(&x, &e)| x as f64 * (1.0 + e as f64 * 1e-15))
                    .collect();
                let r = RankResult::from_probabilities(p, 0, 0.0, Termination::Converged);
                let again = RankResult::from_probabilities(r.probabilities().to_vec(), 0, 0.0, Termination::Converged);
                prop_assert_eq!(again, r);
            }
        }
    }
}
