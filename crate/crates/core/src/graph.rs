//! Immutable compact adjacency for one edition's article network.
//!
//! An edge-list line `src dst` means article `src` links to article `dst`,
//! i.e. `A[dst][src] = 1` in column-stochastic notation where column `j`
//! holds the out-links of node `j`. Both the forward (out) and transposed
//! (in) adjacency are kept in CSR form with sorted rows, so every query is a
//! slice borrow.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

/// Dense node identifier. 32 bits unless the `wide-ids` feature is enabled.
#[cfg(not(feature = "wide-ids"))]
pub type NodeId = u32;
/// Dense node identifier. 32 bits unless the `wide-ids` feature is enabled.
#[cfg(feature = "wide-ids")]
pub type NodeId = u64;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("node id {id} exceeds the configured maximum of {max} nodes")]
    Capacity { id: u64, max: u64 },
    #[error("graph has no nodes")]
    Empty,
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl GraphError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        GraphError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// One CSR half: `targets[offsets[v]..offsets[v + 1]]` are the neighbours of `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Adjacency {
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[NodeId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    /// Transpose: row `t` of the result lists every `s` with `t` in row `s`.
    /// Rows come out sorted because sources are visited in ascending order.
    fn transpose(&self, node_count: usize) -> Adjacency {
        let mut offsets = vec![0usize; node_count + 1];
        for &t in &self.targets {
            offsets[t as usize + 1] += 1;
        }
        for v in 0..node_count {
            offsets[v + 1] += offsets[v];
        }
        let mut cursor = offsets[..node_count].to_vec();
        let mut targets = vec![0 as NodeId; self.targets.len()];
        for s in 0..node_count {
            for &t in self.neighbors(s) {
                let slot = &mut cursor[t as usize];
                targets[*slot] = s as NodeId;
                *slot += 1;
            }
        }
        Adjacency { offsets, targets }
    }
}

/// Article titles keyed by node id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeLabels {
    titles: HashMap<NodeId, String>,
}

impl NodeLabels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: NodeId, title: impl Into<String>) -> Option<String> {
        self.titles.insert(id, title.into())
    }

    pub fn get(&self, id: NodeId) -> Option<&str> {
        self.titles.get(&id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.titles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.titles.is_empty()
    }

    /// Reads `id<TAB>title` lines. `#` lines and blank lines are skipped.
    pub fn load(path: &Path) -> Result<Self, GraphError> {
        let file = File::open(path).map_err(|e| GraphError::io(path, e))?;
        let mut labels = NodeLabels::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| GraphError::io(path, e))?;
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| GraphError::Parse {
                path: path.display().to_string(),
                line: line_no,
                message,
            };
            let (id, title) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected `id<TAB>title`".into()))?;
            let id: u64 = id
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("invalid node id `{}`", id.trim())))?;
            let id = NodeId::try_from(id).map_err(|_| GraphError::Capacity {
                id,
                max: NodeId::MAX as u64,
            })?;
            if labels.insert(id, title.trim_end_matches('\r')).is_some() {
                return Err(parse_err(format!("duplicate label for node {id}")));
            }
        }
        Ok(labels)
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Largest accepted node count; ids at or above it are a capacity error.
    pub max_nodes: u64,
    /// Optional `id<TAB>title` sidecar.
    pub labels: Option<PathBuf>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            max_nodes: NodeId::MAX as u64,
            labels: None,
        }
    }
}

impl LoadOptions {
    pub fn with_labels(mut self, path: impl Into<PathBuf>) -> Self {
        self.labels = Some(path.into());
        self
    }
}

/// What the loader dropped while cleaning the input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LoadReport {
    pub data_lines: usize,
    pub comment_lines: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

/// Directed network of one edition: `N` nodes, `N_ℓ` distinct non-loop links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    node_count: usize,
    out: Adjacency,
    inc: Adjacency,
    labels: Option<Arc<NodeLabels>>,
}

impl DirectedGraph {
    /// Builds a graph over `node_count` nodes from `(src, dst)` pairs.
    /// Self-loops are dropped and duplicate pairs collapsed.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<(Self, LoadReport), GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut report = LoadReport::default();
        let mut pairs = Vec::new();
        for (s, t) in edges {
            report.data_lines += 1;
            for id in [s, t] {
                if id as u64 >= node_count as u64 {
                    return Err(GraphError::Capacity {
                        id: id as u64,
                        max: node_count as u64,
                    });
                }
            }
            if s == t {
                report.self_loops += 1;
            } else {
                pairs.push((s, t));
            }
        }
        let (graph, duplicates) = Self::build(node_count, &pairs);
        report.duplicate_edges = duplicates;
        Ok((graph, report))
    }

    /// Counting sort by source, then sort and dedup every row in place.
    fn build(node_count: usize, pairs: &[(NodeId, NodeId)]) -> (Self, usize) {
        let mut offsets = vec![0usize; node_count + 1];
        for &(s, _) in pairs {
            offsets[s as usize + 1] += 1;
        }
        for v in 0..node_count {
            offsets[v + 1] += offsets[v];
        }
        let mut cursor = offsets[..node_count].to_vec();
        let mut targets = vec![0 as NodeId; pairs.len()];
        for &(s, t) in pairs {
            let slot = &mut cursor[s as usize];
            targets[*slot] = t;
            *slot += 1;
        }

        let mut write = 0usize;
        let mut compact = vec![0usize; node_count + 1];
        for v in 0..node_count {
            let (lo, hi) = (offsets[v], offsets[v + 1]);
            targets[lo..hi].sort_unstable();
            let row_start = write;
            for k in lo..hi {
                if k > lo && targets[k] == targets[k - 1] {
                    continue;
                }
                targets[write] = targets[k];
                write += 1;
            }
            compact[v] = row_start;
        }
        compact[node_count] = write;
        let duplicates = targets.len() - write;
        targets.truncate(write);
        targets.shrink_to_fit();

        let out = Adjacency {
            offsets: compact,
            targets,
        };
        let inc = out.transpose(node_count);
        (
            DirectedGraph {
                node_count,
                out,
                inc,
                labels: None,
            },
            duplicates,
        )
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// `N_ℓ`, the number of distinct links after cleaning.
    pub fn link_count(&self) -> usize {
        self.out.targets.len()
    }

    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        self.out.neighbors(v as usize)
    }

    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        self.inc.neighbors(v as usize)
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out.degree(v as usize)
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.inc.degree(v as usize)
    }

    pub fn out_adjacency(&self) -> &Adjacency {
        &self.out
    }

    pub fn in_adjacency(&self) -> &Adjacency {
        &self.inc
    }

    pub fn labels(&self) -> Option<&NodeLabels> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: NodeLabels) -> Self {
        self.labels = Some(Arc::new(labels));
        self
    }

    /// All links as `(src, dst)`, ascending by source then target.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count)
            .flat_map(move |s| self.out.neighbors(s).iter().map(move |&t| (s as NodeId, t)))
    }

    /// The same network with every link inverted. Labels are shared.
    pub fn reverse(&self) -> DirectedGraph {
        DirectedGraph {
            node_count: self.node_count,
            out: self.inc.clone(),
            inc: self.out.clone(),
            labels: self.labels.clone(),
        }
    }

    /// Nodes with `k_out = 0`, ascending.
    pub fn dangling_nodes(&self) -> Vec<NodeId> {
        (0..self.node_count)
            .filter(|&v| self.out.degree(v) == 0)
            .map(|v| v as NodeId)
            .collect()
    }

    /// Nodes with `k_in = 0`, ascending.
    pub fn source_nodes(&self) -> Vec<NodeId> {
        (0..self.node_count)
            .filter(|&v| self.inc.degree(v) == 0)
            .map(|v| v as NodeId)
            .collect()
    }
}

/// Parses an edge-list file.
///
/// Format: UTF-8 text; lines starting with `#` are comments; an optional
/// first data line `N <count>` fixes the node count, otherwise it is the
/// largest id plus one; every other line is `src dst`.
pub fn load_edge_list(
    path: &Path,
    options: &LoadOptions,
) -> Result<(DirectedGraph, LoadReport), GraphError> {
    let file = File::open(path).map_err(|e| GraphError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut report = LoadReport::default();
    let mut declared: Option<u64> = None;
    let mut seen_data = false;
    let mut max_id: Option<u64> = None;
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    let mut self_loops = 0usize;

    let mut line = String::new();
    let mut line_no = 0usize;
    loop {
        line.clear();
        let read = reader
            .read_line(&mut line)
            .map_err(|e| GraphError::io(path, e))?;
        if read == 0 {
            break;
        }
        line_no += 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if text.starts_with('#') {
            report.comment_lines += 1;
            continue;
        }
        let parse_err = |message: String| GraphError::Parse {
            path: path.display().to_string(),
            line: line_no,
            message,
        };
        let mut fields = text.split_whitespace();
        let first = fields.next().unwrap_or_default();
        if first == "N" {
            if seen_data || declared.is_some() {
                return Err(parse_err("`N` directive must be the first data line".into()));
            }
            let count = fields
                .next()
                .and_then(|c| c.parse::<u64>().ok())
                .ok_or_else(|| parse_err("expected `N <count>`".into()))?;
            if fields.next().is_some() {
                return Err(parse_err("trailing tokens after `N <count>`".into()));
            }
            if count > options.max_nodes {
                return Err(GraphError::Capacity {
                    id: count,
                    max: options.max_nodes,
                });
            }
            declared = Some(count);
            seen_data = true;
            continue;
        }
        seen_data = true;
        let second = fields
            .next()
            .ok_or_else(|| parse_err(format!("expected `src dst`, found `{text}`")))?;
        if fields.next().is_some() {
            return Err(parse_err(format!("expected two ids, found `{text}`")));
        }
        let parse_id = |tok: &str| {
            tok.parse::<u64>()
                .map_err(|_| parse_err(format!("invalid node id `{tok}`")))
        };
        let (s, t) = (parse_id(first)?, parse_id(second)?);
        for id in [s, t] {
            if id >= options.max_nodes || id >= NodeId::MAX as u64 {
                return Err(GraphError::Capacity {
                    id,
                    max: options.max_nodes.min(NodeId::MAX as u64),
                });
            }
            if let Some(n) = declared {
                if id >= n {
                    return Err(parse_err(format!("node id {id} outside declared N={n}")));
                }
            }
        }
        report.data_lines += 1;
        max_id = Some(max_id.map_or(s.max(t), |m| m.max(s).max(t)));
        if s == t {
            self_loops += 1;
        } else {
            pairs.push((s as NodeId, t as NodeId));
        }
    }

    let node_count = match (declared, max_id) {
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };
    if node_count == 0 {
        return Err(GraphError::Empty);
    }
    let node_count = usize::try_from(node_count).map_err(|_| GraphError::Capacity {
        id: node_count,
        max: usize::MAX as u64,
    })?;
    let (mut graph, duplicates) = DirectedGraph::build(node_count, &pairs);
    drop(pairs);
    report.self_loops = self_loops;
    report.duplicate_edges = duplicates;

    if let Some(label_path) = &options.labels {
        graph = graph.with_labels(NodeLabels::load(label_path)?);
    }
    Ok((graph, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn load_str(content: &str) -> Result<(DirectedGraph, LoadReport), GraphError> {
        let f = write_tmp(content);
        load_edge_list(f.path(), &LoadOptions::default())
    }

    #[test]
    fn two_node_cycle() {
        let (g, _) = load_str("0 1\n1 0\n").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.link_count(), 2);
        assert_eq!(g.out_degree(0), 1);
        assert_eq!(g.out_degree(1), 1);
    }

    #[test]
    fn cleaning_rules() {
        let (g, report) = load_str("0 1\n0 1\n1 1\n").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.link_count(), 1);
        assert_eq!(report.duplicate_edges, 1);
        assert_eq!(report.self_loops, 1);
        assert_eq!(report.data_lines, 3);
    }

    #[test]
    fn directive_and_comments() {
        let (g, report) = load_str("# header\nN 5\n# more\n0 1\n\n3 2\n").unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.link_count(), 2);
        assert_eq!(report.comment_lines, 2);
        assert_eq!(g.dangling_nodes(), vec![1, 2, 4]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match load_str("0 1\n1 x\n") {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match load_str("0 1 2\n") {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        match load_str("0 1\nN 4\n") {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            load_str("N 2\n0 5\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(load_str("# nothing\n"), Err(GraphError::Empty)));
        assert!(matches!(DirectedGraph::from_edges(0, []), Err(GraphError::Empty)));
        let (g, _) = load_str("N 1\n").unwrap();
        assert_eq!((g.node_count(), g.link_count()), (1, 0));
    }

    #[test]
    fn capacity_error() {
        let f = write_tmp("0 1\n2 9\n");
        let opts = LoadOptions {
            max_nodes: 8,
            labels: None,
        };
        assert!(matches!(
            load_edge_list(f.path(), &opts),
            Err(GraphError::Capacity { id: 9, .. })
        ));
    }

    #[test]
    fn labels_sidecar() {
        let edges = write_tmp("0 1\n");
        let labels = write_tmp("0\tParis\n1\tUniversité Harvard\n");
        let opts = LoadOptions::default().with_labels(labels.path());
        let (g, _) = load_edge_list(edges.path(), &opts).unwrap();
        let l = g.labels().unwrap();
        assert_eq!(l.get(1), Some("Université Harvard"));
        assert_eq!(l.get(7), None);
    }

    #[test]
    fn reverse_single_edge() {
        let (g, _) = DirectedGraph::from_edges(2, [(0, 1)]).unwrap();
        let r = g.reverse();
        assert_eq!(r.edges().collect::<Vec<_>>(), vec![(1, 0)]);
        assert_eq!(r.link_count(), 1);
        assert_eq!(g.dangling_nodes(), vec![1]);
        assert_eq!(r.dangling_nodes(), vec![0]);
    }

    #[test]
    fn complete_cycle_has_no_dangling() {
        let (g, _) = DirectedGraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(g.dangling_nodes().is_empty());
    }

    #[test]
    fn random_load_matches_set_reference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut text = String::new();
        let mut reference = BTreeSet::new();
        let mut max_id: NodeId = 0;
        for _ in 0..20_000 {
            let s: NodeId = rng.gen_range(0..1000);
            let t: NodeId = rng.gen_range(0..1000);
            max_id = max_id.max(s).max(t);
            text.push_str(&format!("{s} {t}\n"));
            if s != t {
                reference.insert((s, t));
            }
        }
        let (g, _) = load_str(&text).unwrap();
        assert_eq!(g.node_count(), max_id as usize + 1);
        assert_eq!(g.link_count(), reference.len());
        assert_eq!(g.edges().collect::<BTreeSet<_>>(), reference);
        let degree_by_scan: Vec<usize> = (0..g.node_count())
            .map(|v| reference.iter().filter(|e| e.1 as usize == v).count())
            .collect();
        let rev = g.reverse();
        for v in 0..g.node_count() as NodeId {
            assert_eq!(rev.out_degree(v), degree_by_scan[v as usize]);
            assert_eq!(rev.out_degree(v), g.in_degree(v));
        }
        let brute: Vec<NodeId> = (0..g.node_count() as NodeId)
            .filter(|&v| !reference.iter().any(|e| e.0 == v))
            .collect();
        assert_eq!(g.dangling_nodes(), brute);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn graph_strategy() -> impl Strategy<Value = DirectedGraph> {
            (1usize..40).prop_flat_map(|n| {
                prop::collection::vec((0..n as NodeId, 0..n as NodeId), 0..200)
                    .prop_map(move |e| DirectedGraph::from_edges(n, e).unwrap().0)
            })
        }

        proptest! {
            #[test]
            fn degree_sums_equal_link_count(g in graph_strategy()) {
                let n = g.node_count() as NodeId;
                let out: usize = (0..n).map(|v| g.out_degree(v)).sum();
                let inn: usize = (0..n).map(|v| g.in_degree(v)).sum();
                prop_assert_eq!(out, g.link_count());
                prop_assert_eq!(inn, g.link_count());
            }

            #[test]
            fn reverse_is_involution(g in graph_strategy()) {
                let r = g.reverse();
                prop_assert_eq!(r.out_adjacency(), g.in_adjacency());
                prop_assert_eq!(r.dangling_nodes(), g.source_nodes());
                prop_assert_eq!(r.reverse(), g);
            }

            #[test]
            fn in_adjacency_is_transpose(g in graph_strategy()) {
                let mut fwd: Vec<_> = g.edges().map(|(s, t)| (t, s)).collect();
                fwd.sort_unstable();
                let mut back = Vec::new();
                for t in 0..g.node_count() as NodeId {
                    for &s in g.in_neighbors(t) {
                        back.push((t, s));
                    }
                }
                prop_assert_eq!(fwd, back);
            }
        }
    }
}
