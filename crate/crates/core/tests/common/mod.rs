//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use wikirank::graph::DirectedGraph;
use wikirank::pipeline::RunConfig;

pub const MINI_TOP: usize = 5;

pub fn mini_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini")
}

pub fn mini_config(out: &Path, workers: usize) -> RunConfig {
    let mut c = RunConfig::load(&mini_dir().join("run.toml")).expect("fixture config");
    c.output_dir = out.to_path_buf();
    c.workers = workers;
    c
}

/// Per-edition top-5 lists of the mini corpus, worked out independently of
/// this crate (dense iteration with exactly rounded sums, then the keyword
/// rules by hand).
pub const MINI_LISTS: [(&str, &str, [&str; 5]); 9] = [
    ("EN", "pagerank", ["mit", "bologna", "paris", "harvard", "cambridge"]),
    ("EN", "cheirank", ["lmu", "bologna", "oxford", "tartu", "paris"]),
    ("EN", "2drank", ["bologna", "lmu", "oxford", "paris", "harvard"]),
    ("FR", "pagerank", ["tartu", "eth", "harvard", "lmu", "oxford"]),
    ("FR", "cheirank", ["mit", "eth", "paris", "polytechnique", "humboldt"]),
    ("FR", "2drank", ["eth", "mit", "tartu", "harvard", "cambridge"]),
    ("DE", "pagerank", ["paris", "lmu", "cambridge", "bologna", "heidelberg"]),
    ("DE", "cheirank", ["lmu", "mit", "paris", "eth", "heidelberg"]),
    ("DE", "2drank", ["paris", "lmu", "heidelberg", "humboldt", "eth"]),
];

/// `(canonical_id, Θ, Nₐ)` in world-rank order.
pub const MINI_THETA_PR: [(&str, u64, usize); 10] = [
    ("paris", 8, 2),
    ("bologna", 6, 2),
    ("lmu", 6, 2),
    ("harvard", 5, 2),
    ("mit", 5, 1),
    ("tartu", 5, 1),
    ("cambridge", 4, 2),
    ("eth", 4, 1),
    ("heidelberg", 1, 1),
    ("oxford", 1, 1),
];

pub const MINI_THETA_CR: [(&str, u64, usize); 10] = [
    ("lmu", 10, 2),
    ("mit", 9, 2),
    ("paris", 7, 3),
    ("eth", 6, 2),
    ("bologna", 4, 1),
    ("oxford", 3, 1),
    ("polytechnique", 2, 1),
    ("tartu", 2, 1),
    ("heidelberg", 1, 1),
    ("humboldt", 1, 1),
];

pub const MINI_THETA_2D: [(&str, u64, usize); 11] = [
    ("lmu", 8, 2),
    ("paris", 7, 2),
    ("eth", 6, 2),
    ("bologna", 5, 1),
    ("mit", 4, 1),
    ("harvard", 3, 2),
    ("heidelberg", 3, 1),
    ("oxford", 3, 1),
    ("tartu", 3, 1),
    ("humboldt", 2, 1),
    ("cambridge", 1, 1),
];

/// `(canonical_id, country, language, year)` of the mini catalog.
pub const MINI_ENTITIES: [(&str, &str, &str, i32); 12] = [
    ("harvard", "US", "EN", 1636),
    ("cambridge", "UK", "EN", 1209),
    ("oxford", "UK", "EN", 1096),
    ("mit", "US", "EN", 1861),
    ("heidelberg", "DE", "DE", 1386),
    ("humboldt", "DE", "DE", 1810),
    ("lmu", "DE", "DE", 1472),
    ("polytechnique", "FR", "FR", 1794),
    ("paris", "FR", "FR", 1150),
    ("eth", "CH", "DE", 1855),
    ("bologna", "IT", "IT", 1088),
    ("tartu", "EE", "WR", 1632),
];

pub const MINI_ARWU: [&str; 10] = [
    "harvard", "mit", "cambridge", "oxford", "eth", "lmu", "heidelberg", "paris", "humboldt", "bologna",
];

pub const MINI_POPULATION: [(&str, u64); 7] = [
    ("CH", 8_000_000),
    ("DE", 80_600_000),
    ("EE", 1_300_000),
    ("FR", 65_700_000),
    ("IT", 59_800_000),
    ("UK", 63_000_000),
    ("US", 316_000_000),
];

pub fn entity(id: &str) -> (&'static str, &'static str, &'static str, i32) {
    *MINI_ENTITIES.iter().find(|e| e.0 == id).expect("mini entity")
}

pub fn mini_lists(algorithm: &str) -> Vec<(&'static str, Vec<&'static str>)> {
    MINI_LISTS
        .iter()
        .filter(|l| l.1 == algorithm)
        .map(|l| (l.0, l.2.to_vec()))
        .collect()
}

/// Compensated summation, kept separate from the crate's own.
pub fn fsum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

/// Explicit column-stochastic `G = αS + (1 − α)/N` of `graph` (or of its
/// reversal), row-major: `g[i * n + j]`.
pub fn dense_google(graph: &DirectedGraph, alpha: f64, reversed: bool) -> Vec<f64> {
    let n = graph.node_count();
    let mut out_links: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, t) in graph.edges() {
        let (s, t) = if reversed { (t, s) } else { (s, t) };
        out_links[s as usize].push(t as usize);
    }
    let mut g = vec![(1.0 - alpha) / n as f64; n * n];
    for (j, targets) in out_links.iter().enumerate() {
        if targets.is_empty() {
            for i in 0..n {
                g[i * n + j] += alpha / n as f64;
            }
        } else {
            for &i in targets {
                g[i * n + j] += alpha / targets.len() as f64;
            }
        }
    }
    g
}

/// Power iteration with the explicit matrix until the L1 change is below 1e-15.
pub fn dense_stationary(g: &[f64], n: usize) -> Vec<f64> {
    let mut p = vec![1.0 / n as f64; n];
    for _ in 0..200_000 {
        let mut q: Vec<f64> = (0..n).map(|i| fsum((0..n).map(|j| g[i * n + j] * p[j]))).collect();
        let s = fsum(q.iter().copied());
        q.iter_mut().for_each(|x| *x /= s);
        let change = fsum(q.iter().zip(&p).map(|(a, b)| (a - b).abs()));
        p = q;
        if change < 1e-15 {
            break;
        }
    }
    p
}

/// Node ids by probability descending. Values within `1e-12` relative of the
/// largest value of their run are treated as exact ties and ordered by id.
pub fn oracle_order(p: &[f64]) -> Vec<usize> {
    let mut by_value: Vec<usize> = (0..p.len()).collect();
    by_value.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    let mut out = Vec::with_capacity(p.len());
    let mut group: Vec<usize> = Vec::new();
    for &v in &by_value {
        if let Some(&lead) = group.first() {
            if p[lead] - p[v] > 1e-12 * p[lead] {
                group.sort_unstable();
                out.append(&mut group);
            }
        }
        group.push(v);
    }
    group.sort_unstable();
    out.append(&mut group);
    out
}

/// Every file under `root` except wall-clock timings, keyed by relative path.
pub fn tree_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                if rel != "timings.json" {
                    out.insert(rel, std::fs::read(&p).unwrap());
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Rows of a CSV file as string vectors, header excluded.
pub fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

pub fn csv_header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(str::to_string).collect()
}
