//! Picks university articles out of a ranked edition.
//!
//! A node is accepted when its title contains one of the edition's keywords
//! (case-insensitive, NFC) or is on the inclusion list, and is not on the
//! exclusion list. Accepted titles must resolve in the [`EntityCatalog`];
//! the `R`-th accepted entity gets rank `R`.
//!
//! Rules file (TOML). The optional `[common]` table is merged into every
//! edition:
//!
//! ```toml
//! [common]
//! exclude = ["Unseen University"]
//!
//! [edition.FR]
//! keywords = ["université"]
//! include = ["École polytechnique (France)"]
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::catalog::{normalize_title, EntityCatalog};
use crate::graph::{NodeId, NodeLabels};
use crate::rank::NodeOrder;

pub const DEFAULT_TOP: usize = 100;

const BUILTIN_RULES: &str = include_str!("../data/default_rules.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    PageRank,
    CheiRank,
    TwoDRank,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::PageRank, Algorithm::CheiRank, Algorithm::TwoDRank];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::PageRank => "pagerank",
            Algorithm::CheiRank => "cheirank",
            Algorithm::TwoDRank => "2drank",
        }
    }

    /// Name of the merged world list for this algorithm.
    pub fn global_list_name(self) -> &'static str {
        match self {
            Algorithm::PageRank => "WPRWU",
            Algorithm::CheiRank => "WCRWU",
            Algorithm::TwoDRank => "W2RWU",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pagerank" | "pr" => Ok(Algorithm::PageRank),
            "cheirank" | "cr" => Ok(Algorithm::CheiRank),
            "2drank" | "2d" | "twodrank" => Ok(Algorithm::TwoDRank),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

impl serde::Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("rules syntax error: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid rules: {0}")]
    InvalidRules(String),
    #[error("{edition}: node {node} has no title")]
    MissingLabel { edition: String, node: NodeId },
    #[error("{edition}/{algorithm}: {} accepted title(s) not in the catalog: {}", titles.len(), titles.join("; "))]
    Unresolved {
        edition: String,
        algorithm: Algorithm,
        titles: Vec<String>,
    },
    #[error("top list length must be at least 1")]
    ZeroTop,
    #[error("ranking file: {0}")]
    Csv(#[from] csv::Error),
    #[error("ranking file: {0}")]
    Format(String),
}

fn fold(text: &str) -> String {
    let lowered: String = normalize_title(text).to_lowercase();
    lowered.nfc().collect()
}

/// Rules for one edition after merging `[common]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EditionRules {
    keywords: Vec<String>,
    include: BTreeSet<String>,
    exclude: BTreeSet<String>,
}

impl EditionRules {
    pub fn new<K, I, E>(keywords: K, include: I, exclude: E) -> Result<Self, ExtractError>
    where
        K: IntoIterator,
        K::Item: AsRef<str>,
        I: IntoIterator,
        I::Item: AsRef<str>,
        E: IntoIterator,
        E::Item: AsRef<str>,
    {
        let mut keywords: Vec<String> = keywords
            .into_iter()
            .map(|k| fold(k.as_ref()))
            .filter(|k| !k.is_empty())
            .collect();
        keywords.sort();
        keywords.dedup();
        let include: BTreeSet<String> = include.into_iter().map(|t| normalize_title(t.as_ref())).collect();
        let exclude: BTreeSet<String> = exclude.into_iter().map(|t| normalize_title(t.as_ref())).collect();
        if let Some(both) = include.intersection(&exclude).next() {
            return Err(ExtractError::InvalidRules(format!(
                "`{both}` is both included and excluded"
            )));
        }
        Ok(Self {
            keywords,
            include,
            exclude,
        })
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn matches_keyword(&self, title: &str) -> bool {
        if self.keywords.is_empty() {
            return false;
        }
        let folded = fold(title);
        self.keywords.iter().any(|k| folded.contains(k.as_str()))
    }

    pub fn accepts(&self, title: &str) -> bool {
        let t = normalize_title(title);
        if self.exclude.contains(&t) {
            return false;
        }
        self.include.contains(&t) || self.matches_keyword(&t)
    }

    fn merged(&self, common: &EditionRules) -> Result<EditionRules, ExtractError> {
        EditionRules::new(
            self.keywords.iter().chain(&common.keywords),
            self.include.iter().chain(&common.include),
            self.exclude.iter().chain(&common.exclude),
        )
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawEditionRules {
    #[serde(default)]
    keywords: Vec<String>,
    #[serde(default)]
    include: Vec<String>,
    #[serde(default)]
    exclude: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRules {
    #[serde(default)]
    common: RawEditionRules,
    #[serde(default)]
    edition: BTreeMap<String, RawEditionRules>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtractionRules {
    common: EditionRules,
    editions: BTreeMap<String, EditionRules>,
}

impl ExtractionRules {
    pub fn parse(text: &str) -> Result<Self, ExtractError> {
        let raw: RawRules = toml::from_str(text)?;
        let build = |r: RawEditionRules| EditionRules::new(r.keywords, r.include, r.exclude);
        let common = build(raw.common)?;
        let mut editions = BTreeMap::new();
        for (code, r) in raw.edition {
            let rules = build(r)?.merged(&common)?;
            editions.insert(code.trim().to_ascii_uppercase(), rules);
        }
        Ok(Self { common, editions })
    }

    pub fn load(path: &Path) -> Result<Self, ExtractError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExtractError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Keyword lists for "university" in each of the 24 editions.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_RULES).expect("bundled rules parse")
    }

    pub fn insert(&mut self, edition: &str, rules: EditionRules) -> Result<(), ExtractError> {
        let merged = rules.merged(&self.common)?;
        self.editions.insert(edition.to_ascii_uppercase(), merged);
        Ok(())
    }

    /// Rules for `edition`; editions without a section get only `[common]`.
    pub fn for_edition(&self, edition: &str) -> &EditionRules {
        self.editions
            .get(&edition.to_ascii_uppercase())
            .unwrap_or(&self.common)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedEntity {
    pub rank: usize,
    pub canonical_id: String,
    pub title: String,
    pub node: NodeId,
    /// Position of the article in the full edition ranking (`K`, `K*` or 2DRank position).
    pub node_rank: usize,
}

/// Top-`T` universities of one edition under one algorithm; ranks `1..=len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditionRanking {
    pub edition: String,
    pub algorithm: Algorithm,
    /// Configured list length `T`; absent entities count as rank `T + 1`.
    pub top: usize,
    pub entries: Vec<RankedEntity>,
}

impl EditionRanking {
    pub fn rank_of(&self, canonical_id: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.canonical_id == canonical_id)
            .map(|e| e.rank)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.canonical_id.as_str())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ExtractError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "canonical_id", "title", "node", "node_rank"])?;
        for e in &self.entries {
            w.write_record([
                e.rank.to_string(),
                e.canonical_id.clone(),
                e.title.clone(),
                e.node.to_string(),
                e.node_rank.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(
        input: R,
        edition: &str,
        algorithm: Algorithm,
        top: usize,
    ) -> Result<Self, ExtractError> {
        #[derive(Deserialize)]
        struct Row {
            rank: usize,
            canonical_id: String,
            title: String,
            node: NodeId,
            node_rank: usize,
        }
        let mut entries = Vec::new();
        for row in csv::Reader::from_reader(input).deserialize() {
            let r: Row = row?;
            entries.push(RankedEntity {
                rank: r.rank,
                canonical_id: r.canonical_id,
                title: r.title,
                node: r.node,
                node_rank: r.node_rank,
            });
        }
        let ranking = Self {
            edition: edition.to_string(),
            algorithm,
            top,
            entries,
        };
        ranking.validate()?;
        Ok(ranking)
    }

    /// Ranks are exactly `1..=len`, `len ≤ T`, ids unique.
    pub fn validate(&self) -> Result<(), ExtractError> {
        if self.entries.len() > self.top {
            return Err(ExtractError::Format(format!(
                "{}/{}: {} entries exceed T={}",
                self.edition,
                self.algorithm,
                self.entries.len(),
                self.top
            )));
        }
        let mut seen = HashSet::new();
        for (k, e) in self.entries.iter().enumerate() {
            if e.rank != k + 1 {
                return Err(ExtractError::Format(format!(
                    "{}/{}: rank {} at position {}",
                    self.edition,
                    self.algorithm,
                    e.rank,
                    k + 1
                )));
            }
            if !seen.insert(e.canonical_id.as_str()) {
                return Err(ExtractError::Format(format!(
                    "{}/{}: `{}` listed twice",
                    self.edition, self.algorithm, e.canonical_id
                )));
            }
        }
        Ok(())
    }
}

/// Walks `order` best-first and keeps the first `top` accepted, catalogued
/// titles. A catalog entity reached twice (e.g. through a redirect article)
/// keeps its first position only.
pub fn extract_top<O: NodeOrder + ?Sized>(
    order: &O,
    labels: &NodeLabels,
    rules: &ExtractionRules,
    catalog: &EntityCatalog,
    edition: &str,
    algorithm: Algorithm,
    top: usize,
) -> Result<EditionRanking, ExtractError> {
    if top == 0 {
        return Err(ExtractError::ZeroTop);
    }
    let edition_rules = rules.for_edition(edition);
    let mut entries = Vec::new();
    let mut unresolved = Vec::new();
    let mut seen = HashSet::new();
    let mut accepted = 0usize;

    for (pos, &node) in order.node_order().iter().enumerate() {
        if accepted == top {
            break;
        }
        let title = labels.get(node).ok_or_else(|| ExtractError::MissingLabel {
            edition: edition.to_string(),
            node,
        })?;
        if !edition_rules.accepts(title) {
            continue;
        }
        match catalog.resolve(title, edition) {
            Some(entity) => {
                if !seen.insert(entity.canonical_id.as_str()) {
                    continue;
                }
                accepted += 1;
                entries.push(RankedEntity {
                    rank: accepted,
                    canonical_id: entity.canonical_id.clone(),
                    title: normalize_title(title),
                    node,
                    node_rank: pos + 1,
                });
            }
            None => {
                accepted += 1;
                unresolved.push(normalize_title(title));
            }
        }
    }

    if !unresolved.is_empty() {
        return Err(ExtractError::Unresolved {
            edition: edition.to_string(),
            algorithm,
            titles: unresolved,
        });
    }
    Ok(EditionRanking {
        edition: edition.to_ascii_uppercase(),
        algorithm,
        top,
        entries,
    })
}
