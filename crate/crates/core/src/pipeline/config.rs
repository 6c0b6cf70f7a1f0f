//! Declarative run configuration.
//!
//! ```toml
//! output_dir = "out"
//! catalog = "catalog.toml"
//! rules = "rules.toml"          # optional, built-in rules otherwise
//! arwu = "arwu.csv"             # optional reference ranking
//! population = "population.csv" # optional
//! algorithms = ["pagerank", "cheirank", "2drank"]
//! top = 100
//! workers = 4
//! culture_links = "weighted"
//!
//! [rank]
//! alpha = 0.85
//! tolerance = 1e-12
//! max_iterations = 10000
//!
//! [[edition]]
//! code = "EN"
//! edges = "en.edges"
//! labels = "en.labels"
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::catalog::is_edition_code;
use crate::cultures::LinkMode;
use crate::extract::{Algorithm, DEFAULT_TOP};
use crate::gmatrix::{check_alpha, DEFAULT_ALPHA};
use crate::rank::{RankConfig, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};

use super::{ErrorKind, PipelineError};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditionInput {
    pub code: String,
    pub edges: PathBuf,
    pub labels: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RankSettings {
    pub alpha: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for RankSettings {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    output_dir: PathBuf,
    catalog: PathBuf,
    rules: Option<PathBuf>,
    arwu: Option<PathBuf>,
    population: Option<PathBuf>,
    algorithms: Option<Vec<Algorithm>>,
    top: Option<usize>,
    workers: Option<usize>,
    #[serde(default)]
    culture_links: LinkMode,
    #[serde(default)]
    rank: RankSettings,
    #[serde(default, rename = "edition")]
    editions: Vec<EditionInput>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub editions: Vec<EditionInput>,
    pub rules: Option<PathBuf>,
    pub catalog: PathBuf,
    pub arwu: Option<PathBuf>,
    pub population: Option<PathBuf>,
    /// Deduplicated, in [`Algorithm::ALL`] order.
    pub algorithms: Vec<Algorithm>,
    pub rank: RankSettings,
    pub top: usize,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub culture_links: LinkMode,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub workers: Option<usize>,
    pub alpha: Option<f64>,
    pub tolerance: Option<f64>,
    pub top: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

fn invalid(message: impl Into<String>) -> PipelineError {
    PipelineError::new(ErrorKind::Validation, message)
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::new(ErrorKind::Io, format!("cannot read config {}: {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    /// Parses configuration text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| invalid(format!("config: {}", e.message())))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let algorithms = match raw.algorithms {
            Some(list) => {
                let set: BTreeSet<Algorithm> = list.into_iter().collect();
                set.into_iter().collect()
            }
            None => Algorithm::ALL.to_vec(),
        };
        Ok(RunConfig {
            editions: raw
                .editions
                .into_iter()
                .map(|e| EditionInput {
                    code: e.code.trim().to_ascii_uppercase(),
                    edges: resolve(e.edges),
                    labels: resolve(e.labels),
                })
                .collect(),
            rules: raw.rules.map(resolve),
            catalog: resolve(raw.catalog),
            arwu: raw.arwu.map(resolve),
            population: raw.population.map(resolve),
            algorithms,
            rank: raw.rank,
            top: raw.top.unwrap_or(DEFAULT_TOP),
            output_dir: resolve(raw.output_dir),
            workers: raw.workers.unwrap_or_else(default_workers),
            culture_links: raw.culture_links,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(w) = o.workers {
            self.workers = w;
        }
        if let Some(a) = o.alpha {
            self.rank.alpha = a;
        }
        if let Some(t) = o.tolerance {
            self.rank.tolerance = t;
        }
        if let Some(t) = o.top {
            self.top = t;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.editions.is_empty() {
            return Err(invalid("config lists no editions"));
        }
        let mut codes = BTreeSet::new();
        for e in &self.editions {
            if !is_edition_code(&e.code) {
                return Err(invalid(format!("`{}` is not one of the 24 edition codes", e.code)));
            }
            if !codes.insert(e.code.as_str()) {
                return Err(invalid(format!("edition {} listed twice", e.code)));
            }
        }
        if self.top == 0 {
            return Err(invalid("top must be at least 1"));
        }
        if self.workers == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(invalid("no algorithms selected"));
        }
        check_alpha(self.rank.alpha).map_err(|e| invalid(e.to_string()))?;
        self.rank_config()
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        let mut required: Vec<&Path> = vec![&self.catalog];
        for e in &self.editions {
            required.push(&e.edges);
            required.push(&e.labels);
        }
        required.extend(self.rules.as_deref());
        required.extend(self.arwu.as_deref());
        required.extend(self.population.as_deref());
        for path in required {
            if !path.is_file() {
                return Err(invalid(format!("input file {} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn rank_config(&self) -> RankConfig {
        RankConfig::default()
            .with_alpha(self.rank.alpha)
            .with_tolerance(self.rank.tolerance)
            .with_max_iterations(self.rank.max_iterations)
    }

    pub fn wants(&self, algorithm: Algorithm) -> bool {
        self.algorithms.contains(&algorithm)
    }

    /// PageRank vectors are needed for PageRank and 2DRank lists.
    pub fn needs_pagerank(&self) -> bool {
        self.wants(Algorithm::PageRank) || self.wants(Algorithm::TwoDRank)
    }

    pub fn needs_cheirank(&self) -> bool {
        self.wants(Algorithm::CheiRank) || self.wants(Algorithm::TwoDRank)
    }

    /// Edition codes in configuration order.
    pub fn edition_codes(&self) -> Vec<&str> {
        self.editions.iter().map(|e| e.code.as_str()).collect()
    }
}
