//! End-to-end runs: rank → extract → merge → analyze → cultures.
//!
//! Output tree under `output_dir`:
//!
//! ```text
//! rank/<ED>/{pagerank,cheirank}.{bin,tsv}, rank/<ED>/2drank.tsv
//! extract/<ED>/<algorithm>.csv
//! merge/<LIST>.csv, merge/<LIST>_countries.csv, merge/<LIST>_per_capita.csv,
//! merge/<algorithm>_edition_averages.csv
//! analysis/figures.json, analysis/table{3..7}.csv, analysis/<metric>_*.csv
//! cultures/<algorithm>_{matrix.csv,edges.txt,ranks.csv}
//! stamps/<stage>.json, manifest.json, timings.json
//! ```
//!
//! Everything except `timings.json` depends only on the configuration
//! (minus `workers`) and the input files.

pub mod config;
mod figures;
pub mod stamp;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::analysis::AnalysisError;
use crate::catalog::{CatalogError, EntityCatalog};
use crate::cultures::{build_culture_network, rank_cultures, CultureError};
use crate::extract::{extract_top, Algorithm, EditionRanking, ExtractError, ExtractionRules};
use crate::graph::{load_edge_list, GraphError, LoadOptions, NodeId, NodeLabels};
use crate::merge::{
    country_scores, load_population, merge_editions, per_capita_scores, per_edition_average_counts,
    write_country_csv, write_per_capita_csv, GlobalRanking, MergeError,
};
use crate::persist::{
    encode_rank, read_rank_binary, read_two_d_rank_order, write_rank_tsv, write_two_d_rank_tsv,
    PersistError,
};
use crate::rank::{cheirank, pagerank, two_d_rank, RankError, RankResult, Termination};

pub use config::{EditionInput, Overrides, RankSettings, RunConfig};
use stamp::{fingerprint, sha256_file, write_if_changed, StageOutputs, StageStamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Rank,
    Extract,
    Merge,
    Analyze,
    Cultures,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Rank,
        Stage::Extract,
        Stage::Merge,
        Stage::Analyze,
        Stage::Cultures,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Rank => "rank",
            Stage::Extract => "extract",
            Stage::Merge => "merge",
            Stage::Analyze => "analyze",
            Stage::Cultures => "cultures",
        }
    }

    /// Stages whose outputs this one reads.
    fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Rank => &[],
            Stage::Extract => &[Stage::Rank],
            Stage::Merge => &[Stage::Rank, Stage::Extract],
            Stage::Analyze => &[Stage::Rank, Stage::Extract, Stage::Merge],
            Stage::Cultures => &[Stage::Rank, Stage::Extract],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Convergence,
    Unresolved,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 2,
            ErrorKind::Convergence => 3,
            ErrorKind::Unresolved => 4,
            ErrorKind::Io => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineError {
    pub stage: Option<Stage>,
    pub kind: ErrorKind,
    pub message: String,
}

impl PipelineError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            stage: None,
            kind,
            message: message.into(),
        }
    }

    /// Tags the error with `stage` unless it already carries one.
    pub fn at(mut self, stage: Stage) -> Self {
        self.stage.get_or_insert(stage);
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stage {
            Some(s) => write!(f, "[{s}] {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for PipelineError {}

macro_rules! classify {
    ($ty:ty, |$e:ident| $body:expr) => {
        impl From<$ty> for PipelineError {
            fn from($e: $ty) -> Self {
                let kind = $body;
                PipelineError::new(kind, $e.to_string())
            }
        }
    };
}

classify!(std::io::Error, |e| ErrorKind::Io);
classify!(GraphError, |e| match e {
    GraphError::Io { .. } => ErrorKind::Io,
    _ => ErrorKind::Validation,
});
classify!(CatalogError, |e| match e {
    CatalogError::Io { .. } => ErrorKind::Io,
    _ => ErrorKind::Validation,
});
classify!(ExtractError, |e| match e {
    ExtractError::Io { .. } => ErrorKind::Io,
    ExtractError::Unresolved { .. } => ErrorKind::Unresolved,
    _ => ErrorKind::Validation,
});
classify!(MergeError, |e| match e {
    MergeError::Io { .. } => ErrorKind::Io,
    MergeError::Unresolved(_) => ErrorKind::Unresolved,
    _ => ErrorKind::Validation,
});
classify!(RankError, |e| match e {
    RankError::Convergence { .. } => ErrorKind::Convergence,
    _ => ErrorKind::Validation,
});
classify!(PersistError, |e| match e {
    PersistError::Io(_) => ErrorKind::Io,
    _ => ErrorKind::Validation,
});
classify!(AnalysisError, |e| match e {
    AnalysisError::Unresolved(_) => ErrorKind::Unresolved,
    _ => ErrorKind::Validation,
});
classify!(CultureError, |e| match e {
    CultureError::Unresolved(_) => ErrorKind::Unresolved,
    CultureError::Io(_) => ErrorKind::Io,
    CultureError::Rank(RankError::Convergence { .. }) => ErrorKind::Convergence,
    _ => ErrorKind::Validation,
});
classify!(csv::Error, |e| if e.is_io_error() {
    ErrorKind::Io
} else {
    ErrorKind::Validation
});

#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub stage: Stage,
    pub skipped: bool,
    pub seconds: f64,
    pub files: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub stages: Vec<StageReport>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn ran(&self, stage: Stage) -> bool {
        self.stages.iter().any(|s| s.stage == stage && !s.skipped)
    }
}

struct StageRun {
    outputs: StageOutputs,
    records: Value,
    warnings: Vec<String>,
}

/// Reads a reference ranking file with `rank,canonical_id` rows; returns ids
/// in rank order. Ranks must be exactly `1..=n`.
pub fn load_reference_ranking(path: &Path, catalog: &EntityCatalog) -> Result<Vec<String>, PipelineError> {
    #[derive(serde::Deserialize)]
    struct Row {
        rank: usize,
        canonical_id: String,
    }
    let file = std::fs::File::open(path).map_err(|e| {
        PipelineError::new(ErrorKind::Io, format!("{}: {e}", path.display()))
    })?;
    let mut rows: Vec<Row> = csv::Reader::from_reader(file)
        .deserialize()
        .collect::<Result<_, _>>()?;
    rows.sort_by_key(|r| r.rank);
    let mut seen = std::collections::HashSet::new();
    for (k, r) in rows.iter().enumerate() {
        if r.rank != k + 1 || !seen.insert(r.canonical_id.as_str()) {
            return Err(PipelineError::new(
                ErrorKind::Validation,
                format!("{}: ranks must run 1..n with unique ids (row rank {})", path.display(), r.rank),
            ));
        }
    }
    let missing: Vec<&str> = rows
        .iter()
        .filter(|r| catalog.get(&r.canonical_id).is_none())
        .map(|r| r.canonical_id.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(PipelineError::new(
            ErrorKind::Unresolved,
            format!("{}: ids missing from the catalog: {}", path.display(), missing.join(", ")),
        ));
    }
    Ok(rows.into_iter().map(|r| r.canonical_id).collect())
}

fn rank_file(edition: &str, name: &str) -> String {
    format!("rank/{edition}/{name}")
}

fn extract_file(edition: &str, algorithm: Algorithm) -> String {
    format!("extract/{edition}/{algorithm}.csv")
}

fn global_file(algorithm: Algorithm) -> String {
    format!("merge/{}.csv", algorithm.global_list_name())
}

fn rank_summary(r: &RankResult) -> Value {
    json!({
        "iterations": r.iterations(),
        "residual": r.residual(),
        "termination": r.termination(),
    })
}

/// A run over one configuration and output directory.
pub struct Pipeline<'c> {
    config: &'c RunConfig,
    root: PathBuf,
}

impl<'c> Pipeline<'c> {
    pub fn new(config: &'c RunConfig) -> Self {
        Self {
            config,
            root: config.output_dir.clone(),
        }
    }

    fn hash(&self, path: &Path) -> Result<String, PipelineError> {
        sha256_file(path)
            .map_err(|e| PipelineError::new(ErrorKind::Io, format!("{}: {e}", path.display())))
    }

    fn hash_output(&self, rel: &str) -> Result<String, PipelineError> {
        self.hash(&self.root.join(rel))
    }

    fn rank_outputs(&self) -> Vec<&'static str> {
        let mut files = Vec::new();
        if self.config.needs_pagerank() {
            files.extend(["pagerank.bin", "pagerank.tsv"]);
        }
        if self.config.needs_cheirank() {
            files.extend(["cheirank.bin", "cheirank.tsv"]);
        }
        if self.config.wants(Algorithm::TwoDRank) {
            files.push("2drank.tsv");
        }
        files
    }

    fn common_inputs(&self, inputs: &mut BTreeMap<String, String>) -> Result<(), PipelineError> {
        inputs.insert("catalog".into(), self.hash(&self.config.catalog)?);
        Ok(())
    }

    fn extract_outputs_inputs(&self, inputs: &mut BTreeMap<String, String>) -> Result<(), PipelineError> {
        for ed in self.config.edition_codes() {
            for &alg in &self.config.algorithms {
                let rel = extract_file(ed, alg);
                inputs.insert(rel.clone(), self.hash_output(&rel)?);
            }
        }
        Ok(())
    }

    /// Parameters and input hashes that determine a stage's outputs.
    fn stage_inputs(&self, stage: Stage) -> Result<(Value, BTreeMap<String, String>), PipelineError> {
        let c = self.config;
        let mut inputs = BTreeMap::new();
        let params = match stage {
            Stage::Rank => {
                for e in &c.editions {
                    inputs.insert(format!("edition.{}.edges", e.code), self.hash(&e.edges)?);
                }
                json!({
                    "alpha": c.rank.alpha,
                    "tolerance": c.rank.tolerance,
                    "max_iterations": c.rank.max_iterations,
                    "algorithms": c.algorithms,
                })
            }
            Stage::Extract => {
                self.common_inputs(&mut inputs)?;
                for e in &c.editions {
                    inputs.insert(format!("edition.{}.labels", e.code), self.hash(&e.labels)?);
                    for name in self.rank_outputs() {
                        let rel = rank_file(&e.code, name);
                        inputs.insert(rel.clone(), self.hash_output(&rel)?);
                    }
                }
                let rules = match &c.rules {
                    Some(p) => self.hash(p)?,
                    None => "builtin".to_string(),
                };
                inputs.insert("rules".into(), rules);
                json!({"top": c.top, "algorithms": c.algorithms})
            }
            Stage::Merge => {
                self.common_inputs(&mut inputs)?;
                self.extract_outputs_inputs(&mut inputs)?;
                if let Some(p) = &c.population {
                    inputs.insert("population".into(), self.hash(p)?);
                }
                json!({"top": c.top, "algorithms": c.algorithms})
            }
            Stage::Analyze => {
                self.common_inputs(&mut inputs)?;
                self.extract_outputs_inputs(&mut inputs)?;
                for &alg in &c.algorithms {
                    let rel = global_file(alg);
                    inputs.insert(rel.clone(), self.hash_output(&rel)?);
                }
                if let Some(p) = &c.arwu {
                    inputs.insert("arwu".into(), self.hash(p)?);
                }
                if let Some(p) = &c.population {
                    inputs.insert("population".into(), self.hash(p)?);
                }
                json!({
                    "top": c.top,
                    "algorithms": c.algorithms,
                    "alpha": c.rank.alpha,
                    "tolerance": c.rank.tolerance,
                    "max_iterations": c.rank.max_iterations,
                    "culture_links": c.culture_links,
                })
            }
            Stage::Cultures => {
                self.common_inputs(&mut inputs)?;
                self.extract_outputs_inputs(&mut inputs)?;
                json!({
                    "top": c.top,
                    "algorithms": c.algorithms,
                    "alpha": c.rank.alpha,
                    "tolerance": c.rank.tolerance,
                    "max_iterations": c.rank.max_iterations,
                    "culture_links": c.culture_links,
                })
            }
        };
        Ok((params, inputs))
    }

    fn load_catalog(&self) -> Result<EntityCatalog, PipelineError> {
        Ok(EntityCatalog::load(&self.config.catalog)?)
    }

    fn load_rankings(&self, algorithm: Algorithm) -> Result<Vec<EditionRanking>, PipelineError> {
        self.config
            .edition_codes()
            .into_iter()
            .map(|ed| {
                let path = self.root.join(extract_file(ed, algorithm));
                let file = std::fs::File::open(&path).map_err(|e| {
                    PipelineError::new(ErrorKind::Io, format!("{}: {e}", path.display()))
                })?;
                Ok(EditionRanking::read_csv(file, ed, algorithm, self.config.top)?)
            })
            .collect()
    }

    fn load_all_rankings(&self) -> Result<BTreeMap<Algorithm, Vec<EditionRanking>>, PipelineError> {
        self.config
            .algorithms
            .iter()
            .map(|&a| Ok((a, self.load_rankings(a)?)))
            .collect()
    }

    fn run_rank(&self) -> Result<StageRun, PipelineError> {
        let c = self.config;
        let config = c.rank_config();
        type EditionRun = Result<(StageOutputs, Value, Vec<String>), PipelineError>;
        let per_edition: Vec<EditionRun> = c
            .editions
            .par_iter()
            .map(|e| {
                let (graph, report) = load_edge_list(&e.edges, &LoadOptions::default())?;
                let mut out = StageOutputs::default();
                let mut warnings = Vec::new();
                let mut record = json!({
                    "nodes": graph.node_count(),
                    "links": graph.link_count(),
                    "load": report,
                });
                let (pr, cr) = rayon::join(
                    || c.needs_pagerank().then(|| pagerank(&graph, &config)).transpose(),
                    || c.needs_cheirank().then(|| cheirank(&graph, &config)).transpose(),
                );
                let (pr, cr) = (pr?, cr?);
                for (name, result) in [("pagerank", &pr), ("cheirank", &cr)] {
                    let Some(r) = result else { continue };
                    if r.termination() == Termination::Stagnated {
                        warnings.push(format!(
                            "{} {name}: residual stagnated at {:e} after {} iterations",
                            e.code,
                            r.residual(),
                            r.iterations()
                        ));
                    }
                    out.insert(
                        rank_file(&e.code, &format!("{name}.bin")),
                        encode_rank(r, config.alpha, config.tolerance),
                    );
                    let mut tsv = Vec::new();
                    write_rank_tsv(&mut tsv, r)?;
                    out.insert(rank_file(&e.code, &format!("{name}.tsv")), tsv);
                    record[name] = rank_summary(r);
                }
                if c.wants(Algorithm::TwoDRank) {
                    let (Some(pr), Some(cr)) = (&pr, &cr) else {
                        unreachable!("2DRank implies both vectors")
                    };
                    let two = two_d_rank(pr, cr)?;
                    let mut tsv = Vec::new();
                    write_two_d_rank_tsv(&mut tsv, &two)?;
                    out.insert(rank_file(&e.code, "2drank.tsv"), tsv);
                }
                Ok((out, record, warnings))
            })
            .collect();
        let mut outputs = StageOutputs::default();
        let mut records = serde_json::Map::new();
        let mut warnings = Vec::new();
        for (e, result) in c.editions.iter().zip(per_edition) {
            let (out, record, w) = result?;
            for name in self.rank_outputs() {
                let rel = rank_file(&e.code, name);
                let bytes = out.get(&rel).expect("rank output produced").to_vec();
                outputs.insert(rel, bytes);
            }
            records.insert(e.code.clone(), record);
            warnings.extend(w);
        }
        Ok(StageRun {
            outputs,
            records: Value::Object(records),
            warnings,
        })
    }

    fn node_order(&self, edition: &str, algorithm: Algorithm) -> Result<Vec<NodeId>, PipelineError> {
        let path = |name: &str| self.root.join(rank_file(edition, name));
        match algorithm {
            Algorithm::PageRank | Algorithm::CheiRank => {
                let (_, result) = read_rank_binary(&path(&format!("{algorithm}.bin")))?;
                Ok(result.order().to_vec())
            }
            Algorithm::TwoDRank => {
                let file = std::fs::File::open(path("2drank.tsv"))?;
                Ok(read_two_d_rank_order(file)?)
            }
        }
    }

    fn run_extract(&self) -> Result<StageRun, PipelineError> {
        let c = self.config;
        let catalog = self.load_catalog()?;
        let rules = match &c.rules {
            Some(p) => ExtractionRules::load(p)?,
            None => ExtractionRules::builtin(),
        };
        let mut warnings = Vec::new();
        for e in &c.editions {
            if rules.for_edition(&e.code).keywords().is_empty() {
                warnings.push(format!(
                    "{}: no keywords configured; lists hold explicit includes only",
                    e.code
                ));
            }
        }
        let per_edition: Vec<Result<Vec<Result<EditionRanking, ExtractError>>, PipelineError>> = c
            .editions
            .par_iter()
            .map(|e| {
                let labels = NodeLabels::load(&e.labels)?;
                c.algorithms
                    .iter()
                    .map(|&alg| {
                        let order = self.node_order(&e.code, alg)?;
                        Ok(extract_top(&order, &labels, &rules, &catalog, &e.code, alg, c.top))
                    })
                    .collect()
            })
            .collect();

        let mut outputs = StageOutputs::default();
        let mut records = serde_json::Map::new();
        let mut unresolved = Vec::new();
        for (e, result) in c.editions.iter().zip(per_edition) {
            let mut counts = serde_json::Map::new();
            for ranking in result? {
                match ranking {
                    Ok(r) => {
                        if r.entries.is_empty() {
                            warnings.push(format!("{}/{}: empty list", r.edition, r.algorithm));
                        }
                        let mut csv = Vec::new();
                        r.write_csv(&mut csv)?;
                        outputs.insert(extract_file(&e.code, r.algorithm), csv);
                        counts.insert(r.algorithm.to_string(), json!(r.entries.len()));
                    }
                    Err(err @ ExtractError::Unresolved { .. }) => unresolved.push(err.to_string()),
                    Err(err) => return Err(err.into()),
                }
            }
            records.insert(e.code.clone(), Value::Object(counts));
        }
        if !unresolved.is_empty() {
            return Err(PipelineError::new(ErrorKind::Unresolved, unresolved.join("\n")));
        }
        records.insert("catalog_entities".into(), json!(catalog.len()));
        Ok(StageRun {
            outputs,
            records: Value::Object(records),
            warnings,
        })
    }

    fn run_merge(&self) -> Result<StageRun, PipelineError> {
        let c = self.config;
        let catalog = self.load_catalog()?;
        let population = c.population.as_deref().map(load_population).transpose()?;
        let mut outputs = StageOutputs::default();
        let mut records = serde_json::Map::new();
        let mut warnings = Vec::new();
        if population.is_none() {
            warnings.push("no population file; per-capita tables skipped".to_string());
        }
        for &alg in &c.algorithms {
            let rankings = self.load_rankings(alg)?;
            let global = merge_editions(&rankings)?;
            let name = alg.global_list_name();
            let mut csv = Vec::new();
            global.write_csv(&mut csv, &catalog)?;
            outputs.insert(global_file(alg), csv);

            let scores = country_scores(&global, &catalog, c.top)?;
            let mut csv = Vec::new();
            write_country_csv(&mut csv, &scores)?;
            outputs.insert(format!("merge/{name}_countries.csv"), csv);

            if let Some(pop) = &population {
                let rows = per_capita_scores(&scores, pop)?;
                let mut csv = Vec::new();
                write_per_capita_csv(&mut csv, &rows)?;
                outputs.insert(format!("merge/{name}_per_capita.csv"), csv);
            }

            let avg = per_edition_average_counts(&rankings, &catalog)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["cc", "average", "reported"])?;
            for (cc, a, reported) in avg.rows() {
                w.write_record([cc, a.to_string(), reported.to_string()])?;
            }
            outputs.insert(
                format!("merge/{alg}_edition_averages.csv"),
                w.into_inner().map_err(|e| PipelineError::new(ErrorKind::Io, e.to_string()))?,
            );

            let head = global.entries.first().map(|e| {
                json!({"canonical_id": e.canonical_id, "theta": e.theta, "appearances": e.appearances})
            });
            records.insert(
                name.to_string(),
                json!({"entities": global.entries.len(), "first": head}),
            );
        }
        Ok(StageRun {
            outputs,
            records: Value::Object(records),
            warnings,
        })
    }

    fn run_analyze(&self) -> Result<StageRun, PipelineError> {
        let c = self.config;
        let catalog = self.load_catalog()?;
        let rankings = self.load_all_rankings()?;
        let mut globals = BTreeMap::new();
        for &alg in &c.algorithms {
            let path = self.root.join(global_file(alg));
            let file = std::fs::File::open(&path)?;
            let editions = c.edition_codes().iter().map(|s| s.to_string()).collect();
            globals.insert(alg, GlobalRanking::read_csv(file, alg, c.top, editions)?);
        }
        let reference = c
            .arwu
            .as_deref()
            .map(|p| load_reference_ranking(p, &catalog))
            .transpose()?;
        let population = c.population.as_deref().map(load_population).transpose()?;
        let mut warnings = Vec::new();
        if reference.is_none() {
            warnings.push("no reference ranking; overlap with it is omitted".to_string());
        }
        let (outputs, records) = figures::build(&figures::AnalysisInputs {
            catalog: &catalog,
            rankings: &rankings,
            globals: &globals,
            reference: reference.as_deref(),
            population: population.as_ref(),
            top: c.top,
            rank: c.rank_config(),
            links: c.culture_links,
        })?;
        Ok(StageRun {
            outputs,
            records,
            warnings,
        })
    }

    fn run_cultures(&self) -> Result<StageRun, PipelineError> {
        let c = self.config;
        let catalog = self.load_catalog()?;
        let mut outputs = StageOutputs::default();
        let mut records = serde_json::Map::new();
        for &alg in &c.algorithms {
            let rankings = self.load_rankings(alg)?;
            let net = build_culture_network(&rankings, &catalog)?;
            let ranking = rank_cultures(&net, &c.rank_config(), c.culture_links)?;
            let mut buf = Vec::new();
            net.write_matrix_csv(&mut buf)?;
            outputs.insert(format!("cultures/{alg}_matrix.csv"), buf);
            let mut buf = Vec::new();
            net.write_edge_list(&mut buf)?;
            outputs.insert(format!("cultures/{alg}_edges.txt"), buf);
            let mut buf = Vec::new();
            ranking.write_csv(&mut buf)?;
            outputs.insert(format!("cultures/{alg}_ranks.csv"), buf);
            records.insert(
                alg.to_string(),
                json!({
                    "links": net.total(),
                    "pagerank": rank_summary(&ranking.pagerank),
                    "cheirank": rank_summary(&ranking.cheirank),
                }),
            );
        }
        Ok(StageRun {
            outputs,
            records: Value::Object(records),
            warnings: Vec::new(),
        })
    }

    fn execute(&self, stage: Stage) -> Result<StageRun, PipelineError> {
        match stage {
            Stage::Rank => self.run_rank(),
            Stage::Extract => self.run_extract(),
            Stage::Merge => self.run_merge(),
            Stage::Analyze => self.run_analyze(),
            Stage::Cultures => self.run_cultures(),
        }
    }

    /// Runs `stage`, or reuses its persisted outputs when `reuse` is set and
    /// the stamp is still valid.
    fn stage(&self, stage: Stage, reuse: bool, report: &mut RunReport) -> Result<StageStamp, PipelineError> {
        let start = Instant::now();
        let (params, inputs) = self.stage_inputs(stage)?;
        let fp = fingerprint(stage.as_str(), &params, &inputs);
        if reuse {
            if let Some(stamp) = StageStamp::load(&self.root, stage.as_str()) {
                if stamp.is_valid(&self.root, &fp) {
                    report.stages.push(StageReport {
                        stage,
                        skipped: true,
                        seconds: start.elapsed().as_secs_f64(),
                        files: stamp.outputs.len(),
                    });
                    return Ok(stamp);
                }
            }
        }
        let run = self.execute(stage)?;
        let outputs = run.outputs.flush(&self.root)?;
        let stamp = StageStamp {
            stage: stage.as_str().to_string(),
            fingerprint: fp,
            outputs,
            records: json!({"params": params, "inputs": inputs, "results": run.records, "warnings": run.warnings}),
        };
        stamp.store(&self.root)?;
        report.warnings.extend(run.warnings.iter().map(|w| format!("[{stage}] {w}")));
        report.stages.push(StageReport {
            stage,
            skipped: false,
            seconds: start.elapsed().as_secs_f64(),
            files: stamp.outputs.len(),
        });
        Ok(stamp)
    }

    fn write_manifest(&self, stamps: &[StageStamp], report: &RunReport) -> Result<(), PipelineError> {
        let c = self.config;
        let stages: serde_json::Map<String, Value> = stamps
            .iter()
            .map(|s| {
                (
                    s.stage.clone(),
                    json!({"fingerprint": s.fingerprint, "outputs": s.outputs, "records": s.records}),
                )
            })
            .collect();
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "parameters": {
                "alpha": c.rank.alpha,
                "tolerance": c.rank.tolerance,
                "max_iterations": c.rank.max_iterations,
                "top": c.top,
                "algorithms": c.algorithms,
                "culture_links": c.culture_links,
                "editions": c.edition_codes(),
            },
            "stages": stages,
        });
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("serializable");
        bytes.push(b'\n');
        write_if_changed(&self.root.join("manifest.json"), &bytes)?;

        let timings = json!({
            "workers": c.workers,
            "stages": report.stages.iter().map(|s| json!({
                "stage": s.stage.as_str(),
                "skipped": s.skipped,
                "seconds": s.seconds,
            })).collect::<Vec<_>>(),
        });
        let mut bytes = serde_json::to_vec_pretty(&timings).expect("serializable");
        bytes.push(b'\n');
        std::fs::write(self.root.join("timings.json"), bytes)?;
        Ok(())
    }

    /// Runs `target` (every stage when `None`). Prerequisites are reused when
    /// valid; the target itself is recomputed unless running everything.
    pub fn run(&self, target: Option<Stage>) -> Result<RunReport, PipelineError> {
        self.config.validate()?;
        std::fs::create_dir_all(&self.root)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers)
            .build()
            .map_err(|e| PipelineError::new(ErrorKind::Validation, e.to_string()))?;
        pool.install(|| {
            let mut report = RunReport::default();
            let mut stamps = Vec::new();
            let plan: Vec<(Stage, bool)> = match target {
                None => Stage::ALL.iter().map(|&s| (s, true)).collect(),
                Some(t) => t
                    .prerequisites()
                    .iter()
                    .map(|&s| (s, true))
                    .chain(std::iter::once((t, false)))
                    .collect(),
            };
            for (stage, reuse) in plan {
                let stamp = self.stage(stage, reuse, &mut report).map_err(|e| e.at(stage))?;
                stamps.push(stamp);
            }
            self.write_manifest(&stamps, &report)?;
            Ok(report)
        })
    }
}

pub fn cmd_rank(config: &RunConfig) -> Result<RunReport, PipelineError> {
    Pipeline::new(config).run(Some(Stage::Rank))
}

pub fn cmd_extract(config: &RunConfig) -> Result<RunReport, PipelineError> {
    Pipeline::new(config).run(Some(Stage::Extract))
}

pub fn cmd_merge(config: &RunConfig) -> Result<RunReport, PipelineError> {
    Pipeline::new(config).run(Some(Stage::Merge))
}

pub fn cmd_analyze(config: &RunConfig) -> Result<RunReport, PipelineError> {
    Pipeline::new(config).run(Some(Stage::Analyze))
}

pub fn cmd_cultures(config: &RunConfig) -> Result<RunReport, PipelineError> {
    Pipeline::new(config).run(Some(Stage::Cultures))
}

pub fn cmd_all(config: &RunConfig) -> Result<RunReport, PipelineError> {
    Pipeline::new(config).run(None)
}
