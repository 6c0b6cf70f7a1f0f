//! Pick the top universities out of each ranking of one edition.

use std::path::PathBuf;

use wikirank::catalog::EntityCatalog;
use wikirank::extract::{extract_top, Algorithm, ExtractionRules};
use wikirank::graph::{load_edge_list, LoadOptions, NodeLabels};
use wikirank::rank::{cheirank, pagerank, two_d_rank, RankConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mini = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let edition = std::env::args().nth(1).unwrap_or_else(|| "FR".into()).to_uppercase();
    let stem = edition.to_lowercase();

    let (graph, _) = load_edge_list(&mini.join(format!("{stem}.edges")), &LoadOptions::default())?;
    let labels = NodeLabels::load(&mini.join(format!("{stem}.labels")))?;
    let catalog = EntityCatalog::load(&mini.join("catalog.toml"))?;
    let rules = ExtractionRules::load(&mini.join("rules.toml"))?;

    let config = RankConfig::default();
    let pr = pagerank(&graph, &config)?;
    let cr = cheirank(&graph, &config)?;
    let two = two_d_rank(&pr, &cr)?;

    let lists = [
        extract_top(&pr, &labels, &rules, &catalog, &edition, Algorithm::PageRank, 5)?,
        extract_top(&cr, &labels, &rules, &catalog, &edition, Algorithm::CheiRank, 5)?,
        extract_top(&two, &labels, &rules, &catalog, &edition, Algorithm::TwoDRank, 5)?,
    ];
    for list in &lists {
        println!("{edition} {}", list.algorithm);
        for e in &list.entries {
            println!("  R={} {:<40} (article rank {})", e.rank, e.title, e.node_rank);
        }
    }
    Ok(())
}
