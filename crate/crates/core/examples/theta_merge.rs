//! Merge per-edition lists into a world ranking and score countries.

use wikirank::catalog::{Entity, EntityCatalog};
use wikirank::extract::{Algorithm, EditionRanking, RankedEntity};
use wikirank::graph::NodeId;
use wikirank::merge::{country_scores, merge_editions};

fn list(edition: &str, ids: &[&str]) -> EditionRanking {
    EditionRanking {
        edition: edition.into(),
        algorithm: Algorithm::PageRank,
        top: ids.len(),
        entries: ids
            .iter()
            .enumerate()
            .map(|(k, id)| RankedEntity {
                rank: k + 1,
                canonical_id: id.to_string(),
                title: id.to_string(),
                node: k as NodeId,
                node_rank: k + 1,
            })
            .collect(),
    }
}

fn entity(id: &str, country: &str, language: &str, year: i32) -> Entity {
    Entity {
        canonical_id: id.into(),
        display_name: id.into(),
        titles: [("EN".to_string(), id.to_string())].into(),
        country: country.into(),
        language: language.into(),
        foundation_year: year,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let editions = [
        list("EN", &["harvard", "oxford", "cambridge", "mit"]),
        list("DE", &["heidelberg", "harvard", "lmu", "oxford"]),
        list("FR", &["sorbonne", "harvard", "polytechnique", "heidelberg"]),
    ];
    let world = merge_editions(&editions)?;
    println!("rank  id             theta  editions");
    for e in &world.entries {
        println!("{:>4}  {:<14} {:>5}  {}", e.global_rank, e.canonical_id, e.theta, e.appearances);
    }

    let catalog = EntityCatalog::from_entities(vec![
        entity("harvard", "US", "EN", 1636),
        entity("mit", "US", "EN", 1861),
        entity("oxford", "UK", "EN", 1096),
        entity("cambridge", "UK", "EN", 1209),
        entity("heidelberg", "DE", "DE", 1386),
        entity("lmu", "DE", "DE", 1472),
        entity("sorbonne", "FR", "FR", 1257),
        entity("polytechnique", "FR", "FR", 1794),
    ])?;
    println!("\ncountries over the top 4");
    for c in country_scores(&world, &catalog, 4)? {
        println!("{:>4}  {}  theta_c={} n_c={}", c.rank, c.country, c.theta_c, c.count);
    }
    Ok(())
}
