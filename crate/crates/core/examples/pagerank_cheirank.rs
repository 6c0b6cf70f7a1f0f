//! PageRank, CheiRank and 2DRank of one edition, top of each list.
//!
//! cargo run --example pagerank_cheirank -- [EDGES LABELS] [--alpha F]

use std::path::PathBuf;

use wikirank::graph::{load_edge_list, LoadOptions, NodeId};
use wikirank::rank::{cheirank, pagerank, two_d_rank, RankConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mini = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha = args
        .iter()
        .position(|a| a == "--alpha")
        .and_then(|k| args.get(k + 1))
        .map_or(Ok(0.85), |s| s.parse())?;
    let paths: Vec<&String> = args.iter().take_while(|a| *a != "--alpha").collect();
    let (edges, labels) = match paths.as_slice() {
        [e, l, ..] => (PathBuf::from(e), PathBuf::from(l)),
        _ => (mini.join("en.edges"), mini.join("en.labels")),
    };

    let options = LoadOptions { labels: Some(labels), ..LoadOptions::default() };
    let (graph, _) = load_edge_list(&edges, &options)?;
    let config = RankConfig::default().with_alpha(alpha);
    let pr = pagerank(&graph, &config)?;
    let cr = cheirank(&graph, &config)?;
    let two = two_d_rank(&pr, &cr)?;
    println!(
        "N={} alpha={alpha}: PageRank {} iterations, CheiRank {} iterations",
        graph.node_count(),
        pr.iterations(),
        cr.iterations()
    );

    let title = |v: NodeId| graph.labels().and_then(|l| l.get(v)).unwrap_or("").to_string();
    println!("{:>3}  {:<40} {:<40} 2DRank", "K", "PageRank", "CheiRank");
    for k in 0..10.min(graph.node_count()) {
        println!(
            "{:>3}  {:<40} {:<40} {}",
            k + 1,
            title(pr.order()[k]),
            title(cr.order()[k]),
            title(two.order()[k])
        );
    }
    let v = two.order()[0];
    println!("2DRank leader: K={} K*={} K2={}", pr.rank_of(v), cr.rank_of(v), two.k2(v));
    Ok(())
}
