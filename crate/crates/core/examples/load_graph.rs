//! Load an edge list and print its shape.
//!
//! cargo run --example load_graph -- [EDGES] [LABELS]

use std::path::PathBuf;

use wikirank::graph::{load_edge_list, LoadOptions, NodeId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mini = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let mut args = std::env::args().skip(1);
    let edges = args.next().map_or_else(|| mini.join("fr.edges"), PathBuf::from);
    let labels = args.next().map(PathBuf::from).or_else(|| Some(mini.join("fr.labels")));

    let options = LoadOptions { labels, ..LoadOptions::default() };
    let (graph, report) = load_edge_list(&edges, &options)?;
    println!("{}", edges.display());
    println!("  nodes N        {}", graph.node_count());
    println!("  links N_l      {}", graph.link_count());
    println!("  dangling       {}", graph.dangling_nodes().len());
    println!("  never linked   {}", graph.source_nodes().len());
    println!("  self-loops dropped   {}", report.self_loops);
    println!("  duplicates dropped   {}", report.duplicate_edges);

    let hub = (0..graph.node_count() as NodeId).max_by_key(|&v| (graph.in_degree(v), std::cmp::Reverse(v)));
    if let Some(v) = hub {
        let title = graph.labels().and_then(|l| l.get(v)).unwrap_or("?");
        println!("  most linked    {v} {title} ({} in-links)", graph.in_degree(v));
    }
    Ok(())
}
