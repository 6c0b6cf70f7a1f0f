//! Run every stage on a configuration and list what was written.
//!
//! cargo run --example full_pipeline -- [CONFIG] [OUT_DIR]

use std::path::PathBuf;

use wikirank::pipeline::{cmd_all, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config_path = args.next().map_or_else(
        || PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini/run.toml"),
        PathBuf::from,
    );
    let mut config = RunConfig::load(&config_path)?;
    config.output_dir = args
        .next()
        .map_or_else(|| std::env::temp_dir().join("wikirank-example"), PathBuf::from);

    for pass in ["first run", "second run"] {
        let report = cmd_all(&config)?;
        println!("{pass}:");
        for s in &report.stages {
            let state = if s.skipped { "reused" } else { "computed" };
            println!("  {:<9} {state:<9} {:>3} files", s.stage.as_str(), s.files);
        }
        for w in &report.warnings {
            println!("  note: {w}");
        }
    }

    let table = std::fs::read_to_string(config.output_dir.join("analysis/table3.csv"))?;
    println!("\n{}", config.output_dir.join("analysis/table3.csv").display());
    print!("{table}");
    Ok(())
}
