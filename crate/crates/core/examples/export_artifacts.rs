//! Write the metrics, trace and edge-list files of a run, then load them
//! back and recompute clustering from the snapshot alone.
//!
//! Usage: `cargo run --example export_artifacts [out-dir]`

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use prosa_sim::cli::cmd_run;
use prosa_sim::metrics::{clustering_coefficient_network, EdgeListGraph, MetricsReport};
use prosa_sim::overlay::read_edge_list;
use prosa_sim::routing::read_traces_csv;
use prosa_sim::ExperimentConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("prosa-export"), PathBuf::from);
    let cfg = ExperimentConfig {
        nodes: 60,
        queries_per_node: 10,
        ..Default::default()
    };
    let manifest = cmd_run(&cfg, &out)?;
    for a in &manifest.outputs {
        println!("{}  {}", a.sha256, a.path.display());
    }

    let report = MetricsReport::read_csv(File::open(out.join("metrics.csv"))?)?;
    let traces = read_traces_csv(File::open(out.join("trace.csv"))?)?;
    let edges = read_edge_list(
        BufReader::new(File::open(out.join("edges.txt"))?),
        "edges.txt",
    )?;
    let graph = EdgeListGraph::from_records(&edges);
    println!(
        "{} traces, {} edges; cc from file {:.6}, from snapshot {:.6}",
        traces.len(),
        edges.len(),
        report.cc,
        clustering_coefficient_network(&graph)
    );
    Ok(())
}
