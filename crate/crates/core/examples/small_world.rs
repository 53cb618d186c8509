//! One full experiment compared with a random graph of the same size.
//!
//! Usage: `cargo run --release --example small_world [nodes]`

use prosa_sim::{run_experiment, ExperimentConfig, LabelKind};

fn main() -> prosa_sim::Result<()> {
    let nodes = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(200);
    let cfg = ExperimentConfig {
        nodes,
        ttl: nodes as u32,
        ..Default::default()
    };
    let out = run_experiment(&cfg)?;
    let r = &out.report;
    let net = &out.network;

    println!(
        "{} peers, {} links after {} queries",
        r.node_count,
        r.edge_count,
        out.traces.len()
    );
    for kind in [LabelKind::Al, LabelKind::Tsl, LabelKind::Fsl] {
        println!("  {kind:<3} {}", net.count_label(kind));
    }
    let rnd_apl = r
        .random_apl
        .map_or("undefined".into(), |v| format!("{v:.3}"));
    println!("APL {:.3}   random {rnd_apl}", r.apl);
    println!(
        "CC  {:.4}  random {:.4}  ratio {:.2}",
        r.cc,
        r.random_cc,
        r.cc_ratio()
    );
    Ok(())
}
