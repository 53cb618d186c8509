//! Clustering coefficient and link mix sampled while queries run.

use prosa_sim::metrics::{clustering_coefficient_network, random_graph_cc};
use prosa_sim::{ExperimentConfig, LabelKind, Simulation};

fn main() -> prosa_sim::Result<()> {
    let mut sim = Simulation::new(ExperimentConfig {
        nodes: 200,
        ttl: 200,
        ..Default::default()
    })?;
    println!("queries      cc   random    AL   TSL   FSL");
    let mut target = 0;
    loop {
        let net = sim.network();
        println!(
            "{:>7} {:>7.4} {:>8.4} {:>5} {:>5} {:>5}",
            sim.queries_issued(),
            clustering_coefficient_network(net),
            random_graph_cc(net.peer_count(), net.edge_count())?,
            net.count_label(LabelKind::Al),
            net.count_label(LabelKind::Tsl),
            net.count_label(LabelKind::Fsl),
        );
        if sim.is_finished() {
            break;
        }
        target += 500;
        sim.run_until(target)?;
    }
    Ok(())
}
