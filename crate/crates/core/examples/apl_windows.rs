//! Average path length over a sliding window of queries.

use prosa_sim::metrics::windowed_apl;
use prosa_sim::{ExperimentConfig, Simulation};

fn main() -> prosa_sim::Result<()> {
    let mut sim = Simulation::new(ExperimentConfig {
        nodes: 200,
        ttl: 200,
        ..Default::default()
    })?;
    sim.run_to_end()?;
    let series = windowed_apl(sim.traces(), 300, 50);
    for (start, apl) in series.iter().step_by(5) {
        let bar = "#".repeat((apl * 10.0).round() as usize);
        println!("queries {:>4}..{:<4} {apl:>6.3} {bar}", start, start + 300);
    }
    Ok(())
}
