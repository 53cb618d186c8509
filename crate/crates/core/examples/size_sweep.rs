//! APL and clustering across network sizes, experiments run in parallel.
//!
//! Usage: `cargo run --release --example size_sweep [sizes]`, e.g. `100,200,400`.

use prosa_sim::{sweep, ExperimentConfig};

fn main() -> prosa_sim::Result<()> {
    let sizes: Vec<usize> = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "100,200,400,800".into())
        .split(',')
        .map(|s| s.trim().parse().expect("sizes are integers"))
        .collect();
    let reports = sweep(&ExperimentConfig::default(), &sizes)?;
    println!(
        "{:>6} {:>7} {:>10} {:>7} {:>10} {:>6}",
        "size", "apl", "random-apl", "cc", "random-cc", "ratio"
    );
    for (n, r) in sizes.iter().zip(&reports) {
        println!(
            "{n:>6} {:>7.3} {:>10.3} {:>7.4} {:>10.4} {:>6.2}",
            r.apl,
            r.random_apl.unwrap_or(f64::NAN),
            r.cc,
            r.random_cc,
            r.cc_ratio()
        );
    }
    Ok(())
}
