//! Analytic path length and clustering of random graphs.

use prosa_sim::metrics::{random_graph_apl, random_graph_cc};

fn main() {
    println!("{:>6} {:>6} {:>8} {:>9}", "|V|", "|E|", "apl", "cc");
    for v in [100usize, 200, 400, 800] {
        for k in [5, 10, 20] {
            let e = v * k;
            let apl = random_graph_apl(v, e).expect("|E| > |V|");
            let cc = random_graph_cc(v, e).expect("|V| >= 2");
            println!("{v:>6} {e:>6} {apl:>8.4} {cc:>9.5}");
        }
    }
    match random_graph_apl(100, 50) {
        Ok(v) => println!("unexpected {v}"),
        Err(e) => println!("\n{e}"),
    }
}
