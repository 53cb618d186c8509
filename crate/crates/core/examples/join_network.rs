//! Grow a network with acquaintance links only and inspect it.

use prosa_sim::metrics::clustering_coefficient_network;
use prosa_sim::{Document, LabelKind, OverlayNetwork, TermVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut net = OverlayNetwork::new();
    for i in 0..12u32 {
        let doc = Document::new(u64::from(i), TermVector::from_pairs([(i % 4, 1.0)])?)?;
        let p = net.add_peer(vec![doc]);
        if i > 0 {
            let picked = net.join(p, 3, &mut rng)?;
            println!("{p} joined {picked:?}");
        }
    }
    println!(
        "{} peers, {} links ({} AL), cc {:.3}",
        net.peer_count(),
        net.edge_count(),
        net.count_label(LabelKind::Al),
        clustering_coefficient_network(&net)
    );
    net.write_edge_list(std::io::stdout().lock())?;
    Ok(())
}
