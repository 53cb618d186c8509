//! Route a few queries through a small joined network and print every
//! trace event, showing acquaintance links turning into TSLs and FSLs.

use prosa_sim::{
    exec_query, Document, LabelKind, OverlayNetwork, PeerId, QueryMessage, RoutingConfig,
    TermVector,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SPORT: u32 = 1;
const MUSIC: u32 = 2;

fn doc(id: u64, term: u32) -> Document {
    Document::new(id, TermVector::from_pairs([(term, 1.0)]).unwrap()).unwrap()
}

fn print_links(net: &OverlayNetwork) {
    for kind in [LabelKind::Al, LabelKind::Tsl, LabelKind::Fsl] {
        let links: Vec<String> = net
            .links()
            .filter(|(_, _, l)| l.kind() == kind)
            .map(|(s, t, _)| format!("{s}->{t}"))
            .collect();
        println!("  {kind:<3} {}", links.join(" "));
    }
}

fn main() -> prosa_sim::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut net = OverlayNetwork::new();
    let holdings: [&[Document]; 8] = [
        &[],
        &[doc(10, MUSIC)],
        &[],
        &[doc(30, SPORT), doc(31, SPORT)],
        &[],
        &[doc(50, SPORT)],
        &[],
        &[],
    ];
    for docs in holdings {
        let p = net.add_peer(docs.to_vec());
        if p.index() > 0 {
            net.join(p, 2, &mut rng)?;
        }
    }
    println!("after joins:");
    print_links(&net);

    let cfg = RoutingConfig::default();
    for (qid, term, n_r) in [(0, SPORT, 3), (1, SPORT, 3), (2, MUSIC, 1)] {
        let qm = QueryMessage {
            qid,
            query: TermVector::from_pairs([(term, 1.0)])?,
            source: PeerId(7),
            n_r,
        };
        let trace = exec_query(&mut net, &qm, &cfg, &mut rng)?;
        println!(
            "\nquery {qid} (term {term}, n_r {n_r}) from peer 7: {} results",
            trace.total_results
        );
        for e in &trace.events {
            println!("  {e:?}");
        }
    }
    println!("\nafter queries:");
    print_links(&net);
    Ok(())
}
