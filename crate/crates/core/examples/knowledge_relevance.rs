//! Term vectors, cosine relevance, temporary peer knowledge and local
//! document matching.

use prosa_sim::knowledge::{
    cosine_relevance, resources_relevance, summarize_knowledge, tpk_from_query, tpk_update,
};
use prosa_sim::{Document, TermVector};

fn tv(pairs: &[(u32, f64)]) -> TermVector {
    TermVector::from_pairs(pairs.iter().copied()).expect("valid weights")
}

fn main() -> prosa_sim::Result<()> {
    let docs = vec![
        Document::new(1, tv(&[(0, 1.0), (1, 0.5)]))?,
        Document::new(2, tv(&[(1, 1.0), (2, 1.0)]))?,
        Document::new(3, tv(&[(5, 1.0)]))?,
    ];
    let q = tv(&[(0, 1.0), (1, 1.0)]);

    for d in &docs {
        println!(
            "doc {} {}  relevance {:.4}",
            d.id,
            d.vector(),
            cosine_relevance(d.vector(), &q)
        );
    }
    println!(
        "matches at 0.5, n_r = 2: {:?}",
        resources_relevance(&docs, &q, 2, 0.5)
    );

    let summary = summarize_knowledge(&docs);
    println!(
        "peer knowledge over {} docs: {}",
        summary.doc_count, summary.vector
    );

    // Temporary knowledge drifts toward a repeated query.
    let mut tpk = tpk_from_query(&tv(&[(7, 1.0)]))?;
    for seen in 1..=5 {
        tpk = tpk_update(&tpk, &q, seen)?;
        println!(
            "after {} queries: relevance to q {:.4}",
            seen + 1,
            cosine_relevance(&tpk, &q)
        );
    }
    Ok(())
}
