#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use prosa_sim::config::IssuerOrder;
use prosa_sim::metrics::EdgeListGraph;
use prosa_sim::routing::TraceEvent;
use prosa_sim::{ExperimentConfig, LabelKind, OverlayNetwork, PeerId, QueryTrace};
use rand::Rng;

pub type Labels = BTreeMap<(PeerId, PeerId), LabelKind>;

pub fn labels(net: &OverlayNetwork) -> Labels {
    net.links().map(|(s, t, l)| ((s, t), l.kind())).collect()
}

/// Replays the recorded link transitions of `trace` on `before` and checks
/// that each one is an upgrade starting from the recorded state, and that
/// the replay ends exactly at `after`.
pub fn check_link_history(before: &Labels, trace: &QueryTrace, after: &Labels) -> Vec<String> {
    let mut errs = Vec::new();
    let mut state = before.clone();
    for e in &trace.events {
        let TraceEvent::LinkUpdate { transition: t, .. } = e else {
            continue;
        };
        let key = (t.source, t.target);
        if state.get(&key).copied() != t.before {
            errs.push(format!(
                "qid {}: transition {} does not start from {:?}",
                trace.qid,
                t.describe(),
                state.get(&key)
            ));
        }
        if t.before.is_some_and(|b| b > t.after) {
            errs.push(format!(
                "qid {}: downgrade {} on {}->{}",
                trace.qid,
                t.describe(),
                t.source,
                t.target
            ));
        }
        if t.source == t.target {
            errs.push(format!("qid {}: self link on {}", trace.qid, t.source));
        }
        state.insert(key, t.after);
    }
    if &state != after {
        errs.push(format!(
            "qid {}: recorded transitions do not explain the final link state",
            trace.qid
        ));
    }
    for (key, kind) in before {
        match after.get(key) {
            None => errs.push(format!("qid {}: link {:?} disappeared", trace.qid, key)),
            Some(k) if k < kind => {
                errs.push(format!("qid {}: link {:?} downgraded", trace.qid, key))
            }
            _ => {}
        }
    }
    errs
}

/// Dedup, depth bound, budget conservation and FSL-follows-response.
pub fn check_trace(trace: &QueryTrace, n_r: u32, ttl: u32, net: &OverlayNetwork) -> Vec<String> {
    let q = trace.qid;
    let mut errs = Vec::new();
    let mut visit_budget: HashMap<PeerId, u32> = HashMap::new();
    let mut responded: HashMap<PeerId, u32> = HashMap::new();
    let mut received: HashMap<PeerId, u32> = HashMap::new();
    received.insert(trace.source, n_r);

    for e in &trace.events {
        if e.depth() > ttl {
            errs.push(format!("qid {q}: event deeper than ttl: {e:?}"));
        }
        match *e {
            TraceEvent::Visit { peer, budget, .. } => {
                if visit_budget.insert(peer, budget).is_some() {
                    errs.push(format!("qid {q}: {peer} visited twice"));
                }
                if received.get(&peer) != Some(&budget) {
                    errs.push(format!(
                        "qid {q}: {peer} visited with budget {budget} but was sent {:?}",
                        received.get(&peer)
                    ));
                }
                if budget == 0 || budget > n_r {
                    errs.push(format!(
                        "qid {q}: {peer} has budget {budget} outside 1..={n_r}"
                    ));
                }
            }
            TraceEvent::Respond { peer, num_res, .. } => {
                let budget = visit_budget.get(&peer).copied().unwrap_or(0);
                if num_res == 0 || num_res > budget {
                    errs.push(format!(
                        "qid {q}: {peer} returned {num_res} with budget {budget}"
                    ));
                }
                if responded.insert(peer, num_res).is_some() {
                    errs.push(format!("qid {q}: {peer} responded twice"));
                }
                if peer != trace.source
                    && net.label(trace.source, peer).map(|l| l.kind()) != Some(LabelKind::Fsl)
                {
                    errs.push(format!(
                        "qid {q}: responder {peer} has no FSL from {}",
                        trace.source
                    ));
                }
            }
            TraceEvent::Forward {
                from, to, budget, ..
            } => {
                let parent = visit_budget.get(&from).copied().unwrap_or(0);
                let local = responded.get(&from).copied().unwrap_or(0);
                if budget != parent - local.min(parent) || budget == 0 {
                    errs.push(format!(
                        "qid {q}: {from}->{to} carries {budget}, parent {parent}, local {local}"
                    ));
                }
                if received.insert(to, budget).is_some() {
                    errs.push(format!("qid {q}: {to} received the query twice"));
                }
            }
            _ => {}
        }
    }
    let responses = responded.values().map(|&n| u64::from(n)).sum::<u64>();
    if responses != trace.total_results {
        errs.push(format!(
            "qid {q}: total {} != sum of responses {responses}",
            trace.total_results
        ));
    }
    if visit_budget.len() > net.peer_count() {
        errs.push(format!("qid {q}: more visits than peers"));
    }
    errs
}

/// A random but valid experiment of at most `max_nodes` peers.
pub fn random_config<R: Rng>(rng: &mut R, max_nodes: usize) -> ExperimentConfig {
    let nodes = rng.random_range(2..=max_nodes);
    let topic_count = rng.random_range(1..=12);
    let terms_per_topic = rng.random_range(2..=12);
    let docs_min = rng.random_range(1..=4);
    ExperimentConfig {
        nodes,
        queries_per_node: rng.random_range(1..=6),
        n_r: rng.random_range(1..=6),
        topic_count,
        terms_per_topic,
        topic_overlap: rng.random_range(0..terms_per_topic),
        topics_per_peer: rng.random_range(1..=topic_count.min(3)),
        docs_per_peer_min: docs_min,
        docs_per_peer_max: docs_min + rng.random_range(0..=5),
        noise: rng.random_range(0.0..0.6),
        query_locality: rng.random_range(0.0..=1.0),
        join_fanout: rng.random_range(1..=5),
        doc_threshold: rng.random_range(0.2..=0.9),
        flood_threshold: rng.random_range(0.0..=0.9),
        ttl: rng.random_range(1..=nodes as u32 + 2),
        seed: rng.random(),
        issuer: if rng.random_bool(0.5) {
            IssuerOrder::RoundRobin
        } else {
            IssuerOrder::Random
        },
        ..Default::default()
    }
}

/// Directed graph with each ordered pair linked independently with probability `p`.
pub fn random_digraph<R: Rng>(rng: &mut R, nodes: u32, p: f64) -> (EdgeListGraph, Vec<Vec<bool>>) {
    let n = nodes as usize;
    let mut adj = vec![vec![false; n]; n];
    let mut g = EdgeListGraph::default();
    for i in 0..nodes {
        g.add_node(PeerId(i));
    }
    for (i, row) in adj.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j && rng.random_bool(p) {
                *cell = true;
                g.add_edge(PeerId(i as u32), PeerId(j as u32));
            }
        }
    }
    (g, adj)
}

/// Per-node `(real, possible)` neighbour-link counts by an explicit triple loop
/// over an adjacency matrix. Nodes with fewer than two out-neighbours are skipped.
pub fn brute_force_cc(adj: &[Vec<bool>]) -> BTreeMap<usize, (usize, usize)> {
    let n = adj.len();
    let mut out = BTreeMap::new();
    for i in 0..n {
        let k = (0..n).filter(|&j| adj[i][j]).count();
        if k < 2 {
            continue;
        }
        let mut real = 0;
        for j in 0..n {
            for l in 0..n {
                if j != l && adj[i][j] && adj[i][l] && adj[j][l] {
                    real += 1;
                }
            }
        }
        out.insert(i, (real, k * (k - 1)));
    }
    out
}
