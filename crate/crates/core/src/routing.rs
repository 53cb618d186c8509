//! Query execution over the overlay.
//!
//! A query starts at its source and is handled peer by peer from a FIFO work
//! queue. Each receiving peer first learns about the forwarder, then checks
//! its own documents. A peer with no matches hands the query to its single
//! best neighbour; a peer with some matches answers, gains nothing itself,
//! but earns an FSL from the source, and floods the rest of the request to
//! every sufficiently relevant neighbour.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knowledge::{peer_relevance, resources_relevance, TermVector};
use crate::overlay::{LabelKind, LinkTransition, OverlayNetwork, PeerId};

#[derive(Debug, Clone, PartialEq)]
pub struct QueryMessage {
    pub qid: u64,
    pub query: TermVector,
    pub source: PeerId,
    /// Number of results still required.
    pub n_r: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingConfig {
    /// Minimum cosine relevance for a document to count as a match.
    pub doc_threshold: f64,
    /// A neighbour is flooded only if its link weight scores strictly above this.
    pub flood_threshold: f64,
    /// Maximum hop depth.
    pub ttl: u32,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        Self {
            doc_threshold: 0.5,
            flood_threshold: 0.5,
            ttl: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForwardMode {
    /// Highest-relevance semantic link.
    BestForwarder,
    /// No relevant semantic link; a neighbour picked at random.
    RandomAl,
    /// Semantic flooding after a partial answer.
    Flood,
}

impl ForwardMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ForwardMode::BestForwarder => "best-forwarder",
            ForwardMode::RandomAl => "random-AL",
            ForwardMode::Flood => "flood",
        }
    }
}

impl fmt::Display for ForwardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ForwardMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "best-forwarder" => Ok(ForwardMode::BestForwarder),
            "random-AL" => Ok(ForwardMode::RandomAl),
            "flood" => Ok(ForwardMode::Flood),
            other => Err(format!("unknown forward mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    /// `from` passed the query to `to`, which will handle it at `depth`
    /// with `budget` results still required.
    Forward {
        from: PeerId,
        to: PeerId,
        depth: u32,
        mode: ForwardMode,
        budget: u32,
    },
    Visit {
        peer: PeerId,
        depth: u32,
        budget: u32,
    },
    Respond {
        peer: PeerId,
        depth: u32,
        num_res: u32,
    },
    LinkUpdate {
        depth: u32,
        transition: LinkTransition,
    },
    DeadEnd {
        peer: PeerId,
        depth: u32,
    },
    TtlExhausted {
        peer: PeerId,
        depth: u32,
    },
}

impl TraceEvent {
    pub fn depth(&self) -> u32 {
        match *self {
            TraceEvent::Forward { depth, .. }
            | TraceEvent::Visit { depth, .. }
            | TraceEvent::Respond { depth, .. }
            | TraceEvent::LinkUpdate { depth, .. }
            | TraceEvent::DeadEnd { depth, .. }
            | TraceEvent::TtlExhausted { depth, .. } => depth,
        }
    }
}

/// Everything that happened while one query was executed.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryTrace {
    pub qid: u64,
    pub source: PeerId,
    pub events: Vec<TraceEvent>,
    pub total_results: u64,
}

impl QueryTrace {
    /// `(peer, depth, num_res)` for each responder, in response order.
    pub fn responses(&self) -> impl Iterator<Item = (PeerId, u32, u32)> + '_ {
        self.events.iter().filter_map(|e| match *e {
            TraceEvent::Respond {
                peer,
                depth,
                num_res,
            } => Some((peer, depth, num_res)),
            _ => None,
        })
    }

    pub fn visits(&self) -> impl Iterator<Item = PeerId> + '_ {
        self.events.iter().filter_map(|e| match *e {
            TraceEvent::Visit { peer, .. } => Some(peer),
            _ => None,
        })
    }

    pub fn forward_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Forward { .. }))
            .count()
    }
}

struct WorkItem {
    cur: PeerId,
    prev: Option<PeerId>,
    budget: u32,
    depth: u32,
}

/// Runs one query to completion, mutating link state along the way.
pub fn exec_query<R: Rng + ?Sized>(
    net: &mut OverlayNetwork,
    qm: &QueryMessage,
    cfg: &RoutingConfig,
    rng: &mut R,
) -> Result<QueryTrace> {
    if !net.contains(qm.source) {
        return Err(Error::UnknownPeer(qm.source));
    }
    if qm.n_r == 0 {
        return Err(Error::ZeroResultsRequested);
    }
    if qm.query.is_empty() {
        return Err(Error::EmptyVector("query"));
    }

    let q = &qm.query;
    let mut trace = QueryTrace {
        qid: qm.qid,
        source: qm.source,
        events: Vec::new(),
        total_results: 0,
    };
    // Peers that have received this qid; a peer is enqueued at most once.
    let mut seen: BTreeSet<PeerId> = BTreeSet::new();
    seen.insert(qm.source);
    let mut queue = VecDeque::from([WorkItem {
        cur: qm.source,
        prev: None,
        budget: qm.n_r,
        depth: 0,
    }]);

    while let Some(item) = queue.pop_front() {
        let WorkItem {
            cur,
            prev,
            budget,
            depth,
        } = item;
        trace.events.push(TraceEvent::Visit {
            peer: cur,
            depth,
            budget,
        });

        if let Some(prev) = prev {
            let transition = net.update_link(cur, prev, q)?;
            if transition.is_change() {
                trace
                    .events
                    .push(TraceEvent::LinkUpdate { depth, transition });
            }
        }

        let matches =
            resources_relevance(net.documents(cur)?, q, budget as usize, cfg.doc_threshold);
        let num_res = matches.len() as u32;

        if num_res == 0 {
            if depth >= cfg.ttl {
                trace
                    .events
                    .push(TraceEvent::TtlExhausted { peer: cur, depth });
                continue;
            }
            match select_forwarder(net, cur, q, &seen, rng)? {
                Some((next, mode)) => {
                    trace.events.push(TraceEvent::Forward {
                        from: cur,
                        to: next,
                        depth: depth + 1,
                        mode,
                        budget,
                    });
                    seen.insert(next);
                    queue.push_back(WorkItem {
                        cur: next,
                        prev: Some(cur),
                        budget,
                        depth: depth + 1,
                    });
                }
                None => trace.events.push(TraceEvent::DeadEnd { peer: cur, depth }),
            }
            continue;
        }

        // The result message itself is delivered instantly and not modelled further.
        trace.events.push(TraceEvent::Respond {
            peer: cur,
            depth,
            num_res,
        });
        trace.total_results += u64::from(num_res);
        if cur != qm.source {
            let transition = net.promote_to_fsl(qm.source, cur)?;
            trace
                .events
                .push(TraceEvent::LinkUpdate { depth, transition });
        }

        if num_res < budget {
            if depth >= cfg.ttl {
                trace
                    .events
                    .push(TraceEvent::TtlExhausted { peer: cur, depth });
                continue;
            }
            let remaining = budget - num_res;
            for next in flood_targets(net, cur, q, cfg.flood_threshold, &seen)? {
                trace.events.push(TraceEvent::Forward {
                    from: cur,
                    to: next,
                    depth: depth + 1,
                    mode: ForwardMode::Flood,
                    budget: remaining,
                });
                seen.insert(next);
                queue.push_back(WorkItem {
                    cur: next,
                    prev: Some(cur),
                    budget: remaining,
                    depth: depth + 1,
                });
            }
        }
    }
    Ok(trace)
}

/// Picks the next hop for a query `cur` cannot answer.
///
/// The semantic link (TSL or FSL) whose weight is most relevant to `q` wins,
/// ties going to the lower peer id. If no semantic link has any relevance,
/// a non-excluded neighbour is drawn uniformly at random. `None` means every
/// neighbour is excluded (or there are none).
pub fn select_forwarder<R: Rng + ?Sized>(
    net: &OverlayNetwork,
    cur: PeerId,
    q: &TermVector,
    exclude: &BTreeSet<PeerId>,
    rng: &mut R,
) -> Result<Option<(PeerId, ForwardMode)>> {
    let mut best: Option<(PeerId, f64)> = None;
    let mut fallback: Vec<PeerId> = Vec::new();
    for (target, label) in net.neighborhood(cur)? {
        if exclude.contains(&target) {
            continue;
        }
        let rel = if label.is_semantic() {
            peer_relevance(label.weight(), q)
        } else {
            0.0
        };
        if rel > 0.0 {
            // Ascending iteration keeps the lowest id on ties.
            if best.is_none_or(|(_, b)| rel > b) {
                best = Some((target, rel));
            }
        } else {
            fallback.push(target);
        }
    }
    if let Some((target, _)) = best {
        return Ok(Some((target, ForwardMode::BestForwarder)));
    }
    Ok(fallback.choose(rng).map(|&t| (t, ForwardMode::RandomAl)))
}

/// Non-excluded neighbours whose link weight scores strictly above
/// `threshold` against `q`, in ascending id order.
pub fn flood_targets(
    net: &OverlayNetwork,
    cur: PeerId,
    q: &TermVector,
    threshold: f64,
    exclude: &BTreeSet<PeerId>,
) -> Result<Vec<PeerId>> {
    Ok(net
        .neighborhood(cur)?
        .into_iter()
        .filter(|(t, label)| !exclude.contains(t) && peer_relevance(label.weight(), q) > threshold)
        .map(|(t, _)| t)
        .collect())
}

const TRACE_HEADER: [&str; 6] = ["qid", "event", "from", "to", "depth", "detail"];

/// Writes traces as CSV with columns `qid,event,from,to,depth,detail`.
pub fn write_traces_csv<W: Write>(traces: &[QueryTrace], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for trace in traces {
        let qid = trace.qid.to_string();
        for event in &trace.events {
            let (name, from, to, detail) = match event {
                TraceEvent::Forward {
                    from,
                    to,
                    mode,
                    budget,
                    ..
                } => (
                    "forward",
                    from.to_string(),
                    to.to_string(),
                    format!("{mode};n_r={budget}"),
                ),
                TraceEvent::Visit { peer, budget, .. } => (
                    "visit",
                    peer.to_string(),
                    String::new(),
                    format!("n_r={budget}"),
                ),
                TraceEvent::Respond { peer, num_res, .. } => (
                    "respond",
                    peer.to_string(),
                    String::new(),
                    format!("num_res={num_res}"),
                ),
                TraceEvent::LinkUpdate { transition, .. } => (
                    "link_update",
                    transition.source.to_string(),
                    transition.target.to_string(),
                    transition.describe(),
                ),
                TraceEvent::DeadEnd { peer, .. } => {
                    ("dead_end", peer.to_string(), String::new(), String::new())
                }
                TraceEvent::TtlExhausted { peer, .. } => (
                    "ttl_exhausted",
                    peer.to_string(),
                    String::new(),
                    String::new(),
                ),
            };
            w.write_record([
                qid.as_str(),
                name,
                &from,
                &to,
                &event.depth().to_string(),
                &detail,
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("trace csv", e))?;
    Ok(())
}

/// Reads traces back from [`write_traces_csv`] output. Events are grouped by
/// consecutive `qid`; the source is the peer of the first visit.
pub fn read_traces_csv<R: Read>(input: R) -> Result<Vec<QueryTrace>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut traces: Vec<QueryTrace> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let bad = |message: String| Error::Parse {
            path: "trace csv".into(),
            line,
            message,
        };
        if record.len() != TRACE_HEADER.len() {
            return Err(bad(format!("expected {} fields", TRACE_HEADER.len())));
        }
        let qid: u64 = record[0].parse().map_err(|e| bad(format!("qid: {e}")))?;
        let peer = |s: &str| {
            s.parse::<PeerId>()
                .map_err(|e| bad(format!("peer `{s}`: {e}")))
        };
        let depth: u32 = record[4].parse().map_err(|e| bad(format!("depth: {e}")))?;
        let detail = &record[5];
        let number = |key: &str| -> Result<u32> {
            detail
                .split(';')
                .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                .ok_or_else(|| bad(format!("missing {key} in `{detail}`")))?
                .parse()
                .map_err(|e| bad(format!("{key}: {e}")))
        };
        let event = match &record[1] {
            "forward" => TraceEvent::Forward {
                from: peer(&record[2])?,
                to: peer(&record[3])?,
                depth,
                mode: detail
                    .split(';')
                    .next()
                    .unwrap_or_default()
                    .parse()
                    .map_err(bad)?,
                budget: number("n_r")?,
            },
            "visit" => TraceEvent::Visit {
                peer: peer(&record[2])?,
                depth,
                budget: number("n_r")?,
            },
            "respond" => TraceEvent::Respond {
                peer: peer(&record[2])?,
                depth,
                num_res: number("num_res")?,
            },
            "link_update" => {
                let (before, after) = detail
                    .split_once("->")
                    .ok_or_else(|| bad(format!("bad transition `{detail}`")))?;
                let before = match before {
                    "none" => None,
                    k => Some(k.parse::<LabelKind>().map_err(bad)?),
                };
                TraceEvent::LinkUpdate {
                    depth,
                    transition: LinkTransition {
                        source: peer(&record[2])?,
                        target: peer(&record[3])?,
                        before,
                        after: after.parse().map_err(bad)?,
                    },
                }
            }
            "dead_end" => TraceEvent::DeadEnd {
                peer: peer(&record[2])?,
                depth,
            },
            "ttl_exhausted" => TraceEvent::TtlExhausted {
                peer: peer(&record[2])?,
                depth,
            },
            other => return Err(bad(format!("unknown event `{other}`"))),
        };
        match traces.last_mut() {
            Some(t) if t.qid == qid => t.events.push(event),
            _ => {
                let source = match event {
                    TraceEvent::Visit { peer, depth: 0, .. } => peer,
                    _ => return Err(bad("trace must start with a depth-0 visit".into())),
                };
                traces.push(QueryTrace {
                    qid,
                    source,
                    events: vec![event],
                    total_results: 0,
                });
            }
        }
    }
    for t in &mut traces {
        t.total_results = t.responses().map(|(_, _, n)| u64::from(n)).sum();
    }
    Ok(traces)
}
