//! Small-world diagnostics: query path lengths, directed clustering, and the
//! analytic random-graph baselines they are compared against.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::overlay::{EdgeRecord, OverlayNetwork, PeerId};
use crate::routing::QueryTrace;

/// Which responders contribute to the path length of a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AplMode {
    /// Every responder of every query.
    #[default]
    All,
    /// Only the first responder of each query.
    First,
}

/// How nodes with fewer than two out-neighbours enter the network CC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CcUndefined {
    #[default]
    Exclude,
    Zero,
}

macro_rules! keyword_enum {
    ($ty:ty { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $(Self::$variant => $text),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    other => Err(format!("unknown value `{other}`")),
                }
            }
        }
    };
}

keyword_enum!(AplMode { All => "all", First => "first" });
keyword_enum!(CcUndefined { Exclude => "exclude", Zero => "zero" });

/// Read-only view of a directed graph, enough to compute clustering.
pub trait DirectedGraph {
    fn node_ids(&self) -> Vec<PeerId>;
    /// Out-neighbours of `n` in ascending order.
    fn out_neighbors(&self, n: PeerId) -> Vec<PeerId>;
    fn has_edge(&self, from: PeerId, to: PeerId) -> bool;
}

impl DirectedGraph for OverlayNetwork {
    fn node_ids(&self) -> Vec<PeerId> {
        self.peer_ids().collect()
    }

    fn out_neighbors(&self, n: PeerId) -> Vec<PeerId> {
        self.out_links(n).map(|(t, _)| t).collect()
    }

    fn has_edge(&self, from: PeerId, to: PeerId) -> bool {
        self.has_link(from, to)
    }
}

/// Plain adjacency built from an edge-list snapshot.
#[derive(Debug, Clone, Default)]
pub struct EdgeListGraph {
    nodes: BTreeSet<PeerId>,
    adjacency: BTreeMap<PeerId, BTreeSet<PeerId>>,
}

impl EdgeListGraph {
    pub fn from_edges(edges: impl IntoIterator<Item = (PeerId, PeerId)>) -> Self {
        let mut g = Self::default();
        for (s, t) in edges {
            g.add_edge(s, t);
        }
        g
    }

    pub fn from_records(records: &[EdgeRecord]) -> Self {
        Self::from_edges(records.iter().map(|r| (r.source, r.target)))
    }

    pub fn add_node(&mut self, n: PeerId) {
        self.nodes.insert(n);
    }

    /// Self-loops and duplicates are ignored.
    pub fn add_edge(&mut self, s: PeerId, t: PeerId) {
        self.nodes.insert(s);
        self.nodes.insert(t);
        if s != t {
            self.adjacency.entry(s).or_default().insert(t);
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum()
    }
}

impl DirectedGraph for EdgeListGraph {
    fn node_ids(&self) -> Vec<PeerId> {
        self.nodes.iter().copied().collect()
    }

    fn out_neighbors(&self, n: PeerId) -> Vec<PeerId> {
        self.adjacency
            .get(&n)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    fn has_edge(&self, from: PeerId, to: PeerId) -> bool {
        self.adjacency.get(&from).is_some_and(|s| s.contains(&to))
    }
}

/// Links present among a node's out-neighbours, and how many were possible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighbourLinks {
    pub real: usize,
    pub possible: usize,
}

impl NeighbourLinks {
    pub fn ratio(self) -> f64 {
        self.real as f64 / self.possible as f64
    }
}

/// Counts ordered neighbour pairs `(a, b)` with a link `a -> b`. `None`
/// when the node has fewer than two out-neighbours.
pub fn neighbour_links<G: DirectedGraph + ?Sized>(g: &G, n: PeerId) -> Option<NeighbourLinks> {
    let hood = g.out_neighbors(n);
    let k = hood.len();
    if k < 2 {
        return None;
    }
    let real = hood
        .iter()
        .map(|&a| hood.iter().filter(|&&b| b != a && g.has_edge(a, b)).count())
        .sum();
    Some(NeighbourLinks {
        real,
        possible: k * (k - 1),
    })
}

pub fn clustering_coefficient_node<G: DirectedGraph + ?Sized>(g: &G, n: PeerId) -> Option<f64> {
    neighbour_links(g, n).map(NeighbourLinks::ratio)
}

/// Per-node coefficients. Undefined nodes are omitted, or reported as zero
/// under [`CcUndefined::Zero`].
pub fn clustering_per_node<G: DirectedGraph + ?Sized>(
    g: &G,
    undefined: CcUndefined,
) -> BTreeMap<PeerId, f64> {
    g.node_ids()
        .into_iter()
        .filter_map(|n| match (clustering_coefficient_node(g, n), undefined) {
            (Some(cc), _) => Some((n, cc)),
            (None, CcUndefined::Zero) => Some((n, 0.0)),
            (None, CcUndefined::Exclude) => None,
        })
        .collect()
}

/// Mean of the per-node coefficients; zero when no node qualifies.
pub fn clustering_coefficient_network_with<G: DirectedGraph + ?Sized>(
    g: &G,
    undefined: CcUndefined,
) -> f64 {
    mean(clustering_per_node(g, undefined).values().copied())
}

pub fn clustering_coefficient_network<G: DirectedGraph + ?Sized>(g: &G) -> f64 {
    clustering_coefficient_network_with(g, CcUndefined::Exclude)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Average hop depth of responses; zero when nothing was answered.
pub fn apl_from_traces_with(traces: &[QueryTrace], mode: AplMode) -> f64 {
    mean(traces.iter().flat_map(|t| {
        let take = match mode {
            AplMode::All => usize::MAX,
            AplMode::First => 1,
        };
        t.responses()
            .take(take)
            .map(|(_, depth, _)| f64::from(depth))
    }))
}

pub fn apl_from_traces(traces: &[QueryTrace]) -> f64 {
    apl_from_traces_with(traces, AplMode::All)
}

/// APL over sliding windows of `window` traces advanced by `step`. Only
/// complete windows are reported, keyed by their first trace index.
pub fn windowed_apl_with(
    traces: &[QueryTrace],
    window: usize,
    step: usize,
    mode: AplMode,
) -> Vec<(usize, f64)> {
    assert!(
        window >= 1 && (1..=window).contains(&step),
        "need window >= 1 and 1 <= step <= window"
    );
    (0..)
        .map(|i| i * step)
        .take_while(|start| start + window <= traces.len())
        .map(|start| {
            (
                start,
                apl_from_traces_with(&traces[start..start + window], mode),
            )
        })
        .collect()
}

pub fn windowed_apl(traces: &[QueryTrace], window: usize, step: usize) -> Vec<(usize, f64)> {
    windowed_apl_with(traces, window, step, AplMode::All)
}

/// Expected path length of a random graph: `ln|V| / ln(|E|/|V|)`.
pub fn random_graph_apl(nodes: usize, edges: usize) -> Result<f64> {
    if nodes < 2 || edges <= nodes {
        return Err(Error::AplBaselineUndefined { nodes, edges });
    }
    let v = nodes as f64;
    Ok(v.ln() / (edges as f64 / v).ln())
}

/// Clustering of a random directed graph: `|E| / (|V| (|V| - 1))`.
pub fn random_graph_cc(nodes: usize, edges: usize) -> Result<f64> {
    if nodes < 2 {
        return Err(Error::CcBaselineUndefined(nodes));
    }
    let v = nodes as f64;
    Ok(edges as f64 / (v * (v - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsOptions {
    pub window: usize,
    pub step: usize,
    pub apl_mode: AplMode,
    pub cc_undefined: CcUndefined,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        Self {
            window: 300,
            step: 50,
            apl_mode: AplMode::All,
            cc_undefined: CcUndefined::Exclude,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub apl: f64,
    pub apl_windows: Vec<(usize, f64)>,
    pub cc: f64,
    pub cc_per_node: BTreeMap<PeerId, f64>,
    /// `None` when |E| <= |V|.
    pub random_apl: Option<f64>,
    pub random_cc: f64,
    pub node_count: usize,
    pub edge_count: usize,
}

impl MetricsReport {
    pub fn compute<G: DirectedGraph + ?Sized>(
        graph: &G,
        node_count: usize,
        edge_count: usize,
        traces: &[QueryTrace],
        opts: &MetricsOptions,
    ) -> Result<Self> {
        let cc_per_node = clustering_per_node(graph, opts.cc_undefined);
        Ok(Self {
            apl: apl_from_traces_with(traces, opts.apl_mode),
            apl_windows: windowed_apl_with(traces, opts.window, opts.step, opts.apl_mode),
            cc: mean(cc_per_node.values().copied()),
            cc_per_node,
            random_apl: random_graph_apl(node_count, edge_count).ok(),
            random_cc: random_graph_cc(node_count, edge_count)?,
            node_count,
            edge_count,
        })
    }

    pub fn for_network(
        net: &OverlayNetwork,
        traces: &[QueryTrace],
        opts: &MetricsOptions,
    ) -> Result<Self> {
        Self::compute(net, net.peer_count(), net.edge_count(), traces, opts)
    }

    /// `cc / random_cc`, or infinity for an edgeless network.
    pub fn cc_ratio(&self) -> f64 {
        self.cc / self.random_cc
    }

    /// CSV with one `summary` row, one `window` row per APL window
    /// (`index` = start) and one `node` row per defined coefficient
    /// (`index` = peer).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(METRICS_HEADER)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            "summary".to_string(),
            String::new(),
            self.apl.to_string(),
            self.cc.to_string(),
            opt(self.random_apl),
            self.random_cc.to_string(),
            self.node_count.to_string(),
            self.edge_count.to_string(),
        ])?;
        for (start, apl) in &self.apl_windows {
            w.write_record([
                "window",
                &start.to_string(),
                &apl.to_string(),
                "",
                "",
                "",
                "",
                "",
            ])?;
        }
        for (peer, cc) in &self.cc_per_node {
            w.write_record([
                "node",
                &peer.to_string(),
                "",
                &cc.to_string(),
                "",
                "",
                "",
                "",
            ])?;
        }
        w.flush().map_err(|e| Error::io("metrics csv", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut report: Option<MetricsReport> = None;
        let mut windows = Vec::new();
        let mut nodes = BTreeMap::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let bad = |message: String| Error::Parse {
                path: "metrics csv".into(),
                line: i + 2,
                message,
            };
            let float = |col: usize| -> Result<f64> {
                record[col]
                    .parse()
                    .map_err(|e| bad(format!("column {}: {e}", METRICS_HEADER[col])))
            };
            let int = |col: usize| -> Result<usize> {
                record[col]
                    .parse()
                    .map_err(|e| bad(format!("column {}: {e}", METRICS_HEADER[col])))
            };
            match &record[0] {
                "summary" => {
                    report = Some(MetricsReport {
                        apl: float(2)?,
                        apl_windows: Vec::new(),
                        cc: float(3)?,
                        cc_per_node: BTreeMap::new(),
                        random_apl: if record[4].is_empty() {
                            None
                        } else {
                            Some(float(4)?)
                        },
                        random_cc: float(5)?,
                        node_count: int(6)?,
                        edge_count: int(7)?,
                    })
                }
                "window" => windows.push((int(1)?, float(2)?)),
                "node" => {
                    nodes.insert(PeerId(int(1)? as u32), float(3)?);
                }
                other => return Err(bad(format!("unknown row kind `{other}`"))),
            }
        }
        let mut report = report.ok_or_else(|| Error::Parse {
            path: "metrics csv".into(),
            line: 1,
            message: "missing summary row".into(),
        })?;
        report.apl_windows = windows;
        report.cc_per_node = nodes;
        Ok(report)
    }
}

const METRICS_HEADER: [&str; 8] = [
    "kind",
    "index",
    "apl",
    "cc",
    "random_apl",
    "random_cc",
    "nodes",
    "edges",
];
