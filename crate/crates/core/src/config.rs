//! Experiment configuration and its plain-text `key = value` file format.
//!
//! ```text
//! # comments and blank lines are ignored
//! nodes = 200
//! queries-per-node = 15
//! flood-threshold = 0.5
//! ```
//!
//! Keys are the long CLI flag names without the leading dashes.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{AplMode, CcUndefined, MetricsOptions};
use crate::routing::RoutingConfig;

/// Order in which peers issue queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssuerOrder {
    #[default]
    RoundRobin,
    Random,
}

impl std::str::FromStr for IssuerOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "round-robin" => Ok(IssuerOrder::RoundRobin),
            "random" => Ok(IssuerOrder::Random),
            other => Err(format!("unknown issuer order `{other}`")),
        }
    }
}

impl std::fmt::Display for IssuerOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IssuerOrder::RoundRobin => "round-robin",
            IssuerOrder::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub nodes: usize,
    pub queries_per_node: usize,
    pub n_r: u32,
    pub topic_count: usize,
    pub terms_per_topic: usize,
    /// Terms shared between consecutive topic blocks.
    pub topic_overlap: usize,
    pub topics_per_peer: usize,
    pub docs_per_peer_min: usize,
    pub docs_per_peer_max: usize,
    /// Multiplicative noise amplitude applied to each term weight.
    pub noise: f64,
    /// Probability that a query is about one of the issuer's own topics.
    pub query_locality: f64,
    pub join_fanout: usize,
    pub doc_threshold: f64,
    pub flood_threshold: f64,
    pub ttl: u32,
    pub seed: u64,
    pub issuer: IssuerOrder,
    pub apl_mode: AplMode,
    pub cc_undefined: CcUndefined,
    pub window: usize,
    pub step: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            nodes: 200,
            queries_per_node: 15,
            n_r: 1,
            topic_count: 20,
            terms_per_topic: 20,
            topic_overlap: 0,
            topics_per_peer: 3,
            docs_per_peer_min: 1,
            docs_per_peer_max: 4,
            noise: 0.2,
            query_locality: 0.8,
            join_fanout: 3,
            doc_threshold: 0.5,
            flood_threshold: 0.5,
            ttl: 64,
            seed: 42,
            issuer: IssuerOrder::RoundRobin,
            apl_mode: AplMode::All,
            cc_undefined: CcUndefined::Exclude,
            window: 300,
            step: 50,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("{key}: cannot parse `{value}`: {e}"))
}

impl ExperimentConfig {
    pub const KEYS: [&'static str; 21] = [
        "nodes",
        "queries-per-node",
        "n-r",
        "topic-count",
        "terms-per-topic",
        "topic-overlap",
        "topics-per-peer",
        "docs-per-peer-min",
        "docs-per-peer-max",
        "noise",
        "query-locality",
        "join-fanout",
        "doc-threshold",
        "flood-threshold",
        "ttl",
        "seed",
        "issuer",
        "apl-mode",
        "cc-undefined",
        "window",
        "step",
    ];

    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "nodes" => self.nodes = parse(key, value)?,
            "queries-per-node" => self.queries_per_node = parse(key, value)?,
            "n-r" => self.n_r = parse(key, value)?,
            "topic-count" => self.topic_count = parse(key, value)?,
            "terms-per-topic" => self.terms_per_topic = parse(key, value)?,
            "topic-overlap" => self.topic_overlap = parse(key, value)?,
            "topics-per-peer" => self.topics_per_peer = parse(key, value)?,
            "docs-per-peer-min" => self.docs_per_peer_min = parse(key, value)?,
            "docs-per-peer-max" => self.docs_per_peer_max = parse(key, value)?,
            "noise" => self.noise = parse(key, value)?,
            "query-locality" => self.query_locality = parse(key, value)?,
            "join-fanout" => self.join_fanout = parse(key, value)?,
            "doc-threshold" => self.doc_threshold = parse(key, value)?,
            "flood-threshold" => self.flood_threshold = parse(key, value)?,
            "ttl" => self.ttl = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "issuer" => self.issuer = parse(key, value)?,
            "apl-mode" => self.apl_mode = parse(key, value)?,
            "cc-undefined" => self.cc_undefined = parse(key, value)?,
            "window" => self.window = parse(key, value)?,
            "step" => self.step = parse(key, value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "nodes" => self.nodes.to_string(),
            "queries-per-node" => self.queries_per_node.to_string(),
            "n-r" => self.n_r.to_string(),
            "topic-count" => self.topic_count.to_string(),
            "terms-per-topic" => self.terms_per_topic.to_string(),
            "topic-overlap" => self.topic_overlap.to_string(),
            "topics-per-peer" => self.topics_per_peer.to_string(),
            "docs-per-peer-min" => self.docs_per_peer_min.to_string(),
            "docs-per-peer-max" => self.docs_per_peer_max.to_string(),
            "noise" => self.noise.to_string(),
            "query-locality" => self.query_locality.to_string(),
            "join-fanout" => self.join_fanout.to_string(),
            "doc-threshold" => self.doc_threshold.to_string(),
            "flood-threshold" => self.flood_threshold.to_string(),
            "ttl" => self.ttl.to_string(),
            "seed" => self.seed.to_string(),
            "issuer" => self.issuer.to_string(),
            "apl-mode" => self.apl_mode.to_string(),
            "cc-undefined" => self.cc_undefined.to_string(),
            "window" => self.window.to_string(),
            "step" => self.step.to_string(),
            _ => return None,
        })
    }

    /// Parses `key = value` text on top of the defaults.
    pub fn parse_kv(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: n + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_kv(&text, &path.display().to_string())
    }

    /// Every field as `key = value`, in [`Self::KEYS`] order.
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).expect("known key"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.nodes < 2 {
            return fail("nodes must be at least 2");
        }
        if self.queries_per_node == 0 || self.n_r == 0 || self.join_fanout == 0 || self.ttl == 0 {
            return fail("queries-per-node, n-r, join-fanout and ttl must be positive");
        }
        if self.topic_count == 0 || self.terms_per_topic == 0 {
            return fail("topic-count and terms-per-topic must be positive");
        }
        if self.topic_overlap >= self.terms_per_topic {
            return fail("topic-overlap must be smaller than terms-per-topic");
        }
        if self.topics_per_peer == 0 || self.topics_per_peer > self.topic_count {
            return fail("topics-per-peer must be in 1..=topic-count");
        }
        if self.docs_per_peer_min == 0 || self.docs_per_peer_min > self.docs_per_peer_max {
            return fail("docs-per-peer range must satisfy 1 <= min <= max");
        }
        if !(unit(self.doc_threshold) && unit(self.flood_threshold) && unit(self.query_locality)) {
            return fail("doc-threshold, flood-threshold and query-locality must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.noise) {
            return fail("noise must lie in [0, 1)");
        }
        if self.window == 0 || self.step == 0 || self.step > self.window {
            return fail("window and step must satisfy 1 <= step <= window");
        }
        Ok(())
    }

    pub fn routing(&self) -> RoutingConfig {
        RoutingConfig {
            doc_threshold: self.doc_threshold,
            flood_threshold: self.flood_threshold,
            ttl: self.ttl,
        }
    }

    pub fn metrics(&self) -> MetricsOptions {
        MetricsOptions {
            window: self.window,
            step: self.step,
            apl_mode: self.apl_mode,
            cc_undefined: self.cc_undefined,
        }
    }

    pub fn total_queries(&self) -> usize {
        self.nodes * self.queries_per_node
    }
}
