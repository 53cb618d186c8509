//! Synthetic corpora, query generation, and experiment orchestration.
//!
//! Each topic owns a block of term ids with a fixed prototype weighting.
//! Documents and queries are noisy copies of a topic prototype, so relevance
//! between items of the same topic is high and across disjoint topics zero.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, IssuerOrder};
use crate::error::Result;
use crate::knowledge::{Document, TermId, TermVector};
use crate::metrics::MetricsReport;
use crate::overlay::{LabelKind, OverlayNetwork, PeerId};
use crate::routing::{exec_query, QueryMessage, QueryTrace};

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    topics: Vec<TermVector>,
}

impl TopicModel {
    /// Topic `i` covers terms `[i * (len - overlap), i * (len - overlap) + len)`
    /// with prototype weights drawn uniformly from `[0.5, 1.0)`.
    pub fn generate<R: Rng + ?Sized>(
        topic_count: usize,
        terms_per_topic: usize,
        overlap: usize,
        rng: &mut R,
    ) -> Self {
        let stride = terms_per_topic - overlap;
        let topics = (0..topic_count)
            .map(|i| {
                let start = (i * stride) as TermId;
                let pairs: Vec<_> = (0..terms_per_topic as TermId)
                    .map(|j| (start + j, rng.random_range(0.5..1.0)))
                    .collect();
                TermVector::from_pairs(pairs)
                    .expect("positive weights")
                    .normalized()
            })
            .collect();
        Self { topics }
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn prototype(&self, topic: usize) -> &TermVector {
        &self.topics[topic]
    }

    /// Prototype of `topic` with every weight scaled by an independent factor
    /// in `[1 - noise, 1 + noise]`, renormalized.
    pub fn sample<R: Rng + ?Sized>(&self, topic: usize, noise: f64, rng: &mut R) -> TermVector {
        let proto = &self.topics[topic];
        if noise == 0.0 {
            return proto.clone();
        }
        let pairs: Vec<_> = proto
            .iter()
            .map(|(t, w)| (t, w * (1.0 + noise * rng.random_range(-1.0..=1.0))))
            .collect();
        TermVector::from_pairs(pairs)
            .expect("noise < 1 keeps weights positive")
            .normalized()
    }
}

/// Documents and topics for every peer slot, indexed by future peer id.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub model: TopicModel,
    pub peer_topics: Vec<Vec<usize>>,
    pub peer_docs: Vec<Vec<Document>>,
}

pub fn generate_corpus<R: Rng + ?Sized>(cfg: &ExperimentConfig, rng: &mut R) -> Corpus {
    let model = TopicModel::generate(cfg.topic_count, cfg.terms_per_topic, cfg.topic_overlap, rng);
    let mut next_doc = 0u64;
    let mut peer_topics = Vec::with_capacity(cfg.nodes);
    let mut peer_docs = Vec::with_capacity(cfg.nodes);
    for _ in 0..cfg.nodes {
        let mut topics = index::sample(rng, cfg.topic_count, cfg.topics_per_peer).into_vec();
        topics.sort_unstable();
        let count = rng.random_range(cfg.docs_per_peer_min..=cfg.docs_per_peer_max);
        let docs = (0..count)
            .map(|_| {
                let topic = topics[rng.random_range(0..topics.len())];
                let id = next_doc;
                next_doc += 1;
                Document::new(id, model.sample(topic, cfg.noise, rng))
                    .expect("topic samples are non-empty")
            })
            .collect();
        peer_topics.push(topics);
        peer_docs.push(docs);
    }
    Corpus {
        model,
        peer_topics,
        peer_docs,
    }
}

/// Builds query messages with globally increasing qids.
#[derive(Debug, Clone)]
pub struct QueryFactory {
    next_qid: u64,
    pub locality: f64,
    pub noise: f64,
}

impl QueryFactory {
    pub fn new(locality: f64, noise: f64) -> Self {
        Self {
            next_qid: 0,
            locality,
            noise,
        }
    }

    /// With probability `locality` the query samples one of `peer_topics`,
    /// otherwise any topic of the model.
    pub fn generate<R: Rng + ?Sized>(
        &mut self,
        source: PeerId,
        peer_topics: &[usize],
        model: &TopicModel,
        n_r: u32,
        rng: &mut R,
    ) -> QueryMessage {
        assert!(!peer_topics.is_empty(), "a peer needs at least one topic");
        let topic = if rng.random_bool(self.locality) {
            peer_topics[rng.random_range(0..peer_topics.len())]
        } else {
            rng.random_range(0..model.len())
        };
        let qid = self.next_qid;
        self.next_qid += 1;
        QueryMessage {
            qid,
            query: model.sample(topic, self.noise, rng),
            source,
            n_r,
        }
    }
}

const STREAM_CORPUS: u64 = 0;
const STREAM_JOIN: u64 = 1;
const STREAM_QUERY: u64 = 2;
const STREAM_ROUTING: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A single experiment advanced one query at a time.
///
/// Corpus generation, joins, query generation and routing each draw from
/// their own seeded stream.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: ExperimentConfig,
    corpus: Corpus,
    network: OverlayNetwork,
    traces: Vec<QueryTrace>,
    queries: QueryFactory,
    query_rng: ChaCha8Rng,
    routing_rng: ChaCha8Rng,
}

impl Simulation {
    /// Generates the corpus and runs the build phase: every peer is added
    /// and, except the first, joins the peers already present.
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let corpus = generate_corpus(&cfg, &mut stream(cfg.seed, STREAM_CORPUS));
        let mut join_rng = stream(cfg.seed, STREAM_JOIN);
        let mut network = OverlayNetwork::new();
        for docs in &corpus.peer_docs {
            let peer = network.add_peer(docs.clone());
            if peer.index() > 0 {
                network.join(peer, cfg.join_fanout, &mut join_rng)?;
            }
        }
        Ok(Self {
            queries: QueryFactory::new(cfg.query_locality, cfg.noise),
            query_rng: stream(cfg.seed, STREAM_QUERY),
            routing_rng: stream(cfg.seed, STREAM_ROUTING),
            traces: Vec::with_capacity(cfg.total_queries()),
            cfg,
            corpus,
            network,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn network(&self) -> &OverlayNetwork {
        &self.network
    }

    pub fn traces(&self) -> &[QueryTrace] {
        &self.traces
    }

    pub fn queries_issued(&self) -> usize {
        self.traces.len()
    }

    pub fn is_finished(&self) -> bool {
        self.traces.len() >= self.cfg.total_queries()
    }

    fn next_issuer(&mut self) -> PeerId {
        match self.cfg.issuer {
            IssuerOrder::RoundRobin => PeerId((self.traces.len() % self.cfg.nodes) as u32),
            IssuerOrder::Random => PeerId(self.query_rng.random_range(0..self.cfg.nodes) as u32),
        }
    }

    /// Issues the next query. Returns `None` once the query budget is spent.
    pub fn step(&mut self) -> Result<Option<&QueryTrace>> {
        if self.is_finished() {
            return Ok(None);
        }
        let source = self.next_issuer();
        let qm = self.queries.generate(
            source,
            &self.corpus.peer_topics[source.index()],
            &self.corpus.model,
            self.cfg.n_r,
            &mut self.query_rng,
        );
        let trace = exec_query(
            &mut self.network,
            &qm,
            &self.cfg.routing(),
            &mut self.routing_rng,
        )?;
        self.traces.push(trace);
        Ok(self.traces.last())
    }

    /// Issues queries until `count` have been issued in total (or the budget
    /// runs out).
    pub fn run_until(&mut self, count: usize) -> Result<()> {
        while self.traces.len() < count && self.step()?.is_some() {}
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        self.run_until(self.cfg.total_queries())
    }

    pub fn fsl_fraction(&self) -> f64 {
        let edges = self.network.edge_count();
        if edges == 0 {
            return 0.0;
        }
        self.network.count_label(LabelKind::Fsl) as f64 / edges as f64
    }

    pub fn report(&self) -> Result<MetricsReport> {
        MetricsReport::for_network(&self.network, &self.traces, &self.cfg.metrics())
    }

    pub fn finish(self) -> Result<ExperimentOutcome> {
        let report = self.report()?;
        Ok(ExperimentOutcome {
            config: self.cfg,
            network: self.network,
            traces: self.traces,
            report,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub network: OverlayNetwork,
    pub traces: Vec<QueryTrace>,
    pub report: MetricsReport,
}

/// Builds the network, issues `nodes * queries-per-node` queries and
/// measures the result.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let mut sim = Simulation::new(cfg.clone())?;
    sim.run_to_end()?;
    sim.finish()
}

/// Seed used for one size of a sweep.
pub fn sweep_seed(base: u64, nodes: usize) -> u64 {
    base ^ (nodes as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// The base config resized to `nodes` with its derived seed.
pub fn sweep_config(base: &ExperimentConfig, nodes: usize) -> ExperimentConfig {
    ExperimentConfig {
        nodes,
        seed: sweep_seed(base.seed, nodes),
        ..base.clone()
    }
}

/// Runs one experiment per size, in parallel; reports keep input order.
pub fn sweep(base: &ExperimentConfig, sizes: &[usize]) -> Result<Vec<MetricsReport>> {
    if sizes.is_empty() {
        return Err(crate::Error::InvalidConfig(
            "sweep needs at least one size".into(),
        ));
    }
    sizes
        .par_iter()
        .map(|&n| run_experiment(&sweep_config(base, n)).map(|o| o.report))
        .collect()
}
