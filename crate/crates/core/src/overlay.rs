//! The overlay graph: peers, their document stores, and directed labelled
//! links.
//!
//! Link labels only ever move upwards in strength (AL < TSL < FSL). Every
//! mutation returns a [`LinkTransition`] so callers can log what happened.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::knowledge::{
    summarize_knowledge, tpk_from_query, tpk_update, Document, KnowledgeSummary, TermVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeerId(pub u32);

impl PeerId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PeerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for PeerId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(PeerId)
    }
}

/// What the source of a link knows about its target.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkLabel {
    /// Acquaintance: nothing is known.
    Acquaintance,
    /// Temporary semantic link: knowledge inferred from `seen` observed queries.
    Temporary { weight: TermVector, seen: u32 },
    /// Full semantic link: a snapshot of the target's knowledge summary.
    Full { weight: TermVector },
}

impl LinkLabel {
    pub fn kind(&self) -> LabelKind {
        match self {
            LinkLabel::Acquaintance => LabelKind::Al,
            LinkLabel::Temporary { .. } => LabelKind::Tsl,
            LinkLabel::Full { .. } => LabelKind::Fsl,
        }
    }

    pub fn weight(&self) -> Option<&TermVector> {
        match self {
            LinkLabel::Acquaintance => None,
            LinkLabel::Temporary { weight, .. } | LinkLabel::Full { weight } => Some(weight),
        }
    }

    pub fn is_semantic(&self) -> bool {
        !matches!(self, LinkLabel::Acquaintance)
    }
}

/// Label tag, ordered by strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelKind {
    Al,
    Tsl,
    Fsl,
}

impl LabelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelKind::Al => "AL",
            LabelKind::Tsl => "TSL",
            LabelKind::Fsl => "FSL",
        }
    }
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "AL" => Ok(LabelKind::Al),
            "TSL" => Ok(LabelKind::Tsl),
            "FSL" => Ok(LabelKind::Fsl),
            other => Err(format!("unknown link label `{other}`")),
        }
    }
}

/// Before/after state of one ordered link. `before == None` means the link
/// did not exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkTransition {
    pub source: PeerId,
    pub target: PeerId,
    pub before: Option<LabelKind>,
    pub after: LabelKind,
}

impl LinkTransition {
    pub fn is_change(&self) -> bool {
        self.before != Some(self.after)
    }

    /// `none->TSL`, `AL->FSL`, ...
    pub fn describe(&self) -> String {
        let before = self.before.map_or("none", LabelKind::as_str);
        format!("{before}->{}", self.after)
    }
}

#[derive(Debug, Clone)]
struct Peer {
    documents: Vec<Document>,
    knowledge: KnowledgeSummary,
    links: BTreeMap<PeerId, LinkLabel>,
}

#[derive(Debug, Clone, Default)]
pub struct OverlayNetwork {
    peers: Vec<Peer>,
    edge_count: usize,
}

impl OverlayNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn peer_count(&self) -> usize {
        self.peers.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, p: PeerId) -> bool {
        p.index() < self.peers.len()
    }

    pub fn peer_ids(&self) -> impl Iterator<Item = PeerId> + '_ {
        (0..self.peers.len() as u32).map(PeerId)
    }

    fn peer(&self, p: PeerId) -> Result<&Peer> {
        self.peers.get(p.index()).ok_or(Error::UnknownPeer(p))
    }

    fn peer_mut(&mut self, p: PeerId) -> Result<&mut Peer> {
        self.peers.get_mut(p.index()).ok_or(Error::UnknownPeer(p))
    }

    pub fn documents(&self, p: PeerId) -> Result<&[Document]> {
        Ok(&self.peer(p)?.documents)
    }

    pub fn knowledge(&self, p: PeerId) -> Result<&KnowledgeSummary> {
        Ok(&self.peer(p)?.knowledge)
    }

    pub fn label(&self, source: PeerId, target: PeerId) -> Option<&LinkLabel> {
        self.peers.get(source.index())?.links.get(&target)
    }

    pub fn has_link(&self, source: PeerId, target: PeerId) -> bool {
        self.label(source, target).is_some()
    }

    pub fn out_degree(&self, p: PeerId) -> usize {
        self.peers.get(p.index()).map_or(0, |peer| peer.links.len())
    }

    /// Out-links of `p` in ascending target order.
    pub fn out_links(&self, p: PeerId) -> impl Iterator<Item = (PeerId, &LinkLabel)> + '_ {
        self.peers
            .get(p.index())
            .into_iter()
            .flat_map(|peer| peer.links.iter().map(|(t, l)| (*t, l)))
    }

    pub fn neighborhood(&self, p: PeerId) -> Result<Vec<(PeerId, &LinkLabel)>> {
        self.peer(p)?;
        Ok(self.out_links(p).collect())
    }

    /// All links as `(source, target, label)`, ordered by source then target.
    pub fn links(&self) -> impl Iterator<Item = (PeerId, PeerId, &LinkLabel)> + '_ {
        self.peer_ids()
            .flat_map(move |s| self.out_links(s).map(move |(t, l)| (s, t, l)))
    }

    pub fn count_label(&self, kind: LabelKind) -> usize {
        self.links().filter(|(_, _, l)| l.kind() == kind).count()
    }

    pub fn add_peer(&mut self, documents: Vec<Document>) -> PeerId {
        let id = PeerId(self.peers.len() as u32);
        let knowledge = summarize_knowledge(&documents);
        self.peers.push(Peer {
            documents,
            knowledge,
            links: BTreeMap::new(),
        });
        id
    }

    /// Adds documents to an existing peer and recomputes its knowledge
    /// summary. Existing FSL snapshots pointing at the peer are not touched.
    pub fn add_documents(
        &mut self,
        p: PeerId,
        documents: impl IntoIterator<Item = Document>,
    ) -> Result<()> {
        let peer = self.peer_mut(p)?;
        peer.documents.extend(documents);
        peer.knowledge = summarize_knowledge(&peer.documents);
        Ok(())
    }

    /// Links `s` to up to `n` distinct peers chosen uniformly at random and
    /// labels the new links AL. Returns the chosen targets in ascending order.
    pub fn join<R: Rng + ?Sized>(
        &mut self,
        s: PeerId,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<PeerId>> {
        self.peer(s)?;
        let others: Vec<PeerId> = self.peer_ids().filter(|&p| p != s).collect();
        if others.is_empty() {
            return Err(Error::NothingToJoin(s));
        }
        let amount = n.min(others.len());
        let mut targets: Vec<PeerId> = index::sample(rng, others.len(), amount)
            .into_iter()
            .map(|i| others[i])
            .collect();
        targets.sort_unstable();
        let links = &mut self.peers[s.index()].links;
        let mut added = 0;
        for &t in &targets {
            // An existing label is never downgraded to AL.
            if let std::collections::btree_map::Entry::Vacant(e) = links.entry(t) {
                e.insert(LinkLabel::Acquaintance);
                added += 1;
            }
        }
        self.edge_count += added;
        Ok(targets)
    }

    /// Records on `cur` what the query forwarded by `prev` reveals about
    /// `prev`. Mutates the `cur -> prev` link only.
    pub fn update_link(
        &mut self,
        cur: PeerId,
        prev: PeerId,
        q: &TermVector,
    ) -> Result<LinkTransition> {
        if cur == prev {
            return Err(Error::SelfLink(cur));
        }
        self.peer(prev)?;
        let peer = self.peer_mut(cur)?;
        let before = peer.links.get(&prev).map(LinkLabel::kind);
        let next = match peer.links.get(&prev) {
            None | Some(LinkLabel::Acquaintance) => Some(LinkLabel::Temporary {
                weight: tpk_from_query(q)?,
                seen: 1,
            }),
            Some(LinkLabel::Temporary { weight, seen }) => Some(LinkLabel::Temporary {
                weight: tpk_update(weight, q, *seen)?,
                seen: seen.saturating_add(1),
            }),
            Some(LinkLabel::Full { .. }) => None,
        };
        let after = match next {
            Some(label) => {
                let kind = label.kind();
                peer.links.insert(prev, label);
                kind
            }
            None => LabelKind::Fsl,
        };
        if before.is_none() {
            self.edge_count += 1;
        }
        Ok(LinkTransition {
            source: cur,
            target: prev,
            before,
            after,
        })
    }

    /// Creates or overwrites `s -> cur` as an FSL carrying a snapshot of
    /// `cur`'s current knowledge.
    pub fn promote_to_fsl(&mut self, s: PeerId, cur: PeerId) -> Result<LinkTransition> {
        if s == cur {
            return Err(Error::SelfLink(s));
        }
        let weight = self.peer(cur)?.knowledge.vector.clone();
        let peer = self.peer_mut(s)?;
        let before = peer
            .links
            .insert(cur, LinkLabel::Full { weight })
            .map(|l| l.kind());
        if before.is_none() {
            self.edge_count += 1;
        }
        Ok(LinkTransition {
            source: s,
            target: cur,
            before,
            after: LabelKind::Fsl,
        })
    }

    /// Checks the structural invariants: no self-links, endpoints exist,
    /// cached edge count and knowledge summaries are consistent.
    pub fn check_well_formed(&self) -> std::result::Result<(), String> {
        let mut edges = 0;
        for (i, peer) in self.peers.iter().enumerate() {
            let s = PeerId(i as u32);
            for (t, label) in &peer.links {
                if *t == s {
                    return Err(format!("self-link on {s}"));
                }
                if !self.contains(*t) {
                    return Err(format!("link {s}->{t} points at a missing peer"));
                }
                match label {
                    LinkLabel::Acquaintance => {}
                    LinkLabel::Temporary { weight, seen } => {
                        if weight.is_empty() || *seen == 0 {
                            return Err(format!("malformed TSL {s}->{t}"));
                        }
                        if (weight.norm() - 1.0).abs() > 1e-9 {
                            return Err(format!("TSL {s}->{t} weight is not normalized"));
                        }
                    }
                    LinkLabel::Full { .. } => {}
                }
                edges += 1;
            }
            if peer.knowledge != summarize_knowledge(&peer.documents) {
                return Err(format!("knowledge of {s} is stale"));
            }
        }
        if edges != self.edge_count {
            return Err(format!(
                "edge count {} but {} links stored",
                self.edge_count, edges
            ));
        }
        Ok(())
    }

    /// One `source target label` line per link.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (s, t, label) in self.links() {
            writeln!(out, "{s} {t} {}", label.kind())?;
        }
        Ok(())
    }
}

/// One parsed line of an edge-list snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRecord {
    pub source: PeerId,
    pub target: PeerId,
    pub label: LabelKind,
}

/// Reads an edge list written by [`OverlayNetwork::write_edge_list`]. Blank
/// lines and `#` comments are skipped.
pub fn read_edge_list<R: BufRead>(input: R, origin: &str) -> Result<Vec<EdgeRecord>> {
    let mut records = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Parse {
            path: origin.to_string(),
            line: n + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [source, target, label] = fields[..] else {
            return Err(bad(format!("expected `source target label`, got `{line}`")));
        };
        records.push(EdgeRecord {
            source: source
                .parse()
                .map_err(|e| bad(format!("bad source: {e}")))?,
            target: target
                .parse()
                .map_err(|e| bad(format!("bad target: {e}")))?,
            label: label.parse().map_err(bad)?,
        });
    }
    Ok(records)
}
