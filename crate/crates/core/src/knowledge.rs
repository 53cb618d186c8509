//! Vector-space knowledge model.
//!
//! Queries, peer knowledge summaries and the temporary knowledge carried by
//! semantic links are all sparse [`TermVector`]s over integer term ids.
//! Relevance between any two of them is cosine similarity.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

pub type TermId = u32;
pub type DocId = u64;

/// Sparse term vector with strictly positive weights, sorted by term id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermVector {
    entries: Vec<(TermId, f64)>,
}

impl TermVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from `(term, weight)` pairs. Repeated terms are summed
    /// and zero weights dropped; negative or non-finite weights are rejected.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (TermId, f64)>,
    {
        let mut entries: Vec<(TermId, f64)> = Vec::new();
        for (term, weight) in pairs {
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::InvalidWeight { term, weight });
            }
            entries.push((term, weight));
        }
        entries.sort_by_key(|&(term, _)| term);
        let mut merged: Vec<(TermId, f64)> = Vec::with_capacity(entries.len());
        for (term, weight) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == term => *acc += weight,
                _ => merged.push((term, weight)),
            }
        }
        merged.retain(|&(_, w)| w > 0.0);
        Ok(Self { entries: merged })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Weight of `term`, zero when absent.
    pub fn get(&self, term: TermId) -> f64 {
        self.entries
            .binary_search_by_key(&term, |&(t, _)| t)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &TermVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// Unit-length copy; the empty vector stays empty.
    pub fn normalized(&self) -> TermVector {
        let norm = self.norm();
        if norm == 0.0 {
            return TermVector::new();
        }
        self.scaled(1.0 / norm)
    }

    /// Multiplies every weight by `factor`, which must be positive.
    pub fn scaled(&self, factor: f64) -> TermVector {
        debug_assert!(factor > 0.0);
        TermVector {
            entries: self.entries.iter().map(|&(t, w)| (t, w * factor)).collect(),
        }
    }

    /// Element-wise sum.
    pub fn plus(&self, other: &TermVector) -> TermVector {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => match x.0.cmp(&y.0) {
                    Ordering::Less => {
                        i += 1;
                        x
                    }
                    Ordering::Greater => {
                        j += 1;
                        y
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (x.0, x.1 + y.1)
                    }
                },
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        TermVector { entries: out }
    }
}

impl fmt::Display for TermVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (t, w)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "t{t}:{w:.4}")?;
        }
        f.write_str(")")
    }
}

/// A shared resource. The vector is stored normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: DocId,
    vector: TermVector,
}

impl Document {
    pub fn new(id: DocId, vector: TermVector) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::EmptyVector("document vector"));
        }
        Ok(Self {
            id,
            vector: vector.normalized(),
        })
    }

    pub fn vector(&self) -> &TermVector {
        &self.vector
    }
}

/// Compact description of what a peer shares: the normalized sum of its
/// document vectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeSummary {
    pub vector: TermVector,
    pub doc_count: usize,
}

/// Cosine similarity; zero if either side is empty.
pub fn cosine_relevance(a: &TermVector, b: &TermVector) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return 0.0;
    }
    // Non-negative weights keep the ratio in [0, 1] up to rounding.
    (a.dot(b) / denom).clamp(0.0, 1.0)
}

pub fn summarize_knowledge(docs: &[Document]) -> KnowledgeSummary {
    let sum = docs
        .iter()
        .fold(TermVector::new(), |acc, d| acc.plus(d.vector()));
    KnowledgeSummary {
        vector: sum.normalized(),
        doc_count: docs.len(),
    }
}

/// Temporary peer knowledge built from a single observed query.
pub fn tpk_from_query(q: &TermVector) -> Result<TermVector> {
    if q.is_empty() {
        return Err(Error::EmptyVector("query"));
    }
    Ok(q.normalized())
}

/// Folds one more observed query into temporary knowledge that already
/// aggregates `seen` queries: `normalize(seen * current + q)`.
pub fn tpk_update(current: &TermVector, q: &TermVector, seen: u32) -> Result<TermVector> {
    if current.is_empty() {
        return Err(Error::EmptyVector("temporary knowledge"));
    }
    if q.is_empty() {
        return Err(Error::EmptyVector("query"));
    }
    let seen = f64::from(seen.max(1));
    Ok(current.scaled(seen).plus(q).normalized())
}

/// Up to `n_r` ids of documents whose relevance to `q` reaches `threshold`,
/// best first, ties by ascending id.
pub fn resources_relevance(
    docs: &[Document],
    q: &TermVector,
    n_r: usize,
    threshold: f64,
) -> Vec<DocId> {
    let mut scored: Vec<(f64, DocId)> = docs
        .iter()
        .map(|d| (cosine_relevance(d.vector(), q), d.id))
        .filter(|&(rel, _)| rel >= threshold)
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.truncate(n_r);
    scored.into_iter().map(|(_, id)| id).collect()
}

/// Relevance of a link weight to a query. An absent weight (acquaintance
/// link) scores zero.
pub fn peer_relevance(weight: Option<&TermVector>, q: &TermVector) -> f64 {
    weight.map_or(0.0, |w| cosine_relevance(w, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(pairs: &[(TermId, f64)]) -> TermVector {
        TermVector::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn doc(id: DocId, pairs: &[(TermId, f64)]) -> Document {
        Document::new(id, tv(pairs)).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn from_pairs_merges_and_drops_zeros() {
        let v = tv(&[(3, 1.0), (1, 0.0), (3, 2.0), (0, 0.5)]);
        assert_eq!(v.iter().collect::<Vec<_>>(), vec![(0, 0.5), (3, 3.0)]);
        assert!(TermVector::from_pairs([(1, -1.0)]).is_err());
        assert!(TermVector::from_pairs([(1, f64::NAN)]).is_err());
    }

    #[test]
    fn cosine_examples() {
        assert!(close(
            cosine_relevance(&tv(&[(1, 1.0)]), &tv(&[(1, 1.0)])),
            1.0,
            1e-12
        ));
        assert_eq!(cosine_relevance(&tv(&[(1, 1.0)]), &tv(&[(2, 1.0)])), 0.0);
        let half = 1.0 / (2f64.sqrt() * 2f64.sqrt());
        let got = cosine_relevance(&tv(&[(1, 1.0), (2, 1.0)]), &tv(&[(2, 1.0), (3, 1.0)]));
        assert!(close(got, half, 1e-12));
        assert!(close(got, 0.5, 1e-12));
        assert_eq!(cosine_relevance(&TermVector::new(), &tv(&[(1, 1.0)])), 0.0);
    }

    #[test]
    fn summarize_examples() {
        let empty = summarize_knowledge(&[]);
        assert!(empty.vector.is_empty());
        assert_eq!(empty.doc_count, 0);

        let one = summarize_knowledge(&[doc(1, &[(1, 1.0)])]);
        assert_eq!(one.vector, tv(&[(1, 1.0)]));
        assert_eq!(one.doc_count, 1);

        let two = summarize_knowledge(&[doc(1, &[(1, 1.0)]), doc(2, &[(2, 1.0)])]);
        assert_eq!(two.doc_count, 2);
        assert!(close(two.vector.get(1), 0.5f64.sqrt(), 1e-12));
        assert!(close(two.vector.get(2), 0.5f64.sqrt(), 1e-12));
    }

    #[test]
    fn tpk_from_query_examples() {
        assert_eq!(tpk_from_query(&tv(&[(1, 2.0)])).unwrap(), tv(&[(1, 1.0)]));
        let v = tpk_from_query(&tv(&[(1, 3.0), (2, 4.0)])).unwrap();
        assert!(close(v.get(1), 0.6, 1e-12) && close(v.get(2), 0.8, 1e-12));
        let v = tpk_from_query(&tv(&[(1, 1.0), (2, 1.0), (3, 1.0)])).unwrap();
        for t in 1..=3 {
            assert!(close(v.get(t), 1.0 / 3f64.sqrt(), 1e-12));
        }
        assert!(matches!(
            tpk_from_query(&TermVector::new()),
            Err(Error::EmptyVector(_))
        ));
    }

    #[test]
    fn tpk_update_examples() {
        let same = tpk_update(&tv(&[(1, 1.0)]), &tv(&[(1, 1.0)]), 1).unwrap();
        assert!(close(same.get(1), 1.0, 1e-12));

        let mixed = tpk_update(&tv(&[(1, 1.0)]), &tv(&[(2, 1.0)]), 1).unwrap();
        assert!(close(mixed.get(1), 0.5f64.sqrt(), 1e-12));
        assert!(close(mixed.get(2), 0.5f64.sqrt(), 1e-12));

        // 2 * (s, s) + (1, 0) with s = 1/sqrt(2), then normalized by hand.
        let s = 0.5f64.sqrt();
        let current = tv(&[(1, s), (2, s)]);
        let (x, y) = (2.0 * s + 1.0, 2.0 * s);
        let n = (x * x + y * y).sqrt();
        let got = tpk_update(&current, &tv(&[(1, 1.0)]), 2).unwrap();
        assert!(close(got.get(1), x / n, 1e-12));
        assert!(close(got.get(2), y / n, 1e-12));
        assert!(
            close(x, 1.0 + std::f64::consts::SQRT_2, 1e-12)
                && close(y, std::f64::consts::SQRT_2, 1e-12)
        );

        assert!(tpk_update(&TermVector::new(), &tv(&[(1, 1.0)]), 1).is_err());
        assert!(tpk_update(&tv(&[(1, 1.0)]), &TermVector::new(), 1).is_err());
    }

    #[test]
    fn resources_relevance_examples() {
        let q = tv(&[(1, 1.0)]);
        assert!(resources_relevance(&[], &q, 5, 0.5).is_empty());
        assert_eq!(
            resources_relevance(&[doc(1, &[(1, 1.0)])], &q, 5, 0.5),
            vec![1]
        );
        let docs = [
            doc(1, &[(1, 1.0)]),
            doc(2, &[(1, 1.0)]),
            doc(3, &[(2, 1.0)]),
        ];
        assert_eq!(resources_relevance(&docs, &q, 1, 0.5), vec![1]);
        assert_eq!(resources_relevance(&docs, &q, 5, 0.5), vec![1, 2]);
    }

    #[test]
    fn resources_relevance_orders_by_score_then_id() {
        let docs = [
            doc(9, &[(1, 1.0), (2, 1.0)]),
            doc(4, &[(1, 1.0)]),
            doc(2, &[(1, 1.0), (2, 1.0)]),
        ];
        let q = tv(&[(1, 1.0)]);
        assert_eq!(resources_relevance(&docs, &q, 10, 0.5), vec![4, 2, 9]);
    }

    #[test]
    fn peer_relevance_examples() {
        let q = tv(&[(1, 1.0)]);
        assert_eq!(peer_relevance(None, &q), 0.0);
        assert!(close(
            peer_relevance(Some(&tv(&[(1, 1.0)])), &q),
            1.0,
            1e-12
        ));
        let s = 0.5f64.sqrt();
        let got = peer_relevance(Some(&tv(&[(1, s), (2, s)])), &q);
        assert!(close(got, std::f64::consts::FRAC_1_SQRT_2, 1e-12));
    }

    #[test]
    fn document_rejects_empty_vector() {
        assert!(Document::new(1, TermVector::new()).is_err());
        let d = doc(1, &[(1, 3.0), (2, 4.0)]);
        assert!(close(d.vector().norm(), 1.0, 1e-12));
    }
}
