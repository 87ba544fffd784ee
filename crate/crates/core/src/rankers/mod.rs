//! Ranking model handles: built-in scorers and external processes behind a
//! common trait, plus the canonical ranking type.

mod bm25;
mod external;
mod linear;

pub use bm25::Bm25Ranker;
pub use external::{HttpRanker, SubprocessRanker};
pub use linear::LinearRanker;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{RankerError, Result};
use crate::instance::MaskedInstance;

/// A black-box ranking model: given masked token lists, produce one score
/// per document. Implementations must be deterministic.
pub trait Ranker: Send + Sync {
    fn score(&self, masked: &MaskedInstance) -> Result<Vec<f64>, RankerError>;

    /// Whether `score` may be called from several threads at once.
    /// External handles default to serialized access.
    fn concurrency_safe(&self) -> bool {
        false
    }

    fn name(&self) -> &str;
}

impl<R: Ranker + ?Sized> Ranker for &R {
    fn score(&self, masked: &MaskedInstance) -> Result<Vec<f64>, RankerError> {
        (**self).score(masked)
    }

    fn concurrency_safe(&self) -> bool {
        (**self).concurrency_safe()
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

/// One document slot in a ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDoc {
    pub doc_id: String,
    pub score: f64,
}

/// Documents ordered by descending score; ties broken by ascending doc id
/// so rankings are total orders. Positions are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    entries: Vec<RankedDoc>,
    rank_of: HashMap<String, usize>,
}

impl Ranking {
    pub fn from_scores(doc_ids: Vec<String>, scores: Vec<f64>) -> Self {
        assert_eq!(doc_ids.len(), scores.len(), "one score per document");
        let mut entries: Vec<RankedDoc> = doc_ids
            .into_iter()
            .zip(scores)
            .map(|(doc_id, score)| RankedDoc { doc_id, score })
            .collect();
        entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id)));
        let rank_of = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.doc_id.clone(), i + 1))
            .collect();
        Ranking { entries, rank_of }
    }

    /// Build from an already-ordered list of ids (ranks follow list order).
    pub fn from_ordered_ids(doc_ids: Vec<String>) -> Self {
        let n = doc_ids.len();
        let scores = (0..n).map(|i| (n - i) as f64).collect();
        Ranking::from_scores(doc_ids, scores)
    }

    /// 1-based rank of a document.
    pub fn rank_of(&self, doc_id: &str) -> Option<usize> {
        self.rank_of.get(doc_id).copied()
    }

    pub fn entries(&self) -> &[RankedDoc] {
        &self.entries
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.doc_id.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Score a masked instance and order the documents.
pub fn rank(ranker: &dyn Ranker, masked: &MaskedInstance) -> Result<Ranking> {
    let scores = ranker.score(masked)?;
    if scores.len() != masked.docs.len() {
        return Err(RankerError::LengthMismatch {
            expected: masked.docs.len(),
            got: scores.len(),
        }
        .into());
    }
    let ids = masked.docs.iter().map(|d| d.id.clone()).collect();
    Ok(Ranking::from_scores(ids, scores))
}

/// Wrapper that counts how often the underlying model is invoked; used to
/// assert per-query call budgets.
pub struct CountingRanker<R> {
    inner: R,
    calls: AtomicU64,
}

impl<R: Ranker> CountingRanker<R> {
    pub fn new(inner: R) -> Self {
        CountingRanker {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<R: Ranker> Ranker for CountingRanker<R> {
    fn score(&self, masked: &MaskedInstance) -> Result<Vec<f64>, RankerError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.score(masked)
    }

    fn concurrency_safe(&self) -> bool {
        self.inner.concurrency_safe()
    }

    fn name(&self) -> &str {
        self.inner.name()
    }
}
