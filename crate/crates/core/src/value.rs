//! Rank-aware value functions: the gain x discount family (CG, DCG, NDCG
//! and friends), average precision, reciprocal rank, precision@k, and
//! rank correlation against a reference ordering. Plus relevance labels
//! and how they are inferred.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::kendall_tau;
use crate::instance::{apply_coalition, Coalition, Instance};
use crate::rankers::{Bm25Ranker, Ranker, Ranking};

/// Gain applied to a relevance label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainFn {
    /// g(r) = r
    Linear,
    /// g(r) = 2^r - 1
    Exponential,
}

impl GainFn {
    pub fn apply(self, rel: f64) -> f64 {
        match self {
            GainFn::Linear => rel,
            GainFn::Exponential => rel.exp2() - 1.0,
        }
    }
}

/// Discount applied to a 1-based rank position. All variants are
/// non-negative and non-increasing in the position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscountFn {
    /// h(j) = 1
    Flat,
    /// h(j) = 1 / log2(j + 1)
    Logarithmic,
    /// h(j) = 1 / j
    Reciprocal,
}

impl DiscountFn {
    pub fn apply(self, position: usize) -> f64 {
        debug_assert!(position >= 1);
        match self {
            DiscountFn::Flat => 1.0,
            DiscountFn::Logarithmic => 1.0 / ((position + 1) as f64).log2(),
            DiscountFn::Reciprocal => 1.0 / position as f64,
        }
    }
}

/// Relevance labels for the documents of one instance, frozen before any
/// coalition is evaluated so the value of a masked ranking is always
/// measured against the same ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceAssignment {
    rels: HashMap<String, f64>,
    pub provenance: Provenance,
}

/// Where relevance labels came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Qrels,
    ModelScores,
    Bm25,
}

impl RelevanceAssignment {
    pub fn new(rels: HashMap<String, f64>, provenance: Provenance) -> Result<Self> {
        for (id, &rel) in &rels {
            if !(rel >= 0.0) {
                return Err(Error::NegativeRelevance {
                    id: id.clone(),
                    rel,
                });
            }
        }
        Ok(RelevanceAssignment { rels, provenance })
    }

    pub fn rel(&self, doc_id: &str) -> Result<f64> {
        self.rels
            .get(doc_id)
            .copied()
            .ok_or_else(|| Error::MissingRelevance(doc_id.to_string()))
    }

    /// Labels in the order the ranking lists its documents.
    pub fn in_rank_order(&self, ranking: &Ranking) -> Result<Vec<f64>> {
        ranking
            .entries()
            .iter()
            .map(|e| self.rel(&e.doc_id))
            .collect()
    }
}

/// How relevance labels are obtained for an instance.
#[derive(Debug, Clone)]
pub enum RelevanceSource {
    /// Explicit judgments; documents missing from the map get label 0
    /// (with a warning).
    Qrels(HashMap<String, f64>),
    /// Scores of the explained model on the full instance, shifted so the
    /// minimum is 0.
    ModelScores,
    /// BM25 scores (default parameters) on the full instance, shifted so
    /// the minimum is 0.
    Bm25,
}

/// Produce the frozen relevance labels for `instance`. `ranker` is the
/// model being explained; it is only consulted for `ModelScores`.
pub fn infer_relevance(
    source: &RelevanceSource,
    instance: &Instance,
    ranker: &dyn Ranker,
) -> Result<RelevanceAssignment> {
    match source {
        RelevanceSource::Qrels(map) => {
            // absent judgments mean "not relevant", the usual sparse-qrels
            // convention
            let mut rels = HashMap::new();
            for doc in &instance.docs {
                match map.get(&doc.id) {
                    Some(&rel) => {
                        rels.insert(doc.id.clone(), rel);
                    }
                    None => {
                        log::debug!("no judgment for document {:?}; assuming 0", doc.id);
                        rels.insert(doc.id.clone(), 0.0);
                    }
                }
            }
            RelevanceAssignment::new(rels, Provenance::Qrels)
        }
        RelevanceSource::ModelScores => {
            scores_as_relevance(instance, ranker, Provenance::ModelScores)
        }
        RelevanceSource::Bm25 => {
            scores_as_relevance(instance, &Bm25Ranker::default(), Provenance::Bm25)
        }
    }
}

fn scores_as_relevance(
    instance: &Instance,
    ranker: &dyn Ranker,
    provenance: Provenance,
) -> Result<RelevanceAssignment> {
    let full = apply_coalition(instance, &Coalition::full(instance.m()))?;
    let scores = ranker.score(&full)?;
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let rels = instance
        .docs
        .iter()
        .zip(&scores)
        .map(|(d, s)| (d.id.clone(), s - min))
        .collect();
    RelevanceAssignment::new(rels, provenance)
}

/// Value of a ranking under a gain x discount metric:
/// `sum_j g(rel of doc at rank j) * h(j)`, optionally truncated at
/// `cutoff` positions.
pub fn graded_value(
    ranking: &Ranking,
    rels: &RelevanceAssignment,
    gain: GainFn,
    discount: DiscountFn,
    cutoff: Option<usize>,
) -> Result<f64> {
    let labels = rels.in_rank_order(ranking)?;
    Ok(graded_value_of_labels(&labels, gain, discount, cutoff))
}

/// Same, over labels already listed in rank order (rank 1 first).
pub fn graded_value_of_labels(
    labels: &[f64],
    gain: GainFn,
    discount: DiscountFn,
    cutoff: Option<usize>,
) -> f64 {
    let n = cutoff.map_or(labels.len(), |k| k.min(labels.len()));
    labels[..n]
        .iter()
        .enumerate()
        .map(|(i, &rel)| gain.apply(rel) * discount.apply(i + 1))
        .sum()
}

/// Normalized DCG: linear gain, logarithmic discount, divided by the value
/// of the ideal ordering of the same labels. Defined as 0 when the ideal
/// value is 0 (no relevant documents).
pub fn ndcg(ranking: &Ranking, rels: &RelevanceAssignment, cutoff: Option<usize>) -> Result<f64> {
    let labels = rels.in_rank_order(ranking)?;
    Ok(ndcg_of_labels(&labels, cutoff))
}

pub fn ndcg_of_labels(labels: &[f64], cutoff: Option<usize>) -> f64 {
    let dcg = graded_value_of_labels(labels, GainFn::Linear, DiscountFn::Logarithmic, cutoff);
    let mut ideal = labels.to_vec();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg = graded_value_of_labels(&ideal, GainFn::Linear, DiscountFn::Logarithmic, cutoff);
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

/// Average precision with binary relevance `rel > threshold`. 0 when no
/// document is relevant.
pub fn average_precision(
    ranking: &Ranking,
    rels: &RelevanceAssignment,
    threshold: f64,
) -> Result<f64> {
    let labels = rels.in_rank_order(ranking)?;
    Ok(average_precision_of_labels(&labels, threshold))
}

pub fn average_precision_of_labels(labels: &[f64], threshold: f64) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &rel) in labels.iter().enumerate() {
        if rel > threshold {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

/// 1 / rank of the first relevant document; 0 when none is relevant.
pub fn reciprocal_rank(
    ranking: &Ranking,
    rels: &RelevanceAssignment,
    threshold: f64,
) -> Result<f64> {
    let labels = rels.in_rank_order(ranking)?;
    Ok(reciprocal_rank_of_labels(&labels, threshold))
}

pub fn reciprocal_rank_of_labels(labels: &[f64], threshold: f64) -> f64 {
    labels
        .iter()
        .position(|&rel| rel > threshold)
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Fraction of the first `k` positions holding a relevant document.
pub fn precision_at_k(
    ranking: &Ranking,
    rels: &RelevanceAssignment,
    k: usize,
    threshold: f64,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidConfig("precision@k needs k >= 1".into()));
    }
    let labels = rels.in_rank_order(ranking)?;
    Ok(precision_at_k_of_labels(&labels, k, threshold))
}

pub fn precision_at_k_of_labels(labels: &[f64], k: usize, threshold: f64) -> f64 {
    let hits = labels
        .iter()
        .take(k)
        .filter(|&&rel| rel > threshold)
        .count();
    hits as f64 / k as f64
}

/// Kendall's tau of `ranking` against a fixed reference ordering.
pub fn tau_reference_value(ranking: &Ranking, reference: &Ranking) -> Result<f64> {
    kendall_tau(ranking, reference)
}

/// A complete, serializable choice of value function.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueFn {
    Graded {
        gain: GainFn,
        discount: DiscountFn,
        normalize: bool,
        cutoff: Option<usize>,
    },
    AveragePrecision {
        threshold: f64,
    },
    ReciprocalRank {
        threshold: f64,
    },
    PrecisionAtK {
        k: usize,
        threshold: f64,
    },
    /// Tau against a frozen reference ranking (used by ordering-similarity
    /// games).
    TauReference {
        reference: Ranking,
    },
}

impl ValueFn {
    /// Cumulated gain: linear gain, no discount.
    pub fn cg() -> Self {
        ValueFn::Graded {
            gain: GainFn::Linear,
            discount: DiscountFn::Flat,
            normalize: false,
            cutoff: None,
        }
    }

    /// Discounted cumulated gain.
    pub fn dcg() -> Self {
        ValueFn::Graded {
            gain: GainFn::Linear,
            discount: DiscountFn::Logarithmic,
            normalize: false,
            cutoff: None,
        }
    }

    /// Normalized DCG.
    pub fn ndcg() -> Self {
        ValueFn::Graded {
            gain: GainFn::Linear,
            discount: DiscountFn::Logarithmic,
            normalize: true,
            cutoff: None,
        }
    }

    pub fn map() -> Self {
        ValueFn::AveragePrecision { threshold: 0.0 }
    }

    /// Parse a CLI-style name: `cg`, `dcg`, `ndcg`, `map`, `rr`, `p@K`,
    /// `tau`, with an optional `@K` cutoff on the graded family
    /// (e.g. `ndcg@10`). `tau` needs the model's full ranking.
    pub fn parse(name: &str, reference: Option<&Ranking>) -> Result<Self> {
        let (base, cutoff) = match name.split_once('@') {
            Some((b, k)) => {
                let k: usize = k.parse().map_err(|_| {
                    Error::InvalidConfig(format!("bad cutoff in value function {name:?}"))
                })?;
                if k == 0 {
                    return Err(Error::InvalidConfig("cutoff must be >= 1".into()));
                }
                (b, Some(k))
            }
            None => (name, None),
        };
        let with_cutoff = |mut v: ValueFn| {
            if let ValueFn::Graded { cutoff: c, .. } = &mut v {
                *c = cutoff;
            }
            v
        };
        match base {
            "cg" => Ok(with_cutoff(ValueFn::cg())),
            "dcg" => Ok(with_cutoff(ValueFn::dcg())),
            "ndcg" => Ok(with_cutoff(ValueFn::ndcg())),
            "map" => Ok(ValueFn::map()),
            "rr" => Ok(ValueFn::ReciprocalRank { threshold: 0.0 }),
            "p" => match cutoff {
                Some(k) => Ok(ValueFn::PrecisionAtK { k, threshold: 0.0 }),
                None => Err(Error::InvalidConfig(
                    "precision needs a cutoff, e.g. p@5".into(),
                )),
            },
            "tau" => match reference {
                Some(r) => Ok(ValueFn::TauReference {
                    reference: r.clone(),
                }),
                None => Err(Error::InvalidConfig(
                    "tau value function needs a reference ranking".into(),
                )),
            },
            other => Err(Error::InvalidConfig(format!(
                "unknown value function {other:?}"
            ))),
        }
    }

    /// Canonical name used to tag attributions and reports.
    pub fn name(&self) -> String {
        match self {
            ValueFn::Graded {
                gain,
                discount,
                normalize,
                cutoff,
            } => {
                let base = match (gain, discount, normalize) {
                    (GainFn::Linear, DiscountFn::Flat, false) => "cg".to_string(),
                    (GainFn::Linear, DiscountFn::Logarithmic, false) => "dcg".to_string(),
                    (GainFn::Linear, DiscountFn::Logarithmic, true) => "ndcg".to_string(),
                    (g, d, norm) => format!(
                        "graded({:?},{:?}{})",
                        g,
                        d,
                        if *norm { ",normalized" } else { "" }
                    )
                    .to_lowercase(),
                };
                match cutoff {
                    Some(k) => format!("{base}@{k}"),
                    None => base,
                }
            }
            ValueFn::AveragePrecision { .. } => "map".into(),
            ValueFn::ReciprocalRank { .. } => "rr".into(),
            ValueFn::PrecisionAtK { k, .. } => format!("p@{k}"),
            ValueFn::TauReference { .. } => "tau".into(),
        }
    }

    /// Evaluate the ranking produced by some coalition against the frozen
    /// relevance labels.
    pub fn evaluate(&self, ranking: &Ranking, rels: &RelevanceAssignment) -> Result<f64> {
        match self {
            ValueFn::Graded {
                gain,
                discount,
                normalize,
                cutoff,
            } => {
                if *normalize {
                    // normalization currently fixed to the DCG shape
                    let labels = rels.in_rank_order(ranking)?;
                    let v = graded_value_of_labels(&labels, *gain, *discount, *cutoff);
                    let mut ideal = labels;
                    ideal.sort_by(|a, b| b.total_cmp(a));
                    let best = graded_value_of_labels(&ideal, *gain, *discount, *cutoff);
                    Ok(if best == 0.0 { 0.0 } else { v / best })
                } else {
                    graded_value(ranking, rels, *gain, *discount, *cutoff)
                }
            }
            ValueFn::AveragePrecision { threshold } => {
                average_precision(ranking, rels, *threshold)
            }
            ValueFn::ReciprocalRank { threshold } => reciprocal_rank(ranking, rels, *threshold),
            ValueFn::PrecisionAtK { k, threshold } => {
                precision_at_k(ranking, rels, *k, *threshold)
            }
            ValueFn::TauReference { reference } => tau_reference_value(ranking, reference),
        }
    }

    /// Evaluate from labels listed in rank order, for value functions that
    /// only depend on the label sequence (everything but `TauReference`).
    pub fn evaluate_labels(&self, labels: &[f64]) -> Option<f64> {
        match self {
            ValueFn::Graded {
                gain,
                discount,
                normalize,
                cutoff,
            } => {
                let v = graded_value_of_labels(labels, *gain, *discount, *cutoff);
                if *normalize {
                    let mut ideal = labels.to_vec();
                    ideal.sort_by(|a, b| b.total_cmp(a));
                    let best = graded_value_of_labels(&ideal, *gain, *discount, *cutoff);
                    Some(if best == 0.0 { 0.0 } else { v / best })
                } else {
                    Some(v)
                }
            }
            ValueFn::AveragePrecision { threshold } => {
                Some(average_precision_of_labels(labels, *threshold))
            }
            ValueFn::ReciprocalRank { threshold } => {
                Some(reciprocal_rank_of_labels(labels, *threshold))
            }
            ValueFn::PrecisionAtK { k, threshold } => {
                Some(precision_at_k_of_labels(labels, *k, *threshold))
            }
            ValueFn::TauReference { .. } => None,
        }
    }
}
