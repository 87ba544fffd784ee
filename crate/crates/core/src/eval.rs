//! Explanation quality: rank correlation between the ordering an
//! attribution vector reconstructs and the ordering the model produced.

use serde::{Deserialize, Serialize};

use crate::attribution::AttributionVector;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rankers::{rank, Ranker, Ranking};

/// Kendall's tau between two total orders over the same documents:
/// `2 / (n(n-1)) * sum_{i<j} sgn(r_a[i]-r_a[j]) * sgn(r_b[i]-r_b[j])`.
pub fn kendall_tau(a: &Ranking, b: &Ranking) -> Result<f64> {
    let (ra, rb) = paired_ranks(a, b)?;
    let n = ra.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += sign(ra[i] - ra[j]) * sign(rb[i] - rb[j]);
        }
    }
    Ok(2.0 * sum / (n * (n - 1)) as f64)
}

/// Weighted Kendall's tau. Pair weights come from the *first* ranking:
/// `w_ij = |r_a[i] - r_a[j]|`, so disagreements between documents the
/// reference ranking separates widely cost more. Asymmetric in (a, b).
pub fn weighted_kendall_tau(a: &Ranking, b: &Ranking) -> Result<f64> {
    let (ra, rb) = paired_ranks(a, b)?;
    let n = ra.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let w = (ra[i] - ra[j]).abs();
            num += w * sign(ra[i] - ra[j]) * sign(rb[i] - rb[j]);
            den += w;
        }
    }
    Ok(num / den)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Rank vectors for the common document set, in a deterministic (sorted
/// doc id) order. Errors when the two rankings cover different documents.
fn paired_ranks(a: &Ranking, b: &Ranking) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(if a.len() != b.len() {
            Error::DocSetMismatch
        } else {
            Error::InvalidConfig("rank correlation needs at least two documents".into())
        });
    }
    let mut ids: Vec<&str> = a.ids();
    ids.sort_unstable();
    let mut ra = Vec::with_capacity(ids.len());
    let mut rb = Vec::with_capacity(ids.len());
    for id in ids {
        let (Some(pa), Some(pb)) = (a.rank_of(id), b.rank_of(id)) else {
            return Err(Error::DocSetMismatch);
        };
        ra.push(pa as f64);
        rb.push(pb as f64);
    }
    Ok((ra, rb))
}

/// Order the documents by the attribution alone: keep the `top_t` features
/// with the largest |phi| (ties broken by lower feature index), score each
/// document as the sum of kept phi values whose token it contains, sort
/// descending with ties by ascending doc id.
pub fn reconstruct_ordering(
    phi: &AttributionVector,
    instance: &Instance,
    top_t: usize,
) -> Result<Ranking> {
    phi.expect_len(instance.m())?;
    let kept: Vec<usize> = phi
        .ranked_by_magnitude()
        .into_iter()
        .take(top_t)
        .collect();
    let scores: Vec<f64> = instance
        .docs
        .iter()
        .map(|doc| {
            kept.iter()
                .map(|&i| {
                    let token = instance.features.token(i);
                    if doc.tokens.iter().any(|t| t == token) {
                        phi.phi[i]
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect();
    Ok(Ranking::from_scores(instance.doc_ids(), scores))
}

/// Fidelity of one attribution on one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// Kendall's tau between reconstructed and model ordering.
    pub fidelity: f64,
    /// Weighted variant; weights follow the model ordering.
    pub wfidelity: f64,
    pub top_t: usize,
    /// Document ids in reconstructed order.
    pub reconstructed: Vec<String>,
    /// Document ids in model order.
    pub model_ranking: Vec<String>,
}

/// Score an attribution against the ordering the model actually produced
/// on the full (unmasked) instance.
pub fn fidelity(
    phi: &AttributionVector,
    instance: &Instance,
    ranker: &dyn Ranker,
    top_t: usize,
) -> Result<FidelityReport> {
    let masked = crate::instance::apply_coalition(
        instance,
        &crate::instance::Coalition::full(instance.m()),
    )?;
    let model = rank(ranker, &masked)?;
    fidelity_against(phi, instance, &model, top_t)
}

/// Same, for callers that already hold the model ranking.
pub fn fidelity_against(
    phi: &AttributionVector,
    instance: &Instance,
    model: &Ranking,
    top_t: usize,
) -> Result<FidelityReport> {
    let recon = reconstruct_ordering(phi, instance, top_t)?;
    Ok(FidelityReport {
        fidelity: kendall_tau(&recon, model)?,
        wfidelity: weighted_kendall_tau(model, &recon)?,
        top_t,
        reconstructed: recon.ids().into_iter().map(String::from).collect(),
        model_ranking: model.ids().into_iter().map(String::from).collect(),
    })
}
