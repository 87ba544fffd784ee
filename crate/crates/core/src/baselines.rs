//! Baseline explainers the Shapley estimators are compared against:
//! a pointwise top-k membership surrogate (EXS), Shapley values over an
//! ordering-similarity game (RankingSHAP), and seeded noise.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attribution::AttributionVector;
use crate::error::{Error, Result};
use crate::instance::{apply_coalition, Coalition, Instance};
use crate::rankers::{rank, Ranker, Ranking};
use crate::shapley::{kernel_coalition_draws, kernel_rankshap, GameOracle, SamplerConfig};
use crate::value::{Provenance, RelevanceAssignment, ValueFn};

/// Pointwise surrogate explanation: for each document the full model ranks
/// in its top `k`, fit an *unconstrained* kernel-weighted linear model to
/// the binary game "is this document still in the top k under coalition
/// z?", then sum the per-document coefficient vectors.
///
/// The fits share one set of coalition rankings. Nothing ties the result
/// to the marginal structure of a value function, so nothing guarantees
/// the Shapley axioms hold for it — that contrast is the point.
pub fn exs_attribution(
    instance: &Instance,
    ranker: &dyn Ranker,
    k: usize,
    config: &SamplerConfig,
) -> Result<AttributionVector> {
    let m = instance.m();
    let n = instance.n();
    if k == 0 || k > n {
        return Err(Error::InvalidTopK { k, n });
    }
    let label = format!("top-{k}-membership");
    if m == 1 {
        log::warn!("a single-feature instance leaves the surrogate fit degenerate; returning 0");
        return AttributionVector::new(vec![0.0], 0.0, "exs", label);
    }

    let full = rank(ranker, &apply_coalition(instance, &Coalition::full(m))?)?;
    let targets: Vec<String> = full.ids().into_iter().take(k).map(str::to_string).collect();

    let draws = kernel_coalition_draws(m, config);
    let coalitions: Vec<Coalition> = draws.keys().cloned().collect();
    let weights: Vec<f64> = draws.values().copied().collect();
    let rankings: Vec<Ranking> = if ranker.concurrency_safe() {
        coalitions
            .par_iter()
            .map(|z| rank(ranker, &apply_coalition(instance, z)?))
            .collect::<Result<_>>()?
    } else {
        coalitions
            .iter()
            .map(|z| rank(ranker, &apply_coalition(instance, z)?))
            .collect::<Result<_>>()?
    };

    // one normal matrix over [1, x_1 .. x_m] serves every per-document fit
    let p = m + 1;
    let mut xtwx = DMatrix::<f64>::zeros(p, p);
    let mut row = vec![0.0; p];
    for (z, &w) in coalitions.iter().zip(&weights) {
        row[0] = 1.0;
        for i in 0..m {
            row[i + 1] = if z.contains(i) { 1.0 } else { 0.0 };
        }
        for i in 0..p {
            if row[i] == 0.0 {
                continue;
            }
            for j in 0..p {
                if row[j] != 0.0 {
                    xtwx[(i, j)] += w * row[i] * row[j];
                }
            }
        }
    }

    let cholesky = Cholesky::new(xtwx.clone());
    let svd = if cholesky.is_none() {
        log::warn!(
            "surrogate normal equations are not positive definite \
             ({} distinct coalitions, {m} features); using a pseudo-inverse",
            coalitions.len()
        );
        Some(xtwx.svd(true, true))
    } else {
        None
    };

    let mut phi = vec![0.0; m];
    let mut intercept = 0.0;
    for target in &targets {
        let mut xtwy = DVector::<f64>::zeros(p);
        for ((z, &w), ranking) in coalitions.iter().zip(&weights).zip(&rankings) {
            let y = match ranking.rank_of(target) {
                Some(r) if r <= k => 1.0,
                _ => 0.0,
            };
            if y == 0.0 {
                continue;
            }
            xtwy[0] += w;
            for i in 0..m {
                if z.contains(i) {
                    xtwy[i + 1] += w;
                }
            }
        }
        let beta = match (&cholesky, &svd) {
            (Some(ch), _) => ch.solve(&xtwy),
            (None, Some(svd)) => svd
                .solve(&xtwy, 1e-12)
                .map_err(|e| Error::Numeric(e.into()))?,
            (None, None) => unreachable!(),
        };
        intercept += beta[0];
        for i in 0..m {
            phi[i] += beta[i + 1];
        }
    }
    AttributionVector::new(phi, intercept, "exs", label)
}

/// Shapley values of the ordering-similarity game: the value of a
/// coalition is Kendall's tau between the ranking it induces and the full
/// model ranking. Estimated with the kernel regression.
pub fn rankingshap_attribution(
    instance: &Instance,
    ranker: &dyn Ranker,
    config: &SamplerConfig,
) -> Result<AttributionVector> {
    let m = instance.m();
    let reference = rank(ranker, &apply_coalition(instance, &Coalition::full(m))?)?;
    // relevance labels are inert for ordering-similarity games
    let zero_rels = RelevanceAssignment::new(
        instance.doc_ids().into_iter().map(|id| (id, 0.0)).collect(),
        Provenance::Qrels,
    )?;
    let oracle = GameOracle::new(
        instance,
        ranker,
        ValueFn::TauReference { reference },
        zero_rels,
    )?;
    let a = kernel_rankshap(&oracle, config)?;
    AttributionVector::new(a.phi, a.intercept, "rankingshap", "tau")
}

/// Noise floor: uniform attributions in [-1, 1], deterministic in the seed.
pub fn random_attribution(m: usize, seed: u64) -> Result<AttributionVector> {
    if m == 0 {
        return Err(Error::EmptyFeatureSpace);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    AttributionVector::new(phi, 0.0, "random", "none")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::kendall_tau;
    use crate::rankers::LinearRanker;
    use crate::text::{Document, Query, TokenizerConfig};
    use approx::assert_relative_eq;

    fn gated_instance() -> (Instance, LinearRanker) {
        let cfg = TokenizerConfig::default();
        let query = Query::new("q", "a", &cfg).unwrap();
        let docs = vec![
            Document::new("d1", "a a a", &cfg).unwrap(),
            Document::new("d2", "b", &cfg).unwrap(),
            Document::new("d3", "c", &cfg).unwrap(),
        ];
        let instance = Instance::new(query, docs, None).unwrap();
        let ranker = LinearRanker::from_pairs([("a", 5.0), ("b", 1.0), ("c", 0.5)]);
        (instance, ranker)
    }

    #[test]
    fn exs_recovers_a_feature_that_gates_the_top_slot() {
        let (instance, ranker) = gated_instance();
        // d1 holds rank 1 exactly when "a" survives (score 5 beats all) or
        // when everything scores 0 and the id tie-break favors it; over the
        // proper coalitions the top-1 label for d1 is exactly x_a.
        let a = exs_attribution(&instance, &ranker, 1, &SamplerConfig::default()).unwrap();
        let fa = instance.features.index_of("a").unwrap();
        let fb = instance.features.index_of("b").unwrap();
        let fc = instance.features.index_of("c").unwrap();
        assert_relative_eq!(a.phi[fa], 1.0, epsilon = 1e-9);
        assert_relative_eq!(a.phi[fb], 0.0, epsilon = 1e-9);
        assert_relative_eq!(a.phi[fc], 0.0, epsilon = 1e-9);
        assert_relative_eq!(a.intercept, 0.0, epsilon = 1e-9);
        assert_eq!(a.method, "exs");
        assert_eq!(a.value_fn, "top-1-membership");

        // ...and this very fit breaks Efficiency: the label game spans
        // v(full) - v(empty) = 0 (the tie-break already puts d1 first with
        // every feature deleted), yet the coefficients sum to 1.
        assert!(a.sum() > 0.5);
    }

    #[test]
    fn exs_gives_inert_features_exactly_zero() {
        let (instance, _) = gated_instance();
        // "c" scores zero: no ranking ever depends on it, and the
        // enumerated design is balanced, so its coefficient vanishes
        let ranker = LinearRanker::from_pairs([("a", 5.0), ("b", 1.0), ("c", 0.0)]);
        for k in 1..=2 {
            let a = exs_attribution(&instance, &ranker, k, &SamplerConfig::default()).unwrap();
            let fc = instance.features.index_of("c").unwrap();
            assert!(
                a.phi[fc].abs() < 1e-9,
                "k={k}: inert feature got {}",
                a.phi[fc]
            );
        }
    }

    #[test]
    fn exs_sums_fits_over_the_top_k_documents() {
        let (instance, ranker) = gated_instance();
        let k1 = exs_attribution(&instance, &ranker, 1, &SamplerConfig::default()).unwrap();
        let k2 = exs_attribution(&instance, &ranker, 2, &SamplerConfig::default()).unwrap();
        assert_ne!(k1.phi, k2.phi, "widening the top set must change the fit");
        assert!(k2.phi.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn exs_validates_top_k() {
        let (instance, ranker) = gated_instance();
        assert!(matches!(
            exs_attribution(&instance, &ranker, 4, &SamplerConfig::default()),
            Err(Error::InvalidTopK { k: 4, n: 3 })
        ));
        assert!(matches!(
            exs_attribution(&instance, &ranker, 0, &SamplerConfig::default()),
            Err(Error::InvalidTopK { k: 0, n: 3 })
        ));
    }

    #[test]
    fn exs_is_deterministic_in_the_sampled_regime() {
        let cfg = TokenizerConfig::default();
        let query = Query::new("q", "t0 t1 t2", &cfg).unwrap();
        let docs = vec![
            Document::new("d1", "t0 t1 t2 t3 t4 t5 t6 t7", &cfg).unwrap(),
            Document::new("d2", "t3 t4 t5", &cfg).unwrap(),
            Document::new("d3", "t6 t7 t8 t9", &cfg).unwrap(),
        ];
        let instance = Instance::new(query, docs, None).unwrap();
        assert_eq!(instance.m(), 10);
        let weights: Vec<(String, f64)> = (0..10)
            .map(|i| (format!("t{i}"), 1.0 + i as f64 / 10.0))
            .collect();
        let ranker =
            LinearRanker::from_pairs(weights.iter().map(|(t, w)| (t.as_str(), *w)));
        let config = SamplerConfig {
            n_samples: 300, // < 2^10 - 2, so genuinely sampled
            seed: 9,
            paired: true,
        };
        let a = exs_attribution(&instance, &ranker, 2, &config).unwrap();
        let b = exs_attribution(&instance, &ranker, 2, &config).unwrap();
        assert_eq!(a.phi, b.phi);
    }

    #[test]
    fn rankingshap_satisfies_efficiency_for_its_own_game() {
        let (instance, ranker) = gated_instance();
        let m = instance.m();
        let a = rankingshap_attribution(&instance, &ranker, &SamplerConfig::default()).unwrap();
        assert_eq!(a.method, "rankingshap");
        assert_eq!(a.value_fn, "tau");

        // the budget covers full enumeration here, so the attributions are
        // exact and must bridge tau(empty vs full) -> tau(full vs full) = 1
        let full = rank(&ranker, &apply_coalition(&instance, &Coalition::full(m)).unwrap())
            .unwrap();
        let empty = rank(&ranker, &apply_coalition(&instance, &Coalition::empty(m)).unwrap())
            .unwrap();
        let tau0 = kendall_tau(&empty, &full).unwrap();
        assert_relative_eq!(a.sum(), 1.0 - tau0, epsilon = 1e-9);
        assert_relative_eq!(a.intercept, tau0, epsilon = 1e-12);
    }

    #[test]
    fn random_attribution_is_bounded_and_seeded() {
        let a = random_attribution(6, 1).unwrap();
        let b = random_attribution(6, 1).unwrap();
        let c = random_attribution(6, 2).unwrap();
        assert_eq!(a.phi, b.phi);
        assert_ne!(a.phi, c.phi);
        assert!(a.phi.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(a.intercept, 0.0);
        assert_eq!(a.method, "random");
        assert!(random_attribution(0, 1).is_err());
    }
}
