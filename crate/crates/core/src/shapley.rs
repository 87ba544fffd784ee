//! Shapley attribution over coalition games: exact enumeration, a
//! constrained weighted-least-squares (kernel) estimator, and a
//! permutation-sampling estimator.
//!
//! The game treats each feature subset `z` as a coalition; its value is
//! what a rank-aware metric says about the ranking the black box produces
//! once the absent features are deleted, measured against relevance labels
//! frozen on the *unmasked* instance.

use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;
use indexmap::IndexMap;
use itertools::Itertools;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attribution::AttributionVector;
use crate::error::{Error, Result};
use crate::instance::{apply_coalition, Coalition, Instance};
use crate::rankers::{rank, Ranker};
use crate::value::{RelevanceAssignment, ValueFn};

/// A cooperative game over feature coalitions.
pub trait CoalitionGame: Sync {
    fn num_features(&self) -> usize;

    /// Value of the coalition. Must be finite and deterministic.
    fn value(&self, z: &Coalition) -> Result<f64>;

    /// Name of the value function, used to tag attributions.
    fn label(&self) -> String {
        "game".into()
    }

    /// Whether `value` may be called from several threads at once.
    fn parallel_ok(&self) -> bool {
        false
    }
}

/// The ranked-retrieval game: mask the instance with the coalition, rank
/// the masked documents with the black box, and score that ranking against
/// the frozen relevance labels.
///
/// Values are memoized per coalition (the estimators revisit coalitions
/// constantly), so `ranker_calls` counts *distinct* coalition evaluations.
pub struct GameOracle<'a> {
    instance: &'a Instance,
    ranker: &'a dyn Ranker,
    value_fn: ValueFn,
    rels: RelevanceAssignment,
    memo: Option<DashMap<Coalition, f64>>,
    ranker_calls: AtomicU64,
}

impl<'a> GameOracle<'a> {
    pub fn new(
        instance: &'a Instance,
        ranker: &'a dyn Ranker,
        value_fn: ValueFn,
        rels: RelevanceAssignment,
    ) -> Result<Self> {
        for doc in &instance.docs {
            rels.rel(&doc.id)?;
        }
        Ok(GameOracle {
            instance,
            ranker,
            value_fn,
            rels,
            memo: Some(DashMap::new()),
            ranker_calls: AtomicU64::new(0),
        })
    }

    /// Disable memoization (mainly to measure how much it saves).
    pub fn without_memo(mut self) -> Self {
        self.memo = None;
        self
    }

    /// How many times the ranker has actually been invoked.
    pub fn ranker_calls(&self) -> u64 {
        self.ranker_calls.load(Ordering::Relaxed)
    }

    pub fn relevance(&self) -> &RelevanceAssignment {
        &self.rels
    }
}

impl CoalitionGame for GameOracle<'_> {
    fn num_features(&self) -> usize {
        self.instance.m()
    }

    fn value(&self, z: &Coalition) -> Result<f64> {
        if let Some(memo) = &self.memo {
            if let Some(v) = memo.get(z) {
                return Ok(*v);
            }
        }
        let masked = apply_coalition(self.instance, z)?;
        let ranking = rank(self.ranker, &masked)?;
        let v = self.value_fn.evaluate(&ranking, &self.rels)?;
        self.ranker_calls.fetch_add(1, Ordering::Relaxed);
        if let Some(memo) = &self.memo {
            memo.insert(z.clone(), v);
        }
        Ok(v)
    }

    fn label(&self) -> String {
        self.value_fn.name()
    }

    fn parallel_ok(&self) -> bool {
        self.ranker.concurrency_safe()
    }
}

/// A game given by an explicit table of `2^m` values, indexed by coalition
/// bit mask. Used by the axiom harness and in tests.
#[derive(Debug, Clone)]
pub struct DenseGame {
    m: usize,
    values: Vec<f64>,
    label: String,
}

impl DenseGame {
    pub fn new(m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 || m > 26 {
            return Err(Error::InvalidConfig(format!(
                "dense game supports 1..=26 features, got {m}"
            )));
        }
        if values.len() != 1 << m {
            return Err(Error::InvalidConfig(format!(
                "dense game over {m} features needs {} values, got {}",
                1usize << m,
                values.len()
            )));
        }
        Ok(DenseGame {
            m,
            values,
            label: "table".into(),
        })
    }

    /// Uniform random values in [0, 1), deterministic in the seed.
    pub fn random(m: usize, seed: u64) -> Result<Self> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..1usize << m).map(|_| rng.gen::<f64>()).collect();
        DenseGame::new(m, values)
    }

    fn mask_of(z: &Coalition) -> u64 {
        z.indices().iter().fold(0u64, |acc, &i| acc | 1 << i)
    }
}

impl CoalitionGame for DenseGame {
    fn num_features(&self) -> usize {
        self.m
    }

    fn value(&self, z: &Coalition) -> Result<f64> {
        if z.universe() != self.m {
            return Err(Error::CoalitionSize {
                expected: self.m,
                got: z.universe(),
            });
        }
        Ok(self.values[Self::mask_of(z) as usize])
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn parallel_ok(&self) -> bool {
        true
    }
}

/// Largest `m` the exact estimator will enumerate (`2^m` evaluations).
pub const EXACT_ENUMERATION_LIMIT: usize = 20;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 1..=k {
        c = c * (n - k + i) as f64 / i as f64;
    }
    c
}

/// Weight the kernel estimator places on a single coalition of size `s`
/// out of `m` features: `(m - 1) / (C(m, s) * s * (m - s))`.
///
/// Only defined for proper coalitions (`0 < s < m`), where the weight is
/// finite; the empty and full coalitions are enforced as hard constraints
/// instead.
pub fn shapley_kernel_weight(m: usize, s: usize) -> f64 {
    assert!(s > 0 && s < m, "kernel weight only covers 0 < s < m");
    (m - 1) as f64 / (binomial(m, s) * (s * (m - s)) as f64)
}

fn evaluate_coalitions<G: CoalitionGame + ?Sized>(
    game: &G,
    coalitions: &[Coalition],
) -> Result<Vec<f64>> {
    if game.parallel_ok() {
        coalitions.par_iter().map(|z| game.value(z)).collect()
    } else {
        coalitions.iter().map(|z| game.value(z)).collect()
    }
}

/// Exact Shapley values by full enumeration of all `2^m` coalitions.
///
/// `phi_i = sum over S not containing i of
///   |S|! (m - |S| - 1)! / m! * (v(S + i) - v(S))`,
/// with the value of the empty coalition reported as the intercept.
pub fn exact_rankshap<G: CoalitionGame + ?Sized>(game: &G) -> Result<AttributionVector> {
    let m = game.num_features();
    if m == 0 {
        return Err(Error::EmptyFeatureSpace);
    }
    if m > EXACT_ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            m,
            limit: EXACT_ENUMERATION_LIMIT,
        });
    }

    let coalitions: Vec<Coalition> = (0..1u64 << m).map(|mask| Coalition::from_mask(m, mask)).collect();
    let values = evaluate_coalitions(game, &coalitions)?;

    // weight of a marginal contribution on top of a size-s coalition
    let weights: Vec<f64> = (0..m).map(|s| 1.0 / (m as f64 * binomial(m - 1, s))).collect();

    let mut phi = vec![0.0; m];
    for mask in 0..1u64 << m {
        let s = mask.count_ones() as usize;
        for i in 0..m {
            if mask & (1 << i) == 0 {
                phi[i] += weights[s] * (values[(mask | 1 << i) as usize] - values[mask as usize]);
            }
        }
    }
    AttributionVector::new(phi, values[0], "rankshap-exact", game.label())
}

/// Sampling parameters shared by the stochastic estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    /// Coalition evaluations to budget (kernel) or permutations to walk.
    pub n_samples: usize,
    pub seed: u64,
    /// Draw each sampled coalition together with its complement.
    pub paired: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_samples: 5000,
            seed: 0,
            paired: true,
        }
    }
}

/// Shapley values via the constrained weighted-least-squares estimator.
///
/// Fits `v(z) ~ phi_0 + sum_{i in z} phi_i` under the hard constraints
/// `phi_0 = v(empty)` and `phi_0 + sum_i phi_i = v(full)`, weighting
/// coalitions by the Shapley kernel. When the budget covers every proper
/// coalition (`n_samples >= 2^m - 2`) the system is solved over the full
/// enumeration with exact kernel weights, which reproduces the exact
/// Shapley values; otherwise coalitions are drawn by kernel-proportional
/// size sampling and duplicates accumulate draw counts as weights.
pub fn kernel_rankshap<G: CoalitionGame + ?Sized>(
    game: &G,
    config: &SamplerConfig,
) -> Result<AttributionVector> {
    let m = game.num_features();
    if m == 0 {
        return Err(Error::EmptyFeatureSpace);
    }
    if config.n_samples < 2 * m {
        return Err(Error::InvalidConfig(format!(
            "kernel estimator needs n_samples >= 2m = {}, got {}",
            2 * m,
            config.n_samples
        )));
    }
    let v0 = game.value(&Coalition::empty(m))?;
    let vf = game.value(&Coalition::full(m))?;
    if m == 1 {
        return AttributionVector::new(vec![vf - v0], v0, "rankshap-kernel", game.label());
    }

    kernel_from_draws(game, kernel_coalition_draws(m, config), v0, vf)
}

/// Weighted proper coalitions for the kernel regression. When the budget
/// covers every proper coalition the full enumeration is returned with
/// exact kernel weights; otherwise coalitions are sampled.
pub(crate) fn kernel_coalition_draws(m: usize, config: &SamplerConfig) -> IndexMap<Coalition, f64> {
    let enumerable = m < 64 && config.n_samples as u128 >= (1u128 << m) - 2;
    if enumerable {
        (1..(1u64 << m) - 1)
            .map(|mask| {
                let z = Coalition::from_mask(m, mask);
                let w = shapley_kernel_weight(m, z.len());
                (z, w)
            })
            .collect()
    } else {
        sample_coalitions(m, config)
    }
}

/// Draw coalitions for the sampled kernel regime: size `s` with probability
/// proportional to `(m - 1) / (s (m - s))` (the kernel mass aggregated over
/// all size-`s` coalitions), then a uniform subset of that size. Duplicates
/// accumulate their draw count as the regression weight.
fn sample_coalitions(m: usize, config: &SamplerConfig) -> IndexMap<Coalition, f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let size_weights: Vec<f64> = (1..m).map(|s| (m - 1) as f64 / (s * (m - s)) as f64).collect();
    let by_size = WeightedIndex::new(&size_weights).expect("positive weights");

    let mut draws: IndexMap<Coalition, f64> = IndexMap::new();
    let mut deposited = 0usize;
    while deposited < config.n_samples {
        let s = 1 + by_size.sample(&mut rng);
        let picked = rand::seq::index::sample(&mut rng, m, s);
        let z = Coalition::from_indices(m, &picked.into_vec());
        if config.paired && deposited + 1 < config.n_samples {
            *draws.entry(z.complement()).or_insert(0.0) += 1.0;
            deposited += 1;
        }
        *draws.entry(z).or_insert(0.0) += 1.0;
        deposited += 1;
    }
    draws
}

/// Solve the constrained weighted least squares given the coalition draws.
///
/// Both constraints are eliminated by substitution: with
/// `delta = v(full) - v(empty)` and the last feature expressed as
/// `phi_last = delta - sum of the others`, each row becomes
/// `y(z) = v(z) - v(empty) - [last in z] * delta` against the design
/// `a_i = [i in z] - [last in z]`, leaving `m - 1` unknowns.
fn kernel_from_draws<G: CoalitionGame + ?Sized>(
    game: &G,
    draws: IndexMap<Coalition, f64>,
    v0: f64,
    vf: f64,
) -> Result<AttributionVector> {
    let m = game.num_features();
    if draws.len() < m {
        return Err(Error::InsufficientCoalitions {
            distinct: draws.len(),
            m,
        });
    }

    let coalitions: Vec<Coalition> = draws.keys().cloned().collect();
    let values = evaluate_coalitions(game, &coalitions)?;

    let delta = vf - v0;
    let p = m - 1;
    let mut ata = DMatrix::<f64>::zeros(p, p);
    let mut atb = DVector::<f64>::zeros(p);
    let mut row = vec![0.0; p];
    for ((z, &w), &v) in coalitions.iter().zip(draws.values()).zip(&values) {
        let x_last = if z.contains(m - 1) { 1.0 } else { 0.0 };
        for (i, r) in row.iter_mut().enumerate() {
            *r = if z.contains(i) { 1.0 } else { 0.0 } - x_last;
        }
        let y = v - v0 - x_last * delta;
        for i in 0..p {
            if row[i] == 0.0 {
                continue;
            }
            atb[i] += w * row[i] * y;
            for j in 0..p {
                if row[j] != 0.0 {
                    ata[(i, j)] += w * row[i] * row[j];
                }
            }
        }
    }

    let solution = match Cholesky::new(ata.clone()) {
        Some(ch) => ch.solve(&atb),
        None => {
            log::warn!(
                "kernel normal equations are not positive definite \
                 ({} distinct coalitions, {m} features); using a pseudo-inverse",
                coalitions.len()
            );
            ata.svd(true, true)
                .solve(&atb, 1e-12)
                .map_err(|e| Error::Numeric(e.into()))?
        }
    };

    let mut phi: Vec<f64> = solution.iter().copied().collect();
    let rest: f64 = phi.iter().sum();
    phi.push(delta - rest);
    AttributionVector::new(phi, v0, "rankshap-kernel", game.label())
}

/// Shapley values via permutation sampling: walk random feature orders and
/// credit each feature its marginal contribution on top of the prefix.
///
/// When `m! <= n_permutations` every permutation is walked once, which is
/// again exact. Deterministic in the seed.
pub fn permutation_rankshap<G: CoalitionGame + ?Sized>(
    game: &G,
    n_permutations: usize,
    seed: u64,
) -> Result<AttributionVector> {
    let m = game.num_features();
    if m == 0 {
        return Err(Error::EmptyFeatureSpace);
    }
    if n_permutations == 0 {
        return Err(Error::InvalidConfig(
            "permutation estimator needs at least one permutation".into(),
        ));
    }
    let v0 = game.value(&Coalition::empty(m))?;

    let mut contrib = vec![0.0; m];
    let mut walk = |order: &[usize]| -> Result<()> {
        let mut z = Coalition::empty(m);
        let mut prev = v0;
        for &i in order {
            z.insert(i);
            let v = game.value(&z)?;
            contrib[i] += v - prev;
            prev = v;
        }
        Ok(())
    };

    let walked = match factorial_at_most(m, n_permutations) {
        Some(total) => {
            for order in (0..m).permutations(m) {
                walk(&order)?;
            }
            total
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut order: Vec<usize> = (0..m).collect();
            for _ in 0..n_permutations {
                order.shuffle(&mut rng);
                walk(&order)?;
            }
            n_permutations
        }
    };

    let phi = contrib.into_iter().map(|c| c / walked as f64).collect();
    AttributionVector::new(phi, v0, "rankshap-permutation", game.label())
}

/// `Some(m!)` when it is at most `cap`, else `None`.
fn factorial_at_most(m: usize, cap: usize) -> Option<usize> {
    let mut f = 1usize;
    for i in 2..=m {
        f = f.checked_mul(i)?;
        if f > cap {
            return None;
        }
    }
    (f <= cap).then_some(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rankers::{CountingRanker, LinearRanker};
    use crate::text::{Document, Query, TokenizerConfig};
    use crate::value::{Provenance, RelevanceSource};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::collections::HashMap;

    /// Reference Shapley values by averaging marginal contributions over
    /// every feature order — independent of the weight-formula code path.
    fn shapley_by_permutations(game: &dyn CoalitionGame) -> Vec<f64> {
        let m = game.num_features();
        let mut phi = vec![0.0; m];
        let mut count = 0usize;
        for order in (0..m).permutations(m) {
            let mut z = Coalition::empty(m);
            let mut prev = game.value(&z).unwrap();
            for &i in &order {
                z.insert(i);
                let v = game.value(&z).unwrap();
                phi[i] += v - prev;
                prev = v;
            }
            count += 1;
        }
        phi.iter().map(|p| p / count as f64).collect()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn kernel_weight_worked_examples() {
        assert_relative_eq!(shapley_kernel_weight(4, 1), 0.25, epsilon = 1e-15);
        assert_relative_eq!(shapley_kernel_weight(4, 2), 0.125, epsilon = 1e-15);
        assert_relative_eq!(shapley_kernel_weight(4, 3), 0.25, epsilon = 1e-15);
        // symmetric in s <-> m - s
        for m in 2..10 {
            for s in 1..m {
                assert_relative_eq!(
                    shapley_kernel_weight(m, s),
                    shapley_kernel_weight(m, m - s),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    #[should_panic(expected = "0 < s < m")]
    fn kernel_weight_rejects_the_full_coalition() {
        shapley_kernel_weight(4, 4);
    }

    #[test]
    fn exact_two_feature_hand_case() {
        // v: 00 -> 0.0, 10 -> 0.6, 01 -> 0.2, 11 -> 1.0
        let game = DenseGame::new(2, vec![0.0, 0.6, 0.2, 1.0]).unwrap();
        let a = exact_rankshap(&game).unwrap();
        // phi_0 = (0.6 - 0)/2 + (1.0 - 0.2)/2 = 0.7
        assert_relative_eq!(a.phi[0], 0.7, epsilon = 1e-12);
        assert_relative_eq!(a.phi[1], 0.3, epsilon = 1e-12);
        assert_eq!(a.intercept, 0.0);
        assert_eq!(a.method, "rankshap-exact");
    }

    #[test]
    fn exact_matches_the_permutation_definition() {
        for seed in 0..20 {
            let m = 2 + (seed as usize % 4); // 2..=5
            let game = DenseGame::random(m, seed).unwrap();
            let a = exact_rankshap(&game).unwrap();
            let reference = shapley_by_permutations(&game);
            assert!(max_abs_diff(&a.phi, &reference) < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn exact_refuses_oversized_games() {
        struct Huge;
        impl CoalitionGame for Huge {
            fn num_features(&self) -> usize {
                21
            }
            fn value(&self, _: &Coalition) -> Result<f64> {
                Ok(0.0)
            }
        }
        assert!(matches!(
            exact_rankshap(&Huge),
            Err(Error::EnumerationLimit { m: 21, limit: 20 })
        ));
    }

    #[test]
    fn kernel_full_enumeration_equals_exact() {
        for seed in 0..20 {
            let m = 2 + (seed as usize % 6); // 2..=7
            let game = DenseGame::random(m, 100 + seed).unwrap();
            let exact = exact_rankshap(&game).unwrap();
            let cfg = SamplerConfig {
                n_samples: 1 << m, // covers all 2^m - 2 proper coalitions
                ..Default::default()
            };
            let kernel = kernel_rankshap(&game, &cfg).unwrap();
            assert!(
                max_abs_diff(&exact.phi, &kernel.phi) < 1e-9,
                "seed {seed}: exact {:?} vs kernel {:?}",
                exact.phi,
                kernel.phi
            );
            assert_eq!(kernel.intercept, exact.intercept);
            assert_eq!(kernel.method, "rankshap-kernel");
        }
    }

    #[test]
    fn sampled_kernel_approximates_exact_and_is_seed_deterministic() {
        let game = DenseGame::random(8, 7).unwrap();
        let exact = exact_rankshap(&game).unwrap();
        let cfg = SamplerConfig {
            n_samples: 200, // < 2^8 - 2 = 254, so genuinely sampled
            seed: 3,
            paired: true,
        };
        let a = kernel_rankshap(&game, &cfg).unwrap();
        let b = kernel_rankshap(&game, &cfg).unwrap();
        assert_eq!(a.phi, b.phi, "same seed must give identical results");
        assert!(
            max_abs_diff(&exact.phi, &a.phi) < 0.05,
            "sampled kernel strayed: {:?} vs {:?}",
            a.phi,
            exact.phi
        );
        // efficiency holds by construction even for the sampled regime
        let full = game.value(&Coalition::full(8)).unwrap();
        let empty = game.value(&Coalition::empty(8)).unwrap();
        assert_relative_eq!(a.sum(), full - empty, epsilon = 1e-9);
    }

    #[test]
    fn kernel_rejects_tiny_budgets() {
        let game = DenseGame::random(5, 0).unwrap();
        let cfg = SamplerConfig {
            n_samples: 9, // < 2m = 10
            ..Default::default()
        };
        assert!(matches!(
            kernel_rankshap(&game, &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn kernel_needs_enough_distinct_coalitions() {
        let game = DenseGame::random(4, 0).unwrap();
        let mut draws = IndexMap::new();
        draws.insert(Coalition::from_mask(4, 0b0001), 3.0);
        draws.insert(Coalition::from_mask(4, 0b1110), 3.0);
        draws.insert(Coalition::from_mask(4, 0b0011), 2.0);
        let err = kernel_from_draws(&game, draws, 0.0, 1.0).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientCoalitions { distinct: 3, m: 4 }
        ));
    }

    #[test]
    fn kernel_single_feature_game() {
        let game = DenseGame::new(1, vec![0.25, 0.75]).unwrap();
        let a = kernel_rankshap(&game, &SamplerConfig::default()).unwrap();
        assert_eq!(a.phi, vec![0.5]);
        assert_eq!(a.intercept, 0.25);
    }

    #[test]
    fn permutation_enumerates_small_games_exactly() {
        let game = DenseGame::random(4, 11).unwrap();
        let exact = exact_rankshap(&game).unwrap();
        // 4! = 24 <= 30, so every order is walked once
        let a = permutation_rankshap(&game, 30, 999).unwrap();
        assert!(max_abs_diff(&exact.phi, &a.phi) < 1e-12);
        assert_eq!(a.method, "rankshap-permutation");
        let b = permutation_rankshap(&game, 30, 1).unwrap();
        assert_eq!(a.phi, b.phi, "enumerated estimates ignore the seed");
    }

    #[test]
    fn permutation_sampling_converges_and_is_seed_deterministic() {
        let game = DenseGame::random(7, 5).unwrap();
        let exact = exact_rankshap(&game).unwrap();
        let a = permutation_rankshap(&game, 800, 42).unwrap(); // 7! > 800
        let b = permutation_rankshap(&game, 800, 42).unwrap();
        assert_eq!(a.phi, b.phi);
        assert!(
            max_abs_diff(&exact.phi, &a.phi) < 0.05,
            "permutation estimate strayed: {:?} vs {:?}",
            a.phi,
            exact.phi
        );
        assert_eq!(a.intercept, exact.intercept);
    }

    #[test]
    fn permutation_rejects_zero_budget() {
        let game = DenseGame::random(3, 0).unwrap();
        assert!(matches!(
            permutation_rankshap(&game, 0, 0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn factorial_threshold() {
        assert_eq!(factorial_at_most(4, 24), Some(24));
        assert_eq!(factorial_at_most(4, 23), None);
        assert_eq!(factorial_at_most(1, 1), Some(1));
        assert_eq!(factorial_at_most(20, usize::MAX), Some(2432902008176640000));
        assert_eq!(factorial_at_most(25, usize::MAX), None); // overflows
    }

    fn ranked_game() -> (Instance, LinearRanker, RelevanceAssignment) {
        let cfg = TokenizerConfig::default();
        let query = Query::new("q", "apple pie", &cfg).unwrap();
        let docs = vec![
            Document::new("d1", "apple pie recipe", &cfg).unwrap(),
            Document::new("d2", "apple orchard", &cfg).unwrap(),
            Document::new("d3", "pie chart", &cfg).unwrap(),
        ];
        let instance = Instance::new(query, docs, None).unwrap();
        let ranker = LinearRanker::from_pairs([
            ("apple", 2.0),
            ("pie", 1.5),
            ("recipe", 0.5),
            ("orchard", 0.1),
            ("chart", 0.1),
        ]);
        let rels: HashMap<String, f64> = [("d1", 3.0), ("d2", 1.0), ("d3", 1.0)]
            .into_iter()
            .map(|(id, r)| (id.to_string(), r))
            .collect();
        let rels = RelevanceAssignment::new(rels, Provenance::Qrels).unwrap();
        (instance, ranker, rels)
    }

    #[test]
    fn oracle_memoization_is_transparent_and_saves_ranker_calls() {
        let (instance, ranker, rels) = ranked_game();
        let counting = CountingRanker::new(ranker);

        let memoized = GameOracle::new(&instance, &counting, ValueFn::ndcg(), rels.clone()).unwrap();
        let with_memo = exact_rankshap(&memoized).unwrap();
        let calls_memoized = counting.calls();
        // exact enumeration touches each coalition once either way, so run
        // the permutation estimator on top: plenty of repeat visits
        let _ = permutation_rankshap(&memoized, 50, 0).unwrap();
        assert_eq!(
            counting.calls(),
            calls_memoized,
            "memoized oracle must not re-invoke the ranker on repeat coalitions"
        );

        let fresh = GameOracle::new(&instance, &counting, ValueFn::ndcg(), rels).unwrap().without_memo();
        let without_memo = exact_rankshap(&fresh).unwrap();
        assert_eq!(with_memo.phi, without_memo.phi);
        assert_eq!(memoized.ranker_calls(), 1 << instance.m());
    }

    #[test]
    fn oracle_rejects_incomplete_relevance_labels() {
        let (instance, ranker, _) = ranked_game();
        let partial = RelevanceAssignment::new(
            [("d1".to_string(), 1.0)].into_iter().collect(),
            Provenance::Qrels,
        )
        .unwrap();
        assert!(matches!(
            GameOracle::new(&instance, &ranker, ValueFn::ndcg(), partial),
            Err(Error::MissingRelevance(_))
        ));
    }

    #[test]
    fn ranked_attribution_separates_live_and_inert_tokens() {
        let (instance, _, _) = ranked_game();
        // "chart" scores zero, so no coalition's ranking ever depends on it
        let ranker = LinearRanker::from_pairs([
            ("apple", 2.0),
            ("pie", 1.5),
            ("recipe", 0.5),
            ("orchard", 0.1),
            ("chart", 0.0),
        ]);
        let rels = crate::value::infer_relevance(&RelevanceSource::ModelScores, &instance, &ranker)
            .unwrap();
        let oracle = GameOracle::new(&instance, &ranker, ValueFn::ndcg(), rels).unwrap();
        let a = exact_rankshap(&oracle).unwrap();
        assert_eq!(a.value_fn, "ndcg");
        let apple = instance.features.index_of("apple").unwrap();
        let chart = instance.features.index_of("chart").unwrap();
        assert_eq!(a.phi[chart], 0.0);
        assert!(a.phi[apple].abs() > 1e-9);
        // intercept is the value of ranking with every feature deleted,
        // and the attributions bridge from there to the full value
        let empty = oracle.value(&Coalition::empty(instance.m())).unwrap();
        let full = oracle.value(&Coalition::full(instance.m())).unwrap();
        assert_eq!(a.intercept, empty);
        assert_relative_eq!(a.sum(), full - empty, epsilon = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Efficiency: attributions sum to v(full) - v(empty), all methods.
        #[test]
        fn efficiency_on_random_games(seed in 0u64..10_000) {
            let m = 2 + (seed % 5) as usize; // 2..=6
            let game = DenseGame::random(m, seed).unwrap();
            let span = game.value(&Coalition::full(m)).unwrap()
                - game.value(&Coalition::empty(m)).unwrap();
            let exact = exact_rankshap(&game).unwrap();
            prop_assert!((exact.sum() - span).abs() < 1e-9);
            let kernel = kernel_rankshap(&game, &SamplerConfig {
                n_samples: (1 << m).max(2 * m),
                seed,
                paired: true,
            }).unwrap();
            prop_assert!((kernel.sum() - span).abs() < 1e-9);
            let perm = permutation_rankshap(&game, 200, seed).unwrap();
            prop_assert!((perm.sum() - span).abs() < 1e-9);
        }

        /// Null player: a feature that never changes the value gets 0.
        #[test]
        fn null_feature_gets_zero(seed in 0u64..10_000) {
            let m = 3 + (seed % 3) as usize; // 3..=5
            let base = DenseGame::random(m - 1, seed).unwrap();
            // lift to m features; the top feature is ignored entirely
            let lifted: Vec<f64> = (0..1usize << m)
                .map(|mask| {
                    let low = (mask & ((1 << (m - 1)) - 1)) as u64;
                    base.value(&Coalition::from_mask(m - 1, low)).unwrap()
                })
                .collect();
            let game = DenseGame::new(m, lifted).unwrap();
            let exact = exact_rankshap(&game).unwrap();
            prop_assert!(exact.phi[m - 1].abs() < 1e-12);
            let kernel = kernel_rankshap(&game, &SamplerConfig {
                n_samples: 1 << m,
                seed,
                paired: true,
            }).unwrap();
            prop_assert!(kernel.phi[m - 1].abs() < 1e-9);
        }

        /// Symmetry: interchangeable features get equal attributions.
        #[test]
        fn symmetric_features_get_equal_shares(seed in 0u64..10_000) {
            let m = 3 + (seed % 3) as usize;
            let raw = DenseGame::random(m, seed).unwrap();
            // symmetrize in features 0 and 1
            let swap01 = |mask: usize| {
                let b0 = (mask >> 0) & 1;
                let b1 = (mask >> 1) & 1;
                (mask & !0b11) | (b0 << 1) | b1
            };
            let values: Vec<f64> = (0..1usize << m)
                .map(|mask| {
                    let a = raw.value(&Coalition::from_mask(m, mask as u64)).unwrap();
                    let b = raw.value(&Coalition::from_mask(m, swap01(mask) as u64)).unwrap();
                    (a + b) / 2.0
                })
                .collect();
            let game = DenseGame::new(m, values).unwrap();
            let exact = exact_rankshap(&game).unwrap();
            prop_assert!((exact.phi[0] - exact.phi[1]).abs() < 1e-12);
        }
    }
}
