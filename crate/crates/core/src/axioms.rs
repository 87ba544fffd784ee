//! Statistical axiom compliance: run an attribution method over seeded
//! synthetic games and hunt for violations of the Shapley axioms
//! (efficiency, missingness, symmetry, monotonicity), and run rank-aware
//! metrics over seeded label vectors hunting for violations of the
//! ranking axioms (position and relevance sensitivity).
//!
//! Every violation is reported as a replayable counterexample carrying the
//! seed that generated it; absence of violations is reported as exactly
//! that — `NoViolationFound` after n trials — never as a proof.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attribution::AttributionVector;
use crate::baselines::{exs_attribution, random_attribution, rankingshap_attribution};
use crate::error::Result;
use crate::instance::Coalition;
use crate::shapley::{
    exact_rankshap, kernel_rankshap, permutation_rankshap, CoalitionGame, SamplerConfig,
};
use crate::synthetic::{GameVariant, SyntheticGame};
use crate::value::ValueFn;

/// The properties the harness can test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    /// Attributions sum to v(full) - v(empty).
    Efficiency,
    /// A feature that never changes the value gets zero.
    Missingness,
    /// Interchangeable features get equal attributions.
    Symmetry,
    /// If every marginal contribution of a feature weakly grows between
    /// two games, its attribution must not shrink.
    Monotonicity,
    /// Swapping a better-labeled document into a better position never
    /// lowers a ranking metric.
    PositionSensitivity,
    /// Raising one document's relevance label never lowers the metric.
    RelevanceSensitivity,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Efficiency => "efficiency",
            Axiom::Missingness => "missingness",
            Axiom::Symmetry => "symmetry",
            Axiom::Monotonicity => "monotonicity",
            Axiom::PositionSensitivity => "position-sensitivity",
            Axiom::RelevanceSensitivity => "relevance-sensitivity",
        }
    }
}

/// A replayable violation: regenerate with `seed` to reproduce it.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub trial: usize,
    pub seed: u64,
    /// How far past the tolerance the violation landed.
    pub magnitude: f64,
    pub detail: String,
}

/// What a check concluded.
#[derive(Debug, Clone)]
pub enum AxiomOutcome {
    Violated(Counterexample),
    NoViolationFound { trials: usize },
}

impl AxiomOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, AxiomOutcome::NoViolationFound { .. })
    }
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub outcome: AxiomOutcome,
}

/// An attribution method wired up for the harness.
#[derive(Debug, Clone)]
pub enum MethodUnderTest {
    RankShapExact,
    RankShapKernel(SamplerConfig),
    RankShapPermutation { n_permutations: usize },
    RankingShap(SamplerConfig),
    Exs { k: usize, config: SamplerConfig },
    Random,
}

impl MethodUnderTest {
    pub fn name(&self) -> &'static str {
        match self {
            MethodUnderTest::RankShapExact => "rankshap-exact",
            MethodUnderTest::RankShapKernel(_) => "rankshap-kernel",
            MethodUnderTest::RankShapPermutation { .. } => "rankshap-permutation",
            MethodUnderTest::RankingShap(_) => "rankingshap",
            MethodUnderTest::Exs { .. } => "exs",
            MethodUnderTest::Random => "random",
        }
    }

    /// Explain the game to the method and collect its attributions. The
    /// seed feeds whatever randomness the method has.
    pub fn attribute(&self, game: &SyntheticGame, seed: u64) -> Result<AttributionVector> {
        match self {
            MethodUnderTest::RankShapExact => exact_rankshap(&game.oracle()?),
            MethodUnderTest::RankShapKernel(config) => {
                let config = SamplerConfig { seed, ..*config };
                kernel_rankshap(&game.oracle()?, &config)
            }
            MethodUnderTest::RankShapPermutation { n_permutations } => {
                permutation_rankshap(&game.oracle()?, *n_permutations, seed)
            }
            MethodUnderTest::RankingShap(config) => {
                let config = SamplerConfig { seed, ..*config };
                rankingshap_attribution(&game.instance, &game.ranker, &config)
            }
            MethodUnderTest::Exs { k, config } => {
                let config = SamplerConfig { seed, ..*config };
                exs_attribution(
                    &game.instance,
                    &game.ranker,
                    (*k).min(game.instance.n()),
                    &config,
                )
            }
            MethodUnderTest::Random => random_attribution(game.instance.m(), seed),
        }
    }
}

/// How hard to look and how much numerical slack to allow.
#[derive(Debug, Clone, Copy)]
pub struct HarnessConfig {
    pub trials: usize,
    pub base_seed: u64,
    /// Pass/fail slack in attribution units.
    pub tolerance: f64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            trials: 200,
            base_seed: 17,
            tolerance: 1e-6,
        }
    }
}

fn trial_seed(base: u64, t: usize) -> u64 {
    base.wrapping_add((t as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn method_seed(game_seed: u64) -> u64 {
    game_seed ^ 0xA5A5_5A5A_0F0F_F0F0
}

/// Check that attributions bridge v(empty) to v(full) on NDCG games.
pub fn check_efficiency(method: &MethodUnderTest, cfg: &HarnessConfig) -> Result<AxiomReport> {
    for t in 0..cfg.trials {
        let seed = trial_seed(cfg.base_seed, t);
        let game = SyntheticGame::generate(seed, ValueFn::ndcg(), GameVariant::Plain)?;
        let oracle = game.oracle()?;
        let m = game.instance.m();
        let span = oracle.value(&Coalition::full(m))? - oracle.value(&Coalition::empty(m))?;
        let a = method.attribute(&game, method_seed(seed))?;
        let err = (a.sum() - span).abs();
        if err > cfg.tolerance {
            return Ok(AxiomReport {
                axiom: Axiom::Efficiency,
                outcome: AxiomOutcome::Violated(Counterexample {
                    trial: t,
                    seed,
                    magnitude: err,
                    detail: format!(
                        "attributions sum to {:.6} but the value span is {:.6}",
                        a.sum(),
                        span
                    ),
                }),
            });
        }
    }
    Ok(AxiomReport {
        axiom: Axiom::Efficiency,
        outcome: AxiomOutcome::NoViolationFound { trials: cfg.trials },
    })
}

/// Check that an injected query-only token — which can never change any
/// document's score — is attributed zero.
pub fn check_missingness(method: &MethodUnderTest, cfg: &HarnessConfig) -> Result<AxiomReport> {
    for t in 0..cfg.trials {
        let seed = trial_seed(cfg.base_seed, t);
        let game = SyntheticGame::generate(seed, ValueFn::ndcg(), GameVariant::WithNullFeature)?;
        let idx = game.null_feature.expect("variant injects a null feature");
        let a = method.attribute(&game, method_seed(seed))?;
        let err = a.phi[idx].abs();
        if err > cfg.tolerance {
            return Ok(AxiomReport {
                axiom: Axiom::Missingness,
                outcome: AxiomOutcome::Violated(Counterexample {
                    trial: t,
                    seed,
                    magnitude: err,
                    detail: format!(
                        "feature {idx} ({:?}) never affects a ranking yet got {:.6}",
                        game.instance.features.token(idx),
                        a.phi[idx]
                    ),
                }),
            });
        }
    }
    Ok(AxiomReport {
        axiom: Axiom::Missingness,
        outcome: AxiomOutcome::NoViolationFound { trials: cfg.trials },
    })
}

/// Check that two tokens which always co-occur with equal weight — so the
/// game cannot tell them apart — get equal attributions.
pub fn check_symmetry(method: &MethodUnderTest, cfg: &HarnessConfig) -> Result<AxiomReport> {
    for t in 0..cfg.trials {
        let seed = trial_seed(cfg.base_seed, t);
        let game = SyntheticGame::generate(seed, ValueFn::ndcg(), GameVariant::WithTwinFeatures)?;
        let (i, j) = game.twins.expect("variant injects twins");
        let a = method.attribute(&game, method_seed(seed))?;
        let err = (a.phi[i] - a.phi[j]).abs();
        if err > cfg.tolerance {
            return Ok(AxiomReport {
                axiom: Axiom::Symmetry,
                outcome: AxiomOutcome::Violated(Counterexample {
                    trial: t,
                    seed,
                    magnitude: err,
                    detail: format!(
                        "interchangeable features {i}/{j} got {:.6} vs {:.6}",
                        a.phi[i], a.phi[j]
                    ),
                }),
            });
        }
    }
    Ok(AxiomReport {
        axiom: Axiom::Symmetry,
        outcome: AxiomOutcome::NoViolationFound { trials: cfg.trials },
    })
}

/// Check monotonicity across a pair of games: the second scales up the
/// labels of every document containing a chosen feature's token, which
/// (for an unnormalized graded metric) weakly raises that feature's every
/// marginal contribution. The premise is still *verified* by enumerating
/// all marginals — trials where it fails to hold are redrawn, so the check
/// never blames a method for a game that doesn't satisfy the antecedent.
pub fn check_monotonicity(method: &MethodUnderTest, cfg: &HarnessConfig) -> Result<AxiomReport> {
    const LAMBDA: f64 = 2.0;
    const MAX_ATTEMPTS: usize = 50;

    for t in 0..cfg.trials {
        let mut drawn = None;
        for attempt in 0..MAX_ATTEMPTS {
            let seed = trial_seed(cfg.base_seed, t * MAX_ATTEMPTS + attempt);
            // unnormalized value keeps the scaling premise provable
            let game = SyntheticGame::generate(seed, ValueFn::dcg(), GameVariant::Plain)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF0CA);
            let Some(feature) = game.pick_scalable_feature(&mut rng) else {
                continue;
            };
            let scaled = game.with_rels(game.scaled_rels(feature, LAMBDA)?);
            if marginals_weakly_grow(&game, &scaled, feature)? {
                drawn = Some((seed, game, scaled, feature));
                break;
            }
        }
        let Some((seed, game, scaled, feature)) = drawn else {
            continue; // no qualifying game found for this trial
        };

        let a = method.attribute(&game, method_seed(seed))?;
        let b = method.attribute(&scaled, method_seed(seed ^ 0x5CA1))?;
        let drop = a.phi[feature] - b.phi[feature];
        if drop > cfg.tolerance {
            return Ok(AxiomReport {
                axiom: Axiom::Monotonicity,
                outcome: AxiomOutcome::Violated(Counterexample {
                    trial: t,
                    seed,
                    magnitude: drop,
                    detail: format!(
                        "every marginal of feature {feature} ({:?}) grew, yet its \
                         attribution fell from {:.6} to {:.6}",
                        game.instance.features.token(feature),
                        a.phi[feature],
                        b.phi[feature]
                    ),
                }),
            });
        }
    }
    Ok(AxiomReport {
        axiom: Axiom::Monotonicity,
        outcome: AxiomOutcome::NoViolationFound { trials: cfg.trials },
    })
}

/// Enumerate every coalition without `feature` and compare the feature's
/// marginal contribution across the two games.
fn marginals_weakly_grow(
    base: &SyntheticGame,
    scaled: &SyntheticGame,
    feature: usize,
) -> Result<bool> {
    let m = base.instance.m();
    let before = base.oracle()?;
    let after = scaled.oracle()?;
    for mask in 0..1u64 << m {
        if mask & (1 << feature) != 0 {
            continue;
        }
        let s = Coalition::from_mask(m, mask);
        let s_with = s.with(feature);
        let margin_before = before.value(&s_with)? - before.value(&s)?;
        let margin_after = after.value(&s_with)? - after.value(&s)?;
        if margin_after < margin_before - 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Run all four attribution axioms.
pub fn check_shapley_axioms(
    method: &MethodUnderTest,
    cfg: &HarnessConfig,
) -> Result<Vec<AxiomReport>> {
    Ok(vec![
        check_efficiency(method, cfg)?,
        check_missingness(method, cfg)?,
        check_symmetry(method, cfg)?,
        check_monotonicity(method, cfg)?,
    ])
}

/// One row of the compliance table.
#[derive(Debug, Clone)]
pub struct ComplianceRow {
    pub method: String,
    pub tolerance: f64,
    pub reports: Vec<AxiomReport>,
}

/// The standard method line-up with the slack each is held to: exact
/// enumeration and the kernel estimator (which enumerates these small
/// games) at numerical precision, the permutation estimator at sampling
/// precision, and the baselines at a loose 1e-3 so only structural
/// violations are flagged.
pub fn standard_methods() -> Vec<(MethodUnderTest, f64)> {
    vec![
        (MethodUnderTest::RankShapExact, 1e-6),
        (MethodUnderTest::RankShapKernel(SamplerConfig::default()), 1e-6),
        (MethodUnderTest::RankShapPermutation { n_permutations: 4000 }, 0.05),
        (MethodUnderTest::RankingShap(SamplerConfig::default()), 1e-3),
        (
            MethodUnderTest::Exs {
                k: 2,
                config: SamplerConfig::default(),
            },
            1e-3,
        ),
        (MethodUnderTest::Random, 1e-3),
    ]
}

/// Check every standard method against every attribution axiom.
pub fn compliance_table(trials: usize, base_seed: u64) -> Result<Vec<ComplianceRow>> {
    standard_methods()
        .into_iter()
        .map(|(method, tolerance)| {
            let cfg = HarnessConfig {
                trials,
                base_seed,
                tolerance,
            };
            Ok(ComplianceRow {
                method: method.name().to_string(),
                tolerance,
                reports: check_shapley_axioms(&method, &cfg)?,
            })
        })
        .collect()
}

/// Check that moving a better label to a better position never lowers the
/// metric. The metric sees labels in rank order.
pub fn check_position_sensitivity(
    metric: &dyn Fn(&[f64]) -> f64,
    trials: usize,
    base_seed: u64,
) -> AxiomReport {
    for t in 0..trials {
        let seed = trial_seed(base_seed, t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=8usize);
        let mut labels: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
        let i = rng.gen_range(0..n - 1);
        let j = rng.gen_range(i + 1..n);
        // put the higher label at the worse position j, then swap it up
        if labels[i] > labels[j] {
            labels.swap(i, j);
        }
        let before = metric(&labels);
        labels.swap(i, j);
        let after = metric(&labels);
        if after < before - 1e-12 {
            return AxiomReport {
                axiom: Axiom::PositionSensitivity,
                outcome: AxiomOutcome::Violated(Counterexample {
                    trial: t,
                    seed,
                    magnitude: before - after,
                    detail: format!(
                        "promoting label {:.3} from rank {} to rank {} dropped the \
                         value {:.6} -> {:.6} (labels after swap: {:?})",
                        labels[i],
                        j + 1,
                        i + 1,
                        before,
                        after,
                        labels
                    ),
                }),
            };
        }
    }
    AxiomReport {
        axiom: Axiom::PositionSensitivity,
        outcome: AxiomOutcome::NoViolationFound { trials },
    }
}

/// Check that raising one document's label never lowers the metric.
pub fn check_relevance_sensitivity(
    metric: &dyn Fn(&[f64]) -> f64,
    trials: usize,
    base_seed: u64,
) -> AxiomReport {
    for t in 0..trials {
        let seed = trial_seed(base_seed, t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=8usize);
        let mut labels: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
        let p = rng.gen_range(0..n);
        let bump = rng.gen_range(0.1..2.0);
        let before = metric(&labels);
        labels[p] += bump;
        let after = metric(&labels);
        if after < before - 1e-12 {
            return AxiomReport {
                axiom: Axiom::RelevanceSensitivity,
                outcome: AxiomOutcome::Violated(Counterexample {
                    trial: t,
                    seed,
                    magnitude: before - after,
                    detail: format!(
                        "raising the rank-{} label by {:.3} dropped the value \
                         {:.6} -> {:.6} (labels after bump: {:?})",
                        p + 1,
                        bump,
                        before,
                        after,
                        labels
                    ),
                }),
            };
        }
    }
    AxiomReport {
        axiom: Axiom::RelevanceSensitivity,
        outcome: AxiomOutcome::NoViolationFound { trials },
    }
}
