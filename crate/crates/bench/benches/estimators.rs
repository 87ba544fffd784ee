//! Estimator cost against feature-space size, on table-backed games (pure
//! estimator arithmetic) and on the real mask-rank-score oracle.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use rankshap::{
    exact_rankshap, kernel_rankshap, permutation_rankshap, CoalitionGame, Coalition, DenseGame,
    GameOracle, SamplerConfig, ValueFn,
};
use rankshap_bench::ranking_game;

fn bench_estimators(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimators");
    for m in [8usize, 10, 12] {
        let game = DenseGame::random(m, 42).unwrap();
        group.bench_with_input(BenchmarkId::new("exact", m), &game, |b, game| {
            b.iter(|| exact_rankshap(game).unwrap())
        });

        let config = SamplerConfig {
            n_samples: 2_000,
            seed: 7,
            paired: true,
        };
        group.bench_with_input(BenchmarkId::new("kernel", m), &game, |b, game| {
            b.iter(|| kernel_rankshap(game, &config).unwrap())
        });

        let n_permutations = 2_000 / m;
        group.bench_with_input(BenchmarkId::new("permutation", m), &game, |b, game| {
            b.iter(|| permutation_rankshap(game, n_permutations, 7).unwrap())
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");

    // one coalition evaluation: mask the instance, rank, score
    let (instance, ranker, rels) = ranking_game(15, 1);
    let oracle = GameOracle::new(&instance, &ranker, ValueFn::ndcg(), rels)
        .unwrap()
        .without_memo();
    let half = Coalition::from_mask(15, 0b101_0101_0101_0101 >> 1);
    group.bench_function("mask-rank-score", |b| {
        b.iter(|| oracle.value(&half).unwrap())
    });

    // a whole exact attribution through the un-memoized oracle
    let (instance, ranker, rels) = ranking_game(10, 2);
    let oracle = GameOracle::new(&instance, &ranker, ValueFn::ndcg(), rels)
        .unwrap()
        .without_memo();
    group.bench_function("exact-attribution-m10", |b| {
        b.iter(|| exact_rankshap(&oracle).unwrap())
    });

    group.finish();
}

criterion_group!(benches, bench_estimators, bench_oracle);
criterion_main!(benches);
