//! Cost of the value functions and rank correlations.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rankshap::value::ndcg_of_labels;
use rankshap::{kendall_tau, weighted_kendall_tau};
use rankshap_bench::random_ranking;

fn bench_tau(c: &mut Criterion) {
    let mut group = c.benchmark_group("tau");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [10usize, 100, 1_000] {
        let a = random_ranking(n, &mut rng);
        let b = random_ranking(n, &mut rng);
        group.bench_with_input(BenchmarkId::new("kendall", n), &(&a, &b), |bch, (a, b)| {
            bch.iter(|| kendall_tau(a, b).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("weighted", n), &(&a, &b), |bch, (a, b)| {
            bch.iter(|| weighted_kendall_tau(a, b).unwrap())
        });
    }
    group.finish();
}

fn bench_ndcg(c: &mut Criterion) {
    let mut group = c.benchmark_group("ndcg");
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for n in [10usize, 100, 1_000] {
        let labels: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=4) as f64).collect();
        group.bench_with_input(BenchmarkId::new("labels", n), &labels, |b, labels| {
            b.iter(|| ndcg_of_labels(labels, None))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_tau, bench_ndcg);
criterion_main!(benches);
