//! Shared fixtures for the benchmark targets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rankshap::{
    Document, Instance, LinearRanker, Provenance, Query, RelevanceAssignment, TokenizerConfig,
};

/// A random ranked game with exactly `m` features over five documents:
/// every vocabulary token is placed in at least one document, so the
/// feature space is the whole vocabulary.
pub fn ranking_game(m: usize, seed: u64) -> (Instance, LinearRanker, RelevanceAssignment) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = TokenizerConfig::default();
    let vocab: Vec<String> = (0..m).map(|i| format!("tok{i:02}")).collect();
    let n_docs = 5;

    let mut doc_tokens: Vec<Vec<String>> = (0..n_docs)
        .map(|_| vocab.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect())
        .collect();
    for tok in &vocab {
        if !doc_tokens.iter().any(|d| d.iter().any(|t| t == tok)) {
            let d = rng.gen_range(0..n_docs);
            doc_tokens[d].push(tok.clone());
        }
    }
    for d in doc_tokens.iter_mut() {
        if d.is_empty() {
            d.push(vocab[rng.gen_range(0..m)].clone());
        }
    }

    let query_tokens: Vec<String> = vocab.choose_multiple(&mut rng, 2).cloned().collect();
    let query = Query::new("q", &query_tokens.join(" "), &cfg).unwrap();
    let docs: Vec<Document> = doc_tokens
        .iter()
        .enumerate()
        .map(|(i, toks)| Document::new(format!("d{i}"), toks.join(" "), &cfg).unwrap())
        .collect();
    let instance = Instance::new(query, docs, None).unwrap();
    assert_eq!(instance.m(), m);

    let ranker = LinearRanker::from_pairs(
        vocab
            .iter()
            .map(|t| (t.as_str(), rng.gen_range(0.25..2.0))),
    );
    let mut grades: Vec<f64> = (0..n_docs).map(|_| rng.gen_range(0..=3) as f64).collect();
    if grades.iter().all(|&g| g == grades[0]) {
        grades[0] += 1.0;
    }
    let rels = RelevanceAssignment::new(
        instance
            .docs
            .iter()
            .zip(&grades)
            .map(|(d, &g)| (d.id.clone(), g))
            .collect(),
        Provenance::Qrels,
    )
    .unwrap();
    (instance, ranker, rels)
}

/// A random permutation of `d0..d{n-1}`, as a ranking.
pub fn random_ranking(n: usize, rng: &mut ChaCha8Rng) -> rankshap::Ranking {
    let mut ids: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
    ids.shuffle(rng);
    rankshap::Ranking::from_ordered_ids(ids)
}
