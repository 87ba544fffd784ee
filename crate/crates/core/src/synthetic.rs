//! Seeded synthetic data: small enumerable ranked games for the axiom
//! harness, and a retrieval corpus with graded judgments for end-to-end
//! evaluation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{DocRecord, QrelRecord};
use crate::error::Result;
use crate::instance::Instance;
use crate::rankers::LinearRanker;
use crate::shapley::GameOracle;
use crate::text::{Document, Query, TokenizerConfig};
use crate::value::{Provenance, RelevanceAssignment, ValueFn};

/// Which structural guarantee the generated game carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameVariant {
    Plain,
    /// The query carries one token that appears in no document, so (for a
    /// ranker that scores documents by their own tokens) that feature can
    /// never change any ranking.
    WithNullFeature,
    /// Two tokens appear in exactly the same documents with equal ranker
    /// weight, making the game symmetric in them.
    WithTwinFeatures,
}

/// A small ranked game whose coalition space is cheap to enumerate: a
/// query, a handful of documents, a linear scorer with known weights, and
/// frozen relevance labels.
#[derive(Debug, Clone)]
pub struct SyntheticGame {
    pub instance: Instance,
    pub ranker: LinearRanker,
    pub rels: RelevanceAssignment,
    pub value_fn: ValueFn,
    /// Feature index of the injected query-only token, if any.
    pub null_feature: Option<usize>,
    /// Feature indices of the interchangeable pair, if any.
    pub twins: Option<(usize, usize)>,
}

impl SyntheticGame {
    /// Deterministically generate a game (3..=5 documents, at most 10
    /// features) for the given seed.
    pub fn generate(seed: u64, value_fn: ValueFn, variant: GameVariant) -> Result<SyntheticGame> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = TokenizerConfig::default();

        let vocab_size = rng.gen_range(5..=7usize);
        let vocab: Vec<String> = (0..vocab_size).map(|i| format!("t{i}")).collect();
        let n_docs = rng.gen_range(3..=5usize);

        // each document holds a random non-empty subset of the vocabulary
        let mut doc_tokens: Vec<Vec<String>> = Vec::with_capacity(n_docs);
        for _ in 0..n_docs {
            let mut tokens: Vec<String> =
                vocab.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            if tokens.is_empty() {
                tokens.push(vocab[rng.gen_range(0..vocab_size)].clone());
            }
            doc_tokens.push(tokens);
        }

        let query_len = rng.gen_range(1..=2usize);
        let mut query_tokens: Vec<String> =
            vocab.choose_multiple(&mut rng, query_len).cloned().collect();

        let mut weights: Vec<(String, f64)> = vocab
            .iter()
            .map(|t| (t.clone(), rng.gen_range(0.25..2.0)))
            .collect();

        match variant {
            GameVariant::Plain => {}
            GameVariant::WithNullFeature => {
                query_tokens.push("qnull".to_string());
            }
            GameVariant::WithTwinFeatures => {
                // the twins co-occur: either both in a document or neither
                let mut hosts: Vec<usize> = (0..n_docs).filter(|_| rng.gen_bool(0.5)).collect();
                if hosts.is_empty() {
                    hosts.push(rng.gen_range(0..n_docs));
                }
                for &d in &hosts {
                    doc_tokens[d].push("twina".to_string());
                    doc_tokens[d].push("twinb".to_string());
                }
                let w = rng.gen_range(0.25..2.0);
                weights.push(("twina".to_string(), w));
                weights.push(("twinb".to_string(), w));
            }
        }

        let query = Query::new("q", &query_tokens.join(" "), &cfg)?;
        let docs: Result<Vec<Document>> = doc_tokens
            .iter()
            .enumerate()
            .map(|(i, toks)| Document::new(format!("d{}", i + 1), toks.join(" "), &cfg))
            .collect();
        let instance = Instance::new(query, docs?, None)?;

        // graded labels with at least two distinct grades
        let mut rel_values: Vec<f64> = (0..n_docs).map(|_| rng.gen_range(0..=3) as f64).collect();
        if rel_values.iter().all(|&r| r == rel_values[0]) {
            rel_values[0] += 1.0;
        }
        let rels = RelevanceAssignment::new(
            instance
                .docs
                .iter()
                .zip(&rel_values)
                .map(|(d, &r)| (d.id.clone(), r))
                .collect(),
            Provenance::Qrels,
        )?;

        let ranker = LinearRanker::from_pairs(weights.iter().map(|(t, w)| (t.as_str(), *w)));
        let null_feature = match variant {
            GameVariant::WithNullFeature => instance.features.index_of("qnull"),
            _ => None,
        };
        let twins = match variant {
            GameVariant::WithTwinFeatures => Some((
                instance.features.index_of("twina").expect("twin in space"),
                instance.features.index_of("twinb").expect("twin in space"),
            )),
            _ => None,
        };

        Ok(SyntheticGame {
            instance,
            ranker,
            rels,
            value_fn,
            null_feature,
            twins,
        })
    }

    /// The coalition game this instance defines.
    pub fn oracle(&self) -> Result<GameOracle<'_>> {
        GameOracle::new(
            &self.instance,
            &self.ranker,
            self.value_fn.clone(),
            self.rels.clone(),
        )
    }

    /// A feature suitable for relevance-scaling experiments: its token has
    /// positive weight and appears in at least one document.
    pub fn pick_scalable_feature(&self, rng: &mut impl Rng) -> Option<usize> {
        let present: Vec<usize> = (0..self.instance.m())
            .filter(|&i| {
                let tok = self.instance.features.token(i);
                self.ranker.weight(tok) > 0.0
                    && self.instance.docs.iter().any(|d| d.tokens.iter().any(|t| t == tok))
            })
            .collect();
        present.choose(rng).copied()
    }

    /// Labels with the grades of every document containing the feature's
    /// token multiplied by `lambda`.
    pub fn scaled_rels(&self, feature: usize, lambda: f64) -> Result<RelevanceAssignment> {
        let tok = self.instance.features.token(feature);
        RelevanceAssignment::new(
            self.instance
                .docs
                .iter()
                .map(|d| {
                    let rel = self.rels.rel(&d.id).expect("labels cover all docs");
                    let scale = if d.tokens.iter().any(|t| t == tok) {
                        lambda
                    } else {
                        1.0
                    };
                    (d.id.clone(), rel * scale)
                })
                .collect(),
            Provenance::Qrels,
        )
    }

    /// A copy of this game with different labels.
    pub fn with_rels(&self, rels: RelevanceAssignment) -> SyntheticGame {
        SyntheticGame {
            rels,
            ..self.clone()
        }
    }
}

/// A generated retrieval collection: one shared document pool, queries
/// over disjoint per-query vocabularies, and graded judgments.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub docs: Vec<DocRecord>,
    pub queries: Vec<DocRecord>,
    pub qrels: Vec<QrelRecord>,
}

/// Knobs for corpus generation.
#[derive(Debug, Clone, Copy)]
pub struct CorpusSpec {
    pub n_queries: usize,
    /// Filler-only documents added per query (they match no query token).
    pub fillers_per_query: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_queries: 100,
            fillers_per_query: 6,
            seed: 7,
        }
    }
}

/// Generate a corpus where relevance is the number of distinct query
/// tokens a document contains.
///
/// Each query gets four private tokens and ten documents that contain
/// some of them — grade 4 down to grade 1 — padded to 8..=14 words with
/// fillers from a shared pool, plus filler-only documents. Ids are
/// zero-padded so lexicographic and numeric order agree.
pub fn generate_corpus(spec: &CorpusSpec) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let fillers: Vec<String> = (0..150).map(|i| format!("f{i:03}")).collect();

    // documents per query at each positive grade: one perfect match, two
    // strong, three partial, four weak
    const TIER_COUNTS: [(usize, usize); 4] = [(4, 1), (3, 2), (2, 3), (1, 4)];

    let mut docs = Vec::new();
    let mut queries = Vec::new();
    let mut qrels = Vec::new();
    let mut doc_counter = 0usize;

    for qi in 0..spec.n_queries {
        let qid = format!("q{qi:03}");
        let q_tokens: Vec<String> = (0..4).map(|j| format!("q{qi:03}{}", (b'a' + j) as char)).collect();
        queries.push(DocRecord {
            id: qid.clone(),
            text: q_tokens.join(" "),
        });

        let mut make_doc = |query_part: &[String], rng: &mut ChaCha8Rng| -> String {
            let id = format!("d{doc_counter:04}");
            doc_counter += 1;
            let len = rng.gen_range(8..=14usize);
            let mut words: Vec<String> = query_part.to_vec();
            while words.len() < len {
                words.push(fillers[rng.gen_range(0..fillers.len())].clone());
            }
            words.shuffle(rng);
            docs.push(DocRecord {
                id: id.clone(),
                text: words.join(" "),
            });
            id
        };

        // assign ids in shuffled grade order, so the id sequence carries
        // no relevance information (an id-ordered tie-break must not
        // accidentally reproduce the ideal ranking)
        let mut grades: Vec<usize> = TIER_COUNTS
            .iter()
            .flat_map(|&(grade, count)| std::iter::repeat(grade).take(count))
            .collect();
        grades.shuffle(&mut rng);
        for grade in grades {
            let chosen: Vec<String> = q_tokens
                .choose_multiple(&mut rng, grade)
                .cloned()
                .collect();
            let id = make_doc(&chosen, &mut rng);
            qrels.push(QrelRecord {
                query_id: qid.clone(),
                doc_id: id,
                rel: grade as f64,
            });
        }
        for _ in 0..spec.fillers_per_query {
            make_doc(&[], &mut rng);
        }
    }

    SyntheticCorpus {
        docs,
        queries,
        qrels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{apply_coalition, Coalition};
    use crate::rankers::{rank, Bm25Ranker};
    use crate::shapley::CoalitionGame;

    #[test]
    fn games_are_deterministic_in_the_seed() {
        let a = SyntheticGame::generate(42, ValueFn::ndcg(), GameVariant::Plain).unwrap();
        let b = SyntheticGame::generate(42, ValueFn::ndcg(), GameVariant::Plain).unwrap();
        assert_eq!(a.instance.features.tokens(), b.instance.features.tokens());
        assert_eq!(a.rels, b.rels);
        let ga = a.oracle().unwrap();
        let gb = b.oracle().unwrap();
        let z = Coalition::from_mask(a.instance.m(), 0b101 % (1 << a.instance.m()));
        assert_eq!(ga.value(&z).unwrap(), gb.value(&z).unwrap());
    }

    #[test]
    fn games_stay_enumerable() {
        for seed in 0..50 {
            for variant in [
                GameVariant::Plain,
                GameVariant::WithNullFeature,
                GameVariant::WithTwinFeatures,
            ] {
                let g = SyntheticGame::generate(seed, ValueFn::ndcg(), variant).unwrap();
                assert!(g.instance.m() <= 10, "seed {seed}: m = {}", g.instance.m());
                assert!(g.instance.n() >= 3);
            }
        }
    }

    #[test]
    fn null_variant_token_is_in_the_query_but_no_document() {
        for seed in 0..20 {
            let g =
                SyntheticGame::generate(seed, ValueFn::ndcg(), GameVariant::WithNullFeature)
                    .unwrap();
            let idx = g.null_feature.expect("null feature present");
            let tok = g.instance.features.token(idx);
            assert_eq!(tok, "qnull");
            assert!(g.instance.query.tokens.iter().any(|t| t == tok));
            assert!(g
                .instance
                .docs
                .iter()
                .all(|d| d.tokens.iter().all(|t| t != tok)));
        }
    }

    #[test]
    fn twin_variant_tokens_cooccur_with_equal_weight() {
        for seed in 0..20 {
            let g =
                SyntheticGame::generate(seed, ValueFn::ndcg(), GameVariant::WithTwinFeatures)
                    .unwrap();
            let (a, b) = g.twins.expect("twins present");
            let (ta, tb) = (
                g.instance.features.token(a).to_string(),
                g.instance.features.token(b).to_string(),
            );
            assert_eq!(g.ranker.weight(&ta), g.ranker.weight(&tb));
            let mut hosted = false;
            for d in &g.instance.docs {
                let has_a = d.tokens.iter().any(|t| *t == ta);
                let has_b = d.tokens.iter().any(|t| *t == tb);
                assert_eq!(has_a, has_b, "seed {seed}, doc {}", d.id);
                hosted |= has_a;
            }
            assert!(hosted, "seed {seed}: twins appear nowhere");
        }
    }

    #[test]
    fn scaled_rels_scale_exactly_the_hosting_documents() {
        let g = SyntheticGame::generate(3, ValueFn::dcg(), GameVariant::Plain).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = g.pick_scalable_feature(&mut rng).expect("scalable feature");
        let tok = g.instance.features.token(f).to_string();
        let scaled = g.scaled_rels(f, 2.0).unwrap();
        for d in &g.instance.docs {
            let before = g.rels.rel(&d.id).unwrap();
            let after = scaled.rel(&d.id).unwrap();
            if d.tokens.iter().any(|t| *t == tok) {
                assert_eq!(after, before * 2.0);
            } else {
                assert_eq!(after, before);
            }
        }
    }

    #[test]
    fn corpus_shape_and_grades() {
        let spec = CorpusSpec {
            n_queries: 5,
            fillers_per_query: 6,
            seed: 11,
        };
        let corpus = generate_corpus(&spec);
        assert_eq!(corpus.queries.len(), 5);
        assert_eq!(corpus.docs.len(), 5 * 16);
        assert_eq!(corpus.qrels.len(), 5 * 10);

        // ids are zero-padded and unique
        let mut ids: Vec<&str> = corpus.docs.iter().map(|d| d.id.as_str()).collect();
        let sorted = {
            let mut s = ids.clone();
            s.sort();
            s
        };
        assert_eq!(ids, sorted, "generation order is id order");
        ids.dedup();
        assert_eq!(ids.len(), corpus.docs.len());

        // the grade equals the number of distinct query tokens contained
        let cfg = TokenizerConfig::default();
        let by_id: std::collections::HashMap<&str, &DocRecord> =
            corpus.docs.iter().map(|d| (d.id.as_str(), d)).collect();
        for qrel in &corpus.qrels {
            let query = corpus
                .queries
                .iter()
                .find(|q| q.id == qrel.query_id)
                .unwrap();
            let q_tokens = crate::text::tokenize(&query.text, &cfg);
            let doc_tokens = crate::text::tokenize(&by_id[qrel.doc_id.as_str()].text, &cfg);
            let overlap = q_tokens
                .iter()
                .filter(|t| doc_tokens.contains(t))
                .collect::<std::collections::HashSet<_>>()
                .len();
            assert_eq!(overlap as f64, qrel.rel, "doc {}", qrel.doc_id);
            assert!((8..=14).contains(&doc_tokens.len()));
        }

        // id order must not leak the grades: an all-features-masked
        // ranking falls back to id order, and that must not coincide with
        // the ideal ordering for every query
        let disordered = corpus
            .queries
            .iter()
            .filter(|q| {
                let mut labels: Vec<(String, f64)> = corpus
                    .qrels
                    .iter()
                    .filter(|r| r.query_id == q.id)
                    .map(|r| (r.doc_id.clone(), r.rel))
                    .collect();
                labels.sort_by(|a, b| a.0.cmp(&b.0));
                labels.windows(2).any(|w| w[0].1 < w[1].1)
            })
            .count();
        assert!(
            disordered >= 4,
            "only {disordered}/5 queries have grade-disordered ids"
        );
    }

    #[test]
    fn bm25_puts_relevant_documents_on_top_of_each_query() {
        let spec = CorpusSpec {
            n_queries: 4,
            fillers_per_query: 6,
            seed: 2,
        };
        let corpus = generate_corpus(&spec);
        let cfg = TokenizerConfig::default();
        let judged = crate::corpus::qrels_by_query(&corpus.qrels);
        for q in &corpus.queries {
            let query = Query::new(&q.id, &q.text, &cfg).unwrap();
            let docs: Vec<Document> = corpus
                .docs
                .iter()
                .map(|d| Document::new(&d.id, &d.text, &cfg).unwrap())
                .collect();
            let instance = Instance::new(query, docs, None).unwrap();
            let masked = apply_coalition(&instance, &Coalition::full(instance.m())).unwrap();
            let ranking = rank(&Bm25Ranker::default(), &masked).unwrap();
            // the ten judged documents fill the ten best ranks
            for id in ranking.ids().into_iter().take(10) {
                assert!(
                    judged[&q.id].contains_key(id),
                    "query {}: unjudged doc {id} in its top 10",
                    q.id
                );
            }
        }
    }
}
