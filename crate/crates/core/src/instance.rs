//! Feature spaces over query/document tokens, coalitions, and masking.
//!
//! A feature is a distinct token drawn from the query and the candidate
//! documents. A coalition selects which features are *present*; applying it
//! to an instance deletes every occurrence of the absent tokens, which is
//! how the black-box ranker is queried about feature subsets.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{Document, Query};

/// Ordered set of distinct tokens the attribution is computed over.
///
/// Features are ordered lexicographically, so indices do not depend on the
/// order documents were listed in. An optional frequency cap keeps the most
/// frequent tokens (ties lexicographic); query tokens are never dropped by
/// the cap, even if that leaves more than `cap` features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpace {
    features: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl FeatureSpace {
    pub fn build(
        query_tokens: &[String],
        doc_tokens: &[&[String]],
        cap: Option<usize>,
    ) -> Result<Self> {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for tok in query_tokens {
            *counts.entry(tok).or_default() += 1;
        }
        for doc in doc_tokens {
            for tok in *doc {
                *counts.entry(tok).or_default() += 1;
            }
        }
        if counts.is_empty() {
            return Err(Error::EmptyFeatureSpace);
        }

        let query_set: HashSet<&str> = query_tokens.iter().map(String::as_str).collect();
        let mut features: Vec<String> = match cap {
            Some(cap) if counts.len() > cap => {
                // most frequent first, ties lexicographic, query tokens exempt
                let mut ranked: Vec<(&str, usize)> = counts
                    .iter()
                    .filter(|(tok, _)| !query_set.contains(*tok))
                    .map(|(tok, n)| (*tok, *n))
                    .collect();
                ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
                let slots = cap.saturating_sub(query_set.len());
                query_set
                    .iter()
                    .map(|t| t.to_string())
                    .chain(ranked.into_iter().take(slots).map(|(t, _)| t.to_string()))
                    .collect()
            }
            _ => counts.keys().map(|t| t.to_string()).collect(),
        };
        features.sort();
        let index = features
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(FeatureSpace { features, index })
    }

    /// Number of features, usually called `m`.
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, i: usize) -> &str {
        &self.features[i]
    }

    pub fn tokens(&self) -> &[String] {
        &self.features
    }

    /// Rebuild the lookup table, e.g. after deserializing.
    pub fn reindex(&mut self) {
        self.index = self
            .features
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }
}

/// Subset of present features, stored as a bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coalition {
    n: usize,
    blocks: Vec<u64>,
}

impl Coalition {
    pub fn empty(n: usize) -> Self {
        Coalition {
            n,
            blocks: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut c = Coalition::empty(n);
        for i in 0..n {
            c.insert(i);
        }
        c
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut c = Coalition::empty(n);
        for &i in indices {
            c.insert(i);
        }
        c
    }

    /// Low bit of `mask` is feature 0. Handy in tests for m <= 64.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64);
        let mut c = Coalition::empty(n);
        if n > 0 {
            let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            c.blocks[0] = mask & keep;
        }
        c
    }

    /// Number of features the coalition ranges over (the `m` of the game).
    pub fn universe(&self) -> usize {
        self.n
    }

    /// Number of present features.
    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        self.blocks[i / 64] & (1u64 << (i % 64)) != 0
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.blocks[i / 64] |= 1u64 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.blocks[i / 64] &= !(1u64 << (i % 64));
    }

    pub fn with(&self, i: usize) -> Self {
        let mut c = self.clone();
        c.insert(i);
        c
    }

    pub fn without(&self, i: usize) -> Self {
        let mut c = self.clone();
        c.remove(i);
        c
    }

    pub fn complement(&self) -> Self {
        let mut c = Coalition::empty(self.n);
        for i in 0..self.n {
            if !self.contains(i) {
                c.insert(i);
            }
        }
        c
    }

    pub fn is_subset_of(&self, other: &Coalition) -> bool {
        self.n == other.n
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a & !b == 0)
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.contains(i)).collect()
    }
}

impl std::fmt::Display for Coalition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.n {
            write!(f, "{}", if self.contains(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// One query with its candidate documents and the feature space built from
/// exactly those texts.
#[derive(Debug, Clone)]
pub struct Instance {
    pub query: Query,
    pub docs: Vec<Document>,
    pub features: FeatureSpace,
}

impl Instance {
    pub fn new(query: Query, docs: Vec<Document>, cap: Option<usize>) -> Result<Self> {
        if docs.len() < 2 {
            return Err(Error::TooFewDocuments(docs.len()));
        }
        let mut seen = HashSet::new();
        for d in &docs {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::DuplicateDocId(d.id.clone()));
            }
        }
        let doc_tokens: Vec<&[String]> = docs.iter().map(|d| d.tokens.as_slice()).collect();
        let features = FeatureSpace::build(&query.tokens, &doc_tokens, cap)?;
        Ok(Instance {
            query,
            docs,
            features,
        })
    }

    /// Feature count.
    pub fn m(&self) -> usize {
        self.features.len()
    }

    /// Document count.
    pub fn n(&self) -> usize {
        self.docs.len()
    }

    pub fn doc_ids(&self) -> Vec<String> {
        self.docs.iter().map(|d| d.id.clone()).collect()
    }
}

/// Token lists after a coalition has been applied.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedInstance {
    pub query_tokens: Vec<String>,
    pub docs: Vec<MaskedDoc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskedDoc {
    pub id: String,
    pub tokens: Vec<String>,
}

/// Delete every occurrence of the absent features from the query and all
/// documents. Tokens outside the feature space (dropped by a frequency cap)
/// are background text and survive every coalition.
pub fn apply_coalition(instance: &Instance, z: &Coalition) -> Result<MaskedInstance> {
    let m = instance.m();
    if z.universe() != m {
        return Err(Error::CoalitionSize {
            expected: m,
            got: z.universe(),
        });
    }
    let survives = |tok: &String| match instance.features.index_of(tok) {
        Some(i) => z.contains(i),
        None => true,
    };
    let query_tokens = instance
        .query
        .tokens
        .iter()
        .filter(|t| survives(t))
        .cloned()
        .collect();
    let docs = instance
        .docs
        .iter()
        .map(|d| MaskedDoc {
            id: d.id.clone(),
            tokens: d.tokens.iter().filter(|t| survives(t)).cloned().collect(),
        })
        .collect();
    Ok(MaskedInstance { query_tokens, docs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::TokenizerConfig;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn small_instance() -> Instance {
        let cfg = TokenizerConfig::default();
        let query = Query::new("q1", "best car", &cfg).unwrap();
        let docs = vec![
            Document::new("d1", "car deals best price", &cfg).unwrap(),
            Document::new("d2", "used car", &cfg).unwrap(),
        ];
        Instance::new(query, docs, None).unwrap()
    }

    #[test]
    fn feature_space_is_distinct_and_sorted() {
        let inst = small_instance();
        assert_eq!(
            inst.features.tokens(),
            &["best", "car", "deals", "price", "used"]
        );
        assert_eq!(inst.m(), 5);
        assert_eq!(inst.features.index_of("deals"), Some(2));
        assert_eq!(inst.features.index_of("missing"), None);
    }

    #[test]
    fn empty_feature_space_is_an_error() {
        let cfg = TokenizerConfig::default();
        let query = Query::new("q", "", &cfg).unwrap();
        let docs = vec![
            Document::new("d1", "?!", &cfg).unwrap(),
            Document::new("d2", "--", &cfg).unwrap(),
        ];
        assert!(matches!(
            Instance::new(query, docs, None),
            Err(Error::EmptyFeatureSpace)
        ));
    }

    #[test]
    fn masking_removes_all_occurrences_everywhere() {
        let inst = small_instance();
        let mut z = Coalition::full(inst.m());
        z.remove(inst.features.index_of("best").unwrap());
        let masked = apply_coalition(&inst, &z).unwrap();
        assert_eq!(masked.query_tokens, toks(&["car"]));
        assert_eq!(masked.docs[0].tokens, toks(&["car", "deals", "price"]));
        assert_eq!(masked.docs[1].tokens, toks(&["used", "car"]));
    }

    #[test]
    fn full_coalition_is_identity_and_empty_removes_all_features() {
        let inst = small_instance();
        let full = apply_coalition(&inst, &Coalition::full(inst.m())).unwrap();
        assert_eq!(full.query_tokens, inst.query.tokens);
        assert_eq!(full.docs[0].tokens, inst.docs[0].tokens);

        let empty = apply_coalition(&inst, &Coalition::empty(inst.m())).unwrap();
        assert!(empty.query_tokens.is_empty());
        assert!(empty.docs.iter().all(|d| d.tokens.is_empty()));
    }

    #[test]
    fn cap_keeps_most_frequent_tokens_but_never_query_tokens() {
        let cfg = TokenizerConfig::default();
        // "rare" is the query token with a single occurrence; "noise" is the
        // most frequent doc token, "mid" second; "once"/"twice" trail.
        let query = Query::new("q", "rare", &cfg).unwrap();
        let docs = vec![
            Document::new("d1", "noise noise noise mid mid once", &cfg).unwrap(),
            Document::new("d2", "noise twice twice mid rare", &cfg).unwrap(),
        ];
        let inst = Instance::new(query, docs, Some(3)).unwrap();
        assert_eq!(inst.features.tokens(), &["mid", "noise", "rare"]);

        // ...and the dropped tokens survive every coalition as background
        let masked = apply_coalition(&inst, &Coalition::empty(inst.m())).unwrap();
        assert_eq!(masked.docs[0].tokens, toks(&["once"]));
        assert_eq!(masked.docs[1].tokens, toks(&["twice", "twice"]));
    }

    #[test]
    fn cap_ties_break_lexicographically() {
        let cfg = TokenizerConfig::default();
        let query = Query::new("q", "q0", &cfg).unwrap();
        let docs = vec![
            Document::new("d1", "beta alpha", &cfg).unwrap(),
            Document::new("d2", "delta gamma", &cfg).unwrap(),
        ];
        // all doc tokens occur once; cap leaves room for two of them
        let inst = Instance::new(query, docs, Some(3)).unwrap();
        assert_eq!(inst.features.tokens(), &["alpha", "beta", "q0"]);
    }

    #[test]
    fn instances_need_two_documents_and_distinct_ids() {
        let cfg = TokenizerConfig::default();
        let query = Query::new("q", "a", &cfg).unwrap();
        let one = vec![Document::new("d1", "a", &cfg).unwrap()];
        assert!(matches!(
            Instance::new(query.clone(), one, None),
            Err(Error::TooFewDocuments(1))
        ));
        let dup = vec![
            Document::new("d1", "a", &cfg).unwrap(),
            Document::new("d1", "b", &cfg).unwrap(),
        ];
        assert!(matches!(
            Instance::new(query, dup, None),
            Err(Error::DuplicateDocId(_))
        ));
    }

    #[test]
    fn coalition_bit_ops_round_trip() {
        let mut z = Coalition::empty(70);
        z.insert(0);
        z.insert(65);
        assert!(z.contains(0) && z.contains(65) && !z.contains(64));
        assert_eq!(z.len(), 2);
        assert_eq!(z.indices(), vec![0, 65]);
        assert_eq!(z.complement().len(), 68);
        assert!(z.is_subset_of(&Coalition::full(70)));
        assert!(!Coalition::full(70).is_subset_of(&z));
        z.remove(65);
        assert_eq!(z, Coalition::from_indices(70, &[0]));
        assert_eq!(Coalition::from_mask(4, 0b0101).indices(), vec![0, 2]);
        assert_eq!(format!("{}", Coalition::from_mask(4, 0b0101)), "1010");
    }

    #[test]
    fn coalition_size_mismatch_is_an_error() {
        let inst = small_instance();
        let wrong = Coalition::full(inst.m() + 1);
        assert!(matches!(
            apply_coalition(&inst, &wrong),
            Err(Error::CoalitionSize { .. })
        ));
    }
}
