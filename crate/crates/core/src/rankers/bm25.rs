//! Okapi BM25 over the masked token lists.
//!
//! All collection statistics (document frequency, lengths, average length)
//! are recomputed from the masked instance on every call, so masking a
//! token genuinely changes the collection the model sees.

use crate::error::RankerError;
use crate::instance::MaskedInstance;
use crate::rankers::Ranker;

/// BM25 with the usual free parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Bm25Ranker {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Ranker {
    fn default() -> Self {
        Bm25Ranker { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Ranker {
    pub fn new(k1: f64, b: f64) -> Self {
        Bm25Ranker { k1, b }
    }
}

impl Ranker for Bm25Ranker {
    fn score(&self, masked: &MaskedInstance) -> Result<Vec<f64>, RankerError> {
        let n_docs = masked.docs.len();
        let total_len: usize = masked.docs.iter().map(|d| d.tokens.len()).sum();
        if total_len == 0 || masked.query_tokens.is_empty() {
            return Ok(vec![0.0; n_docs]);
        }
        let avgdl = total_len as f64 / n_docs as f64;

        // distinct query tokens, first-occurrence order
        let mut terms: Vec<&str> = Vec::new();
        for t in &masked.query_tokens {
            if !terms.contains(&t.as_str()) {
                terms.push(t);
            }
        }

        let mut scores = vec![0.0; n_docs];
        for term in terms {
            let df = masked
                .docs
                .iter()
                .filter(|d| d.tokens.iter().any(|t| t == term))
                .count() as f64;
            if df == 0.0 {
                continue;
            }
            let idf = (1.0 + (n_docs as f64 - df + 0.5) / (df + 0.5)).ln();
            for (i, doc) in masked.docs.iter().enumerate() {
                let tf = doc.tokens.iter().filter(|t| *t == term).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let len_norm = 1.0 - self.b + self.b * doc.tokens.len() as f64 / avgdl;
                scores[i] += idf * tf * (self.k1 + 1.0) / (tf + self.k1 * len_norm);
            }
        }
        Ok(scores)
    }

    fn concurrency_safe(&self) -> bool {
        true
    }

    fn name(&self) -> &str {
        "bm25"
    }
}
