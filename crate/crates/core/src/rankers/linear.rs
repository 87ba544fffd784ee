//! Linear bag-of-words scorer, the transparent oracle used in tests and
//! axiom checks.

use std::collections::HashMap;

use crate::error::RankerError;
use crate::instance::MaskedInstance;
use crate::rankers::Ranker;

/// Scores a document as the sum of weights of the distinct tokens it
/// contains (presence, not counts). Tokens without a weight contribute 0;
/// query tokens only matter through their weights inside documents.
#[derive(Debug, Clone, Default)]
pub struct LinearRanker {
    weights: HashMap<String, f64>,
}

impl LinearRanker {
    pub fn new(weights: HashMap<String, f64>) -> Self {
        LinearRanker { weights }
    }

    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, f64)>>(pairs: I) -> Self {
        LinearRanker {
            weights: pairs
                .into_iter()
                .map(|(t, w)| (t.to_string(), w))
                .collect(),
        }
    }

    pub fn weight(&self, token: &str) -> f64 {
        self.weights.get(token).copied().unwrap_or(0.0)
    }
}

impl Ranker for LinearRanker {
    fn score(&self, masked: &MaskedInstance) -> Result<Vec<f64>, RankerError> {
        let scores = masked
            .docs
            .iter()
            .map(|doc| {
                let mut seen: Vec<&str> = Vec::new();
                let mut score = 0.0;
                for tok in &doc.tokens {
                    if !seen.contains(&tok.as_str()) {
                        seen.push(tok);
                        score += self.weight(tok);
                    }
                }
                score
            })
            .collect();
        Ok(scores)
    }

    fn concurrency_safe(&self) -> bool {
        true
    }

    fn name(&self) -> &str {
        "linear"
    }
}
