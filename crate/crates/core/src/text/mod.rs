//! Text processing: tokenization, stemming, stopwords, and the document /
//! query types everything downstream consumes.

mod porter;

pub use porter::stem as porter_stem;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stemming algorithm applied after case folding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stemming {
    #[default]
    None,
    Porter,
}

impl std::str::FromStr for Stemming {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Stemming::None),
            "porter" => Ok(Stemming::Porter),
            other => Err(Error::InvalidConfig(format!(
                "unknown stemmer {other:?} (expected none or porter)"
            ))),
        }
    }
}

/// How raw text is turned into tokens.
///
/// Tokens are maximal runs of Unicode alphanumeric characters. With the
/// default config text is lowercased and neither stemmed nor filtered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub stemming: Stemming,
    /// Dropped *after* stemming, so with stemming enabled the list must
    /// contain stemmed forms.
    pub stopwords: Option<HashSet<String>>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            stemming: Stemming::None,
            stopwords: None,
        }
    }
}

impl TokenizerConfig {
    pub fn with_stemming(mut self, stemming: Stemming) -> Self {
        self.stemming = stemming;
        self
    }

    pub fn with_stopwords<I: IntoIterator<Item = String>>(mut self, words: I) -> Self {
        self.stopwords = Some(words.into_iter().collect());
        self
    }
}

/// Split `text` into tokens under `cfg`. Deterministic: equal inputs give
/// equal outputs.
pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> Vec<String> {
    let mut tokens = Vec::new();
    for run in text.split(|c: char| !c.is_alphanumeric()) {
        if run.is_empty() {
            continue;
        }
        let mut token = if cfg.lowercase {
            run.to_lowercase()
        } else {
            run.to_string()
        };
        if cfg.stemming == Stemming::Porter {
            token = porter_stem(&token);
        }
        if let Some(stop) = &cfg.stopwords {
            if stop.contains(&token) {
                continue;
            }
        }
        tokens.push(token);
    }
    tokens
}

/// A candidate document: raw text plus its token stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, cfg: &TokenizerConfig) -> Result<Self> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(Error::EmptyId);
        }
        let text = text.into();
        let tokens = tokenize(&text, cfg);
        Ok(Document { id, text, tokens })
    }
}

/// A query, tokenized the same way as documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
}

impl Query {
    pub fn new(id: impl Into<String>, text: impl Into<String>, cfg: &TokenizerConfig) -> Result<Self> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(Error::EmptyId);
        }
        let text = text.into();
        let tokens = tokenize(&text, cfg);
        Ok(Query { id, text, tokens })
    }
}
