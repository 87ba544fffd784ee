//! Shared plumbing for the subcommands: corpus loading, instance
//! construction, output records and deterministic JSON writing.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rankshap::corpus::{load_documents, load_qrels, load_queries, qrels_by_query, DocRecord};
use rankshap::{
    rank, Document, Error, Instance, MaskedDoc, MaskedInstance, Query, RankedDoc, Ranker, Ranking,
    Result, Stemming, TokenizerConfig,
};

/// Version tag stamped into every machine-readable output.
pub const SCHEMA: &str = "rankshap/1";

/// The corpus triple a run operates on.
pub struct Corpus {
    pub docs: Vec<DocRecord>,
    pub queries: Vec<DocRecord>,
    /// query id -> doc id -> judgment
    pub qrels: HashMap<String, HashMap<String, f64>>,
}

impl Corpus {
    pub fn load(docs: &Path, queries: &Path, qrels: Option<&Path>) -> Result<Corpus> {
        Ok(Corpus {
            docs: load_documents(docs)?,
            queries: load_queries(queries)?,
            qrels: match qrels {
                Some(path) => qrels_by_query(&load_qrels(path)?),
                None => HashMap::new(),
            },
        })
    }
}

pub fn tokenizer_config(stem: &str) -> Result<TokenizerConfig> {
    let stemming: Stemming = stem.parse()?;
    Ok(TokenizerConfig::default().with_stemming(stemming))
}

/// Tokenize the whole candidate pool and rank it — the selection pass that
/// precedes explanation. No feature space is involved: nothing is masked.
pub fn rank_pool(
    query: &DocRecord,
    pool: &[DocRecord],
    ranker: &dyn Ranker,
    cfg: &TokenizerConfig,
) -> Result<Ranking> {
    let masked = MaskedInstance {
        query_tokens: rankshap::tokenize(&query.text, cfg),
        docs: pool
            .iter()
            .map(|d| MaskedDoc {
                id: d.id.clone(),
                tokens: rankshap::tokenize(&d.text, cfg),
            })
            .collect(),
    };
    rank(ranker, &masked)
}

/// Build the explanation instance for one query over a chosen document
/// subset (in the given id order).
pub fn build_instance(
    query: &DocRecord,
    docs_by_id: &BTreeMap<&str, &DocRecord>,
    chosen_ids: &[String],
    cfg: &TokenizerConfig,
    max_features: Option<usize>,
) -> Result<Instance> {
    let q = Query::new(query.id.clone(), query.text.clone(), cfg)?;
    let mut docs = Vec::with_capacity(chosen_ids.len());
    for id in chosen_ids {
        let rec = docs_by_id
            .get(id.as_str())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown document id {id:?}")))?;
        docs.push(Document::new(rec.id.clone(), rec.text.clone(), cfg)?);
    }
    Instance::new(q, docs, max_features)
}

/// One query's attribution, as written to disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributionRecord {
    pub schema: String,
    pub query_id: String,
    pub query_text: String,
    pub method: String,
    pub value_fn: String,
    pub ranker: String,
    pub seed: u64,
    pub top_t: usize,
    /// Feature-space tokens, in feature order.
    pub tokens: Vec<String>,
    /// One attribution per token.
    pub phi: Vec<f64>,
    pub intercept: f64,
    /// Model ranking of the explained documents.
    pub ranking: Vec<RankedDoc>,
    /// Frozen labels, keyed by document id.
    pub relevance: BTreeMap<String, f64>,
    /// How often the ranking model was invoked for this query.
    pub ranker_calls: u64,
}

/// Completion state of one query in an attribution run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexEntry {
    pub query_id: String,
    pub file: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The run-level index: which queries completed, with what settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunIndex {
    pub schema: String,
    pub method: String,
    pub value_fn: String,
    pub ranker: String,
    pub relevance: String,
    pub stem: String,
    pub seed: u64,
    pub top_n: usize,
    pub n_samples: usize,
    pub top_t: usize,
    pub entries: Vec<IndexEntry>,
}

/// Serialize as pretty JSON with a trailing newline. Struct field order is
/// fixed and maps are sorted, so equal values give equal bytes.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Error::InvalidConfig(format!("cannot parse {}: {e}", path.display()))
    })
}

/// Verify the schema tag of a machine-readable input.
pub fn expect_schema(found: &str, path: &Path) -> Result<()> {
    if found != SCHEMA {
        return Err(Error::InvalidConfig(format!(
            "{}: unsupported schema {found:?} (expected {SCHEMA:?})",
            path.display()
        )));
    }
    Ok(())
}

/// Map a query id to a safe, collision-free file stem: characters outside
/// [A-Za-z0-9._-] become '_', and any altered id gets a disambiguating
/// hash suffix.
pub fn file_stem_for(query_id: &str) -> String {
    let sanitized: String = query_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect();
    if sanitized == query_id {
        sanitized
    } else {
        format!("{sanitized}-{:08x}", fnv1a(query_id))
    }
}

fn fnv1a(s: &str) -> u32 {
    let mut hash: u32 = 0x811c_9dc5;
    for b in s.as_bytes() {
        hash ^= u32::from(*b);
        hash = hash.wrapping_mul(0x0100_0193);
    }
    hash
}

pub fn attribution_path(dir: &Path, query_id: &str) -> PathBuf {
    dir.join(format!("{}.json", file_stem_for(query_id)))
}

pub fn index_path(dir: &Path) -> PathBuf {
    dir.join("index.json")
}
