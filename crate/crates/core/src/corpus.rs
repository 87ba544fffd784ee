//! JSONL corpus files: documents, queries, and relevance judgments.
//!
//! Documents and queries share one record shape, `{"id": ..., "text": ...}`,
//! one JSON object per line. Judgments are `{"query_id", "doc_id", "rel"}`.
//! Blank lines are tolerated; anything else malformed reports its path and
//! line number.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One document or query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRecord {
    pub id: String,
    pub text: String,
}

/// One graded relevance judgment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrelRecord {
    pub query_id: String,
    pub doc_id: String,
    pub rel: f64,
}

fn malformed(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::MalformedRecord {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_lines<T, F>(path: &Path, mut validate: F) -> Result<Vec<T>>
where
    T: for<'de> Deserialize<'de>,
    F: FnMut(&T, usize) -> Result<()>,
{
    let file = File::open(path).map_err(|e| malformed(path, 0, format!("cannot open: {e}")))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T =
            serde_json::from_str(&line).map_err(|e| malformed(path, lineno, e.to_string()))?;
        validate(&record, lineno)?;
        records.push(record);
    }
    Ok(records)
}

/// Load a document collection, rejecting blank and duplicate ids.
pub fn load_documents(path: &Path) -> Result<Vec<DocRecord>> {
    let mut seen = HashMap::new();
    parse_lines(path, |r: &DocRecord, lineno| {
        if r.id.trim().is_empty() {
            return Err(malformed(path, lineno, "blank id"));
        }
        if let Some(first) = seen.insert(r.id.clone(), lineno) {
            return Err(malformed(
                path,
                lineno,
                format!("duplicate id {:?} (first seen on line {first})", r.id),
            ));
        }
        Ok(())
    })
}

/// Queries use the same record shape and rules as documents.
pub fn load_queries(path: &Path) -> Result<Vec<DocRecord>> {
    load_documents(path)
}

/// Load relevance judgments, rejecting non-finite or negative grades and
/// duplicate (query, document) pairs.
pub fn load_qrels(path: &Path) -> Result<Vec<QrelRecord>> {
    let mut seen = HashMap::new();
    parse_lines(path, |r: &QrelRecord, lineno| {
        if r.query_id.trim().is_empty() || r.doc_id.trim().is_empty() {
            return Err(malformed(path, lineno, "blank id"));
        }
        if !r.rel.is_finite() || r.rel < 0.0 {
            return Err(malformed(
                path,
                lineno,
                format!("relevance grade must be finite and >= 0, got {}", r.rel),
            ));
        }
        let key = (r.query_id.clone(), r.doc_id.clone());
        if let Some(first) = seen.insert(key, lineno) {
            return Err(malformed(
                path,
                lineno,
                format!(
                    "duplicate judgment for ({:?}, {:?}) (first seen on line {first})",
                    r.query_id, r.doc_id
                ),
            ));
        }
        Ok(())
    })
}

/// Group judgments by query id for lookup.
pub fn qrels_by_query(records: &[QrelRecord]) -> HashMap<String, HashMap<String, f64>> {
    let mut map: HashMap<String, HashMap<String, f64>> = HashMap::new();
    for r in records {
        map.entry(r.query_id.clone())
            .or_default()
            .insert(r.doc_id.clone(), r.rel);
    }
    map
}

/// Write records as one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r)
            .map_err(|e| Error::InvalidConfig(format!("serialize: {e}")))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
