//! Score saved attributions: reconstruct an ordering from each phi vector
//! and correlate it with the model ranking the attribution explained.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rankshap::corpus::DocRecord;
use rankshap::{fidelity_against, AttributionVector, Error, Ranking, Result, TokenizerConfig};

use crate::common::{
    attribution_path, build_instance, expect_schema, index_path, read_json, tokenizer_config,
    write_json, AttributionRecord, RunIndex, SCHEMA,
};

pub struct EvaluateArgs {
    /// One or more attribution directories; each becomes a row.
    pub attributions: Vec<PathBuf>,
    pub docs: PathBuf,
    /// Override the explanation size stored with each attribution.
    pub top_t: Option<usize>,
    pub stem: String,
    pub max_features: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueryEval {
    pub query_id: String,
    pub fidelity: f64,
    pub wfidelity: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SkippedQuery {
    pub query_id: String,
    pub reason: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MethodEval {
    pub dir: String,
    pub method: String,
    pub value_fn: String,
    pub top_t: usize,
    pub n_evaluated: usize,
    pub mean_fidelity: f64,
    pub mean_wfidelity: f64,
    pub skipped: Vec<SkippedQuery>,
    pub per_query: Vec<QueryEval>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: String,
    pub methods: Vec<MethodEval>,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    if args.attributions.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one attribution directory is required".into(),
        ));
    }
    let tok = tokenizer_config(&args.stem)?;
    // query texts travel inside the attribution records, so only the
    // document collection is needed here
    let docs = rankshap::corpus::load_documents(&args.docs)?;
    let docs_by_id: BTreeMap<&str, &DocRecord> = docs.iter().map(|d| (d.id.as_str(), d)).collect();

    let mut methods = Vec::new();
    for dir in &args.attributions {
        methods.push(evaluate_dir(dir, &docs_by_id, &tok, args)?);
    }

    print_table(&methods);
    let report = EvalReport {
        schema: SCHEMA.into(),
        methods,
    };
    if let Some(out) = &args.out {
        write_json(out, &report)?;
        println!("report -> {}", out.display());
    }
    Ok(())
}

fn evaluate_dir(
    dir: &Path,
    docs_by_id: &BTreeMap<&str, &DocRecord>,
    tok: &TokenizerConfig,
    args: &EvaluateArgs,
) -> Result<MethodEval> {
    let index: RunIndex = read_json(&index_path(dir)).map_err(|_| {
        Error::InvalidConfig(format!(
            "{}: no readable index.json — not an attribution directory",
            dir.display()
        ))
    })?;
    expect_schema(&index.schema, &index_path(dir))?;

    let mut per_query = Vec::new();
    let mut skipped = Vec::new();
    for entry in &index.entries {
        if entry.status != "done" {
            skipped.push(SkippedQuery {
                query_id: entry.query_id.clone(),
                reason: entry
                    .error
                    .clone()
                    .unwrap_or_else(|| "not attributed".into()),
            });
            continue;
        }
        let path = attribution_path(dir, &entry.query_id);
        match evaluate_record(&path, docs_by_id, tok, args) {
            Ok(row) => per_query.push(row),
            Err(e) => {
                log::warn!("{}: {e}", path.display());
                skipped.push(SkippedQuery {
                    query_id: entry.query_id.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    if per_query.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "{}: no attributions to evaluate",
            dir.display()
        )));
    }

    let n = per_query.len() as f64;
    Ok(MethodEval {
        dir: dir.display().to_string(),
        method: index.method,
        value_fn: index.value_fn,
        top_t: args.top_t.unwrap_or(index.top_t),
        n_evaluated: per_query.len(),
        mean_fidelity: per_query.iter().map(|q| q.fidelity).sum::<f64>() / n,
        mean_wfidelity: per_query.iter().map(|q| q.wfidelity).sum::<f64>() / n,
        skipped,
        per_query,
    })
}

fn evaluate_record(
    path: &Path,
    docs_by_id: &BTreeMap<&str, &DocRecord>,
    tok: &TokenizerConfig,
    args: &EvaluateArgs,
) -> Result<QueryEval> {
    let record: AttributionRecord = read_json(path)?;
    expect_schema(&record.schema, path)?;

    let query = DocRecord {
        id: record.query_id.clone(),
        text: record.query_text.clone(),
    };
    let ids: Vec<String> = record
        .ranking
        .iter()
        .map(|e| e.doc_id.clone())
        .collect();
    let instance = build_instance(&query, docs_by_id, &ids, tok, args.max_features)?;
    if instance.features.tokens() != record.tokens.as_slice() {
        return Err(Error::InvalidConfig(format!(
            "{}: stored feature space does not match the corpus (did the corpus, stemmer or \
             --max-features change?)",
            path.display()
        )));
    }

    let attribution = AttributionVector::new(
        record.phi.clone(),
        record.intercept,
        record.method.clone(),
        record.value_fn.clone(),
    )?;
    let model = Ranking::from_ordered_ids(ids);
    let top_t = args.top_t.unwrap_or(record.top_t);
    let report = fidelity_against(&attribution, &instance, &model, top_t)?;
    Ok(QueryEval {
        query_id: record.query_id,
        fidelity: report.fidelity,
        wfidelity: report.wfidelity,
    })
}

fn print_table(methods: &[MethodEval]) {
    println!(
        "{:<16} {:<8} {:>6} {:>10} {:>10} {:>6}",
        "method", "value_fn", "top_t", "fidelity", "wfidelity", "n"
    );
    for m in methods {
        println!(
            "{:<16} {:<8} {:>6} {:>10.4} {:>10.4} {:>6}",
            m.method, m.value_fn, m.top_t, m.mean_fidelity, m.mean_wfidelity, m.n_evaluated
        );
        for s in &m.skipped {
            println!("  skipped {}: {}", s.query_id, s.reason);
        }
    }
}
