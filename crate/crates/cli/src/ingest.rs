//! Corpus validation (and, on request, generation of the built-in
//! synthetic benchmark corpus).

use std::path::PathBuf;

use rankshap::corpus::write_jsonl;
use rankshap::{generate_corpus, CorpusSpec, Error, Result};

use crate::common::{tokenizer_config, Corpus};

pub struct IngestArgs {
    pub docs: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    /// Generate this many synthetic queries (plus their documents and
    /// judgments) before validating.
    pub synthetic: Option<usize>,
    pub fillers: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub stem: String,
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<()> {
    let (docs_path, queries_path, qrels_path) = match args.synthetic {
        Some(n_queries) => generate(args, n_queries)?,
        None => {
            let docs = args.docs.clone().ok_or_else(|| {
                Error::InvalidConfig("--docs is required (or use --synthetic)".into())
            })?;
            let queries = args
                .queries
                .clone()
                .ok_or_else(|| Error::InvalidConfig("--queries is required".into()))?;
            (docs, queries, args.qrels.clone())
        }
    };

    let corpus = Corpus::load(&docs_path, &queries_path, qrels_path.as_deref())?;
    summarize(&corpus, &args.stem)?;
    Ok(())
}

fn generate(args: &IngestArgs, n_queries: usize) -> Result<(PathBuf, PathBuf, Option<PathBuf>)> {
    let out = args
        .out
        .clone()
        .ok_or_else(|| Error::InvalidConfig("--synthetic needs --out DIR".into()))?;
    std::fs::create_dir_all(&out)?;
    let spec = CorpusSpec {
        n_queries,
        fillers_per_query: args.fillers,
        seed: args.seed,
    };
    let corpus = generate_corpus(&spec);
    let docs_path = out.join("docs.jsonl");
    let queries_path = out.join("queries.jsonl");
    let qrels_path = out.join("qrels.jsonl");
    write_jsonl(&docs_path, &corpus.docs)?;
    write_jsonl(&queries_path, &corpus.queries)?;
    write_jsonl(&qrels_path, &corpus.qrels)?;
    println!(
        "generated synthetic corpus ({} queries, {} documents, {} judgments) -> {}",
        corpus.queries.len(),
        corpus.docs.len(),
        corpus.qrels.len(),
        out.display()
    );
    Ok((docs_path, queries_path, Some(qrels_path)))
}

fn summarize(corpus: &Corpus, stem: &str) -> Result<()> {
    let tok = tokenizer_config(stem)?;
    let doc_tokens: Vec<usize> = corpus
        .docs
        .iter()
        .map(|d| rankshap::tokenize(&d.text, &tok).len())
        .collect();
    let total: usize = doc_tokens.iter().sum();
    let judged: usize = corpus.qrels.values().map(|m| m.len()).sum();
    println!("documents: {}", corpus.docs.len());
    println!("queries:   {}", corpus.queries.len());
    println!("judgments: {judged}");
    if !corpus.docs.is_empty() {
        println!(
            "tokens/doc: mean {:.1}, min {}, max {}",
            total as f64 / corpus.docs.len() as f64,
            doc_tokens.iter().min().unwrap(),
            doc_tokens.iter().max().unwrap()
        );
    }
    // judgments must reference known ids
    for (qid, docs) in &corpus.qrels {
        if !corpus.queries.iter().any(|q| &q.id == qid) {
            return Err(Error::InvalidConfig(format!(
                "qrels reference unknown query {qid:?}"
            )));
        }
        for doc_id in docs.keys() {
            if !corpus.docs.iter().any(|d| &d.id == doc_id) {
                return Err(Error::InvalidConfig(format!(
                    "qrels reference unknown document {doc_id:?}"
                )));
            }
        }
    }
    println!("ok");
    Ok(())
}

/// Validate a corpus quietly; used by tests.
#[cfg(test)]
pub fn load_for_test(
    docs: &std::path::Path,
    queries: &std::path::Path,
    qrels: Option<&std::path::Path>,
) -> Result<Corpus> {
    Corpus::load(docs, queries, qrels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_corpus_round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let args = IngestArgs {
            docs: None,
            queries: None,
            qrels: None,
            synthetic: Some(3),
            fillers: 2,
            seed: 11,
            out: Some(dir.path().to_path_buf()),
            stem: "porter".into(),
        };
        cmd_ingest(&args).unwrap();
        let corpus = load_for_test(
            &dir.path().join("docs.jsonl"),
            &dir.path().join("queries.jsonl"),
            Some(&dir.path().join("qrels.jsonl")),
        )
        .unwrap();
        assert_eq!(corpus.queries.len(), 3);
        assert_eq!(corpus.docs.len(), 3 * (10 + 2));
        assert_eq!(corpus.qrels.len(), 3);
    }

    #[test]
    fn missing_required_paths_error_out() {
        let args = IngestArgs {
            docs: None,
            queries: None,
            qrels: None,
            synthetic: None,
            fillers: 6,
            seed: 0,
            out: None,
            stem: "porter".into(),
        };
        assert!(cmd_ingest(&args).is_err());
    }
}
