//! Rank every query's candidate pool and write the orderings as JSONL.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use rankshap::{Error, RankedDoc, Result};

use crate::common::{rank_pool, tokenizer_config, Corpus, SCHEMA};
use crate::config::build_ranker;

pub struct RankArgs {
    pub docs: PathBuf,
    pub queries: PathBuf,
    pub ranker: String,
    /// Keep only the best n documents per query (all when absent).
    pub top_n: Option<usize>,
    pub stem: String,
    pub out: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RankRecord {
    pub schema: String,
    pub query_id: String,
    pub ranking: Vec<RankedDoc>,
}

pub fn cmd_rank(args: &RankArgs) -> Result<()> {
    let tok = tokenizer_config(&args.stem)?;
    let corpus = Corpus::load(&args.docs, &args.queries, None)?;
    if corpus.queries.is_empty() {
        return Err(Error::InvalidConfig("no queries to rank".into()));
    }
    let ranker = build_ranker(&args.ranker)?;

    let mut out = BufWriter::new(File::create(&args.out)?);
    for query in &corpus.queries {
        let ranking = rank_pool(query, &corpus.docs, ranker.as_ref(), &tok)?;
        let mut entries = ranking.entries().to_vec();
        if let Some(n) = args.top_n {
            entries.truncate(n);
        }
        let record = RankRecord {
            schema: SCHEMA.into(),
            query_id: query.id.clone(),
            ranking: entries,
        };
        serde_json::to_writer(&mut out, &record).map_err(Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    println!(
        "ranked {} queries over {} documents -> {}",
        corpus.queries.len(),
        corpus.docs.len(),
        args.out.display()
    );
    Ok(())
}
