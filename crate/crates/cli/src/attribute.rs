//! The attribution pipeline: per query, rank the candidate pool, keep the
//! top-n documents, freeze relevance labels, and attribute the value of
//! the full feature set with the configured method. Each query's result
//! lands in its own JSON file; an index file records completion status so
//! interrupted runs resume instead of recomputing.

use std::collections::{BTreeMap, HashSet};
use std::fs;

use rayon::prelude::*;

use rankshap::corpus::DocRecord;
use rankshap::{
    apply_coalition, exact_rankshap, exs_attribution, infer_relevance, kernel_rankshap,
    permutation_rankshap, random_attribution, rank, rankingshap_attribution, AttributionVector,
    Coalition, CountingRanker, Error, GameOracle, Ranker, RelevanceSource, Result, SamplerConfig,
    TokenizerConfig, ValueFn,
};

use crate::common::{
    attribution_path, build_instance, index_path, rank_pool, read_json, tokenizer_config,
    write_json, AttributionRecord, Corpus, IndexEntry, RunIndex, SCHEMA,
};
use crate::config::{build_ranker, Method, RelevanceSpec, RunConfig};

pub fn cmd_attribute(config: &RunConfig, force: bool) -> Result<()> {
    config.validate()?;
    let tok = tokenizer_config(&config.stem)?;
    let corpus = Corpus::load(&config.docs, &config.queries, config.qrels.as_deref())?;
    if corpus.queries.is_empty() {
        return Err(Error::InvalidConfig("no queries to attribute".into()));
    }
    if corpus.docs.len() < config.top_n {
        return Err(Error::InvalidConfig(format!(
            "--top-n {} exceeds the candidate count {}",
            config.top_n,
            corpus.docs.len()
        )));
    }
    let ranker = build_ranker(&config.ranker)?;

    fs::create_dir_all(&config.out)?;
    let resume = if force {
        HashSet::new()
    } else {
        resumable_queries(config)
    };

    let docs_by_id: BTreeMap<&str, &DocRecord> = corpus
        .docs
        .iter()
        .map(|d| (d.id.as_str(), d))
        .collect();

    let process = |query: &DocRecord| -> IndexEntry {
        let path = attribution_path(&config.out, &query.id);
        if resume.contains(&query.id) && path.exists() {
            log::debug!("query {:?}: already attributed, skipping", query.id);
            return done_entry(query);
        }
        match attribute_one(config, &tok, &corpus, &docs_by_id, query, ranker.as_ref()) {
            Ok(record) => match write_json(&path, &record) {
                Ok(()) => done_entry(query),
                Err(e) => failed_entry(query, &e),
            },
            Err(e) => {
                log::warn!("query {:?} failed: {e}", query.id);
                failed_entry(query, &e)
            }
        }
    };

    let parallel = config.jobs > 1 && ranker.concurrency_safe();
    if config.jobs > 1 && !ranker.concurrency_safe() {
        log::warn!(
            "ranker {:?} is not concurrency-safe; ignoring --jobs {}",
            ranker.name(),
            config.jobs
        );
    }
    let entries: Vec<IndexEntry> = if parallel {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
        pool.install(|| corpus.queries.par_iter().map(process).collect())
    } else {
        corpus.queries.iter().map(process).collect()
    };

    let done = entries.iter().filter(|e| e.status == "done").count();
    let index = RunIndex {
        schema: SCHEMA.into(),
        method: config.method.as_str().into(),
        value_fn: config.value_fn.clone(),
        ranker: config.ranker.clone(),
        relevance: config.relevance.as_str().into(),
        stem: config.stem.clone(),
        seed: config.seed,
        top_n: config.top_n,
        n_samples: config.n_samples,
        top_t: config.top_t,
        entries,
    };
    write_json(&index_path(&config.out), &index)?;

    println!(
        "attributed {done}/{} queries with {} -> {}",
        corpus.queries.len(),
        config.method.as_str(),
        config.out.display()
    );
    if done == 0 {
        return Err(Error::InvalidConfig("all queries failed".into()));
    }
    Ok(())
}

/// Query ids recorded as done by a previous run with identical settings.
fn resumable_queries(config: &RunConfig) -> HashSet<String> {
    let Ok(old) = read_json::<RunIndex>(&index_path(&config.out)) else {
        return HashSet::new();
    };
    let same_run = old.schema == SCHEMA
        && old.method == config.method.as_str()
        && old.value_fn == config.value_fn
        && old.ranker == config.ranker
        && old.relevance == config.relevance.as_str()
        && old.stem == config.stem
        && old.seed == config.seed
        && old.top_n == config.top_n
        && old.n_samples == config.n_samples
        && old.top_t == config.top_t;
    if !same_run {
        log::info!("existing index was produced with different settings; recomputing");
        return HashSet::new();
    }
    old.entries
        .into_iter()
        .filter(|e| e.status == "done")
        .map(|e| e.query_id)
        .collect()
}

fn done_entry(query: &DocRecord) -> IndexEntry {
    IndexEntry {
        query_id: query.id.clone(),
        file: format!("{}.json", crate::common::file_stem_for(&query.id)),
        status: "done".into(),
        error: None,
    }
}

fn failed_entry(query: &DocRecord, err: &Error) -> IndexEntry {
    IndexEntry {
        query_id: query.id.clone(),
        file: format!("{}.json", crate::common::file_stem_for(&query.id)),
        status: "failed".into(),
        error: Some(err.to_string()),
    }
}

/// Per-query seed: the run seed mixed with the query id, so every query
/// draws its own coalitions but reruns are exact replays.
pub fn query_seed(run_seed: u64, query_id: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in query_id.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    run_seed ^ hash
}

fn attribute_one(
    config: &RunConfig,
    tok: &TokenizerConfig,
    corpus: &Corpus,
    docs_by_id: &BTreeMap<&str, &DocRecord>,
    query: &DocRecord,
    ranker: &dyn Ranker,
) -> Result<AttributionRecord> {
    let counting = CountingRanker::new(ranker);

    // selection pass: the model picks which documents get explained
    let pool_ranking = rank_pool(query, &corpus.docs, &counting, tok)?;
    let chosen: Vec<String> = pool_ranking
        .ids()
        .into_iter()
        .take(config.top_n)
        .map(String::from)
        .collect();

    let instance = build_instance(query, docs_by_id, &chosen, tok, config.max_features)?;
    let m = instance.m();

    // the explained ranking: the model over exactly these documents
    let full = apply_coalition(&instance, &Coalition::full(m))?;
    let model_ranking = rank(&counting, &full)?;

    let source = match config.relevance {
        RelevanceSpec::Qrels => RelevanceSource::Qrels(
            corpus.qrels.get(&query.id).cloned().unwrap_or_default(),
        ),
        RelevanceSpec::Model => RelevanceSource::ModelScores,
        RelevanceSpec::Bm25 => RelevanceSource::Bm25,
    };
    let rels = infer_relevance(&source, &instance, &counting)?;
    let value_fn = ValueFn::parse(&config.value_fn, Some(&model_ranking))?;

    let qseed = query_seed(config.seed, &query.id);
    let sampler = SamplerConfig {
        n_samples: config.n_samples,
        seed: qseed,
        ..SamplerConfig::default()
    };

    let attribution: AttributionVector = match config.method {
        Method::RankShap | Method::RankShapExact | Method::Permutation => {
            let game_counter = CountingRanker::new(&counting);
            let oracle = GameOracle::new(&instance, &game_counter, value_fn, rels.clone())?;
            let a = match config.method {
                Method::RankShap => kernel_rankshap(&oracle, &sampler)?,
                Method::RankShapExact => exact_rankshap(&oracle)?,
                Method::Permutation => {
                    let n_permutations = (config.n_samples / m).max(1);
                    permutation_rankshap(&oracle, n_permutations, qseed)?
                }
                _ => unreachable!(),
            };
            // the game may consult the model once per proper coalition
            // plus the two endpoints (kernel) or once per subset (exact)
            match config.method {
                Method::RankShap => assert!(
                    game_counter.calls() <= config.n_samples as u64 + 2,
                    "kernel attribution exceeded its oracle budget: {} > {}",
                    game_counter.calls(),
                    config.n_samples + 2
                ),
                Method::RankShapExact => assert!(
                    game_counter.calls() <= 1 << m,
                    "exact attribution exceeded 2^m oracle calls"
                ),
                _ => {}
            }
            a
        }
        Method::RankingShap => rankingshap_attribution(&instance, &counting, &sampler)?,
        Method::Exs => {
            let k = config.exs_k.min(instance.n());
            exs_attribution(&instance, &counting, k, &sampler)?
        }
        Method::Random => random_attribution(m, qseed)?,
    };

    let mut relevance = BTreeMap::new();
    for doc in &instance.docs {
        relevance.insert(doc.id.clone(), rels.rel(&doc.id)?);
    }

    Ok(AttributionRecord {
        schema: SCHEMA.into(),
        query_id: query.id.clone(),
        query_text: query.text.clone(),
        method: attribution.method.clone(),
        value_fn: attribution.value_fn.clone(),
        ranker: counting.name().to_string(),
        seed: config.seed,
        top_t: config.top_t,
        tokens: instance.features.tokens().to_vec(),
        phi: attribution.phi.clone(),
        intercept: attribution.intercept,
        ranking: model_ranking.entries().to_vec(),
        relevance,
        ranker_calls: counting.calls(),
    })
}
