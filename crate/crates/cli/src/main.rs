//! `rankshap` — attribute a ranking model's output to query/document
//! tokens, evaluate explanation quality, and stress-test the attribution
//! axioms.

mod attribute;
mod axioms_cmd;
mod common;
mod config;
mod evaluate;
mod ingest;
mod rank;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use rankshap::Result;

use config::{Layers, Method, RelevanceSpec, RunConfig};

#[derive(Parser)]
#[command(
    name = "rankshap",
    version,
    about = "Shapley-value feature attributions for black-box ranking models"
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Validate a corpus, or generate the built-in synthetic benchmark.
    Ingest(IngestCli),
    /// Rank each query's candidate pool and save the orderings.
    Rank(RankCli),
    /// Attribute model rankings to tokens, one JSON file per query.
    Attribute(AttributeCli),
    /// Score saved attributions by how well they reconstruct the ranking.
    Evaluate(EvaluateCli),
    /// Hunt for axiom violations across methods and metrics.
    Axioms(AxiomsCli),
    /// Render saved attributions as bar charts (SVG) and TSV.
    Report(ReportCli),
}

#[derive(Args)]
struct IngestCli {
    /// Documents as JSONL ({"id", "text"} per line).
    #[arg(long)]
    docs: Option<PathBuf>,
    /// Queries as JSONL ({"id", "text"} per line).
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Judgments as JSONL ({"query_id", "doc_id", "rel"} per line).
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Generate a synthetic corpus with this many queries instead of
    /// reading one (writes docs/queries/qrels JSONL into --out).
    #[arg(long, num_args = 0..=1, default_missing_value = "25")]
    synthetic: Option<usize>,
    /// Unjudged filler documents per synthetic query.
    #[arg(long, default_value_t = 6)]
    fillers: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output directory for --synthetic.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stemmer: porter or none.
    #[arg(long, default_value = "porter")]
    stem: String,
}

#[derive(Args)]
struct RankCli {
    #[arg(long)]
    docs: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// bm25[:K1,B], linear:FILE, subprocess:CMD or http:URL.
    #[arg(long, default_value = "bm25")]
    ranker: String,
    /// Keep only the best n documents per query.
    #[arg(long)]
    top_n: Option<usize>,
    #[arg(long, default_value = "porter")]
    stem: String,
    /// Output JSONL path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AttributeCli {
    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    docs: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// bm25[:K1,B], linear:FILE, subprocess:CMD or http:URL.
    #[arg(long)]
    ranker: Option<String>,
    /// rankshap, rankshap-exact, permutation, rankingshap, exs or random.
    #[arg(long)]
    method: Option<Method>,
    /// cg, dcg, ndcg[@K], map, rr, p@K or tau.
    #[arg(long)]
    value_fn: Option<String>,
    /// Label source: qrels, model or bm25.
    #[arg(long)]
    relevance: Option<RelevanceSpec>,
    /// Explain the top-n documents of the model ranking.
    #[arg(long)]
    top_n: Option<usize>,
    /// Oracle-call budget for sampling estimators.
    #[arg(long)]
    n_samples: Option<usize>,
    /// Explanation size used downstream (evaluate, report).
    #[arg(long)]
    top_t: Option<usize>,
    /// Falls back to the config file, then $RANKSHAP_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (one JSON per query plus index.json).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Queries attributed in parallel (needs a concurrency-safe ranker).
    #[arg(long)]
    jobs: Option<usize>,
    /// Documents whose top-k membership the exs surrogate explains.
    #[arg(long)]
    exs_k: Option<usize>,
    /// Cap the feature space at the most frequent tokens.
    #[arg(long)]
    max_features: Option<usize>,
    /// Stemmer: porter or none.
    #[arg(long)]
    stem: Option<String>,
    /// Recompute queries even when the index marks them done.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct EvaluateCli {
    /// Attribution directories (one table row each).
    #[arg(long, required = true, num_args = 1..)]
    attributions: Vec<PathBuf>,
    #[arg(long)]
    docs: PathBuf,
    /// Override the stored explanation size.
    #[arg(long)]
    top_t: Option<usize>,
    #[arg(long, default_value = "porter")]
    stem: String,
    /// Must match the attribute run when it capped the feature space.
    #[arg(long)]
    max_features: Option<usize>,
    /// Write the full report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AxiomsCli {
    /// Games per method/axiom cell.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// Trials per metric sensitivity check.
    #[arg(long, default_value_t = 10_000)]
    metric_trials: usize,
    /// Write the table as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportCli {
    /// Attribution directory to chart.
    #[arg(long)]
    attributions: PathBuf,
    /// Output directory for SVG/TSV files.
    #[arg(long)]
    out: PathBuf,
    /// Override the stored explanation size.
    #[arg(long)]
    top_t: Option<usize>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Commands::Ingest(a) => ingest::cmd_ingest(&ingest::IngestArgs {
            docs: a.docs,
            queries: a.queries,
            qrels: a.qrels,
            synthetic: a.synthetic,
            fillers: a.fillers,
            seed: a.seed,
            out: a.out,
            stem: a.stem,
        }),
        Commands::Rank(a) => rank::cmd_rank(&rank::RankArgs {
            docs: a.docs,
            queries: a.queries,
            ranker: a.ranker,
            top_n: a.top_n,
            stem: a.stem,
            out: a.out,
        }),
        Commands::Attribute(a) => {
            let (config, force) = resolve_run_config(a)?;
            attribute::cmd_attribute(&config, force)
        }
        Commands::Evaluate(a) => evaluate::cmd_evaluate(&evaluate::EvaluateArgs {
            attributions: a.attributions,
            docs: a.docs,
            top_t: a.top_t,
            stem: a.stem,
            max_features: a.max_features,
            out: a.out,
        }),
        Commands::Axioms(a) => axioms_cmd::cmd_axioms(&axioms_cmd::AxiomsArgs {
            trials: a.trials,
            seed: a.seed,
            metric_trials: a.metric_trials,
            out: a.out,
        }),
        Commands::Report(a) => report::cmd_report(&report::ReportArgs {
            attributions: a.attributions,
            out: a.out,
            top_t: a.top_t,
        }),
    }
}

/// Merge flags over the optional config file into a resolved RunConfig.
fn resolve_run_config(a: AttributeCli) -> Result<(RunConfig, bool)> {
    let layers = Layers::load(a.config.as_deref())?;
    let config = RunConfig {
        docs: layers.pick_required(a.docs.as_ref(), "docs")?,
        queries: layers.pick_required(a.queries.as_ref(), "queries")?,
        qrels: layers.pick_optional(a.qrels.as_ref(), "qrels")?,
        ranker: layers.pick(a.ranker.as_ref(), "ranker", "bm25".into())?,
        method: layers.pick(a.method.as_ref(), "method", Method::RankShap)?,
        value_fn: layers.pick(a.value_fn.as_ref(), "value_fn", "ndcg".into())?,
        relevance: layers.pick(a.relevance.as_ref(), "relevance", RelevanceSpec::Model)?,
        top_n: layers.pick(a.top_n.as_ref(), "top_n", 10)?,
        n_samples: layers.pick(a.n_samples.as_ref(), "n_samples", 5000)?,
        top_t: layers.pick(a.top_t.as_ref(), "top_t", 10)?,
        seed: layers.pick_seed(a.seed)?,
        out: layers.pick_required(a.out.as_ref(), "out")?,
        jobs: layers.pick(a.jobs.as_ref(), "jobs", 1)?,
        exs_k: layers.pick(a.exs_k.as_ref(), "exs_k", 10)?,
        max_features: layers.pick_optional(a.max_features.as_ref(), "max_features")?,
        stem: layers.pick(a.stem.as_ref(), "stem", "porter".into())?,
    };
    Ok((config, a.force))
}
