//! Run configuration: a plain `key = value` config file, command-line
//! overrides (flags win), and the specifier strings that pick rankers,
//! methods and relevance sources.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rankshap::{Bm25Ranker, Error, HttpRanker, LinearRanker, Ranker, Result, SubprocessRanker};

/// Environment variable consulted when neither a flag nor the config file
/// provides a seed.
pub const SEED_ENV: &str = "RANKSHAP_SEED";

/// Which attribution method a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Kernel-weighted least squares (enumerates when the budget covers
    /// every proper coalition, samples otherwise).
    RankShap,
    /// Exact enumeration of all coalitions.
    RankShapExact,
    /// Permutation-walk estimator; spends the sample budget as
    /// `n_samples / m` permutations so the oracle-call cost matches.
    Permutation,
    /// Shapley attribution of ordering similarity to the full ranking.
    RankingShap,
    /// Summed per-document surrogate coefficients over the top-k.
    Exs,
    /// Seeded noise; the floor any useful method must beat.
    Random,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::RankShap => "rankshap",
            Method::RankShapExact => "rankshap-exact",
            Method::Permutation => "permutation",
            Method::RankingShap => "rankingshap",
            Method::Exs => "exs",
            Method::Random => "random",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rankshap" | "kernel" => Ok(Method::RankShap),
            "rankshap-exact" | "exact" => Ok(Method::RankShapExact),
            "permutation" | "rankshap-permutation" => Ok(Method::Permutation),
            "rankingshap" => Ok(Method::RankingShap),
            "exs" => Ok(Method::Exs),
            "random" => Ok(Method::Random),
            other => Err(Error::InvalidConfig(format!(
                "unknown method {other:?} (expected rankshap, rankshap-exact, permutation, \
                 rankingshap, exs or random)"
            ))),
        }
    }
}

/// Where frozen relevance labels come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelevanceSpec {
    /// Explicit judgments from the qrels file.
    Qrels,
    /// Scores of the explained model on the unmasked instance.
    Model,
    /// BM25 scores on the unmasked instance.
    Bm25,
}

impl RelevanceSpec {
    pub fn as_str(self) -> &'static str {
        match self {
            RelevanceSpec::Qrels => "qrels",
            RelevanceSpec::Model => "model",
            RelevanceSpec::Bm25 => "bm25",
        }
    }
}

impl FromStr for RelevanceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qrels" => Ok(RelevanceSpec::Qrels),
            "model" => Ok(RelevanceSpec::Model),
            "bm25" => Ok(RelevanceSpec::Bm25),
            other => Err(Error::InvalidConfig(format!(
                "unknown relevance source {other:?} (expected qrels, model or bm25)"
            ))),
        }
    }
}

/// Everything an attribution run needs, fully resolved.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub docs: PathBuf,
    pub queries: PathBuf,
    pub qrels: Option<PathBuf>,
    pub ranker: String,
    pub method: Method,
    pub value_fn: String,
    pub relevance: RelevanceSpec,
    /// Explain the top-n documents of the model ranking.
    pub top_n: usize,
    /// Oracle-call budget for sampling estimators.
    pub n_samples: usize,
    /// Explanation size: features kept when reconstructing an ordering.
    pub top_t: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
    /// Documents whose top-k membership the exs surrogate explains.
    pub exs_k: usize,
    /// Optional cap on the feature-space size.
    pub max_features: Option<usize>,
    pub stem: String,
}

impl RunConfig {
    /// Fail fast if an input path is missing or unreadable — before any
    /// output is created.
    pub fn validate(&self) -> Result<()> {
        require_readable(&self.docs)?;
        require_readable(&self.queries)?;
        if let Some(qrels) = &self.qrels {
            require_readable(qrels)?;
        }
        if self.relevance == RelevanceSpec::Qrels && self.qrels.is_none() {
            return Err(Error::InvalidConfig(
                "relevance source qrels needs --qrels".into(),
            ));
        }
        if self.top_n < 2 {
            return Err(Error::InvalidConfig(
                "--top-n must be at least 2 (a ranking needs two documents)".into(),
            ));
        }
        if self.top_t == 0 {
            return Err(Error::InvalidConfig("--top-t must be positive".into()));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidConfig("--jobs must be positive".into()));
        }
        Ok(())
    }
}

fn require_readable(path: &Path) -> Result<()> {
    fs::File::open(path)
        .map(|_| ())
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))
}

/// Parse a `key = value` config file. `#` starts a comment; blank lines
/// are skipped; keys may use `-` or `_` interchangeably.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidConfig(format!(
                "{}:{}: expected `key = value`, got {raw:?}",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().replace('-', "_"), value.trim().to_string());
    }
    Ok(map)
}

/// Layered option lookup: flag beats config file beats default.
pub struct Layers {
    file: BTreeMap<String, String>,
}

impl Layers {
    pub fn load(config: Option<&Path>) -> Result<Self> {
        Ok(Layers {
            file: match config {
                Some(path) => parse_config_file(path)?,
                None => BTreeMap::new(),
            },
        })
    }

    /// Resolve one field. `key` is the config-file key (underscore form).
    pub fn pick<T: Clone + FromStr>(&self, flag: Option<&T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v.clone());
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| Error::InvalidConfig(format!("config key {key}: {e}"))),
            None => Ok(default),
        }
    }

    /// Like `pick` but with no default: absent everywhere is an error.
    pub fn pick_required<T: Clone + FromStr>(&self, flag: Option<&T>, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v.clone());
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| Error::InvalidConfig(format!("config key {key}: {e}"))),
            None => Err(Error::InvalidConfig(format!(
                "missing required option --{} (or config key {key})",
                key.replace('_', "-")
            ))),
        }
    }

    /// Optional field: present in neither layer is fine.
    pub fn pick_optional<T: Clone + FromStr>(&self, flag: Option<&T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| Error::InvalidConfig(format!("config key {key}: {e}"))),
            None => Ok(None),
        }
    }

    /// Seed resolution adds one more layer: flag, file, then the
    /// RANKSHAP_SEED environment variable, then 0.
    pub fn pick_seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(raw) = self.file.get("seed") {
            return raw
                .parse()
                .map_err(|e| Error::InvalidConfig(format!("config key seed: {e}")));
        }
        match std::env::var(SEED_ENV) {
            Ok(raw) => raw
                .parse()
                .map_err(|e| Error::InvalidConfig(format!("{SEED_ENV}: {e}"))),
            Err(_) => Ok(0),
        }
    }
}

/// Instantiate a ranker from its spec string:
/// `bm25`, `bm25:K1,B`, `linear:WEIGHTS_FILE`, `subprocess:COMMAND`,
/// or `http:URL`.
pub fn build_ranker(spec: &str) -> Result<Box<dyn Ranker>> {
    if spec == "bm25" {
        return Ok(Box::new(Bm25Ranker::default()));
    }
    if let Some(params) = spec.strip_prefix("bm25:") {
        let (k1, b) = params.split_once(',').ok_or_else(|| {
            Error::InvalidConfig(format!("bm25 spec {spec:?}: expected bm25:K1,B"))
        })?;
        let k1: f64 = k1
            .trim()
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("bm25 k1: {e}")))?;
        let b: f64 = b
            .trim()
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("bm25 b: {e}")))?;
        return Ok(Box::new(Bm25Ranker::new(k1, b)));
    }
    if let Some(path) = spec.strip_prefix("linear:") {
        return Ok(Box::new(load_linear_ranker(Path::new(path))?));
    }
    if let Some(cmd) = spec.strip_prefix("subprocess:") {
        return Ok(Box::new(SubprocessRanker::spawn(cmd)?));
    }
    if let Some(url) = spec.strip_prefix("http:") {
        return Ok(Box::new(HttpRanker::new(url)?));
    }
    Err(Error::InvalidConfig(format!(
        "unknown ranker spec {spec:?} (expected bm25[:K1,B], linear:FILE, subprocess:CMD or \
         http:URL)"
    )))
}

/// Weights file: one `token weight` pair per line, `#` comments allowed.
fn load_linear_ranker(path: &Path) -> Result<LinearRanker> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(token), Some(weight), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::InvalidConfig(format!(
                "{}:{}: expected `token weight`, got {raw:?}",
                path.display(),
                lineno + 1
            )));
        };
        let weight: f64 = weight
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        pairs.push((token.to_string(), weight));
    }
    Ok(LinearRanker::from_pairs(
        pairs.iter().map(|(t, w)| (t.as_str(), *w)),
    ))
}
