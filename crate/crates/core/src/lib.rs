//! Feature attributions for black-box ranking models.
//!
//! The pipeline: tokenize a query and its candidate documents into a
//! feature space ([`instance`]), treat "rank the documents with some
//! features deleted" as a cooperative game scored by a rank-aware value
//! function ([`value`]), and attribute the value of the full feature set
//! to individual tokens with exact or estimated Shapley values
//! ([`shapley`]). Baseline explainers ([`baselines`]), fidelity evaluation
//! ([`eval`]) and a statistical axiom-compliance harness ([`axioms`])
//! round out the toolkit.

pub mod attribution;
pub mod axioms;
pub mod baselines;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod instance;
pub mod rankers;
pub mod shapley;
pub mod synthetic;
pub mod text;
pub mod value;

pub use attribution::AttributionVector;
pub use axioms::{
    check_monotonicity, check_position_sensitivity, check_relevance_sensitivity,
    check_shapley_axioms, compliance_table, Axiom, AxiomOutcome, AxiomReport, ComplianceRow,
    Counterexample, HarnessConfig, MethodUnderTest,
};
pub use baselines::{exs_attribution, random_attribution, rankingshap_attribution};
pub use corpus::{
    load_documents, load_qrels, load_queries, qrels_by_query, write_jsonl, DocRecord, QrelRecord,
};
pub use error::{Error, RankerError, Result};
pub use eval::{
    fidelity, fidelity_against, kendall_tau, reconstruct_ordering, weighted_kendall_tau,
    FidelityReport,
};
pub use instance::{apply_coalition, Coalition, FeatureSpace, Instance, MaskedDoc, MaskedInstance};
pub use rankers::{
    rank, Bm25Ranker, CountingRanker, HttpRanker, LinearRanker, RankedDoc, Ranker, Ranking,
    SubprocessRanker,
};
pub use shapley::{
    exact_rankshap, kernel_rankshap, permutation_rankshap, shapley_kernel_weight, CoalitionGame,
    DenseGame, GameOracle, SamplerConfig,
};
pub use synthetic::{generate_corpus, CorpusSpec, GameVariant, SyntheticCorpus, SyntheticGame};
pub use text::{tokenize, Document, Query, Stemming, TokenizerConfig};
pub use value::{
    infer_relevance, ndcg, DiscountFn, GainFn, Provenance, RelevanceAssignment, RelevanceSource,
    ValueFn,
};
