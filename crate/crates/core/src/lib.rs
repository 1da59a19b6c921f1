//! Reliability scoring for knowledge graph embeddings.
//!
//! The ReliK measure of a fact is the mean reciprocal of its head- and
//! tail-rank against the nonexisting triples that share its head or tail.
//! It treats the embedding score as a black box: only the relative ranking
//! of a fact within its negative neighborhoods matters, so the measure is
//! comparable across embedding models and needs no retraining.
//!
//! The crate provides:
//!
//! - [`kg`]: an in-memory knowledge graph with interned vocabularies,
//!   constant-time fact lookup, and enumeration/sampling of negative
//!   neighborhoods without materializing them.
//! - [`embed`]: embedding storage plus the closed-form scorers
//!   (TransE with L1/L2, DistMult, RotatE, PairRE, ComplEx).
//! - [`relik`]: the exact measure, the lower-bound and scaled sampling
//!   estimators, and deterministic batch evaluation.
//! - [`graphops`]: random-walk-with-restart subgraph sampling and
//!   weighted densest-subgraph peeling.
//! - [`eval`]: filtered MRR, triple classification, Pearson correlation
//!   with significance, and the study harnesses built on them.
//! - [`trainer`]: a small margin-ranking SGD trainer for TransE and
//!   DistMult, enough to run end-to-end experiments at desk scale.
//! - [`synth`]: deterministic fixture graphs for tests and studies.

pub mod embed;
pub mod error;
pub mod eval;
pub mod graphops;
pub mod kg;
pub mod relik;
pub mod seeds;
pub mod stats;
pub mod synth;
pub mod trainer;

pub use embed::{EmbeddingFileSummary, EmbeddingStore, Field, ScorerKind};
pub use error::{Error, Result};
pub use eval::{CorrelationTask, EvalReport, MetricValue, RankTarget};
pub use graphops::{PeelLayer, SubgraphSample, WeightedTriple};
pub use kg::{EntityId, KnowledgeGraph, RelationId, Side, Triple};
pub use relik::{Estimator, RelikResult, SampleConfig, SampleSize, SampledEstimator, ScoreMode};
pub use trainer::TrainConfig;
