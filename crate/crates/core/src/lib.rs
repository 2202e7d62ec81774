//! Citation environment analysis for a focal journal.
//!
//! The pipeline ingests aggregated journal-journal citation records, selects
//! the focal journal's import or export environment, builds the square
//! asymmetric citation matrix, clusters journals with principal components
//! plus varimax rotation, aggregates citation flows into factor-level
//! macro-journals, and measures the focal journal's bridging role as
//! normalized betweenness centrality on the thresholded cosine network.
//!
//! All operations are pure functions over immutable values and produce
//! deterministic, byte-stable outputs. With the `parallel` feature (on by
//! default) the pairwise-similarity and per-source betweenness loops run on
//! rayon; results are bit-identical to the sequential fallback.

pub mod aggregate;
pub mod centrality;
pub mod corpus;
pub mod error;
pub mod factors;
pub mod fixture;
pub mod matrix;
pub mod pajek;
pub mod pipeline;
pub mod report;
pub mod similarity;

pub use aggregate::{macro_aggregate, FactorFlow, MacroAggregate};
pub use centrality::{betweenness, CentralityEntry, CentralityReport};
pub use corpus::{CitationCorpus, CitationRecord, Direction, Environment, JournalRef};
pub use error::{Error, ErrorClass, Result};
pub use factors::{
    classify_by_max_loading, kaiser_k, pearson_matrix, principal_components, varimax,
    varimax_with_trace, CorrelationMatrix, FactorAssignment, FactorModel,
};
pub use matrix::{build_matrix, drop_isolates, CitationMatrix, ProfileOrientation};
pub use pipeline::{analyze, run_pipeline, Analysis, AnalysisConfig, KChoice, OrientationChoice, RunConfig};
pub use report::{emit_report, PipelineReport};
pub use similarity::{build_graph, cosine_matrix, SimilarityGraph, SimilarityMatrix};
