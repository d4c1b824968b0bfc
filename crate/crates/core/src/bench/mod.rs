//! Cause–effect pairs benchmark: ingestion, per-pair runs and discovery-rate tables.

mod ingest;
mod run;

pub use ingest::{
    classify_linearity, ingest_pairs, is_pair_id, parse_meta, parse_table, subsample, BenchPair, IngestOptions,
    IngestResult, PairMeta, SkippedPair, DEFAULT_CAP,
};
pub use run::{
    run_benchmark, summarize, BenchConfig, BenchReport, Contingency, Metrics, PairOutcome, StratumReport, SupportRow,
};
