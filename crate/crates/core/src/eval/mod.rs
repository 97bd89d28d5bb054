//! Retrieval-based evaluation: cosine ranking, Hits@k, MRR, per-category
//! recall and case-study reports.

mod cases;
mod metrics;
mod rank;

use thiserror::Error;

pub use cases::{case_report, CaseKind, CaseReport, CaseRow, CosineScorer, NameScorer, PairScorer, CASE_TOP};
pub use metrics::{hits_at, mrr, recall_by_type, CategoryRecall, Metrics};
pub use rank::{rank_per_source, rank_scores, retrieve, Candidate, GoldHit, RankingResult, SourceRanking};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("candidate pool is empty")]
    EmptyCandidates,
    #[error("no ranks to aggregate")]
    EmptyRanks,
    #[error("entity `{entity}` has dimension {found}, expected {expected}")]
    Dimension { entity: String, expected: usize, found: usize },
    #[error("duplicate target `{0}` in candidate pool")]
    DuplicateTarget(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("malformed report: {0}")]
    Report(String),
}

/// Which target entities compete during retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidatePool {
    /// Targets of the evaluated split only.
    #[default]
    Split,
    /// Every entity of the target graph.
    All,
}
