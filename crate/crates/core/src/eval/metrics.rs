use serde::Serialize;

use super::{EvalError, RankingResult};
use crate::kg::{EntityCategory, EntityTypeMap};

/// Fraction of ranks within the top `k`.
pub fn hits_at(ranks: &[usize], k: usize) -> Result<f64, EvalError> {
    if ranks.is_empty() {
        return Err(EvalError::EmptyRanks);
    }
    Ok(ranks.iter().filter(|&&r| r <= k).count() as f64 / ranks.len() as f64)
}

/// Mean reciprocal rank.
pub fn mrr(ranks: &[usize]) -> Result<f64, EvalError> {
    if ranks.is_empty() {
        return Err(EvalError::EmptyRanks);
    }
    Ok(ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub hits_at_1: f64,
    pub hits_at_10: f64,
    pub mrr: f64,
    pub count: usize,
}

impl Metrics {
    pub fn from_ranks(ranks: &[usize]) -> Result<Self, EvalError> {
        Ok(Self {
            hits_at_1: hits_at(ranks, 1)?,
            hits_at_10: hits_at(ranks, 10)?,
            mrr: mrr(ranks)?,
            count: ranks.len(),
        })
    }
}

/// Hits@k restricted to events, to other entities, and over everything.
/// A category with no sources reports `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryRecall {
    pub event: Option<f64>,
    pub other: Option<f64>,
    pub all: f64,
}

pub fn recall_by_type(ranking: &RankingResult, types: &EntityTypeMap, k: usize) -> Result<CategoryRecall, EvalError> {
    let mut event = Vec::new();
    let mut other = Vec::new();
    for (row, rank) in ranking.rows.iter().zip(ranking.gold_ranks()) {
        match types.category(&row.source) {
            EntityCategory::Event => event.push(rank),
            EntityCategory::Other => other.push(rank),
        }
    }
    let all: Vec<usize> = ranking.gold_ranks();
    Ok(CategoryRecall {
        event: hits_at(&event, k).ok(),
        other: hits_at(&other, k).ok(),
        all: hits_at(&all, k)?,
    })
}
