use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::vecmath::{dot, norm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub target: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldHit {
    pub target: String,
    /// 1-based position of the gold target in the full ranking.
    pub rank: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRanking {
    pub source: String,
    pub candidates: Vec<Candidate>,
    /// `None` when the source has no gold target or it is outside the pool.
    pub gold: Option<GoldHit>,
}

/// Per-source rankings in source order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    pub rows: Vec<SourceRanking>,
}

impl RankingResult {
    /// Gold ranks of the sources that have a gold link; a gold target
    /// missing from the pool counts as rank `usize::MAX`.
    pub fn gold_ranks(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.gold.as_ref().map_or(usize::MAX, |g| g.rank)).collect()
    }

    pub fn row(&self, source: &str) -> Option<&SourceRanking> {
        self.rows.iter().find(|r| r.source == source)
    }
}

/// Descending score, then ascending target index.
fn by_score_then_index(scores: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&x, &y| scores[y].total_cmp(&scores[x]).then(x.cmp(&y))
}

/// Top-`k` target indices and the 1-based rank of `gold` within the full ranking.
pub fn rank_scores(scores: &[f64], k: usize, gold: Option<usize>) -> (Vec<usize>, Option<usize>) {
    let cmp = by_score_then_index(scores);
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    let k = k.min(idx.len());
    if k > 0 && k < idx.len() {
        idx.select_nth_unstable_by(k - 1, &cmp);
        idx.truncate(k);
    }
    idx.sort_by(&cmp);
    idx.truncate(k);
    let rank = gold.map(|g| 1 + (0..scores.len()).filter(|&t| cmp(&t, &g) == Ordering::Less).count());
    (idx, rank)
}

/// Ranks all targets for every source.
///
/// `target_ids` must be sorted ascending so that index order is identifier
/// order. `score_row(s)` returns the similarity of source `s` to every target.
pub fn rank_per_source<F>(
    source_ids: &[&str],
    target_ids: &[&str],
    k: usize,
    gold: &HashMap<String, String>,
    score_row: F,
) -> RankingResult
where
    F: Fn(usize) -> Vec<f64> + Sync,
{
    debug_assert!(target_ids.windows(2).all(|w| w[0] < w[1]), "targets must be sorted and unique");
    let position: HashMap<&str, usize> = target_ids.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let rows = source_ids
        .par_iter()
        .enumerate()
        .map(|(s, source)| {
            let scores = score_row(s);
            let gold_idx = gold.get(*source).and_then(|t| position.get(t.as_str()).copied());
            let (top, rank) = rank_scores(&scores, k, gold_idx);
            SourceRanking {
                source: source.to_string(),
                candidates: top
                    .into_iter()
                    .map(|t| Candidate {
                        target: target_ids[t].to_string(),
                        score: scores[t],
                    })
                    .collect(),
                gold: gold_idx.zip(rank).map(|(g, rank)| GoldHit {
                    target: target_ids[g].to_string(),
                    rank,
                    score: scores[g],
                }),
            }
        })
        .collect();
    RankingResult { rows }
}

/// Cosine nearest-neighbour retrieval from sources to targets.
///
/// Ties are broken by ascending target identifier; cosine with a zero
/// vector is 0.
pub fn retrieve<S, T, V, W>(
    sources: &[(S, V)],
    targets: &[(T, W)],
    k: usize,
    gold: &HashMap<String, String>,
) -> Result<RankingResult, EvalError>
where
    S: AsRef<str> + Sync,
    T: AsRef<str> + Sync,
    V: AsRef<[f64]> + Sync,
    W: AsRef<[f64]> + Sync,
{
    if targets.is_empty() {
        return Err(EvalError::EmptyCandidates);
    }
    let dim = targets[0].1.as_ref().len();
    if let Some((id, v)) = sources
        .iter()
        .map(|(id, v)| (id.as_ref(), v.as_ref()))
        .chain(targets.iter().map(|(id, v)| (id.as_ref(), v.as_ref())))
        .find(|(_, v)| v.len() != dim)
    {
        return Err(EvalError::Dimension {
            entity: id.to_string(),
            expected: dim,
            found: v.len(),
        });
    }
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| targets[a].0.as_ref().cmp(targets[b].0.as_ref()));
    let target_ids: Vec<&str> = order.iter().map(|&i| targets[i].0.as_ref()).collect();
    if let Some(w) = target_ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(EvalError::DuplicateTarget(w[0].to_string()));
    }
    let target_vecs: Vec<&[f64]> = order.iter().map(|&i| targets[i].1.as_ref()).collect();
    let target_norms: Vec<f64> = target_vecs.iter().map(|v| norm(v)).collect();
    let source_ids: Vec<&str> = sources.iter().map(|(id, _)| id.as_ref()).collect();

    Ok(rank_per_source(&source_ids, &target_ids, k, gold, |s| {
        let v = sources[s].1.as_ref();
        let n = norm(v);
        target_vecs
            .iter()
            .zip(&target_norms)
            .map(|(t, tn)| {
                let denom = n * tn;
                if denom == 0.0 {
                    0.0
                } else {
                    dot(v, t) / denom
                }
            })
            .collect()
    }))
}
