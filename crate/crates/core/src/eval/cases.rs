//! Case-study reports: top-3 neighbours of chosen source entities under
//! several similarity measures, plus the gold target for wrong predictions.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{EvalError, RankingResult};
use crate::embeddings::EmbeddingTable;
use crate::strsim::{NameNormalization, SimilarityKind};
use crate::vecmath::cosine;

pub const CASE_TOP: usize = 3;

/// A similarity measure reported alongside a ranking.
pub trait PairScorer: Sync {
    fn name(&self) -> &str;
    fn score(&self, source: &str, target: &str) -> Option<f64>;
}

/// Cosine similarity between two embedding tables.
pub struct CosineScorer<'a> {
    pub label: String,
    pub sources: &'a EmbeddingTable,
    pub targets: &'a EmbeddingTable,
}

impl PairScorer for CosineScorer<'_> {
    fn name(&self) -> &str {
        &self.label
    }

    fn score(&self, source: &str, target: &str) -> Option<f64> {
        Some(cosine(self.sources.get(source)?, self.targets.get(target)?))
    }
}

/// String similarity between entity names.
pub struct NameScorer<'a> {
    pub label: String,
    pub kind: SimilarityKind,
    pub normalization: NameNormalization,
    pub source_names: &'a HashMap<String, String>,
    pub target_names: &'a HashMap<String, String>,
}

impl PairScorer for NameScorer<'_> {
    fn name(&self) -> &str {
        &self.label
    }

    fn score(&self, source: &str, target: &str) -> Option<f64> {
        let a = self.normalization.apply(self.source_names.get(source)?);
        let b = self.normalization.apply(self.target_names.get(target)?);
        Some(self.kind.score_chars(&a, &b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    Top,
    Gold,
}

impl CaseKind {
    fn as_str(self) -> &'static str {
        match self {
            CaseKind::Top => "top",
            CaseKind::Gold => "gold",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseRow {
    pub source: String,
    pub source_name: String,
    pub kind: CaseKind,
    pub rank: usize,
    pub target: String,
    pub target_name: String,
    /// One entry per scorer, `None` when a scorer lacks the pair.
    pub scores: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub scorers: Vec<String>,
    pub rows: Vec<CaseRow>,
}

/// Builds report rows for each requested source entity.
///
/// Every entity gets its top-3 candidates; when the top-1 is not the gold
/// target an extra `gold` row carries the gold target and its rank.
pub fn case_report(
    entities: &[String],
    ranking: &RankingResult,
    scorers: &[&dyn PairScorer],
    source_names: &HashMap<String, String>,
    target_names: &HashMap<String, String>,
) -> Result<CaseReport, EvalError> {
    let name_of = |names: &HashMap<String, String>, id: &str| names.get(id).cloned().unwrap_or_else(|| id.to_string());
    let score_all = |s: &str, t: &str| scorers.iter().map(|sc| sc.score(s, t)).collect::<Vec<_>>();
    let mut rows = Vec::new();
    for entity in entities {
        let row = ranking.row(entity).ok_or_else(|| EvalError::UnknownEntity(entity.clone()))?;
        for (i, c) in row.candidates.iter().take(CASE_TOP).enumerate() {
            rows.push(CaseRow {
                source: entity.clone(),
                source_name: name_of(source_names, entity),
                kind: CaseKind::Top,
                rank: i + 1,
                target: c.target.clone(),
                target_name: name_of(target_names, &c.target),
                scores: score_all(entity, &c.target),
            });
        }
        if let Some(gold) = &row.gold {
            if gold.rank != 1 {
                rows.push(CaseRow {
                    source: entity.clone(),
                    source_name: name_of(source_names, entity),
                    kind: CaseKind::Gold,
                    rank: gold.rank,
                    target: gold.target.clone(),
                    target_name: name_of(target_names, &gold.target),
                    scores: score_all(entity, &gold.target),
                });
            }
        }
    }
    Ok(CaseReport {
        scorers: scorers.iter().map(|s| s.name().to_string()).collect(),
        rows,
    })
}

const FIXED_COLUMNS: [&str; 6] = ["source", "source_name", "kind", "rank", "target", "target_name"];

fn clean(field: &str) -> String {
    field.replace(['\t', '\n', '\r'], " ")
}

impl CaseReport {
    pub fn to_tsv(&self) -> String {
        let mut out = FIXED_COLUMNS.join("\t");
        for s in &self.scorers {
            out.push('\t');
            out.push_str(&clean(s));
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                clean(&r.source),
                clean(&r.source_name),
                r.kind.as_str(),
                r.rank,
                clean(&r.target),
                clean(&r.target_name)
            );
            for s in &r.scores {
                match s {
                    Some(v) => {
                        let _ = write!(out, "\t{v}");
                    }
                    None => out.push_str("\tn/a"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_tsv(text: &str) -> Result<Self, EvalError> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| EvalError::Report("empty report".into()))?.split('\t').collect();
        if header.len() < FIXED_COLUMNS.len() || header[..FIXED_COLUMNS.len()] != FIXED_COLUMNS {
            return Err(EvalError::Report("unexpected header".into()));
        }
        let scorers: Vec<String> = header[FIXED_COLUMNS.len()..].iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let bad = |what: &str| EvalError::Report(format!("row {}: {what}", n + 1));
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != header.len() {
                return Err(bad("wrong field count"));
            }
            let kind = match f[2] {
                "top" => CaseKind::Top,
                "gold" => CaseKind::Gold,
                _ => return Err(bad("unknown kind")),
            };
            let scores = f[FIXED_COLUMNS.len()..]
                .iter()
                .map(|s| if *s == "n/a" { Ok(None) } else { s.parse::<f64>().map(Some).map_err(|_| bad("bad score")) })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(CaseRow {
                source: f[0].to_string(),
                source_name: f[1].to_string(),
                kind,
                rank: f[3].parse().map_err(|_| bad("bad rank"))?,
                target: f[4].to_string(),
                target_name: f[5].to_string(),
                scores,
            });
        }
        Ok(Self { scorers, rows })
    }

    /// Rows grouped by source entity, in report order.
    pub fn by_source(&self) -> BTreeMap<&str, Vec<&CaseRow>> {
        let mut m: BTreeMap<&str, Vec<&CaseRow>> = BTreeMap::new();
        for r in &self.rows {
            m.entry(r.source.as_str()).or_default().push(r);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::retrieve;

    struct Fixture {
        src: EmbeddingTable,
        tgt: EmbeddingTable,
        ranking: RankingResult,
        src_names: HashMap<String, String>,
        tgt_names: HashMap<String, String>,
    }

    fn fixture() -> Fixture {
        let mut src = EmbeddingTable::new(2);
        src.insert("s_ok", vec![1.0, 0.0]).unwrap();
        src.insert("s_wrong", vec![0.0, 1.0]).unwrap();
        let mut tgt = EmbeddingTable::new(2);
        tgt.insert("t_ok", vec![1.0, 0.05]).unwrap();
        tgt.insert("t_gold_wrong", vec![0.7, 0.7]).unwrap();
        tgt.insert("t_decoy", vec![0.0, 1.0]).unwrap();
        tgt.insert("t_far", vec![-1.0, 0.0]).unwrap();
        let gold: HashMap<String, String> = [("s_ok", "t_ok"), ("s_wrong", "t_gold_wrong")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let ranking = retrieve(&src.entries(), &tgt.entries(), 3, &gold).unwrap();
        let src_names = [("s_ok", "Black May"), ("s_wrong", "1979 Nice events")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let tgt_names = [("t_ok", "Black May (1943)"), ("t_gold_wrong", "Nice airport tsunami"), ("t_decoy", "Brighton Tennis Tournament (WTA 1979)"), ("t_far", "x")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        Fixture { src, tgt, ranking, src_names, tgt_names }
    }

    fn report(f: &Fixture, entities: &[&str]) -> Result<CaseReport, EvalError> {
        let tae = CosineScorer {
            label: "tae".into(),
            sources: &f.src,
            targets: &f.tgt,
        };
        let lev = NameScorer {
            label: "lev".into(),
            kind: SimilarityKind::LevenshteinRatio,
            normalization: NameNormalization::default(),
            source_names: &f.src_names,
            target_names: &f.tgt_names,
        };
        let entities: Vec<String> = entities.iter().map(|s| s.to_string()).collect();
        case_report(&entities, &f.ranking, &[&tae, &lev], &f.src_names, &f.tgt_names)
    }

    #[test]
    fn correct_case_has_three_rows_gold_first() {
        let f = fixture();
        let r = report(&f, &["s_ok"]).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.rows[0].target, "t_ok");
        assert!(r.rows.iter().all(|row| row.kind == CaseKind::Top));
    }

    #[test]
    fn wrong_case_reports_gold_separately() {
        let f = fixture();
        let r = report(&f, &["s_wrong"]).unwrap();
        assert_eq!(r.rows[0].target, "t_decoy");
        let gold = r.rows.iter().find(|row| row.kind == CaseKind::Gold).unwrap();
        assert_eq!(gold.target, "t_gold_wrong");
        assert_eq!(gold.rank, 2);
        let tae = gold.scores[0].unwrap();
        assert!((tae - cosine(&[0.0, 1.0], &[0.7, 0.7])).abs() < 1e-12);
    }

    #[test]
    fn report_round_trips_through_tsv() {
        let f = fixture();
        let r = report(&f, &["s_ok", "s_wrong"]).unwrap();
        let parsed = CaseReport::parse_tsv(&r.to_tsv()).unwrap();
        assert_eq!(parsed, r);
        assert_eq!(parsed.by_source().len(), 2);
    }

    #[test]
    fn unknown_entity_is_an_error() {
        let f = fixture();
        assert_eq!(report(&f, &["nope"]).unwrap_err(), EvalError::UnknownEntity("nope".into()));
    }
}
