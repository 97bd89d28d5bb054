//! String-similarity baselines over Unicode scalar values and the
//! name-matching aligner built on them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::eval::{rank_per_source, RankingResult};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("prefix scale {0} outside [0, 0.25]")]
    PrefixScale(f64),
    #[error("top count must be at least 1")]
    ZeroK,
    #[error("target set is empty")]
    EmptyTargets,
    #[error("unknown similarity kind `{0}`")]
    UnknownKind(String),
}

pub const DEFAULT_PREFIX_SCALE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimilarityKind {
    LevenshteinRatio,
    Jaro,
    JaroWinkler,
    SequenceRatio,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 4] = [
        SimilarityKind::LevenshteinRatio,
        SimilarityKind::Jaro,
        SimilarityKind::JaroWinkler,
        SimilarityKind::SequenceRatio,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityKind::LevenshteinRatio => "lev-ratio",
            SimilarityKind::Jaro => "jaro",
            SimilarityKind::JaroWinkler => "jaro-winkler",
            SimilarityKind::SequenceRatio => "seq",
        }
    }

    /// Similarity of two already-normalized character sequences.
    pub fn score_chars(self, a: &[char], b: &[char]) -> f64 {
        match self {
            SimilarityKind::LevenshteinRatio => levenshtein_ratio_chars(a, b),
            SimilarityKind::Jaro => jaro_chars(a, b),
            SimilarityKind::JaroWinkler => jaro_winkler_chars(a, b, DEFAULT_PREFIX_SCALE),
            SimilarityKind::SequenceRatio => sequence_ratio_chars(a, b),
        }
    }

    pub fn score(self, a: &str, b: &str) -> f64 {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        self.score_chars(&a, &b)
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimilarityKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lev-ratio" => Ok(SimilarityKind::LevenshteinRatio),
            "jaro" => Ok(SimilarityKind::Jaro),
            "jaro-winkler" => Ok(SimilarityKind::JaroWinkler),
            "seq" => Ok(SimilarityKind::SequenceRatio),
            other => Err(SimError::UnknownKind(other.to_string())),
        }
    }
}

/// Unit-cost edit distance (insert, delete, substitute).
pub fn levenshtein_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_distance_chars(&a, &b)
}

pub fn levenshtein_distance_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `(|a| + |b| - D) / (|a| + |b|)` where `D` charges 2 for a substitution.
///
/// With substitutions at cost 2, `D = |a| + |b| - 2 * LCS(a, b)`, so the
/// ratio is computed from a bit-parallel longest-common-subsequence scan.
pub fn levenshtein_ratio(a: &str, b: &str) -> f64 {
    SimilarityKind::LevenshteinRatio.score(a, b)
}

pub fn levenshtein_ratio_chars(a: &[char], b: &[char]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    let lcs = LcsPattern::new(a).lcs_len(b);
    (2 * lcs) as f64 / total as f64
}

/// Match masks of a fixed pattern for repeated LCS queries.
pub struct LcsPattern {
    len: usize,
    words: usize,
    masks: HashMap<char, Vec<u64>>,
}

impl LcsPattern {
    pub fn new(pattern: &[char]) -> Self {
        let words = pattern.len().div_ceil(64);
        let mut masks: HashMap<char, Vec<u64>> = HashMap::new();
        for (i, c) in pattern.iter().enumerate() {
            masks.entry(*c).or_insert_with(|| vec![0; words])[i / 64] |= 1u64 << (i % 64);
        }
        Self { len: pattern.len(), words, masks }
    }

    /// Length of the longest common subsequence with `text`.
    pub fn lcs_len(&self, text: &[char]) -> usize {
        if self.len == 0 || text.is_empty() {
            return 0;
        }
        let mut v = vec![u64::MAX; self.words];
        for c in text {
            let Some(mask) = self.masks.get(c) else { continue };
            let mut carry = false;
            for (vw, &mw) in v.iter_mut().zip(mask) {
                let u = *vw & mw;
                let (s1, c1) = vw.overflowing_add(u);
                let (s2, c2) = s1.overflowing_add(u64::from(carry));
                carry = c1 || c2;
                *vw = s2 | (*vw & !u);
            }
        }
        let mut zeros = 0;
        for (w, vw) in v.iter().enumerate() {
            let bits = (self.len - w * 64).min(64);
            let live = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
            zeros += (!vw & live).count_ones() as usize;
        }
        zeros
    }
}

pub fn jaro(a: &str, b: &str) -> f64 {
    SimilarityKind::Jaro.score(a, b)
}

pub fn jaro_chars(a: &[char], b: &[char]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut b_used = vec![false; b.len()];
    let mut a_matched = Vec::with_capacity(a.len());
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_used[j] && b[j] == *ca {
                b_used[j] = true;
                a_matched.push(*ca);
                break;
            }
        }
    }
    let m = a_matched.len();
    if m == 0 {
        return 0.0;
    }
    let b_matched = b.iter().zip(&b_used).filter(|(_, u)| **u).map(|(c, _)| c);
    let half_transpositions = a_matched.iter().zip(b_matched).filter(|(x, y)| x != y).count();
    let m = m as f64;
    let t = half_transpositions as f64 / 2.0;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

pub fn jaro_winkler(a: &str, b: &str, prefix_scale: f64) -> Result<f64, SimError> {
    if !(0.0..=0.25).contains(&prefix_scale) {
        return Err(SimError::PrefixScale(prefix_scale));
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    Ok(jaro_winkler_chars(&a, &b, prefix_scale))
}

pub fn jaro_winkler_chars(a: &[char], b: &[char], prefix_scale: f64) -> f64 {
    let j = jaro_chars(a, b);
    let prefix = a.iter().zip(b).take(4).take_while(|(x, y)| x == y).count();
    j + prefix as f64 * prefix_scale * (1.0 - j)
}

/// Ratcliff-Obershelp ratio `2M / (|a| + |b|)` without junk heuristics.
pub fn sequence_ratio(a: &str, b: &str) -> f64 {
    SimilarityKind::SequenceRatio.score(a, b)
}

pub fn sequence_ratio_chars(a: &[char], b: &[char]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    (2 * matching_characters(a, b)) as f64 / total as f64
}

/// Total size of the matching blocks found by recursive longest-match splitting.
pub fn matching_characters(a: &[char], b: &[char]) -> usize {
    let mut total = 0;
    let mut stack = vec![(0, a.len(), 0, b.len())];
    let mut row = vec![0usize; b.len() + 1];
    let mut next = vec![0usize; b.len() + 1];
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        let (i, j, k) = longest_match(a, b, alo, ahi, blo, bhi, &mut row, &mut next);
        if k == 0 {
            continue;
        }
        total += k;
        if alo < i && blo < j {
            stack.push((alo, i, blo, j));
        }
        if i + k < ahi && j + k < bhi {
            stack.push((i + k, ahi, j + k, bhi));
        }
    }
    total
}

/// Longest common block in `a[alo..ahi]` x `b[blo..bhi]`; ties go to the
/// earliest start in `a`, then the earliest start in `b`.
#[allow(clippy::too_many_arguments)]
fn longest_match(
    a: &[char],
    b: &[char],
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
    row: &mut [usize],
    next: &mut [usize],
) -> (usize, usize, usize) {
    let (mut bi, mut bj, mut best) = (alo, blo, 0);
    row[blo..=bhi].fill(0);
    for i in alo..ahi {
        next[blo] = 0;
        for j in blo..bhi {
            let k = if a[i] == b[j] { row[j] + 1 } else { 0 };
            next[j + 1] = k;
            if k > best {
                best = k;
                bi = i + 1 - k;
                bj = j + 1 - k;
            }
        }
        row[blo..=bhi].copy_from_slice(&next[blo..=bhi]);
    }
    (bi, bj, best)
}

/// Name preprocessing applied before any comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NameNormalization {
    pub lowercase: bool,
}

impl Default for NameNormalization {
    fn default() -> Self {
        Self { lowercase: true }
    }
}

impl NameNormalization {
    pub fn apply(&self, name: &str) -> Vec<char> {
        let nfc = name.nfc();
        if self.lowercase {
            nfc.flat_map(char::to_lowercase).collect()
        } else {
            nfc.collect()
        }
    }
}

/// Ranks every target for each source by name similarity.
///
/// `sources` and `targets` are `(entity, name)` pairs. Ties are broken by
/// ascending target identifier. When `gold` maps a source to a target that
/// is in the pool, its rank is recorded.
pub fn name_match_align(
    sources: &[(String, String)],
    targets: &[(String, String)],
    kind: SimilarityKind,
    k: usize,
    normalization: NameNormalization,
    gold: &HashMap<String, String>,
) -> Result<RankingResult, SimError> {
    if k == 0 {
        return Err(SimError::ZeroK);
    }
    if targets.is_empty() {
        return Err(SimError::EmptyTargets);
    }
    let mut sorted: Vec<(&str, Vec<char>)> = targets
        .iter()
        .map(|(id, name)| (id.as_str(), normalization.apply(name)))
        .collect();
    sorted.sort_by(|x, y| x.0.cmp(y.0));
    let target_ids: Vec<&str> = sorted.iter().map(|(id, _)| *id).collect();
    let source_chars: Vec<Vec<char>> = sources.iter().map(|(_, n)| normalization.apply(n)).collect();
    let source_ids: Vec<&str> = sources.iter().map(|(id, _)| id.as_str()).collect();

    Ok(rank_per_source(&source_ids, &target_ids, k, gold, |s| {
        let a = &source_chars[s];
        match kind {
            SimilarityKind::LevenshteinRatio => {
                let pattern = LcsPattern::new(a);
                sorted
                    .iter()
                    .map(|(_, b)| {
                        let total = a.len() + b.len();
                        if total == 0 {
                            1.0
                        } else {
                            (2 * pattern.lcs_len(b)) as f64 / total as f64
                        }
                    })
                    .collect()
            }
            _ => sorted.iter().map(|(_, b)| kind.score_chars(a, b)).collect(),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        assert_eq!(levenshtein_distance("kitten", "sitting"), 3);
        assert_eq!(levenshtein_distance("abc", "abc"), 0);
        assert_eq!(levenshtein_distance("", "abc"), 3);
        assert_eq!(levenshtein_distance("mästerskapet", "masterskapet"), 1);
    }

    #[test]
    fn ratio_examples() {
        assert!((levenshtein_ratio("kitten", "sitting") - 8.0 / 13.0).abs() < 1e-12);
        assert_eq!(levenshtein_ratio("a", "a"), 1.0);
        assert_eq!(levenshtein_ratio("a", "b"), 0.0);
        assert_eq!(levenshtein_ratio("", ""), 1.0);
    }

    #[test]
    fn lcs_pattern_spans_multiple_words() {
        let a: Vec<char> = "ab".repeat(70).chars().collect();
        let b: Vec<char> = "ba".repeat(70).chars().collect();
        assert_eq!(LcsPattern::new(&a).lcs_len(&b), 139);
        let c: Vec<char> = "x".repeat(130).chars().collect();
        assert_eq!(LcsPattern::new(&c).lcs_len(&c), 130);
    }

    #[test]
    fn jaro_examples() {
        assert!((jaro("MARTHA", "MARHTA") - 17.0 / 18.0).abs() < 1e-12);
        assert_eq!(jaro("abc", "abc"), 1.0);
        assert_eq!(jaro("abc", "xyz"), 0.0);
    }

    #[test]
    fn jaro_winkler_examples() {
        let j = 17.0 / 18.0;
        let jw = jaro_winkler("MARTHA", "MARHTA", 0.1).unwrap();
        assert!((jw - (j + 0.3 * (1.0 - j))).abs() < 1e-12);
        assert!((jw - 0.9611).abs() < 1e-4);
        assert_eq!(jaro_winkler("same", "same", 0.1).unwrap(), 1.0);
        assert_eq!(jaro_winkler("xabc", "yabc", 0.1).unwrap(), jaro("xabc", "yabc"));
        assert_eq!(jaro_winkler("a", "b", 0.3), Err(SimError::PrefixScale(0.3)));
        assert!(jaro_winkler("a", "b", -0.01).is_err());
    }

    #[test]
    fn sequence_ratio_examples() {
        assert_eq!(sequence_ratio("abcd", "bcde"), 0.75);
        assert_eq!(sequence_ratio("abab", "abab"), 1.0);
        assert_eq!(sequence_ratio("", "x"), 0.0);
    }

    #[test]
    fn sequence_ratio_uses_leftmost_longest_blocks() {
        // "ab" matches at a[0] against b[2] first; leaving nothing on the left.
        assert_eq!(matching_characters(&['a', 'b', 'x'], &['x', 'y', 'a', 'b']), 2);
        assert_eq!(matching_characters(&['q', 'a', 'b', 'a', 'b'], &['a', 'b', 'q']), 2);
    }

    #[test]
    fn kind_round_trips_through_str() {
        for kind in SimilarityKind::ALL {
            assert_eq!(kind.as_str().parse::<SimilarityKind>().unwrap(), kind);
        }
        assert!("fuzzy".parse::<SimilarityKind>().is_err());
    }

    #[test]
    fn normalization_lowercases_and_composes() {
        let n = NameNormalization::default();
        assert_eq!(n.apply("Ma\u{0308}ster"), n.apply("mäster"));
        let raw = NameNormalization { lowercase: false };
        assert_ne!(raw.apply("A"), n.apply("A"));
    }

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn exact_name_ranks_first() {
        let src = pairs(&[("s1", "Doha")]);
        let tgt = pairs(&[("t1", "Dubai"), ("t2", "Doha"), ("t3", "Aden")]);
        let gold: HashMap<_, _> = [("s1".to_string(), "t2".to_string())].into();
        for kind in SimilarityKind::ALL {
            let r = name_match_align(&src, &tgt, kind, 3, NameNormalization::default(), &gold).unwrap();
            let row = &r.rows[0];
            assert_eq!(row.candidates[0].target, "t2");
            assert_eq!(row.candidates[0].score, 1.0);
            assert_eq!(row.gold.as_ref().unwrap().rank, 1);
        }
    }

    #[test]
    fn ties_break_by_target_identifier() {
        let src = pairs(&[("s", "Black May")]);
        let tgt = pairs(&[("t9", "Black May"), ("t1", "Black May"), ("t5", "White")]);
        let r = name_match_align(&src, &tgt, SimilarityKind::Jaro, 2, NameNormalization::default(), &HashMap::new()).unwrap();
        let ids: Vec<_> = r.rows[0].candidates.iter().map(|c| c.target.as_str()).collect();
        assert_eq!(ids, vec!["t1", "t9"]);
    }

    #[test]
    fn top_k_is_sorted_and_sized() {
        let names = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliet", "kilo", "lima"];
        let tgt: Vec<(String, String)> = names.iter().enumerate().map(|(i, n)| (format!("t{i:02}"), n.to_string())).collect();
        let src: Vec<(String, String)> = names.iter().take(3).enumerate().map(|(i, n)| (format!("s{i}"), format!("{n}x"))).collect();
        let r = name_match_align(&src, &tgt, SimilarityKind::SequenceRatio, 10, NameNormalization::default(), &HashMap::new()).unwrap();
        for row in &r.rows {
            assert_eq!(row.candidates.len(), 10);
            assert!(row.candidates.windows(2).all(|w| w[0].score >= w[1].score));
        }
    }

    #[test]
    fn align_errors() {
        let src = pairs(&[("s", "x")]);
        let none: Vec<(String, String)> = vec![];
        let g = HashMap::new();
        assert_eq!(
            name_match_align(&src, &none, SimilarityKind::Jaro, 1, NameNormalization::default(), &g).unwrap_err(),
            SimError::EmptyTargets
        );
        assert_eq!(
            name_match_align(&src, &src, SimilarityKind::Jaro, 0, NameNormalization::default(), &g).unwrap_err(),
            SimError::ZeroK
        );
    }
}
