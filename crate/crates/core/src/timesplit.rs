//! Rule-based separation of time expressions from entity names.
//!
//! Recognized forms, highest priority first:
//!
//! 1. `yyyy-mm-dd`
//! 2. `yyyy-mm`
//! 3. `Month d, yyyy` and `d Month yyyy` (English month names, any case)
//! 4. year ranges `yyyy-yy` / `yyyy-yyyy` with a hyphen, en dash or slash
//! 5. a standalone year
//!
//! Years must lie in 1000..=2999. A match is only accepted when the characters
//! around it are neither alphanumeric nor word connectors, so `U-23` or
//! `A1999` never yield a year.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::embeddings::is_connector;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TimeSplit {
    /// Recognized expressions in order of appearance, space-separated.
    pub time: String,
    /// The name with every expression removed and whitespace collapsed.
    pub remainder: String,
}

const MONTHS: &str = "january|february|march|april|may|june|july|august|september|october|november|december";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Rule {
    FullDate,
    YearMonth,
    MonthDayYear,
    DayMonthYear,
    YearRange,
    Year,
}

struct Matcher {
    rule: Rule,
    re: Regex,
}

static MATCHERS: LazyLock<Vec<Matcher>> = LazyLock::new(|| {
    let m = |rule, pattern: &str| Matcher {
        rule,
        re: Regex::new(pattern).expect("static pattern"),
    };
    vec![
        m(Rule::FullDate, r"([0-9]{4})-([0-9]{2})-([0-9]{2})"),
        m(Rule::YearMonth, r"([0-9]{4})-([0-9]{2})"),
        m(Rule::MonthDayYear, &format!(r"(?i)({MONTHS})\s+([0-9]{{1,2}}),?\s+([0-9]{{4}})")),
        m(Rule::DayMonthYear, &format!(r"(?i)([0-9]{{1,2}})\s+({MONTHS})\s+([0-9]{{4}})")),
        m(Rule::YearRange, r"([0-9]{4})[-\u{2013}/]([0-9]{4}|[0-9]{2})"),
        m(Rule::Year, r"([0-9]{4})"),
    ]
});

fn year_ok(s: &str) -> bool {
    s.parse::<u32>().is_ok_and(|y| (1000..=2999).contains(&y))
}

fn in_range(s: &str, lo: u32, hi: u32) -> bool {
    s.parse::<u32>().is_ok_and(|v| (lo..=hi).contains(&v))
}

fn valid(rule: Rule, caps: &regex::Captures<'_>) -> bool {
    let g = |i: usize| caps.get(i).map_or("", |m| m.as_str());
    match rule {
        Rule::FullDate => year_ok(g(1)) && in_range(g(2), 1, 12) && in_range(g(3), 1, 31),
        Rule::YearMonth => year_ok(g(1)) && in_range(g(2), 1, 12),
        Rule::MonthDayYear => in_range(g(2), 1, 31) && year_ok(g(3)),
        Rule::DayMonthYear => in_range(g(1), 1, 31) && year_ok(g(3)),
        Rule::YearRange => year_ok(g(1)) && (g(2).len() == 2 || year_ok(g(2))),
        Rule::Year => year_ok(g(1)),
    }
}

fn blocks_boundary(c: Option<char>) -> bool {
    c.is_some_and(|c| c.is_alphanumeric() || is_connector(c))
}

/// Byte spans of the accepted matches, sorted and non-overlapping.
fn find_spans(text: &str) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(usize, usize, Rule)> = Vec::new();
    for m in MATCHERS.iter() {
        let mut pos = 0;
        while let Some(caps) = m.re.captures_at(text, pos) {
            let whole = caps.get(0).expect("group 0");
            let (start, end) = (whole.start(), whole.end());
            let before = text[..start].chars().next_back();
            let after = text[end..].chars().next();
            if valid(m.rule, &caps) && !blocks_boundary(before) && !blocks_boundary(after) {
                candidates.push((start, end, m.rule));
            }
            pos = start + text[start..].chars().next().map_or(1, char::len_utf8);
            if pos > text.len() {
                break;
            }
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then((b.1 - b.0).cmp(&(a.1 - a.0))).then(a.2.cmp(&b.2)));
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for (start, end, _) in candidates {
        if spans.last().is_none_or(|&(_, e)| start >= e) {
            spans.push((start, end));
        }
    }
    spans
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits `name` into its time expressions and the rest.
pub fn split_time(name: &str) -> TimeSplit {
    let text: String = name.nfc().collect();
    let spans = find_spans(&text);
    let mut rest = String::with_capacity(text.len());
    let mut times = Vec::with_capacity(spans.len());
    let mut last = 0;
    for (start, end) in spans {
        rest.push_str(&text[last..start]);
        rest.push(' ');
        times.push(collapse(&text[start..end]));
        last = end;
    }
    rest.push_str(&text[last..]);
    TimeSplit {
        time: times.join(" "),
        remainder: collapse(&rest),
    }
}
