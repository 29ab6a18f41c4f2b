//! Entity linking against cell values.
//!
//! Before inference, question spans that are near-misses of database values
//! are replaced by the canonical values; after inference, literals can be
//! swapped back to the user's original wording.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::is_reserved_token;
use crate::schema::{fuzzy_allowance, tokenize, Question, Schema};
use crate::sql::{SqlQuery, ValueTerm};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NerError {
    #[error("mapping span `{span}` at {start}..{end} does not match the question")]
    OffsetMismatch { span: String, start: usize, end: usize },
}

/// One linked span. Offsets are byte offsets into the source question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityLink {
    pub span: String,
    pub start: usize,
    pub end: usize,
    pub canonical: String,
    pub table: String,
    pub column: String,
    pub distance: usize,
}

/// Non-overlapping links ordered by position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMapping {
    pub links: Vec<EntityLink>,
}

impl EntityMapping {
    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// True when every link is an exact (case-insensitive) match.
    pub fn is_exact(&self) -> bool {
        self.links.iter().all(|l| l.distance == 0)
    }
}

fn usable_value(value: &str) -> bool {
    !tokenize(value).iter().any(|t| is_reserved_token(&t.text) || t.text == "[")
}

/// Links question spans to cell values within `max_distance` edits
/// (short or numeric spans must match exactly). Overlaps are resolved by
/// lower distance, then longer span, then earlier position.
pub fn link_entities(q: &Question, schema: &Schema, max_distance: usize) -> EntityMapping {
    let longest = schema
        .tables
        .iter()
        .flat_map(|t| &t.columns)
        .flat_map(|c| &c.values)
        .map(|v| tokenize(v).len())
        .max()
        .unwrap_or(0);
    let n = q.tokens.len();
    let mut candidates = Vec::new();
    for from in 0..n {
        for to in from + 1..=(from + longest).min(n) {
            if !q.is_word_span(from, to) {
                continue;
            }
            let span = q.span_text(from, to);
            let found = schema
                .find_value(span, max_distance)
                .into_iter()
                .find(|m| m.distance <= fuzzy_allowance(span, &m.value, max_distance) && usable_value(&m.value));
            if let Some(m) = found {
                let (start, end) = (q.tokens[from].start, q.tokens[to - 1].end);
                candidates.push(EntityLink {
                    span: span.to_string(),
                    start,
                    end,
                    canonical: m.value,
                    table: m.table,
                    column: m.column,
                    distance: m.distance,
                });
            }
        }
    }
    candidates.sort_by_key(|l| (l.distance, std::cmp::Reverse(l.span.chars().count()), l.start));
    let mut links: Vec<EntityLink> = Vec::new();
    for c in candidates {
        if links.iter().all(|l| c.end <= l.start || l.end <= c.start) {
            links.push(c);
        }
    }
    links.sort_by_key(|l| l.start);
    EntityMapping { links }
}

fn check(text: &str, l: &EntityLink, span: &str, start: usize, end: usize) -> Result<(), NerError> {
    if text.get(start..end) == Some(span) {
        Ok(())
    } else {
        Err(NerError::OffsetMismatch { span: l.span.clone(), start, end })
    }
}

/// Replaces each linked span with its canonical value.
pub fn substitute_forward(q: &Question, m: &EntityMapping) -> Result<Question, NerError> {
    let mut out = String::with_capacity(q.text.len());
    let mut cursor = 0;
    for l in &m.links {
        if l.start < cursor {
            return Err(NerError::OffsetMismatch { span: l.span.clone(), start: l.start, end: l.end });
        }
        check(&q.text, l, &l.span, l.start, l.end)?;
        out.push_str(&q.text[cursor..l.start]);
        out.push_str(&l.canonical);
        cursor = l.end;
    }
    out.push_str(&q.text[cursor..]);
    Ok(Question::new(out))
}

/// Undoes [`substitute_forward`] on its output text.
pub fn restore_question(substituted: &str, m: &EntityMapping) -> Result<String, NerError> {
    let mut out = String::with_capacity(substituted.len());
    let mut cursor = 0;
    let mut shift: isize = 0;
    for l in &m.links {
        let start = (l.start as isize + shift) as usize;
        let end = start + l.canonical.len();
        check(substituted, l, &l.canonical, start, end)?;
        out.push_str(&substituted[cursor..start]);
        out.push_str(&l.span);
        cursor = end;
        shift += l.canonical.len() as isize - (l.end - l.start) as isize;
    }
    out.push_str(&substituted[cursor..]);
    Ok(out)
}

/// With `restore` on, literals equal to a linked canonical value go back to
/// the original span (a link on the same column is preferred). With it off
/// the query is returned unchanged.
pub fn substitute_backward(sql: &SqlQuery, m: &EntityMapping, restore: bool) -> SqlQuery {
    let mut out = sql.clone();
    if !restore {
        return out;
    }
    for cond in &mut out.conditions {
        let ValueTerm::Literal(lit) = &cond.value else { continue };
        let same_column = m.links.iter().find(|l| {
            &l.canonical == lit && l.table == cond.column.table && l.column == cond.column.column
        });
        if let Some(l) = same_column.or_else(|| m.links.iter().find(|l| &l.canonical == lit)) {
            cond.value = ValueTerm::Literal(l.span.clone());
        }
    }
    out
}
