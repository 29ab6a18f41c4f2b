use std::path::Path;

use thiserror::Error;

use crate::sql::{Aggregate, CompareOp};

const DEFAULT_TABLE: &str = include_str!("../../data/triggers.tsv");

#[derive(Debug, Error)]
pub enum TriggerError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("trigger table line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerRole {
    Aggregate(Aggregate),
    Operator(CompareOp),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trigger {
    pub words: Vec<String>,
    pub role: TriggerRole,
}

/// A trigger found in a question: token position and length in words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriggerHit {
    pub pos: usize,
    pub len: usize,
    pub role: TriggerRole,
}

impl TriggerHit {
    pub fn end(&self) -> usize {
        self.pos + self.len
    }
}

/// Phrase → aggregate/operator table, loaded from `phrase<TAB>role` lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerTable {
    triggers: Vec<Trigger>,
}

impl Default for TriggerTable {
    fn default() -> Self {
        TriggerTable::parse(DEFAULT_TABLE).expect("bundled trigger table is valid")
    }
}

fn parse_role(s: &str) -> Option<TriggerRole> {
    let (kind, arg) = s.split_once(':')?;
    match kind {
        "agg" => Aggregate::from_keyword(arg).map(TriggerRole::Aggregate),
        "op" => CompareOp::from_symbol(arg).map(TriggerRole::Operator),
        _ => None,
    }
}

impl TriggerTable {
    pub fn parse(text: &str) -> Result<TriggerTable, TriggerError> {
        let mut triggers = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| TriggerError::Line { line: i + 1, message: message.into() };
            let (phrase, role) = line.split_once('\t').ok_or_else(|| err("expected phrase<TAB>role"))?;
            let words: Vec<String> = phrase.split_whitespace().map(str::to_lowercase).collect();
            if words.is_empty() {
                return Err(err("empty phrase"));
            }
            let role = parse_role(role.trim()).ok_or_else(|| err("unknown role"))?;
            triggers.push(Trigger { words, role });
        }
        // longest phrases first so that "at least" beats a shorter overlap
        triggers.sort_by(|a, b| b.words.len().cmp(&a.words.len()));
        Ok(TriggerTable { triggers })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TriggerTable, TriggerError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| TriggerError::Io { path: path.display().to_string(), source })?;
        TriggerTable::parse(&text)
    }

    pub fn triggers(&self) -> &[Trigger] {
        &self.triggers
    }

    /// Non-overlapping trigger occurrences in lowercased `words`, left to
    /// right, preferring the longest phrase at each position.
    pub fn scan(&self, words: &[String]) -> Vec<TriggerHit> {
        let mut hits = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let found = self.triggers.iter().find(|t| {
                words.len() >= i + t.words.len() && words[i..i + t.words.len()] == t.words[..]
            });
            match found {
                Some(t) => {
                    hits.push(TriggerHit { pos: i, len: t.words.len(), role: t.role });
                    i += t.words.len();
                }
                None => i += 1,
            }
        }
        hits
    }

    /// Phrases mapped to `role`, shortest first.
    pub fn phrases_for(&self, role: TriggerRole) -> Vec<String> {
        let mut out: Vec<String> = self
            .triggers
            .iter()
            .filter(|t| t.role == role)
            .map(|t| t.words.join(" "))
            .collect();
        out.sort_by_key(|p| (p.split(' ').count(), p.clone()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_lowercase).collect()
    }

    #[test]
    fn default_table_scans() {
        let t = TriggerTable::default();
        let hits = t.scan(&words("Total amount for Alice with amount at least 100"));
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].role, TriggerRole::Aggregate(Aggregate::Sum));
        assert_eq!(hits[1], TriggerHit { pos: 6, len: 2, role: TriggerRole::Operator(CompareOp::Ge) });
        assert!(t.scan(&words("amount for Alice")).is_empty());
    }

    #[test]
    fn custom_table_and_errors() {
        let t = TriggerTable::parse("# c\nsomme\tagg:sum\nplus de\top:>\n").unwrap();
        assert_eq!(t.triggers().len(), 2);
        assert!(matches!(TriggerTable::parse("x\tagg:median\n"), Err(TriggerError::Line { line: 1, .. })));
        assert!(matches!(TriggerTable::parse("ok\tagg:sum\nnotab\n"), Err(TriggerError::Line { line: 2, .. })));
    }

    #[test]
    fn phrases_for_role() {
        let t = TriggerTable::default();
        let sums = t.phrases_for(TriggerRole::Aggregate(Aggregate::Sum));
        assert_eq!(sums, ["total", "sum of"]);
    }
}
