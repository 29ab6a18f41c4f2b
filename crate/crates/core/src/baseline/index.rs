use std::collections::BTreeSet;

use crate::schema::{tokenize, Schema};

/// Words that never count as content when scoring a question.
pub const STOPWORDS: &[&str] = &[
    "a", "an", "the", "of", "for", "to", "is", "are", "was", "were", "be", "what", "which", "who",
    "whose", "show", "list", "me", "please", "give", "tell", "find", "all", "and", "with", "on",
    "at", "by", "from", "do", "does", "did", "how", "many", "much", "each", "every", "that",
    "this", "there", "their", "my", "our", "your", "i", "we", "you", "s",
];

fn words_of(text: &str) -> impl Iterator<Item = String> + '_ {
    tokenize(text)
        .into_iter()
        .filter(|t| t.text.chars().any(|c| c.is_alphanumeric() || c == '_'))
        .map(|t| t.text.to_lowercase())
}

/// Lowercased words of a name, plus its `_`-separated parts.
pub fn name_words(name: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for w in words_of(name) {
        out.extend(w.split('_').filter(|p| !p.is_empty()).map(str::to_string));
        out.insert(w);
    }
    out
}

/// Distinct non-stopword words of a question.
pub fn content_words(question: &str) -> BTreeSet<String> {
    words_of(question).filter(|w| !STOPWORDS.contains(&w.as_str())).collect()
}

/// Per-table bag of words from the table name, its column names and its
/// cell values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalIndex {
    tables: Vec<(String, BTreeSet<String>)>,
}

impl LexicalIndex {
    pub fn build(schema: &Schema) -> LexicalIndex {
        let tables = schema
            .tables
            .iter()
            .map(|t| {
                let mut bag = name_words(&t.name);
                for c in &t.columns {
                    bag.extend(name_words(&c.name));
                    for v in &c.values {
                        bag.extend(words_of(v));
                    }
                }
                (t.name.clone(), bag)
            })
            .collect();
        LexicalIndex { tables }
    }

    pub fn words(&self, table: &str) -> Option<&BTreeSet<String>> {
        self.tables.iter().find(|(n, _)| n == table).map(|(_, b)| b)
    }

    /// Share of the question's content words found in the table's bag;
    /// 0 when the question has no content words. `None` for unknown tables.
    pub fn score(&self, question: &str, table: &str) -> Option<f64> {
        let bag = self.words(table)?;
        let content = content_words(question);
        if content.is_empty() {
            return Some(0.0);
        }
        let hits = content.iter().filter(|w| bag.contains(*w)).count();
        Some((hits as f64 / content.len() as f64).clamp(0.0, 1.0))
    }
}
