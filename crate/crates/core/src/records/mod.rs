//! Dataset records for the four subtasks, built from question/SQL pairs.
//!
//! Surface tokens per record type:
//!
//! | record        | tokens                                                       |
//! |---------------|--------------------------------------------------------------|
//! | table select  | `extra0` separates question and table name                   |
//! | column select | `extra0` before the table name, `extra1` before each column  |
//! | sql generation| `extra50` table, `extra51` column, `extra53` question, `extra54+` table ids, `extra0..` column ids |
//! | value filling | `[SEP]` separators, `extraN` value placeholders from 1       |
//!
//! The same `extraN` string means different things in different record types;
//! no string ever mixes two record types.

mod build;
mod identifiers;
mod io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::Question;
use crate::sql::{SqlError, SqlQuery};

pub use build::{
    build_column_records, build_sqlgen_record, build_table_records, build_valuefill_record,
    column_record_input, downsample_negatives, gold_sqlgen_listing, parse_column_input,
    parse_table_input, parse_value_output, parse_valuefill_input, render_value_output,
    table_record_input, valuefill_record_input, ColumnListing,
};
pub use identifiers::{IdColumn, IdTable, IdentifierMap};
pub use io::{read_corpus, read_jsonl, write_corpus, write_jsonl, CorpusEntry};

pub const TABLE_SEP: &str = "extra0";
pub const COLUMN_SEP: &str = "extra1";
pub const GEN_TABLE_SEP: &str = "extra50";
pub const GEN_COLUMN_SEP: &str = "extra51";
pub const GEN_QUESTION_SEP: &str = "extra53";
/// Identifier of the first listed table in SQL-generation input.
pub const FIRST_TABLE_ID: u32 = 54;
/// Column identifiers run `extra0..extra49`; `extra50` is the table separator.
pub const MAX_GEN_COLUMNS: usize = 50;
pub const SEP: &str = "[SEP]";

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("question contains reserved token `{0}`")]
    ReservedWord(String),
    #[error("gold query references `{0}`, which is not among the chosen items")]
    Coverage(String),
    #[error("{0} columns listed; at most {MAX_GEN_COLUMNS} fit the identifier space")]
    TooManyColumns(usize),
    #[error("malformed record input: {0}")]
    Malformed(String),
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error(transparent)]
    Sql(#[from] SqlError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionSqlPair {
    pub question: Question,
    pub gold_sql: SqlQuery,
    pub db_name: String,
}

impl QuestionSqlPair {
    pub fn new(question: impl Into<String>, gold_sql: SqlQuery, db_name: impl Into<String>) -> Self {
        QuestionSqlPair { question: Question::new(question), gold_sql, db_name: db_name.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSelectRecord {
    pub input: String,
    pub label: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnLabel {
    #[serde(rename = "B-C")]
    Hit,
    #[serde(rename = "B-N")]
    Miss,
    #[serde(rename = "O")]
    Outside,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSelectRecord {
    pub input: String,
    pub labels: Vec<ColumnLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqlGenRecord {
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueFillRecord {
    pub input: String,
    pub output: String,
}

/// True for `extraN` in any case.
pub fn is_reserved_token(word: &str) -> bool {
    let lower = word.to_ascii_lowercase();
    lower
        .strip_prefix("extra")
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// Rejects text that could be confused with a separator token.
pub fn validate_question(text: &str) -> Result<(), RecordError> {
    if text.contains(SEP) {
        return Err(RecordError::ReservedWord(SEP.into()));
    }
    if let Some(t) = crate::schema::tokenize(text).into_iter().find(|t| is_reserved_token(&t.text)) {
        return Err(RecordError::ReservedWord(t.text));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_words() {
        assert!(validate_question("total amount for Alice").is_ok());
        assert!(validate_question("extraordinary bill").is_ok());
        assert!(matches!(validate_question("bill extra53 now"), Err(RecordError::ReservedWord(w)) if w == "extra53"));
        assert!(validate_question("EXTRA1 here").is_err());
        assert!(validate_question("a [SEP] b").is_err());
    }

    #[test]
    fn label_wire_names() {
        let json = serde_json::to_string(&[ColumnLabel::Hit, ColumnLabel::Miss, ColumnLabel::Outside]).unwrap();
        assert_eq!(json, r#"["B-C","B-N","O"]"#);
    }
}
