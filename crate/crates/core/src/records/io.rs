use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{validate_question, QuestionSqlPair, RecordError};
use crate::schema::Schema;
use crate::sql::{parse_sql, to_sql};

/// On-disk form of a question/SQL pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub db_name: String,
    pub question: String,
    pub sql: String,
}

impl From<&QuestionSqlPair> for CorpusEntry {
    fn from(p: &QuestionSqlPair) -> Self {
        CorpusEntry {
            db_name: p.db_name.clone(),
            question: p.question.text.clone(),
            sql: to_sql(&p.gold_sql),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> RecordError {
    RecordError::Io { path: path.display().to_string(), source }
}

/// Reads one JSON object per line; blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, RecordError> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path).map_err(|e| io_err(path, e))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|e| RecordError::Line { line: i + 1, message: e.to_string() })?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<(), RecordError> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| io_err(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a corpus and resolves every gold query against `schema`.
pub fn read_corpus(path: impl AsRef<Path>, schema: &Schema) -> Result<Vec<QuestionSqlPair>, RecordError> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path).map_err(|e| io_err(path, e))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |message: String| RecordError::Line { line: i + 1, message };
        let entry: CorpusEntry = serde_json::from_str(&line).map_err(|e| at(e.to_string()))?;
        validate_question(&entry.question).map_err(|e| at(e.to_string()))?;
        let gold = parse_sql(&entry.sql, schema).map_err(|e| at(e.to_string()))?;
        out.push(QuestionSqlPair::new(entry.question, gold, entry.db_name));
    }
    Ok(out)
}

pub fn write_corpus(path: impl AsRef<Path>, pairs: &[QuestionSqlPair]) -> Result<(), RecordError> {
    let entries: Vec<CorpusEntry> = pairs.iter().map(CorpusEntry::from).collect();
    write_jsonl(path, &entries)
}
