//! Database schema and content: tables, typed columns and the distinct cell
//! values observed in each column.

mod fuzzy;
mod tokenize;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fuzzy::{fuzzy_allowance, levenshtein, MIN_FUZZY_LEN};
pub use tokenize::{join, tokenize, Question, Token};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate {kind} name `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("empty schema: {0}")]
    Empty(String),
    #[error("column `{table}.{column}` is numeric but holds non-numeric value `{value}`")]
    NonNumeric {
        table: String,
        column: String,
        value: String,
    },
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown column `{column}` in table `{table}`")]
    UnknownColumn { table: String, column: String },
}

/// Column type. Unrecognized type names in a schema file are read as text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Text,
    Number,
    Time,
}

impl ColumnType {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::Text => "text",
            ColumnType::Number => "number",
            ColumnType::Time => "time",
        }
    }

    pub fn from_name(name: &str) -> ColumnType {
        match name.to_ascii_lowercase().as_str() {
            "number" | "numeric" | "int" | "integer" | "float" | "real" | "decimal" => {
                ColumnType::Number
            }
            "time" | "date" | "datetime" | "timestamp" => ColumnType::Time,
            _ => ColumnType::Text,
        }
    }
}

impl<'de> Deserialize<'de> for ColumnType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        Ok(ColumnType::from_name(&name))
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub ctype: ColumnType,
    #[serde(default)]
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub db_name: String,
    pub tables: Vec<Table>,
}

/// One hit returned by [`Schema::find_value`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueMatch {
    pub table: String,
    pub column: String,
    pub value: String,
    pub distance: usize,
}

/// Returns true for an optionally signed decimal numeral such as `12`, `-3.50`.
pub fn is_decimal_numeral(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.map_or(true, |f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

/// Normal form of a decimal numeral: no leading zeros, no trailing fractional
/// zeros, no negative zero. `"100.0"` and `"0100"` both become `"100"`.
pub fn normalize_decimal(s: &str) -> Option<String> {
    if !is_decimal_numeral(s) {
        return None;
    }
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    let int = int.trim_start_matches('0');
    let frac = frac.trim_end_matches('0');
    let int = if int.is_empty() { "0" } else { int };
    let mut out = String::new();
    if neg && !(int == "0" && frac.is_empty()) {
        out.push('-');
    }
    out.push_str(int);
    if !frac.is_empty() {
        out.push('.');
        out.push_str(frac);
    }
    Some(out)
}

impl Schema {
    /// Reads and validates a schema document.
    pub fn load(path: impl AsRef<Path>) -> Result<Schema, SchemaError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SchemaError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Schema::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Schema, SchemaError> {
        let schema: Schema = serde_json::from_str(text).map_err(|e| SchemaError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.tables.is_empty() {
            return Err(SchemaError::Empty("no tables".into()));
        }
        let mut table_names = HashSet::new();
        for table in &self.tables {
            if !table_names.insert(table.name.as_str()) {
                return Err(SchemaError::Duplicate {
                    kind: "table",
                    name: table.name.clone(),
                });
            }
            if table.columns.is_empty() {
                return Err(SchemaError::Empty(format!("table `{}` has no columns", table.name)));
            }
            let mut column_names = HashSet::new();
            for column in &table.columns {
                if !column_names.insert(column.name.as_str()) {
                    return Err(SchemaError::Duplicate {
                        kind: "column",
                        name: format!("{}.{}", table.name, column.name),
                    });
                }
                if column.ctype == ColumnType::Number {
                    if let Some(bad) = column.values.iter().find(|v| !is_decimal_numeral(v)) {
                        return Err(SchemaError::NonNumeric {
                            table: table.name.clone(),
                            column: column.name.clone(),
                            value: bad.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.name == name)
    }

    pub fn column(&self, table: &str, column: &str) -> Result<&Column, SchemaError> {
        let t = self
            .table(table)
            .ok_or_else(|| SchemaError::UnknownTable(table.to_string()))?;
        t.column(column).ok_or_else(|| SchemaError::UnknownColumn {
            table: table.to_string(),
            column: column.to_string(),
        })
    }

    pub fn column_count(&self) -> usize {
        self.tables.iter().map(|t| t.columns.len()).sum()
    }

    /// Every cell value within `max_distance` (case-folded Levenshtein) of
    /// `span`, sorted by distance, then table order, then column order, then
    /// value order.
    pub fn find_value(&self, span: &str, max_distance: usize) -> Vec<ValueMatch> {
        if span.is_empty() {
            return Vec::new();
        }
        let folded = span.to_lowercase();
        let span_len = folded.chars().count();
        let mut hits = Vec::new();
        for (ti, table) in self.tables.iter().enumerate() {
            for (ci, column) in table.columns.iter().enumerate() {
                for (vi, value) in column.values.iter().enumerate() {
                    let vfold = value.to_lowercase();
                    // length difference is a lower bound on the distance
                    if vfold.chars().count().abs_diff(span_len) > max_distance {
                        continue;
                    }
                    let d = levenshtein(&folded, &vfold);
                    if d <= max_distance {
                        hits.push(((d, ti, ci, vi), ValueMatch {
                            table: table.name.clone(),
                            column: column.name.clone(),
                            value: value.clone(),
                            distance: d,
                        }));
                    }
                }
            }
        }
        hits.sort_by_key(|(k, _)| *k);
        hits.into_iter().map(|(_, m)| m).collect()
    }
}
