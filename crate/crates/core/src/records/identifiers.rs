use serde::{Deserialize, Serialize};

use super::{
    RecordError, FIRST_TABLE_ID, GEN_COLUMN_SEP, GEN_QUESTION_SEP, GEN_TABLE_SEP, MAX_GEN_COLUMNS,
};
use crate::sql::{RawColumn, RawQuery, SqlQuery};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdTable {
    pub id: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdColumn {
    pub id: u32,
    pub table: String,
    pub name: String,
}

/// Identifier tokens of one SQL-generation input: tables are `extra54`,
/// `extra55`, ... in listing order; columns are numbered `extra0`, `extra1`,
/// ... globally across tables in listing order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifierMap {
    pub tables: Vec<IdTable>,
    pub columns: Vec<IdColumn>,
}

fn token(id: u32) -> String {
    format!("extra{id}")
}

fn token_id(word: &str) -> Option<u32> {
    let d = word.strip_prefix("extra")?;
    if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    d.parse().ok()
}

impl IdentifierMap {
    /// Numbers a listing of tables, each with the columns to show under it.
    pub fn from_listing(listing: &[(String, Vec<String>)]) -> Result<IdentifierMap, RecordError> {
        let total: usize = listing.iter().map(|(_, cols)| cols.len()).sum();
        if total > MAX_GEN_COLUMNS {
            return Err(RecordError::TooManyColumns(total));
        }
        let mut map = IdentifierMap::default();
        for (m, (table, cols)) in listing.iter().enumerate() {
            if map.tables.iter().any(|t| &t.name == table) {
                return Err(RecordError::Malformed(format!("table `{table}` listed twice")));
            }
            map.tables.push(IdTable { id: FIRST_TABLE_ID + m as u32, name: table.clone() });
            for col in cols {
                if map.columns.iter().any(|c| &c.table == table && &c.name == col) {
                    return Err(RecordError::Malformed(format!("column `{table}.{col}` listed twice")));
                }
                map.columns.push(IdColumn {
                    id: map.columns.len() as u32,
                    table: table.clone(),
                    name: col.clone(),
                });
            }
        }
        Ok(map)
    }

    pub fn listing(&self) -> Vec<(String, Vec<String>)> {
        self.tables
            .iter()
            .map(|t| {
                let cols = self
                    .columns
                    .iter()
                    .filter(|c| c.table == t.name)
                    .map(|c| c.name.clone())
                    .collect();
                (t.name.clone(), cols)
            })
            .collect()
    }

    pub fn table_by_name(&self, name: &str) -> Option<&IdTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn column_by_name(&self, table: &str, name: &str) -> Option<&IdColumn> {
        self.columns.iter().find(|c| c.table == table && c.name == name)
    }

    /// `question extra50 extra54 t extra51 extra0 c ... extra53 question`
    pub fn render_input(&self, question: &str) -> String {
        let mut parts = vec![question.to_string()];
        for t in &self.tables {
            parts.push(format!("{GEN_TABLE_SEP} {} {}", token(t.id), t.name));
            for c in self.columns.iter().filter(|c| c.table == t.name) {
                parts.push(format!("{GEN_COLUMN_SEP} {} {}", token(c.id), c.name));
            }
        }
        parts.push(format!("{GEN_QUESTION_SEP} {question}"));
        parts.join(" ")
    }

    /// Recovers the identifier map and the question from a rendered input.
    pub fn parse_input(input: &str) -> Result<(IdentifierMap, String), RecordError> {
        let malformed = |m: &str| RecordError::Malformed(m.to_string());
        let table_marker = format!(" {GEN_TABLE_SEP} ");
        let question_marker = format!(" {GEN_QUESTION_SEP} ");
        let (question, rest) = input
            .split_once(&table_marker)
            .ok_or_else(|| malformed("no table separator"))?;
        let (body, _) = rest
            .rsplit_once(&question_marker)
            .ok_or_else(|| malformed("no question separator"))?;
        let body = format!("{GEN_TABLE_SEP} {body}");
        let words: Vec<&str> = body.split_whitespace().collect();

        let mut map = IdentifierMap::default();
        let mut i = 0;
        let mut current: Option<String> = None;
        while i < words.len() {
            let marker = words[i];
            let id = words
                .get(i + 1)
                .and_then(|w| token_id(w))
                .ok_or_else(|| malformed("separator not followed by an identifier"))?;
            let mut j = i + 2;
            while j < words.len() && words[j] != GEN_TABLE_SEP && words[j] != GEN_COLUMN_SEP {
                j += 1;
            }
            if j == i + 2 {
                return Err(malformed("identifier without a name"));
            }
            let name = words[i + 2..j].join(" ");
            match marker {
                m if m == GEN_TABLE_SEP => {
                    if id < FIRST_TABLE_ID || map.tables.iter().any(|t| t.id == id || t.name == name) {
                        return Err(malformed("bad or repeated table identifier"));
                    }
                    map.tables.push(IdTable { id, name: name.clone() });
                    current = Some(name);
                }
                m if m == GEN_COLUMN_SEP => {
                    let table = current.clone().ok_or_else(|| malformed("column before any table"))?;
                    if id as usize >= MAX_GEN_COLUMNS || map.columns.iter().any(|c| c.id == id) {
                        return Err(malformed("bad or repeated column identifier"));
                    }
                    map.columns.push(IdColumn { id, table, name });
                }
                _ => return Err(malformed("expected a separator")),
            }
            i = j;
        }
        Ok((map, question.to_string()))
    }

    /// Writes a resolved query with identifier tokens in place of names.
    pub fn encode(&self, q: &SqlQuery) -> Result<RawQuery, RecordError> {
        for t in q.tables() {
            if self.table_by_name(t).is_none() {
                return Err(RecordError::Coverage(t.to_string()));
            }
        }
        let mut raw = q.try_map_columns(|c| {
            let table = self.table_by_name(&c.table).expect("checked above");
            let col = self
                .column_by_name(&c.table, &c.column)
                .ok_or_else(|| RecordError::Coverage(format!("{}.{}", c.table, c.column)))?;
            Ok::<_, RecordError>(RawColumn { table: Some(token(table.id)), column: token(col.id) })
        })?;
        raw.map_tables(|t| token(self.table_by_name(t).expect("checked above").id));
        Ok(raw)
    }

    /// Replaces identifier tokens with real names; every token must be bound
    /// and every `table @ column` pair must match the listing.
    pub fn decode(&self, q: &RawQuery) -> Result<RawQuery, RecordError> {
        let table_of = |tok: &str| -> Result<&IdTable, RecordError> {
            token_id(tok)
                .and_then(|id| self.tables.iter().find(|t| t.id == id))
                .ok_or_else(|| RecordError::Unbound(tok.to_string()))
        };
        let column_of = |tok: &str| -> Result<&IdColumn, RecordError> {
            token_id(tok)
                .and_then(|id| self.columns.iter().find(|c| c.id == id))
                .ok_or_else(|| RecordError::Unbound(tok.to_string()))
        };
        for t in q.tables() {
            table_of(t)?;
        }
        let mut out = q.try_map_columns(|c| {
            let col = column_of(&c.column)?;
            if let Some(t) = &c.table {
                let table = table_of(t)?;
                if table.name != col.table {
                    return Err(RecordError::Unbound(format!("{t} @ {}", c.column)));
                }
            }
            Ok(RawColumn { table: Some(col.table.clone()), column: col.name.clone() })
        })?;
        out.map_tables(|t| table_of(t).map(|x| x.name.clone()).expect("checked above"));
        Ok(out)
    }
}
