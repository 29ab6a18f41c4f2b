use std::cmp::Ordering;
use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::schema::{is_decimal_numeral, normalize_decimal, ColumnType};
use crate::sql::{
    canonicalize, strip_values, Aggregate, ColumnRef, CompareOp, Direction, SqlQuery, ValueTerm,
};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("store document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("table `{table}` row {row}: {message}")]
    Row { table: String, row: usize, message: String },
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("query still has placeholder extra{0}")]
    Placeholder(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreTable {
    pub name: String,
    pub columns: Vec<(String, ColumnType)>,
    pub rows: Vec<Vec<String>>,
}

/// In-memory rows per table, enough to execute the supported SQL subset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ToyStore {
    pub tables: Vec<StoreTable>,
}

#[derive(Deserialize)]
struct DocColumn {
    name: String,
    #[serde(rename = "type")]
    ctype: ColumnType,
}

#[derive(Deserialize)]
struct DocTable {
    name: String,
    columns: Vec<DocColumn>,
    #[serde(default)]
    rows: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct Doc {
    tables: Vec<DocTable>,
}

fn as_number(s: &str) -> Option<f64> {
    is_decimal_numeral(s).then(|| s.parse().ok()).flatten()
}

fn format_number(x: f64) -> String {
    let s = format!("{x}");
    normalize_decimal(&s).unwrap_or(s)
}

fn compare(a: &str, b: &str, numeric: bool) -> Ordering {
    match (numeric, as_number(a), as_number(b)) {
        (true, Some(x), Some(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    }
}

fn holds(ord: Ordering, op: CompareOp) -> bool {
    match op {
        CompareOp::Eq => ord == Ordering::Equal,
        CompareOp::Ne => ord != Ordering::Equal,
        CompareOp::Gt => ord == Ordering::Greater,
        CompareOp::Lt => ord == Ordering::Less,
        CompareOp::Ge => ord != Ordering::Less,
        CompareOp::Le => ord != Ordering::Greater,
    }
}

type Row<'a> = HashMap<(&'a str, &'a str), &'a str>;

impl ToyStore {
    /// Reads the `rows` arrays of a schema document.
    pub fn from_json(text: &str) -> Result<ToyStore, StoreError> {
        let doc: Doc = serde_json::from_str(text)?;
        let mut tables = Vec::new();
        for t in doc.tables {
            let columns: Vec<(String, ColumnType)> = t.columns.into_iter().map(|c| (c.name, c.ctype)).collect();
            for (i, row) in t.rows.iter().enumerate() {
                let err = |message: String| StoreError::Row { table: t.name.clone(), row: i + 1, message };
                if row.len() != columns.len() {
                    return Err(err(format!("{} cells for {} columns", row.len(), columns.len())));
                }
                for (cell, (name, ctype)) in row.iter().zip(&columns) {
                    if *ctype == ColumnType::Number && !is_decimal_numeral(cell) {
                        return Err(err(format!("`{cell}` in number column `{name}`")));
                    }
                }
            }
            tables.push(StoreTable { name: t.name, columns, rows: t.rows });
        }
        Ok(ToyStore { tables })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ToyStore, StoreError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| StoreError::Io { path: path.display().to_string(), source })?;
        ToyStore::from_json(&text)
    }

    pub fn row_count(&self) -> usize {
        self.tables.iter().map(|t| t.rows.len()).sum()
    }

    fn table(&self, name: &str) -> Result<&StoreTable, StoreError> {
        self.tables.iter().find(|t| t.name == name).ok_or_else(|| StoreError::UnknownTable(name.into()))
    }

    fn rows_of(&self, name: &str) -> Result<Vec<Row<'_>>, StoreError> {
        let t = self.table(name)?;
        Ok(t.rows
            .iter()
            .map(|r| {
                t.columns
                    .iter()
                    .zip(r)
                    .map(|((c, _), v)| ((t.name.as_str(), c.as_str()), v.as_str()))
                    .collect()
            })
            .collect())
    }

    /// Result rows of `q`, each a list of rendered cells.
    pub fn execute(&self, q: &SqlQuery) -> Result<Vec<Vec<String>>, StoreError> {
        let get = |row: &Row<'_>, c: &ColumnRef| -> Result<String, StoreError> {
            row.get(&(c.table.as_str(), c.column.as_str()))
                .map(|v| v.to_string())
                .ok_or_else(|| StoreError::UnknownColumn(format!("{}.{}", c.table, c.column)))
        };

        let mut rows = self.rows_of(&q.from)?;
        for j in &q.joins {
            let right = self.rows_of(&j.table)?;
            let mut joined = Vec::new();
            for l in &rows {
                for r in &right {
                    let mut both = l.clone();
                    both.extend(r.iter().map(|(k, v)| (*k, *v)));
                    if get(&both, &j.left)? == get(&both, &j.right)? {
                        joined.push(both);
                    }
                }
            }
            rows = joined;
        }

        let mut kept = Vec::new();
        for row in rows {
            let mut ok = true;
            for c in &q.conditions {
                let lit = match &c.value {
                    ValueTerm::Literal(s) => s,
                    ValueTerm::Placeholder(i) => return Err(StoreError::Placeholder(*i)),
                };
                let cell = get(&row, &c.column)?;
                let ord = compare(&cell, lit, c.column.ctype == ColumnType::Number);
                ok &= holds(ord, c.op);
            }
            if ok {
                kept.push(row);
            }
        }

        if q.select.iter().any(|s| s.aggregate != Aggregate::None) {
            let mut out = Vec::new();
            for item in &q.select {
                let numeric = item.column.ctype == ColumnType::Number;
                let cells: Vec<String> = kept.iter().map(|r| get(r, &item.column)).collect::<Result<_, _>>()?;
                let nums = || cells.iter().filter_map(|c| as_number(c));
                let cell = match item.aggregate {
                    Aggregate::Count => cells.len().to_string(),
                    _ if cells.is_empty() => "NULL".to_string(),
                    Aggregate::Sum => format_number(nums().sum()),
                    Aggregate::Avg => format_number(nums().sum::<f64>() / cells.len() as f64),
                    Aggregate::Max => cells.iter().max_by(|a, b| compare(a, b, numeric)).cloned().unwrap_or_default(),
                    Aggregate::Min => cells.iter().min_by(|a, b| compare(a, b, numeric)).cloned().unwrap_or_default(),
                    Aggregate::None => cells[0].clone(),
                };
                out.push(cell);
            }
            return Ok(vec![out]);
        }

        if let Some(o) = &q.order_by {
            let numeric = o.column.ctype == ColumnType::Number;
            let mut keyed: Vec<(String, Row<'_>)> =
                kept.into_iter().map(|r| Ok((get(&r, &o.column)?, r))).collect::<Result<_, StoreError>>()?;
            keyed.sort_by(|a, b| {
                let ord = compare(&a.0, &b.0, numeric);
                if o.direction == Direction::Desc { ord.reverse() } else { ord }
            });
            kept = keyed.into_iter().map(|(_, r)| r).collect();
        }
        if let Some(n) = q.limit {
            kept.truncate(n as usize);
        }
        kept.iter()
            .map(|r| q.select.iter().map(|s| get(r, &s.column)).collect())
            .collect()
    }

    /// Copy of the store with `a` and `b` exchanged in one column.
    fn swapped(&self, table: &str, column: &str, a: &str, b: &str) -> ToyStore {
        let mut out = self.clone();
        for t in out.tables.iter_mut().filter(|t| t.name == table) {
            if let Some(ci) = t.columns.iter().position(|(c, _)| c == column) {
                for row in &mut t.rows {
                    if row[ci] == a {
                        row[ci] = b.to_string();
                    } else if row[ci] == b {
                        row[ci] = a.to_string();
                    }
                }
            }
        }
        out
    }
}

/// Whether `b` is `a` with some `=` literals exchanged for other values of
/// the same column, checked by execution: running `a` on a store where each
/// old and new value trade places must give `b`'s result on the real store,
/// once projected values of those columns are swapped back.
pub fn execution_consistent(a: &SqlQuery, b: &SqlQuery, store: &ToyStore) -> bool {
    if store.row_count() == 0 {
        return true;
    }
    let (ca, cb) = (canonicalize(a), canonicalize(b));
    if strip_values(&ca).0 != strip_values(&cb).0 {
        return false;
    }
    let mut swaps = Vec::new();
    for (x, y) in ca.conditions.iter().zip(&cb.conditions) {
        if x.value == y.value {
            continue;
        }
        let (ValueTerm::Literal(old), ValueTerm::Literal(new)) = (&x.value, &y.value) else {
            return false;
        };
        if x.op != CompareOp::Eq {
            return false;
        }
        swaps.push((x.column.clone(), old.clone(), new.clone()));
    }
    let mut swapped = store.clone();
    for (col, old, new) in &swaps {
        swapped = swapped.swapped(&col.table, &col.column, old, new);
    }
    let (Ok(mut ra), Ok(mut rb)) = (swapped.execute(a), store.execute(b)) else {
        return false;
    };
    for row in &mut ra {
        for (cell, item) in row.iter_mut().zip(&a.select) {
            if matches!(item.aggregate, Aggregate::Count | Aggregate::Sum | Aggregate::Avg) {
                continue;
            }
            for (col, old, new) in &swaps {
                if col.table == item.column.table && col.column == item.column.column {
                    if cell == old {
                        *cell = new.clone();
                    } else if cell == new {
                        *cell = old.clone();
                    }
                }
            }
        }
    }
    ra.sort();
    rb.sort();
    ra == rb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Schema;
    use crate::sql::parse_sql;

    const FIXTURE: &str = include_str!("../../tests/fixtures/schema.json");

    fn q(sql: &str) -> SqlQuery {
        parse_sql(sql, &Schema::from_json(FIXTURE).unwrap()).unwrap()
    }

    #[test]
    fn executes_fixture_queries() {
        let s = ToyStore::from_json(FIXTURE).unwrap();
        assert_eq!(s.row_count(), 10);
        let r = s.execute(&q("select amount from power_bill where user_name = 'Alice'")).unwrap();
        assert_eq!(r, [["100"], ["250.5"]]);
        let r = s.execute(&q("select sum(amount) from power_bill where month = 'March'")).unwrap();
        assert_eq!(r, [["180"]]);
        let r = s.execute(&q("select count(user_name) from power_bill where amount > 95")).unwrap();
        assert_eq!(r, [["3"]]);
        let r = s
            .execute(&q("select user_name from power_bill order by amount desc limit 2"))
            .unwrap();
        assert_eq!(r, [["Carol"], ["Alice"]]);
        let r = s
            .execute(&q("select power_bill.amount from power_bill join user_info on power_bill.user_name = user_info.user_name where user_info.region = 'Hangzhou'"))
            .unwrap();
        assert_eq!(r, [["100"], ["250.5"], ["310"]]);
    }

    #[test]
    fn consistency_of_keyword_replacement() {
        let s = ToyStore::from_json(FIXTURE).unwrap();
        // by hand: March rows are Alice 100, Bob 80; April rows Alice 250.5, David 95
        let a = q("select user_name, amount from power_bill where month = 'March'");
        let b = q("select user_name, amount from power_bill where month = 'April'");
        assert!(execution_consistent(&a, &b, &s));
        let a = q("select month from power_bill where month = 'March'");
        let b = q("select month from power_bill where month = 'April'");
        assert!(execution_consistent(&a, &b, &s));
        let c = q("select month from power_bill where user_name = 'Bob'");
        assert!(!execution_consistent(&a, &c, &s));
        let d = q("select amount from power_bill where amount > 90");
        let e = q("select amount from power_bill where amount > 95");
        assert!(!execution_consistent(&d, &e, &s));
    }

    #[test]
    fn empty_store_is_vacuous() {
        let doc = r#"{"tables":[{"name":"power_bill","columns":[{"name":"month","type":"text"}]}]}"#;
        let s = ToyStore::from_json(doc).unwrap();
        let a = q("select month from power_bill where month = 'March'");
        let b = q("select amount from power_bill");
        assert!(execution_consistent(&a, &b, &s));
    }

    #[test]
    fn rows_must_fit_types() {
        let doc = r#"{"tables":[{"name":"t","columns":[{"name":"n","type":"number"}],"rows":[["x"]]}]}"#;
        assert!(matches!(ToyStore::from_json(doc), Err(StoreError::Row { row: 1, .. })));
    }
}
