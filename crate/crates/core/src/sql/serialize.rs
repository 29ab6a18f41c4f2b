use std::fmt;

use super::{ColumnRef, Direction, Query, RawColumn, RawQuery, SqlQuery, ValueTerm};
use crate::schema::is_decimal_numeral;

/// Numerals are written bare, everything else single-quoted with `''` escapes.
pub fn render_literal(s: &str) -> String {
    if is_decimal_numeral(s) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', "''"))
    }
}

pub fn render_value(v: &ValueTerm) -> String {
    match v {
        ValueTerm::Literal(s) => render_literal(s),
        ValueTerm::Placeholder(i) => format!("'extra{i}'"),
    }
}

fn render<C>(q: &Query<C>, col: impl Fn(&C) -> String) -> String {
    let mut out = String::from("select ");
    let items: Vec<String> = q
        .select
        .iter()
        .map(|s| match s.aggregate.keyword() {
            Some(k) => format!("{k}({})", col(&s.column)),
            None => col(&s.column),
        })
        .collect();
    out.push_str(&items.join(", "));
    out.push_str(" from ");
    out.push_str(&q.from);
    for j in &q.joins {
        out.push_str(&format!(" join {} on {} = {}", j.table, col(&j.left), col(&j.right)));
    }
    for (i, c) in q.conditions.iter().enumerate() {
        out.push_str(if i == 0 { " where " } else { " and " });
        out.push_str(&format!("{} {} {}", col(&c.column), c.op, render_value(&c.value)));
    }
    if let Some(o) = &q.order_by {
        let dir = match o.direction {
            Direction::Asc => "asc",
            Direction::Desc => "desc",
        };
        out.push_str(&format!(" order by {} {dir}", col(&o.column)));
    }
    if let Some(n) = q.limit {
        out.push_str(&format!(" limit {n}"));
    }
    out
}

/// Final-SQL rendering: bare column names, or `table.column` once the query
/// joins more than one table.
pub fn to_sql(q: &SqlQuery) -> String {
    let qualify = !q.joins.is_empty();
    render(q, |c: &ColumnRef| {
        if qualify {
            format!("{}.{}", c.table, c.column)
        } else {
            c.column.clone()
        }
    })
}

/// Templated rendering with every column written `table @ column`.
pub fn to_templated_sql(q: &SqlQuery) -> String {
    render(q, |c: &ColumnRef| format!("{} @ {}", c.table, c.column))
}

impl fmt::Display for RawQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = render(self, |c: &RawColumn| match &c.table {
            Some(t) => format!("{t} @ {}", c.column),
            None => c.column.clone(),
        });
        f.write_str(&s)
    }
}
