use super::{SqlQuery, ValueTerm};
use crate::schema::{normalize_decimal, ColumnType};

/// Order-insensitive normal form. Select items and conjuncts are sorted,
/// joins are sorted by joined table with each equality written smaller side
/// first, and numeric literals on number columns are normalized. FROM,
/// ORDER BY and LIMIT are kept as is.
pub fn canonicalize(q: &SqlQuery) -> SqlQuery {
    let mut c = q.clone();
    c.select
        .sort_by(|a, b| (a.aggregate, &a.column.table, &a.column.column).cmp(&(b.aggregate, &b.column.table, &b.column.column)));
    for cond in &mut c.conditions {
        if cond.column.ctype == ColumnType::Number {
            if let ValueTerm::Literal(v) = &cond.value {
                if let Some(n) = normalize_decimal(v) {
                    cond.value = ValueTerm::Literal(n);
                }
            }
        }
    }
    c.conditions.sort_by(|a, b| {
        (&a.column.table, &a.column.column, a.op, &a.value)
            .cmp(&(&b.column.table, &b.column.column, b.op, &b.value))
    });
    for j in &mut c.joins {
        if (&j.right.table, &j.right.column) < (&j.left.table, &j.left.column) {
            std::mem::swap(&mut j.left, &mut j.right);
        }
    }
    c.joins.sort_by(|a, b| a.table.cmp(&b.table));
    c
}

/// Logic-form match: canonical forms are structurally identical.
pub fn logic_form_equal(pred: &SqlQuery, gold: &SqlQuery) -> bool {
    canonicalize(pred) == canonicalize(gold)
}
