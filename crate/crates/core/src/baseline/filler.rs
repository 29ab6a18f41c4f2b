use super::spans::{best_value_span, numeral_spans, overlaps};
use super::BaselineConfig;
use crate::records::{parse_valuefill_input, render_value_output};
use crate::schema::{ColumnType, Question, Schema};
use crate::sql::{parse_statement, RawColumn, ValueAssignment, ValueTerm};
use crate::submodel::ModelError;

fn locate<'a>(
    schema: &'a Schema,
    tables: &[&str],
    col: &RawColumn,
) -> Result<&'a crate::schema::Column, ModelError> {
    let found = match &col.table {
        Some(t) => schema.column(t, &col.column).ok(),
        None => tables.iter().find_map(|t| schema.column(t, &col.column).ok()),
    };
    found.ok_or_else(|| ModelError::Contract(format!("unknown column `{}` in value-fill input", col.column)))
}

pub(crate) fn fill(schema: &Schema, config: &BaselineConfig, input: &str) -> Result<String, ModelError> {
    let (question, sql) = parse_valuefill_input(input)?;
    let raw = parse_statement(&sql).map_err(|e| ModelError::Contract(format!("value-fill input SQL: {e}")))?;
    let tables: Vec<&str> = raw.tables().collect();
    let mut slots: Vec<(u32, &RawColumn)> = raw
        .conditions
        .iter()
        .filter_map(|c| match c.value {
            ValueTerm::Placeholder(k) => Some((k, &c.column)),
            ValueTerm::Literal(_) => None,
        })
        .collect();
    slots.sort_by_key(|(k, _)| *k);

    let q = Question::new(question);
    let numerals = numeral_spans(&q);
    let mut used: Vec<(usize, usize)> = Vec::new();
    let mut bindings = ValueAssignment::new();
    for (k, col) in slots {
        let column = locate(schema, &tables, col)?;
        let numeral = if column.ctype == ColumnType::Number {
            numerals.iter().copied().find(|s| !used.iter().any(|u| overlaps(*u, *s)))
        } else {
            None
        };
        let span = match numeral {
            Some(s) => s,
            None => best_value_span(&q, &column.values, config.fill_distance, &used)
                .map(|m| (m.from, m.to))
                .ok_or(ModelError::Unfillable(k))?,
        };
        used.push(span);
        bindings.bindings.insert(k, q.span_text(span.0, span.1).to_string());
    }
    Ok(render_value_output(&bindings))
}
