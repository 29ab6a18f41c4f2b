use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{to_templated_sql, SqlError, SqlQuery, ValueTerm};

/// A query whose condition values are all placeholders numbered `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SqlQuery", into = "SqlQuery")]
pub struct TemplatedSql(SqlQuery);

impl TemplatedSql {
    pub fn new(query: SqlQuery) -> Result<TemplatedSql, SqlError> {
        if let Some(lit) = query.literals().next() {
            return Err(SqlError::LiteralInTemplate(lit.to_string()));
        }
        let mut indices = query.placeholders();
        indices.sort_unstable();
        if indices.iter().enumerate().any(|(i, &p)| p as usize != i + 1) {
            return Err(SqlError::PlaceholderNumbering(query.placeholders()));
        }
        Ok(TemplatedSql(query))
    }

    pub fn query(&self) -> &SqlQuery {
        &self.0
    }

    pub fn into_query(self) -> SqlQuery {
        self.0
    }

    pub fn slot_count(&self) -> usize {
        self.0.conditions.len()
    }

    /// Rendering in the `table @ column` form.
    pub fn to_sql(&self) -> String {
        to_templated_sql(&self.0)
    }
}

impl TryFrom<SqlQuery> for TemplatedSql {
    type Error = SqlError;
    fn try_from(q: SqlQuery) -> Result<Self, SqlError> {
        TemplatedSql::new(q)
    }
}

impl From<TemplatedSql> for SqlQuery {
    fn from(t: TemplatedSql) -> SqlQuery {
        t.0
    }
}

/// Placeholder index → literal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValueAssignment {
    pub bindings: BTreeMap<u32, String>,
}

impl ValueAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, index: u32) -> Option<&str> {
        self.bindings.get(&index).map(String::as_str)
    }
}

impl FromIterator<(u32, String)> for ValueAssignment {
    fn from_iter<I: IntoIterator<Item = (u32, String)>>(iter: I) -> Self {
        ValueAssignment { bindings: iter.into_iter().collect() }
    }
}

/// Replaces each literal with `Placeholder(1..=k)` in conjunct order.
/// Placeholders already present are kept and never renumbered.
pub fn strip_values(q: &SqlQuery) -> (TemplatedSql, ValueAssignment) {
    let mut query = q.clone();
    let mut assignment = ValueAssignment::new();
    let mut next = 1;
    for cond in &mut query.conditions {
        if let ValueTerm::Literal(v) = &cond.value {
            assignment.bindings.insert(next, v.clone());
            cond.value = ValueTerm::Placeholder(next);
            next += 1;
        }
    }
    (TemplatedSql(query), assignment)
}

pub fn fill_values(t: &TemplatedSql, a: &ValueAssignment) -> Result<SqlQuery, SqlError> {
    let slots = t.0.placeholders();
    if let Some(&extra) = a.bindings.keys().find(|k| !slots.contains(k)) {
        return Err(SqlError::ExtraBinding(extra));
    }
    let mut query = t.0.clone();
    for cond in &mut query.conditions {
        if let ValueTerm::Placeholder(i) = cond.value {
            let v = a.get(i).ok_or(SqlError::MissingBinding(i))?;
            cond.value = ValueTerm::Literal(v.to_string());
        }
    }
    Ok(query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Schema;
    use crate::sql::parse_sql;

    fn schema() -> Schema {
        Schema::from_json(include_str!("../../tests/fixtures/schema.json")).unwrap()
    }

    fn q(sql: &str) -> SqlQuery {
        parse_sql(sql, &schema()).unwrap()
    }

    #[test]
    fn two_conjuncts() {
        let orig = q("select amount from power_bill where user_name = 'Alice' and month = 'March'");
        let (t, a) = strip_values(&orig);
        assert_eq!(t.query().placeholders(), [1, 2]);
        assert_eq!(a.get(1), Some("Alice"));
        assert_eq!(a.get(2), Some("March"));
        assert_eq!(fill_values(&t, &a).unwrap(), orig);
    }

    #[test]
    fn empty_where() {
        let orig = q("select amount from power_bill");
        let (t, a) = strip_values(&orig);
        assert_eq!(t.query(), &orig);
        assert!(a.is_empty());
        assert_eq!(fill_values(&t, &a).unwrap(), orig);
    }

    #[test]
    fn numeric_literal() {
        let orig = q("select month from power_bill where amount > 100");
        let (t, a) = strip_values(&orig);
        assert_eq!(a.bindings, BTreeMap::from([(1, "100".to_string())]));
        assert_eq!(fill_values(&t, &a).unwrap(), orig);
    }

    #[test]
    fn missing_and_extra_bindings() {
        let orig = q("select amount from power_bill where user_name = 'Alice' and month = 'March'");
        let (t, a) = strip_values(&orig);
        let mut missing = a.clone();
        missing.bindings.remove(&2);
        assert_eq!(fill_values(&t, &missing), Err(SqlError::MissingBinding(2)));
        let mut extra = a;
        extra.bindings.insert(3, "x".into());
        assert_eq!(fill_values(&t, &extra), Err(SqlError::ExtraBinding(3)));
    }

    #[test]
    fn templated_validation() {
        assert!(matches!(
            TemplatedSql::new(q("select amount from power_bill where month = 'March'")),
            Err(SqlError::LiteralInTemplate(_))
        ));
        assert!(matches!(
            TemplatedSql::new(q("select amount from power_bill where month = 'extra2'")),
            Err(SqlError::PlaceholderNumbering(_))
        ));
        assert!(matches!(
            TemplatedSql::new(q(
                "select amount from power_bill where month = 'extra1' and user_name = 'extra1'"
            )),
            Err(SqlError::PlaceholderNumbering(_))
        ));
        let t = TemplatedSql::new(q(
            "select amount from power_bill where month = 'extra2' and user_name = 'extra1'",
        ))
        .unwrap();
        assert_eq!(t.slot_count(), 2);
    }
}
