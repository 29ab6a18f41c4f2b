use super::{parse_statement, ColumnRef, RawColumn, RawQuery, SqlError, SqlQuery, ValueTerm};
use crate::schema::{is_decimal_numeral, ColumnType, Schema};

/// Binds every column of `raw` to the schema. Unqualified names are looked up
/// in the query's tables and must be unambiguous.
pub fn resolve(raw: &RawQuery, schema: &Schema) -> Result<SqlQuery, SqlError> {
    let tables: Vec<&str> = raw.tables().collect();
    for t in &tables {
        if schema.table(t).is_none() {
            return Err(SqlError::UnknownTable((*t).to_string()));
        }
    }
    let query = raw.try_map_columns(|c: &RawColumn| match &c.table {
        Some(t) => {
            if !tables.contains(&t.as_str()) {
                return Err(SqlError::UnknownTable(t.clone()));
            }
            let column = schema
                .table(t)
                .and_then(|tab| tab.column(&c.column))
                .ok_or_else(|| SqlError::UnknownColumn(format!("{t}.{}", c.column)))?;
            Ok(ColumnRef::new(t.clone(), c.column.clone(), column.ctype))
        }
        None => {
            let mut found = tables
                .iter()
                .filter_map(|t| schema.table(t)?.column(&c.column).map(|col| (*t, col.ctype)));
            match (found.next(), found.next()) {
                (Some((t, ctype)), None) => Ok(ColumnRef::new(t, c.column.clone(), ctype)),
                (Some(_), Some(_)) => Err(SqlError::AmbiguousColumn(c.column.clone())),
                _ => Err(SqlError::UnknownColumn(c.column.clone())),
            }
        }
    })?;
    for cond in &query.conditions {
        if let ValueTerm::Literal(v) = &cond.value {
            if cond.column.ctype == ColumnType::Number && !is_decimal_numeral(v) {
                return Err(SqlError::Type {
                    column: format!("{}.{}", cond.column.table, cond.column.column),
                    literal: v.clone(),
                });
            }
        }
    }
    Ok(query)
}

/// Parses and resolves query text against `schema`.
pub fn parse_sql(text: &str, schema: &Schema) -> Result<SqlQuery, SqlError> {
    resolve(&parse_statement(text)?, schema)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::Aggregate;

    fn schema() -> Schema {
        Schema::from_json(include_str!("../../tests/fixtures/schema.json")).unwrap()
    }

    #[test]
    fn resolves_plain_names() {
        let q = parse_sql(
            "select amount from power_bill where user_name = 'Alice' and month = 'March'",
            &schema(),
        )
        .unwrap();
        assert_eq!(q.select[0].column, ColumnRef::new("power_bill", "amount", ColumnType::Number));
        assert_eq!(q.conditions.len(), 2);
    }

    #[test]
    fn unknown_column() {
        assert_eq!(
            parse_sql("select ghost from power_bill", &schema()),
            Err(SqlError::UnknownColumn("ghost".into()))
        );
        assert!(matches!(
            parse_sql("select power_bill @ region from power_bill", &schema()),
            Err(SqlError::UnknownColumn(_))
        ));
    }

    #[test]
    fn unknown_table() {
        assert_eq!(
            parse_sql("select a from nowhere", &schema()),
            Err(SqlError::UnknownTable("nowhere".into()))
        );
        // qualified with a table that is in the schema but not in the query
        assert!(matches!(
            parse_sql("select user_info @ region from power_bill", &schema()),
            Err(SqlError::UnknownTable(_))
        ));
    }

    #[test]
    fn ambiguity_in_joins() {
        let s = schema();
        let sql = "select user_name from power_bill join user_info on power_bill.user_name = user_info.user_name";
        assert_eq!(parse_sql(sql, &s), Err(SqlError::AmbiguousColumn("user_name".into())));
        let sql = "select count(region) from power_bill join user_info on power_bill.user_name = user_info.user_name";
        let q = parse_sql(sql, &s).unwrap();
        assert_eq!(q.select[0].aggregate, Aggregate::Count);
        assert_eq!(q.select[0].column.table, "user_info");
    }

    #[test]
    fn numeric_type_check() {
        let s = schema();
        assert!(matches!(
            parse_sql("select month from power_bill where amount > 'lots'", &s),
            Err(SqlError::Type { .. })
        ));
        assert!(parse_sql("select month from power_bill where amount > '100'", &s).is_ok());
        // placeholders are not type checked
        assert!(parse_sql("select month from power_bill where amount > 'extra1'", &s).is_ok());
    }
}
