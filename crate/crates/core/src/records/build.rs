use rand::Rng;

use super::{
    ColumnLabel, ColumnSelectRecord, IdentifierMap, QuestionSqlPair, RecordError, SqlGenRecord,
    TableSelectRecord, ValueFillRecord, COLUMN_SEP, SEP, TABLE_SEP,
};
use crate::schema::{tokenize, ColumnType, Schema};
use crate::sql::{fill_values, strip_values, TemplatedSql, ValueAssignment};

/// `question extra0 table_name`
pub fn table_record_input(question: &str, table: &str) -> String {
    format!("{question} {TABLE_SEP} {table}")
}

pub fn parse_table_input(input: &str) -> Result<(String, String), RecordError> {
    input
        .rsplit_once(&format!(" {TABLE_SEP} "))
        .map(|(q, t)| (q.to_string(), t.to_string()))
        .ok_or_else(|| RecordError::Malformed("table input lacks `extra0`".into()))
}

/// Gold tables in query order, without repeats.
fn gold_tables(pair: &QuestionSqlPair) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in pair.gold_sql.tables() {
        if !out.iter().any(|x| x == t) {
            out.push(t.to_string());
        }
    }
    out
}

/// One record per schema table, label 1 iff the gold query reads the table.
pub fn build_table_records(pair: &QuestionSqlPair, schema: &Schema) -> Vec<TableSelectRecord> {
    let gold = gold_tables(pair);
    schema
        .tables
        .iter()
        .map(|t| TableSelectRecord {
            input: table_record_input(&pair.question.text, &t.name),
            label: u8::from(gold.contains(&t.name)),
        })
        .collect()
}

/// Keeps every positive record and each negative with probability `keep`.
pub fn downsample_negatives(
    records: Vec<TableSelectRecord>,
    keep: f64,
    rng: &mut impl Rng,
) -> Vec<TableSelectRecord> {
    records
        .into_iter()
        .filter(|r| r.label == 1 || rng.gen_bool(keep.clamp(0.0, 1.0)))
        .collect()
}

/// The parsed form of a column-selection input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnListing {
    pub question: String,
    pub table: String,
    pub columns: Vec<(String, ColumnType)>,
}

impl ColumnListing {
    pub fn render(&self) -> String {
        column_record_input(&self.question, &self.table, &self.columns)
    }

    /// Labels over the input tokens: B-C / B-N on each `extra1`, O elsewhere.
    pub fn labels(&self, hits: &[bool]) -> Vec<ColumnLabel> {
        let mut hit_iter = hits.iter();
        tokenize(&self.render())
            .iter()
            .map(|t| {
                if t.text == COLUMN_SEP {
                    match hit_iter.next() {
                        Some(true) => ColumnLabel::Hit,
                        _ => ColumnLabel::Miss,
                    }
                } else {
                    ColumnLabel::Outside
                }
            })
            .collect()
    }
}

/// `question extra0 table extra1 col_1 type_1 ... extra1 col_n type_n`
pub fn column_record_input(question: &str, table: &str, columns: &[(String, ColumnType)]) -> String {
    let mut s = format!("{question} {TABLE_SEP} {table}");
    for (name, ctype) in columns {
        s.push_str(&format!(" {COLUMN_SEP} {name} {ctype}"));
    }
    s
}

pub fn parse_column_input(input: &str) -> Result<ColumnListing, RecordError> {
    let malformed = |m: &str| RecordError::Malformed(m.to_string());
    let (question, rest) = input
        .split_once(&format!(" {TABLE_SEP} "))
        .ok_or_else(|| malformed("column input lacks `extra0`"))?;
    let sep = format!(" {COLUMN_SEP} ");
    let mut segments = rest.split(sep.as_str());
    let table = segments.next().unwrap_or_default().to_string();
    if table.is_empty() {
        return Err(malformed("empty table name"));
    }
    let columns = segments
        .map(|seg| {
            let (name, ctype) = seg
                .rsplit_once(' ')
                .ok_or_else(|| malformed("column without a type"))?;
            Ok((name.to_string(), ColumnType::from_name(ctype)))
        })
        .collect::<Result<Vec<_>, RecordError>>()?;
    Ok(ColumnListing { question: question.to_string(), table, columns })
}

/// One record per gold table listing all of its columns; a column separator
/// is B-C iff the gold query references that column anywhere.
pub fn build_column_records(pair: &QuestionSqlPair, schema: &Schema) -> Vec<ColumnSelectRecord> {
    let referenced = pair.gold_sql.referenced_columns();
    gold_tables(pair)
        .into_iter()
        .filter_map(|name| schema.table(&name))
        .map(|table| {
            let listing = ColumnListing {
                question: pair.question.text.clone(),
                table: table.name.clone(),
                columns: table.columns.iter().map(|c| (c.name.clone(), c.ctype)).collect(),
            };
            let hits: Vec<bool> = table
                .columns
                .iter()
                .map(|c| referenced.contains(&(table.name.clone(), c.name.clone())))
                .collect();
            ColumnSelectRecord { input: listing.render(), labels: listing.labels(&hits) }
        })
        .collect()
}

/// Gold tables in query order, each with its gold columns in schema order.
pub fn gold_sqlgen_listing(pair: &QuestionSqlPair, schema: &Schema) -> Vec<(String, Vec<String>)> {
    let referenced = pair.gold_sql.referenced_columns();
    gold_tables(pair)
        .into_iter()
        .map(|t| {
            let cols = schema
                .table(&t)
                .map(|tab| {
                    tab.columns
                        .iter()
                        .filter(|c| referenced.contains(&(t.clone(), c.name.clone())))
                        .map(|c| c.name.clone())
                        .collect()
                })
                .unwrap_or_default();
            (t, cols)
        })
        .collect()
}

/// SQL-generation record over the chosen tables and columns; the output is
/// the value-stripped gold query written with identifier tokens.
pub fn build_sqlgen_record(
    pair: &QuestionSqlPair,
    schema: &Schema,
    chosen: &[(String, Vec<String>)],
) -> Result<SqlGenRecord, RecordError> {
    for (t, cols) in chosen {
        for c in cols {
            schema
                .column(t, c)
                .map_err(|e| RecordError::Malformed(e.to_string()))?;
        }
    }
    let map = IdentifierMap::from_listing(chosen)?;
    let (templated, _) = strip_values(&pair.gold_sql);
    let output = map.encode(templated.query())?.to_string();
    Ok(SqlGenRecord { input: map.render_input(&pair.question.text), output })
}

/// `question [SEP] templated-sql [SEP] question`
pub fn valuefill_record_input(question: &str, templated: &TemplatedSql) -> String {
    format!("{question} {SEP} {} {SEP} {question}", templated.to_sql())
}

pub fn parse_valuefill_input(input: &str) -> Result<(String, String), RecordError> {
    let parts: Vec<&str> = input.split(&format!(" {SEP} ")).collect();
    match parts.as_slice() {
        [q, sql, _] => Ok((q.to_string(), sql.to_string())),
        _ => Err(RecordError::Malformed("value-fill input needs two [SEP]".into())),
    }
}

/// `extra1 value_1 extra2 value_2 ...`, empty for no placeholders.
pub fn render_value_output(a: &ValueAssignment) -> String {
    a.bindings
        .iter()
        .map(|(i, v)| format!("extra{i} {v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses value output; indices must run 1..k in order.
pub fn parse_value_output(output: &str) -> Result<ValueAssignment, RecordError> {
    let mut rest = output.trim();
    let mut a = ValueAssignment::new();
    let mut k = 1u32;
    while !rest.is_empty() {
        let marker = format!("extra{k}");
        let after = rest
            .strip_prefix(&marker)
            .filter(|r| r.starts_with(' '))
            .ok_or_else(|| RecordError::Malformed(format!("expected `{marker} <value>`")))?;
        let next = format!(" extra{} ", k + 1);
        let (value, tail) = match after.find(&next) {
            Some(pos) => (&after[..pos], &after[pos + 1..]),
            None => (after, ""),
        };
        let value = value.trim();
        if value.is_empty() {
            return Err(RecordError::Malformed(format!("empty value for {marker}")));
        }
        a.bindings.insert(k, value.to_string());
        rest = tail;
        k += 1;
    }
    Ok(a)
}

pub fn build_valuefill_record(
    pair: &QuestionSqlPair,
    templated: &TemplatedSql,
    gold: &ValueAssignment,
) -> Result<ValueFillRecord, RecordError> {
    fill_values(templated, gold)?;
    Ok(ValueFillRecord {
        input: valuefill_record_input(&pair.question.text, templated),
        output: render_value_output(gold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::parse_sql;
    use ColumnLabel::{Hit, Miss, Outside};

    fn schema() -> Schema {
        Schema::from_json(include_str!("../../tests/fixtures/schema.json")).unwrap()
    }

    fn pair(q: &str, sql: &str) -> QuestionSqlPair {
        QuestionSqlPair::new(q, parse_sql(sql, &schema()).unwrap(), "marketing")
    }

    /// Membership oracle: does the gold text mention the table as a FROM/JOIN target?
    fn mentions_table(sql: &str, table: &str) -> bool {
        let words: Vec<&str> = sql.split_whitespace().collect();
        words.windows(2).any(|w| (w[0] == "from" || w[0] == "join") && w[1] == table)
    }

    #[test]
    fn table_records() {
        let s = schema();
        let sql = "select amount from power_bill where user_name = 'Alice'";
        let recs = build_table_records(&pair("q", sql), &s);
        assert_eq!(
            recs,
            vec![
                TableSelectRecord { input: "q extra0 power_bill".into(), label: 1 },
                TableSelectRecord { input: "q extra0 user_info".into(), label: 0 },
            ]
        );
        for r in &recs {
            let (_, t) = parse_table_input(&r.input).unwrap();
            assert_eq!(r.label == 1, mentions_table(sql, &t));
        }
    }

    #[test]
    fn table_records_single_table_schema() {
        let s = Schema::from_json(
            r#"{"db_name":"d","tables":[{"name":"t","columns":[{"name":"a","type":"text"}]}]}"#,
        )
        .unwrap();
        let p = QuestionSqlPair::new("q", parse_sql("select a from t", &s).unwrap(), "d");
        let recs = build_table_records(&p, &s);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].label, 1);
    }

    #[test]
    fn table_records_with_join() {
        let s = schema();
        let sql = "select region from power_bill join user_info on power_bill.user_name = user_info.user_name";
        let recs = build_table_records(&pair("q", sql), &s);
        assert!(recs.iter().all(|r| r.label == 1));
    }

    #[test]
    fn column_records() {
        let p = pair("amount in March", "select amount from power_bill where month = 'March'");
        let recs = build_column_records(&p, &schema());
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(
            r.input,
            "amount in March extra0 power_bill extra1 user_name text extra1 month text extra1 amount number"
        );
        assert_eq!(
            r.labels,
            vec![
                Outside, Outside, Outside, Outside, Outside, // question + extra0 + table
                Miss, Outside, Outside, // user_name
                Hit, Outside, Outside, // month
                Hit, Outside, Outside, // amount
            ]
        );
        assert_eq!(r.labels.len(), tokenize(&r.input).len());
    }

    #[test]
    fn column_records_all_hit() {
        let p = pair(
            "q",
            "select user_name, month from power_bill where amount > 1",
        );
        let r = &build_column_records(&p, &schema())[0];
        assert!(r.labels.iter().filter(|l| **l != Outside).all(|l| *l == Hit));
    }

    #[test]
    fn column_input_round_trip() {
        let listing = ColumnListing {
            question: "what's the amount?".into(),
            table: "power_bill".into(),
            columns: vec![("amount".into(), ColumnType::Number), ("month".into(), ColumnType::Time)],
        };
        assert_eq!(parse_column_input(&listing.render()).unwrap(), listing);
    }

    #[test]
    fn sqlgen_record() {
        let s = schema();
        let p = pair("amount in March", "select amount from power_bill where month = 'March'");
        let chosen = vec![("power_bill".to_string(), vec!["amount".to_string(), "month".to_string()])];
        let r = build_sqlgen_record(&p, &s, &chosen).unwrap();
        assert_eq!(
            r.input,
            "amount in March extra50 extra54 power_bill extra51 extra0 amount extra51 extra1 month extra53 amount in March"
        );
        assert_eq!(r.output, "select extra54 @ extra0 from extra54 where extra54 @ extra1 = 'extra1'");
        assert_eq!(gold_sqlgen_listing(&p, &s), vec![("power_bill".to_string(), vec!["month".to_string(), "amount".to_string()])]);
    }

    #[test]
    fn sqlgen_coverage_error() {
        let s = schema();
        let p = pair("q", "select amount from power_bill where user_name = 'Alice'");
        let chosen = vec![("power_bill".to_string(), vec!["amount".to_string()])];
        assert!(matches!(build_sqlgen_record(&p, &s, &chosen), Err(RecordError::Coverage(_))));
    }

    #[test]
    fn valuefill_record() {
        let p = pair(
            "bill of Alice in March",
            "select amount from power_bill where user_name = 'Alice' and month = 'March'",
        );
        let (t, a) = strip_values(&p.gold_sql);
        let r = build_valuefill_record(&p, &t, &a).unwrap();
        assert_eq!(r.output, "extra1 Alice extra2 March");
        assert!(r.input.starts_with("bill of Alice in March [SEP] "));
        assert!(r.input.ends_with(" [SEP] bill of Alice in March"));
        assert_eq!(parse_value_output(&r.output).unwrap(), a);
        let (q, sql) = parse_valuefill_input(&r.input).unwrap();
        assert_eq!(q, "bill of Alice in March");
        assert_eq!(sql, t.to_sql());
    }

    #[test]
    fn valuefill_empty() {
        let p = pair("all amounts", "select amount from power_bill");
        let (t, a) = strip_values(&p.gold_sql);
        let r = build_valuefill_record(&p, &t, &a).unwrap();
        assert_eq!(r.output, "");
        assert!(parse_value_output("").unwrap().is_empty());
    }

    #[test]
    fn value_output_grammar() {
        let a = parse_value_output("extra1 New York extra2 March").unwrap();
        assert_eq!(a.get(1), Some("New York"));
        assert_eq!(a.get(2), Some("March"));
        assert!(parse_value_output("extra2 March").is_err());
        assert!(parse_value_output("extra1").is_err());
        assert!(parse_value_output("extra1 a extra3 b").unwrap().get(1) == Some("a extra3 b"));
        assert!(parse_value_output("Alice").is_err());
    }
}
