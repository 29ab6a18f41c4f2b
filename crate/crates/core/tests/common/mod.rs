//! Shared helpers for integration tests: fixture loading and a seeded
//! generator of random resolved queries over the marketing fixture.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use stepsql::schema::{ColumnType, Schema};
use stepsql::sql::{Aggregate, ColumnRef, CompareOp, Condition, Direction, Join, OrderBy, SelectItem, SqlQuery, ValueTerm};

pub fn manifest_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn fixture_schema() -> Schema {
    Schema::load(manifest_path("tests/fixtures/schema.json")).expect("fixture schema")
}

pub fn demo_schema() -> Schema {
    Schema::load(manifest_path("data/demo/schema.json")).expect("demo schema")
}

const NUMBERS: [&str; 7] = ["100", "250.5", "80", "0", "7.25", "310", "95"];
const ODD_TEXT: [&str; 3] = ["O'Brien", "it's", "Mary Ann"];

/// Shape limits for [`random_query`].
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_select: usize,
    pub max_conditions: usize,
    pub join_probability: f64,
    pub order_probability: f64,
    pub limit_probability: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { max_select: 3, max_conditions: 3, join_probability: 0.3, order_probability: 0.3, limit_probability: 0.3 }
    }
}

fn columns_of(schema: &Schema, table: &str) -> Vec<ColumnRef> {
    schema
        .table(table)
        .expect("known table")
        .columns
        .iter()
        .map(|c| ColumnRef::new(table, c.name.clone(), c.ctype))
        .collect()
}

pub fn random_literal(schema: &Schema, col: &ColumnRef, rng: &mut impl Rng) -> String {
    if col.ctype == ColumnType::Number {
        return NUMBERS.choose(rng).unwrap().to_string();
    }
    let values = &schema.column(&col.table, &col.column).unwrap().values;
    if rng.gen_bool(0.15) || values.is_empty() {
        ODD_TEXT.choose(rng).unwrap().to_string()
    } else {
        values.choose(rng).unwrap().clone()
    }
}

/// A random query over `power_bill` and `user_info`, optionally joined on
/// `user_name` in either orientation.
pub fn random_query(schema: &Schema, shape: Shape, rng: &mut impl Rng) -> SqlQuery {
    let tables = ["power_bill", "user_info"];
    let from = *tables.choose(rng).unwrap();
    let mut cols = columns_of(schema, from);
    let mut joins = Vec::new();
    if rng.gen_bool(shape.join_probability) {
        let other = if from == "power_bill" { "user_info" } else { "power_bill" };
        let a = ColumnRef::new(from, "user_name", ColumnType::Text);
        let b = ColumnRef::new(other, "user_name", ColumnType::Text);
        let (left, right) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        joins.push(Join { table: other.to_string(), left, right });
        cols.extend(columns_of(schema, other));
    }
    let select = (0..rng.gen_range(1..=shape.max_select))
        .map(|_| SelectItem { aggregate: *Aggregate::ALL.choose(rng).unwrap(), column: cols.choose(rng).unwrap().clone() })
        .collect();
    let conditions = (0..rng.gen_range(0..=shape.max_conditions))
        .map(|_| {
            let column = cols.choose(rng).unwrap().clone();
            let value = ValueTerm::Literal(random_literal(schema, &column, rng));
            Condition { column, op: *CompareOp::ALL.choose(rng).unwrap(), value }
        })
        .collect();
    let order_by = rng.gen_bool(shape.order_probability).then(|| OrderBy {
        column: cols.choose(rng).unwrap().clone(),
        direction: if rng.gen_bool(0.5) { Direction::Asc } else { Direction::Desc },
    });
    let limit = rng.gen_bool(shape.limit_probability).then(|| rng.gen_range(1..=10));
    SqlQuery { select, from: from.to_string(), joins, conditions, order_by, limit }
}
