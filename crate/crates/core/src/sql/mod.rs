//! The supported SQL subset: single-table SELECT with optional equi-joins,
//! aggregates, an AND-only WHERE, ORDER BY and LIMIT.
//!
//! Queries come in two flavours sharing one shape: [`RawQuery`] holds column
//! names as written, [`SqlQuery`] holds columns resolved against a schema.

mod canonical;
mod parse;
mod resolve;
mod serialize;
mod template;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::ColumnType;

pub use canonical::{canonicalize, logic_form_equal};
pub use parse::{parse_placeholder, parse_statement};
pub use resolve::{parse_sql, resolve};
pub use serialize::{render_literal, render_value, to_sql, to_templated_sql};
pub use template::{fill_values, strip_values, TemplatedSql, ValueAssignment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SqlError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("ambiguous column `{0}`")]
    AmbiguousColumn(String),
    #[error("type error: column `{column}` is numeric but compared with `{literal}`")]
    Type { column: String, literal: String },
    #[error("no binding for placeholder extra{0}")]
    MissingBinding(u32),
    #[error("binding for extra{0} has no placeholder")]
    ExtraBinding(u32),
    #[error("placeholders must be numbered 1..k without gaps or repeats, got {0:?}")]
    PlaceholderNumbering(Vec<u32>),
    #[error("templated query contains literal `{0}`")]
    LiteralInTemplate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    None,
    Count,
    Sum,
    Avg,
    Max,
    Min,
}

impl Aggregate {
    pub const ALL: [Aggregate; 6] = [
        Aggregate::None,
        Aggregate::Count,
        Aggregate::Sum,
        Aggregate::Avg,
        Aggregate::Max,
        Aggregate::Min,
    ];

    pub fn keyword(self) -> Option<&'static str> {
        match self {
            Aggregate::None => None,
            Aggregate::Count => Some("count"),
            Aggregate::Sum => Some("sum"),
            Aggregate::Avg => Some("avg"),
            Aggregate::Max => Some("max"),
            Aggregate::Min => Some("min"),
        }
    }

    pub fn from_keyword(s: &str) -> Option<Aggregate> {
        Aggregate::ALL
            .into_iter()
            .find(|a| a.keyword().is_some_and(|k| k.eq_ignore_ascii_case(s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
}

impl CompareOp {
    pub const ALL: [CompareOp; 6] = [
        CompareOp::Eq,
        CompareOp::Ne,
        CompareOp::Gt,
        CompareOp::Lt,
        CompareOp::Ge,
        CompareOp::Le,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Gt => ">",
            CompareOp::Lt => "<",
            CompareOp::Ge => ">=",
            CompareOp::Le => "<=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<CompareOp> {
        match s {
            "<>" => Some(CompareOp::Ne),
            _ => CompareOp::ALL.into_iter().find(|op| op.symbol() == s),
        }
    }
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ValueTerm {
    Literal(String),
    Placeholder(u32),
}

/// A column as written in query text: optionally qualified.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RawColumn {
    pub table: Option<String>,
    pub column: String,
}

/// A column resolved against a schema.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColumnRef {
    pub table: String,
    pub column: String,
    pub ctype: ColumnType,
}

impl ColumnRef {
    pub fn new(table: impl Into<String>, column: impl Into<String>, ctype: ColumnType) -> Self {
        ColumnRef { table: table.into(), column: column.into(), ctype }
    }

    pub fn raw(&self) -> RawColumn {
        RawColumn { table: Some(self.table.clone()), column: self.column.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SelectItem<C> {
    pub aggregate: Aggregate,
    pub column: C,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Join<C> {
    pub table: String,
    pub left: C,
    pub right: C,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition<C> {
    pub column: C,
    pub op: CompareOp,
    pub value: ValueTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrderBy<C> {
    pub column: C,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query<C> {
    pub select: Vec<SelectItem<C>>,
    pub from: String,
    pub joins: Vec<Join<C>>,
    pub conditions: Vec<Condition<C>>,
    pub order_by: Option<OrderBy<C>>,
    pub limit: Option<u64>,
}

pub type RawQuery = Query<RawColumn>;
pub type SqlQuery = Query<ColumnRef>;

impl<C> Query<C> {
    /// A bare `select ... from table` query.
    pub fn select_from(from: impl Into<String>, select: Vec<SelectItem<C>>) -> Self {
        Query {
            select,
            from: from.into(),
            joins: Vec::new(),
            conditions: Vec::new(),
            order_by: None,
            limit: None,
        }
    }

    /// FROM table followed by joined tables, in query order.
    pub fn tables(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.from.as_str()).chain(self.joins.iter().map(|j| j.table.as_str()))
    }

    /// Every column occurrence in clause order: select, joins, where, order.
    pub fn columns(&self) -> impl Iterator<Item = &C> {
        self.select
            .iter()
            .map(|s| &s.column)
            .chain(self.joins.iter().flat_map(|j| [&j.left, &j.right]))
            .chain(self.conditions.iter().map(|c| &c.column))
            .chain(self.order_by.iter().map(|o| &o.column))
    }

    pub fn placeholders(&self) -> Vec<u32> {
        self.conditions
            .iter()
            .filter_map(|c| match c.value {
                ValueTerm::Placeholder(i) => Some(i),
                ValueTerm::Literal(_) => None,
            })
            .collect()
    }

    pub fn literals(&self) -> impl Iterator<Item = &str> {
        self.conditions.iter().filter_map(|c| match &c.value {
            ValueTerm::Literal(s) => Some(s.as_str()),
            ValueTerm::Placeholder(_) => None,
        })
    }

    /// Rewrites every column occurrence, failing on the first error.
    pub fn try_map_columns<D, E>(
        &self,
        mut f: impl FnMut(&C) -> Result<D, E>,
    ) -> Result<Query<D>, E> {
        let select = self
            .select
            .iter()
            .map(|s| Ok(SelectItem { aggregate: s.aggregate, column: f(&s.column)? }))
            .collect::<Result<_, E>>()?;
        let joins = self
            .joins
            .iter()
            .map(|j| Ok(Join { table: j.table.clone(), left: f(&j.left)?, right: f(&j.right)? }))
            .collect::<Result<_, E>>()?;
        let conditions = self
            .conditions
            .iter()
            .map(|c| Ok(Condition { column: f(&c.column)?, op: c.op, value: c.value.clone() }))
            .collect::<Result<_, E>>()?;
        let order_by = match &self.order_by {
            Some(o) => Some(OrderBy { column: f(&o.column)?, direction: o.direction }),
            None => None,
        };
        Ok(Query {
            select,
            from: self.from.clone(),
            joins,
            conditions,
            order_by,
            limit: self.limit,
        })
    }

    /// Renames tables in FROM and JOIN clauses.
    pub fn map_tables(&mut self, mut f: impl FnMut(&str) -> String) {
        self.from = f(&self.from);
        for j in &mut self.joins {
            j.table = f(&j.table);
        }
    }
}

impl SqlQuery {
    pub fn to_raw(&self) -> RawQuery {
        self.try_map_columns(|c| Ok::<_, ()>(c.raw())).expect("infallible")
    }

    /// Distinct (table, column) pairs referenced anywhere, in clause order.
    pub fn referenced_columns(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        for c in self.columns() {
            let key = (c.table.clone(), c.column.clone());
            if !out.contains(&key) {
                out.push(key);
            }
        }
        out
    }
}

impl fmt::Display for SqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_sql(self))
    }
}
