//! Step-by-step text-to-SQL.
//!
//! A question is translated in four stages: table selection, column
//! selection, generation of SQL without values, and value filling. Each stage
//! has a dataset format ([`records`]), a model contract ([`submodel`]) and a
//! deterministic heuristic implementation ([`baseline`]); [`pipeline`] chains
//! them, optionally wrapped by entity linking ([`ner`]).

pub mod schema;
pub mod sql;
pub mod records;
pub mod submodel;
pub mod baseline;
pub mod ner;
pub mod pipeline;
pub mod eval;
pub mod augment;
pub mod bridge;
