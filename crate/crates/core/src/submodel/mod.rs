//! Contracts for the four stage models.
//!
//! Every model consumes the serialized record input of its stage (the same
//! strings the dataset builders write), so in-process heuristics and remote
//! models are interchangeable.

mod contract;
mod filter;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::RecordError;

pub use contract::{check_candidates, check_column_tagging, check_table_score, check_value_output};
pub use filter::{validate_candidate, validity_filter, FilterOutcome, GenerationMode};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("no template applies to this input")]
    NoTemplate,
    #[error("no question span fills placeholder extra{0}")]
    Unfillable(u32),
    #[error("all candidates were rejected by the validity filter")]
    NoValidCandidate,
    #[error(transparent)]
    Record(#[from] RecordError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableScore {
    pub table: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDecision {
    pub column: String,
    pub hit: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnTagging {
    pub decisions: Vec<ColumnDecision>,
}

impl ColumnTagging {
    pub fn hits(&self) -> impl Iterator<Item = &str> {
        self.decisions.iter().filter(|d| d.hit).map(|d| d.column.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSql {
    pub sql: String,
    pub score: f64,
}

/// Scores a table-selection input (`question extra0 table`).
pub trait TableScorer: Send + Sync {
    fn score(&self, input: &str) -> Result<TableScore, ModelError>;

    /// Serial backends are never called from more than one thread at a time.
    fn is_serial(&self) -> bool {
        false
    }
}

/// Tags the columns listed in a column-selection input.
pub trait ColumnTagger: Send + Sync {
    fn tag(&self, input: &str) -> Result<ColumnTagging, ModelError>;

    fn is_serial(&self) -> bool {
        false
    }
}

/// Generates up to `beam_width` candidates for an SQL-generation input,
/// best first.
pub trait SqlGenerator: Send + Sync {
    fn generate(&self, input: &str, beam_width: usize) -> Result<Vec<CandidateSql>, ModelError>;

    fn is_serial(&self) -> bool {
        false
    }
}

/// Produces `extra1 v1 extra2 v2 ...` for a value-filling input.
pub trait ValueFiller: Send + Sync {
    fn fill(&self, input: &str) -> Result<String, ModelError>;

    fn is_serial(&self) -> bool {
        false
    }
}

/// One backend per stage.
pub struct Submodels {
    pub table: Box<dyn TableScorer>,
    pub column: Box<dyn ColumnTagger>,
    pub sqlgen: Box<dyn SqlGenerator>,
    pub filler: Box<dyn ValueFiller>,
}

impl Submodels {
    pub fn any_serial(&self) -> bool {
        self.table.is_serial()
            || self.column.is_serial()
            || self.sqlgen.is_serial()
            || self.filler.is_serial()
    }
}
