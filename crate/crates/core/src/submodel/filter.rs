use serde::{Deserialize, Serialize};

use super::{CandidateSql, ModelError};
use crate::records::IdentifierMap;
use crate::schema::Schema;
use crate::sql::{parse_statement, resolve, SqlQuery, TemplatedSql};

/// Whether generated SQL carries placeholders (values filled by a later
/// stage) or literals (values generated inline).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationMode {
    #[default]
    Templated,
    Merged,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    /// Surviving candidates with their resolved queries, in input order.
    pub kept: Vec<(CandidateSql, SqlQuery)>,
    /// Rejected candidates with the reason.
    pub rejected: Vec<(CandidateSql, String)>,
}

/// Checks one candidate: it parses, every identifier is bound in the record
/// input, and the decoded query resolves against the schema.
pub fn validate_candidate(
    sql: &str,
    map: &IdentifierMap,
    schema: &Schema,
    mode: GenerationMode,
) -> Result<SqlQuery, String> {
    let raw = parse_statement(sql).map_err(|e| e.to_string())?;
    let decoded = map.decode(&raw).map_err(|e| e.to_string())?;
    let query = resolve(&decoded, schema).map_err(|e| e.to_string())?;
    match mode {
        GenerationMode::Templated => {
            TemplatedSql::new(query.clone()).map_err(|e| e.to_string())?;
        }
        GenerationMode::Merged => {
            if !query.placeholders().is_empty() {
                return Err("placeholder in merged-mode output".into());
            }
        }
    }
    Ok(query)
}

impl FilterOutcome {
    pub fn run(
        candidates: &[CandidateSql],
        input: &str,
        schema: &Schema,
        mode: GenerationMode,
    ) -> Result<FilterOutcome, ModelError> {
        let (map, _) = IdentifierMap::parse_input(input)?;
        let mut out = FilterOutcome::default();
        for c in candidates {
            match validate_candidate(&c.sql, &map, schema, mode) {
                Ok(q) => out.kept.push((c.clone(), q)),
                Err(reason) => out.rejected.push((c.clone(), reason)),
            }
        }
        Ok(out)
    }
}

/// Keeps the valid candidates in order; an empty result is an error.
pub fn validity_filter(
    candidates: &[CandidateSql],
    input: &str,
    schema: &Schema,
    mode: GenerationMode,
) -> Result<Vec<CandidateSql>, ModelError> {
    let outcome = FilterOutcome::run(candidates, input, schema, mode)?;
    if outcome.kept.is_empty() {
        return Err(ModelError::NoValidCandidate);
    }
    Ok(outcome.kept.into_iter().map(|(c, _)| c).collect())
}
