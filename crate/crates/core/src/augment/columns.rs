use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AugmentError, AugmentationConfig};
use crate::records::{
    parse_column_input, ColumnLabel, ColumnListing, ColumnSelectRecord, IdentifierMap, SqlGenRecord,
};
use crate::schema::{ColumnType, Schema};
use crate::sql::{parse_statement, resolve};

/// A record whose input lists columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ListingRecord {
    Column(ColumnSelectRecord),
    SqlGen(SqlGenRecord),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edit {
    Add,
    Delete,
    Replace,
}

/// Variants of `record` with non-gold columns added, deleted or replaced.
/// Each edit fires independently with its configured probability and yields
/// at most one variant; gold columns are never removed. Labels and outputs
/// are rebuilt from the edited listing.
pub fn perturb_columns(
    record: &ListingRecord,
    schema: &Schema,
    config: &AugmentationConfig,
    seed: u64,
) -> Result<Vec<ListingRecord>, AugmentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edits = [
        (Edit::Add, config.add_probability),
        (Edit::Delete, config.delete_probability),
        (Edit::Replace, config.replace_probability),
    ];
    let mut out = Vec::new();
    for (edit, p) in edits {
        if !rng.gen_bool(p) {
            continue;
        }
        let variant = match record {
            ListingRecord::Column(r) => edit_column_record(r, schema, edit, &mut rng)?.map(ListingRecord::Column),
            ListingRecord::SqlGen(r) => edit_sqlgen_record(r, schema, edit, &mut rng)?.map(ListingRecord::SqlGen),
        };
        if let Some(v) = variant.filter(|v| v != record && !out.contains(v)) {
            out.push(v);
        }
    }
    Ok(out)
}

/// A column of another table whose name is not already listed.
fn foreign_column(
    schema: &Schema,
    table: &str,
    listed: &[String],
    rng: &mut ChaCha8Rng,
) -> Option<(String, ColumnType)> {
    let pool: Vec<(String, ColumnType)> = schema
        .tables
        .iter()
        .filter(|t| t.name != table)
        .flat_map(|t| t.columns.iter().map(|c| (c.name.clone(), c.ctype)))
        .filter(|(name, _)| !listed.contains(name))
        .collect();
    pool.choose(rng).cloned()
}

fn edit_column_record(
    record: &ColumnSelectRecord,
    schema: &Schema,
    edit: Edit,
    rng: &mut ChaCha8Rng,
) -> Result<Option<ColumnSelectRecord>, AugmentError> {
    let listing = parse_column_input(&record.input)?;
    let mut hits: Vec<bool> = record
        .labels
        .iter()
        .filter(|l| **l != ColumnLabel::Outside)
        .map(|l| *l == ColumnLabel::Hit)
        .collect();
    if hits.len() != listing.columns.len() {
        return Err(AugmentError::Malformed(format!(
            "{} column labels for {} listed columns",
            hits.len(),
            listing.columns.len()
        )));
    }
    let mut columns = listing.columns.clone();
    let names: Vec<String> = columns.iter().map(|(n, _)| n.clone()).collect();
    let misses: Vec<usize> = (0..hits.len()).filter(|&i| !hits[i]).collect();
    match edit {
        Edit::Add => {
            let Some(col) = foreign_column(schema, &listing.table, &names, rng) else { return Ok(None) };
            let at = rng.gen_range(0..=columns.len());
            columns.insert(at, col);
            hits.insert(at, false);
        }
        Edit::Delete => {
            let Some(&i) = misses.choose(rng) else { return Ok(None) };
            columns.remove(i);
            hits.remove(i);
        }
        Edit::Replace => {
            let Some(&i) = misses.choose(rng) else { return Ok(None) };
            let Some(col) = foreign_column(schema, &listing.table, &names, rng) else { return Ok(None) };
            columns[i] = col;
        }
    }
    let edited = ColumnListing { columns, ..listing };
    Ok(Some(ColumnSelectRecord { input: edited.render(), labels: edited.labels(&hits) }))
}

fn edit_sqlgen_record(
    record: &SqlGenRecord,
    schema: &Schema,
    edit: Edit,
    rng: &mut ChaCha8Rng,
) -> Result<Option<SqlGenRecord>, AugmentError> {
    let (map, question) = IdentifierMap::parse_input(&record.input)?;
    let decoded = map.decode(&parse_statement(&record.output)?)?;
    let gold = resolve(&decoded, schema)?;
    let referenced = gold.referenced_columns();
    let mut listing = map.listing();
    let removable: Vec<(usize, usize)> = listing
        .iter()
        .enumerate()
        .flat_map(|(ti, (t, cols))| cols.iter().enumerate().map(move |(ci, c)| (ti, ci, t, c)))
        .filter(|(_, _, t, c)| !referenced.contains(&((*t).clone(), (*c).clone())))
        .map(|(ti, ci, _, _)| (ti, ci))
        .collect();
    // candidates to add: any schema column not yet listed under its table
    let unlisted: Vec<(String, String)> = schema
        .tables
        .iter()
        .flat_map(|t| t.columns.iter().map(move |c| (t.name.clone(), c.name.clone())))
        .filter(|(t, c)| !listing.iter().any(|(lt, cols)| lt == t && cols.contains(c)))
        .collect();
    let insert = |listing: &mut Vec<(String, Vec<String>)>, (t, c): (String, String), rng: &mut ChaCha8Rng| {
        match listing.iter_mut().find(|(lt, _)| *lt == t) {
            Some((_, cols)) => {
                let at = rng.gen_range(0..=cols.len());
                cols.insert(at, c);
            }
            None => listing.push((t, vec![c])),
        }
    };
    match edit {
        Edit::Add => {
            let Some(pick) = unlisted.choose(rng).cloned() else { return Ok(None) };
            insert(&mut listing, pick, rng);
        }
        Edit::Delete => {
            let Some(&(ti, ci)) = removable.choose(rng) else { return Ok(None) };
            listing[ti].1.remove(ci);
        }
        Edit::Replace => {
            let Some(&(ti, ci)) = removable.choose(rng) else { return Ok(None) };
            let Some(pick) = unlisted.choose(rng).cloned() else { return Ok(None) };
            listing[ti].1.remove(ci);
            insert(&mut listing, pick, rng);
        }
    }
    let map = match IdentifierMap::from_listing(&listing) {
        Ok(m) => m,
        Err(crate::records::RecordError::TooManyColumns(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    Ok(Some(SqlGenRecord { input: map.render_input(&question), output: map.encode(&gold)?.to_string() }))
}
