use super::spans::{best_value_span, numeral_spans, numeral_text, word_positions};
use super::triggers::{TriggerHit, TriggerRole, TriggerTable};
use super::BaselineConfig;
use crate::records::{IdColumn, IdentifierMap};
use crate::schema::{ColumnType, Question, Schema};
use crate::sql::{Aggregate, CompareOp, Condition, ColumnRef, SelectItem, SqlQuery, ValueTerm};
use crate::submodel::{CandidateSql, GenerationMode, ModelError};

/// Token position of a column name in the question: the whole name as one
/// word, or else every `_`-part present (position of the earliest part).
pub(crate) fn name_position(words: &[(usize, String)], name: &str) -> Option<usize> {
    let whole = name.to_lowercase();
    if let Some((pos, _)) = words.iter().find(|(_, w)| *w == whole) {
        return Some(*pos);
    }
    let mut first = None;
    for part in whole.split(|c: char| c == '_' || c.is_whitespace()).filter(|p| !p.is_empty()) {
        let (pos, _) = words.iter().find(|(_, w)| w == part)?;
        first = Some(first.map_or(*pos, |f: usize| f.min(*pos)));
    }
    first
}

struct Col<'a> {
    id: &'a IdColumn,
    ctype: ColumnType,
    values: &'a [String],
    name_pos: Option<usize>,
}

#[derive(Debug, Clone)]
struct Cond {
    col: usize,
    op: CompareOp,
    pos: usize,
    comparison: bool,
    /// Literal usable when values are generated inline; `None` when the span
    /// only matched fuzzily.
    inline: Option<String>,
}

/// Token range covered by a trigger hit (which is in word indices).
fn token_range(words: &[(usize, String)], h: &TriggerHit) -> (usize, usize) {
    (words[h.pos].0, words[h.end() - 1].0 + 1)
}

pub(crate) fn generate(
    schema: &Schema,
    triggers: &TriggerTable,
    config: &BaselineConfig,
    input: &str,
    beam_width: usize,
) -> Result<Vec<CandidateSql>, ModelError> {
    let (map, question) = IdentifierMap::parse_input(input)?;
    let q = Question::new(question);
    let words = word_positions(&q);
    let lowered: Vec<String> = words.iter().map(|(_, w)| w.clone()).collect();
    let hits = triggers.scan(&lowered);

    let mut cols = Vec::new();
    for id in &map.columns {
        let column = schema
            .column(&id.table, &id.name)
            .map_err(|e| ModelError::Contract(e.to_string()))?;
        cols.push(Col {
            id,
            ctype: column.ctype,
            values: &column.values,
            name_pos: name_position(&words, &id.name),
        });
    }

    let mut blocked: Vec<(usize, usize)> = hits.iter().map(|h| token_range(&words, h)).collect();
    let numerals = numeral_spans(&q);
    let mut conds = Vec::new();
    let mut used_ops = Vec::new();

    // comparison: operator trigger immediately followed by a numeral
    for (hi, h) in hits.iter().enumerate() {
        let TriggerRole::Operator(op) = h.role else { continue };
        let (tpos, tend) = token_range(&words, h);
        let Some(&span) = numerals.iter().find(|s| s.0 == tend) else { continue };
        let number_cols = || cols.iter().enumerate().filter(|(_, c)| c.ctype == ColumnType::Number);
        let target = number_cols()
            .filter_map(|(i, c)| c.name_pos.filter(|p| *p < tpos).map(|p| (i, p)))
            .max_by_key(|(_, p)| *p)
            .map(|(i, _)| i)
            .or_else(|| {
                number_cols()
                    .filter_map(|(i, c)| c.name_pos.map(|p| (i, p.abs_diff(tpos))))
                    .min_by_key(|(_, d)| *d)
                    .map(|(i, _)| i)
            })
            .or_else(|| {
                let mut only = number_cols();
                match (only.next(), only.next()) {
                    (Some((i, _)), None) => Some(i),
                    _ => None,
                }
            });
        if let Some(col) = target {
            blocked.push(span);
            used_ops.push(hi);
            conds.push(Cond {
                col,
                op,
                pos: span.0,
                comparison: true,
                inline: Some(numeral_text(&q, span).to_string()),
            });
        }
    }

    // value hits, assigned greedily so that spans never overlap
    let mut pending: Vec<usize> = (0..cols.len()).collect();
    loop {
        let best = pending
            .iter()
            .filter_map(|&i| {
                best_value_span(&q, cols[i].values, config.tag_distance, &blocked).map(|m| (i, m))
            })
            .min_by_key(|(i, m)| (m.distance, m.from, *i));
        let Some((i, m)) = best else { break };
        pending.retain(|&p| p != i);
        blocked.push((m.from, m.to));
        let op = hits
            .iter()
            .enumerate()
            .filter(|(hi, _)| !used_ops.contains(hi))
            .find_map(|(_, h)| match h.role {
                TriggerRole::Operator(op) if token_range(&words, h).1 == m.from => Some(op),
                _ => None,
            })
            .unwrap_or(CompareOp::Eq);
        conds.push(Cond {
            col: i,
            op,
            pos: m.from,
            comparison: false,
            inline: (m.distance == 0).then(|| m.value.clone()),
        });
    }

    // table with the most evidence; earlier listing wins ties
    let evidence = |table: &str| {
        let names = cols.iter().filter(|c| c.id.table == table && c.name_pos.is_some()).count();
        names + conds.iter().filter(|c| cols[c.col].id.table == table).count()
    };
    let table = map
        .tables
        .iter()
        .map(|t| (evidence(&t.name), &t.name))
        .fold(None, |best: Option<(usize, &String)>, cur| match best {
            Some(b) if b.0 >= cur.0 => Some(b),
            _ => Some(cur),
        })
        .filter(|(n, _)| *n > 0)
        .map(|(_, t)| t.clone())
        .ok_or(ModelError::NoTemplate)?;

    conds.retain(|c| cols[c.col].id.table == table);
    conds.sort_by_key(|c| c.pos);
    let in_cond = |i: usize| conds.iter().any(|c| c.col == i);

    let mut select: Vec<(usize, usize)> = cols
        .iter()
        .enumerate()
        .filter(|(i, c)| c.id.table == table && !in_cond(*i))
        .filter_map(|(i, c)| c.name_pos.map(|p| (i, p)))
        .collect();
    if select.is_empty() {
        // a compared column is also the projection when nothing else is named
        select = cols
            .iter()
            .enumerate()
            .filter(|(i, c)| c.id.table == table && conds.iter().all(|d| d.col != *i || d.comparison))
            .filter_map(|(i, c)| c.name_pos.map(|p| (i, p)))
            .collect();
    }
    if select.is_empty() {
        let mut seen = Vec::new();
        for c in &conds {
            if !c.comparison && !seen.contains(&c.col) {
                seen.push(c.col);
                select.push((c.col, c.pos));
            }
        }
    }
    if select.is_empty() {
        return Err(ModelError::NoTemplate);
    }
    select.sort_by_key(|(_, p)| *p);

    let aggregate = hits.iter().find_map(|h| match h.role {
        TriggerRole::Aggregate(a) => {
            let tpos = token_range(&words, h).0;
            let target = select.iter().position(|(_, p)| *p > tpos).unwrap_or(0);
            Some((a, target))
        }
        TriggerRole::Operator(_) => None,
    });

    let col_ref = |i: usize| ColumnRef::new(cols[i].id.table.clone(), cols[i].id.name.clone(), cols[i].ctype);
    let render = |with_agg: bool, keep: &dyn Fn(&Cond) -> bool| -> Result<(String, usize), ModelError> {
        let items = select
            .iter()
            .enumerate()
            .map(|(k, (i, _))| {
                let agg = match aggregate {
                    Some((a, target)) if with_agg && target == k => a,
                    _ => Aggregate::None,
                };
                SelectItem { aggregate: agg, column: col_ref(*i) }
            })
            .collect();
        let mut query = SqlQuery::select_from(table.clone(), items);
        let mut realized = usize::from(with_agg && aggregate.is_some());
        for c in conds.iter().filter(|c| keep(c)) {
            let value = match config.mode {
                GenerationMode::Templated => {
                    ValueTerm::Placeholder(query.conditions.len() as u32 + 1)
                }
                GenerationMode::Merged => match &c.inline {
                    Some(v) => ValueTerm::Literal(v.clone()),
                    None => continue,
                },
            };
            realized += 1;
            query.conditions.push(Condition { column: col_ref(c.col), op: c.op, value });
        }
        Ok((map.encode(&query)?.to_string(), realized))
    };

    let cues = usize::from(aggregate.is_some()) + conds.len();
    let variants: [(bool, &dyn Fn(&Cond) -> bool); 4] = [
        (true, &|_| true),
        (false, &|_| true),
        (true, &|c| !c.comparison),
        (true, &|_| false),
    ];
    let mut out: Vec<CandidateSql> = Vec::new();
    for (with_agg, keep) in variants {
        let (sql, realized) = render(with_agg, keep)?;
        if out.iter().any(|c| c.sql == sql) {
            continue;
        }
        let score = if cues == 0 { 1.0 } else { realized as f64 / cues as f64 };
        out.push(CandidateSql { sql, score });
    }
    out.sort_by(|a, b| b.score.total_cmp(&a.score));
    out.truncate(beam_width);
    Ok(out)
}
