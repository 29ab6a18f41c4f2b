use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::baseline::{Baseline, TriggerRole, TriggerTable};
use crate::pipeline::{Pipeline, PipelineConfig};
use crate::records::{column_record_input, table_record_input, QuestionSqlPair};
use crate::schema::{is_decimal_numeral, Column, ColumnType, Schema, Table};
use crate::sql::{
    logic_form_equal, resolve, Aggregate, ColumnRef, CompareOp, Condition, SelectItem, SqlQuery,
    ValueTerm,
};
use crate::submodel::{ColumnTagger, TableScorer};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("schema offers no table with a text column holding values")]
    NoTemplates,
    #[error("only {got} of {wanted} samples passed the audit")]
    Exhausted { wanted: usize, got: usize },
}

/// A synthetic corpus and its typo suite. Each typo pair copies a clean
/// pair, with one entity span misspelled by a single edit; the gold SQL
/// keeps the database value.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub clean: Vec<QuestionSqlPair>,
    pub typo: Vec<QuestionSqlPair>,
    /// Index into `clean` of the pair each typo pair was made from.
    pub typo_of: Vec<usize>,
}

fn spoken(name: &str) -> String {
    name.replace('_', " ")
}

fn text_values(c: &Column) -> Vec<&String> {
    if c.ctype == ColumnType::Number {
        return Vec::new();
    }
    c.values.iter().filter(|v| !v.is_empty() && !is_decimal_numeral(v)).collect()
}

struct Draft {
    question: String,
    query: SqlQuery,
}

fn col_ref(t: &Table, c: &Column) -> ColumnRef {
    ColumnRef::new(t.name.clone(), c.name.clone(), c.ctype)
}

fn pick_phrase(rng: &mut ChaCha8Rng, triggers: &TriggerTable, role: TriggerRole) -> Option<String> {
    triggers.phrases_for(role).choose(rng).cloned()
}

/// One random question over `t` from a small template family, or `None`
/// when the drawn template does not fit the table.
fn draft(rng: &mut ChaCha8Rng, triggers: &TriggerTable, t: &Table) -> Option<Draft> {
    let valued: Vec<&Column> = t.columns.iter().filter(|c| !text_values(c).is_empty()).collect();
    let numbers: Vec<&Column> = t
        .columns
        .iter()
        .filter(|c| c.ctype == ColumnType::Number && !c.values.is_empty())
        .collect();
    let cond = |c: &Column, op: CompareOp, v: &str| Condition {
        column: col_ref(t, c),
        op,
        value: ValueTerm::Literal(v.to_string()),
    };
    let item = |agg: Aggregate, c: &Column| SelectItem { aggregate: agg, column: col_ref(t, c) };
    let other = |rng: &mut ChaCha8Rng, not: &[&str]| -> Option<&Column> {
        let pool: Vec<&Column> = t.columns.iter().filter(|c| !not.contains(&c.name.as_str())).collect();
        pool.choose(rng).copied()
    };

    let b = *valued.choose(rng)?;
    let v = text_values(b).choose(rng).copied()?.clone();
    match rng.gen_range(0..7) {
        0 => {
            let a = other(rng, &[&b.name])?;
            let mut q = SqlQuery::select_from(&t.name, vec![item(Aggregate::None, a)]);
            q.conditions.push(cond(b, CompareOp::Eq, &v));
            Some(Draft { question: format!("show the {} for {v}", spoken(&a.name)), query: q })
        }
        1 => {
            let b2 = *valued.iter().filter(|c| c.name != b.name).collect::<Vec<_>>().choose(rng)?;
            let v2 = text_values(b2).choose(rng).copied()?.clone();
            let a = other(rng, &[&b.name, &b2.name])?;
            let mut q = SqlQuery::select_from(&t.name, vec![item(Aggregate::None, a)]);
            q.conditions.push(cond(b, CompareOp::Eq, &v));
            q.conditions.push(cond(b2, CompareOp::Eq, &v2));
            Some(Draft { question: format!("show the {} for {v} in {v2}", spoken(&a.name)), query: q })
        }
        2 => {
            let n = *numbers.choose(rng)?;
            let agg = *[Aggregate::Sum, Aggregate::Avg, Aggregate::Max, Aggregate::Min].choose(rng)?;
            let phrase = pick_phrase(rng, triggers, TriggerRole::Aggregate(agg))?;
            let mut q = SqlQuery::select_from(&t.name, vec![item(agg, n)]);
            q.conditions.push(cond(b, CompareOp::Eq, &v));
            Some(Draft { question: format!("{phrase} {} for {v}", spoken(&n.name)), query: q })
        }
        3 => {
            let a = other(rng, &[&b.name])?;
            let phrase = pick_phrase(rng, triggers, TriggerRole::Aggregate(Aggregate::Count))?;
            let mut q = SqlQuery::select_from(&t.name, vec![item(Aggregate::Count, a)]);
            q.conditions.push(cond(b, CompareOp::Eq, &v));
            Some(Draft { question: format!("{phrase} {} for {v}", spoken(&a.name)), query: q })
        }
        4 => {
            let n = *numbers.choose(rng)?;
            let a = other(rng, &[&n.name])?;
            let op = *[CompareOp::Gt, CompareOp::Lt, CompareOp::Ge, CompareOp::Le].choose(rng)?;
            let phrase = pick_phrase(rng, triggers, TriggerRole::Operator(op))?;
            let num = n.values.choose(rng)?.clone();
            let mut q = SqlQuery::select_from(&t.name, vec![item(Aggregate::None, a)]);
            q.conditions.push(cond(n, op, &num));
            let question = format!("show the {} with {} {phrase} {num}", spoken(&a.name), spoken(&n.name));
            Some(Draft { question, query: q })
        }
        5 => {
            let a = other(rng, &[&b.name])?;
            let phrase = pick_phrase(rng, triggers, TriggerRole::Operator(CompareOp::Ne))?;
            let mut q = SqlQuery::select_from(&t.name, vec![item(Aggregate::None, a)]);
            q.conditions.push(cond(b, CompareOp::Ne, &v));
            Some(Draft { question: format!("show the {} {phrase} {v}", spoken(&a.name)), query: q })
        }
        _ => {
            let a = other(rng, &[&b.name])?;
            let a2 = other(rng, &[&b.name, &a.name])?;
            let mut q = SqlQuery::select_from(&t.name, vec![item(Aggregate::None, a), item(Aggregate::None, a2)]);
            q.conditions.push(cond(b, CompareOp::Eq, &v));
            let question = format!("show the {} and {} for {v}", spoken(&a.name), spoken(&a2.name));
            Some(Draft { question, query: q })
        }
    }
}

/// Checks that the heuristic stages recover `pair` without ambiguity: the
/// gold table is the unique top-scoring table, the tagged columns are
/// exactly the gold columns, and the composed pipeline (with and without
/// entity linking) reproduces the gold query.
pub fn audit_pair(pair: &QuestionSqlPair, baseline: &Baseline, pipelines: &[&Pipeline]) -> Result<(), String> {
    let schema = baseline.schema();
    let q = &pair.question.text;
    let gold_table = &pair.gold_sql.from;
    let mut gold_score = None;
    let mut best_other: f64 = 0.0;
    for t in &schema.tables {
        let s = baseline.score(&table_record_input(q, &t.name)).map_err(|e| e.to_string())?.score;
        if &t.name == gold_table {
            gold_score = Some(s);
        } else {
            best_other = best_other.max(s);
        }
    }
    let gold_score = gold_score.ok_or("gold table missing from schema")?;
    if gold_score < 0.5 || gold_score <= best_other {
        return Err(format!("table score {gold_score} does not beat {best_other}"));
    }
    let table = schema.table(gold_table).expect("checked above");
    let cols: Vec<_> = table.columns.iter().map(|c| (c.name.clone(), c.ctype)).collect();
    let tagging = baseline.tag(&column_record_input(q, gold_table, &cols)).map_err(|e| e.to_string())?;
    let mut hits: Vec<&str> = tagging.hits().collect();
    let mut gold: Vec<String> = pair.gold_sql.referenced_columns().into_iter().map(|(_, c)| c).collect();
    hits.sort();
    gold.sort();
    if hits != gold {
        return Err(format!("tagged {hits:?}, gold {gold:?}"));
    }
    for p in pipelines {
        let out = p.run(q).map_err(|e| e.to_string())?;
        if !logic_form_equal(&out.sql, &pair.gold_sql) {
            return Err(format!("predicted `{}`", out.sql));
        }
    }
    Ok(())
}

/// Byte range of `value` in `text` on word boundaries.
fn find_word(text: &str, value: &str) -> Option<(usize, usize)> {
    let is_word = |c: char| c.is_alphanumeric() || c == '_';
    let mut from = 0;
    while let Some(i) = text[from..].find(value) {
        let (s, e) = (from + i, from + i + value.len());
        let before = text[..s].chars().next_back().map_or(true, |c| !is_word(c));
        let after = text[e..].chars().next().map_or(true, |c| !is_word(c));
        if before && after {
            return Some((s, e));
        }
        from = s + value.chars().next().map_or(1, char::len_utf8);
    }
    None
}

/// Misspells one text literal of `pair` in its question with a single
/// letter substitution. Only literals of at least four letters qualify.
/// Returns the new pair and the misspelled span.
pub fn typo_variant(pair: &QuestionSqlPair, rng: &mut impl Rng) -> Option<(QuestionSqlPair, String)> {
    let text = &pair.question.text;
    let spans: Vec<(usize, usize)> = pair
        .gold_sql
        .conditions
        .iter()
        .filter(|c| c.column.ctype != ColumnType::Number)
        .filter_map(|c| match &c.value {
            ValueTerm::Literal(v) if v.chars().count() >= 4 && v.chars().all(char::is_alphabetic) => find_word(text, v),
            _ => None,
        })
        .collect();
    let &(s, e) = spans.choose(rng)?;
    let chars: Vec<char> = text[s..e].chars().collect();
    let at = rng.gen_range(0..chars.len());
    let orig = chars[at].to_ascii_lowercase();
    let letters: Vec<char> = ('a'..='z').filter(|c| *c != orig).collect();
    let mut misspelt = chars.clone();
    misspelt[at] = *letters.choose(rng)?;
    let word: String = misspelt.into_iter().collect();
    let question = format!("{}{word}{}", &text[..s], &text[e..]);
    Some((QuestionSqlPair::new(question, pair.gold_sql.clone(), pair.db_name.clone()), word))
}

/// `n` question/SQL pairs drawn from templates aligned with the trigger
/// table, each certified by [`audit_pair`], plus a typo suite.
pub fn synth_corpus(schema: &Schema, n: usize, seed: u64) -> Result<SynthCorpus, SynthError> {
    let triggers = TriggerTable::default();
    let baseline = Baseline::new(schema.clone());
    let with_ner = Pipeline::new(schema.clone(), baseline.submodels(), PipelineConfig::default());
    let without_ner = Pipeline::new(
        schema.clone(),
        baseline.submodels(),
        PipelineConfig { ner: false, ..PipelineConfig::default() },
    );
    let canonical = Pipeline::new(
        schema.clone(),
        baseline.submodels(),
        PipelineConfig { restore_mode: false, ..PipelineConfig::default() },
    );
    let tables: Vec<&Table> = schema
        .tables
        .iter()
        .filter(|t| t.columns.len() >= 2 && t.columns.iter().any(|c| !text_values(c).is_empty()))
        .collect();
    if tables.is_empty() {
        return Err(SynthError::NoTemplates);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clean = Vec::with_capacity(n);
    let mut typo = Vec::new();
    let mut typo_of = Vec::new();
    let budget = n.saturating_mul(200).max(1000);
    for _ in 0..budget {
        if clean.len() == n {
            break;
        }
        let t = tables[rng.gen_range(0..tables.len())];
        let Some(d) = draft(&mut rng, &triggers, t) else { continue };
        let Ok(query) = resolve(&d.query.to_raw(), schema) else { continue };
        let pair = QuestionSqlPair::new(d.question, query, schema.db_name.clone());
        if audit_pair(&pair, &baseline, &[&with_ner, &without_ner]).is_err() {
            continue;
        }
        // a usable typo is linked back by entity linking and defeats the
        // plain pipeline
        for _ in 0..8 {
            let Some((variant, _)) = typo_variant(&pair, &mut rng) else { break };
            let fixed = canonical
                .run(&variant.question.text)
                .is_ok_and(|o| logic_form_equal(&o.sql, &variant.gold_sql));
            if fixed {
                typo.push(variant);
                typo_of.push(clean.len());
                break;
            }
        }
        clean.push(pair);
    }
    if clean.len() < n {
        return Err(SynthError::Exhausted { wanted: n, got: clean.len() });
    }
    Ok(SynthCorpus { clean, typo, typo_of })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn schema() -> Schema {
        Schema::from_json(include_str!("../../tests/fixtures/schema.json")).unwrap()
    }

    #[test]
    fn reproducible_and_valid() {
        let s = schema();
        let a = synth_corpus(&s, 40, 7).unwrap();
        let b = synth_corpus(&s, 40, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.clean.len(), 40);
        for p in &a.clean {
            assert_eq!(resolve(&p.gold_sql.to_raw(), &s).unwrap(), p.gold_sql);
        }
        assert!(!a.typo.is_empty());
    }

    #[test]
    fn typo_changes_only_an_entity_span() {
        let s = schema();
        let c = synth_corpus(&s, 40, 3).unwrap();
        for (t, &i) in c.typo.iter().zip(&c.typo_of) {
            let base = &c.clean[i];
            assert_eq!(base.gold_sql, t.gold_sql);
            let diff: Vec<usize> = base
                .question
                .text
                .chars()
                .zip(t.question.text.chars())
                .enumerate()
                .filter(|(_, (a, b))| a != b)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(diff.len(), 1);
        }
    }

    #[test]
    fn find_word_respects_boundaries() {
        assert_eq!(find_word("Mayday in May", "May"), Some((10, 13)));
        assert_eq!(find_word("Mayday", "May"), None);
    }

    #[test]
    fn typo_is_one_substitution() {
        let s = schema();
        let pair = QuestionSqlPair::new(
            "show the amount for Alice",
            crate::sql::parse_sql("select amount from power_bill where user_name = 'Alice'", &s).unwrap(),
            "marketing",
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (v, word) = typo_variant(&pair, &mut rng).unwrap();
        assert_eq!(crate::schema::levenshtein(&word.to_lowercase(), "alice"), 1);
        assert!(v.question.text.starts_with("show the amount for "));
    }
}
