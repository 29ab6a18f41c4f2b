//! Deterministic heuristic backends for the four stages.
//!
//! These are lexical: tables are scored by word overlap, columns are tagged
//! by name or cell-value mentions, SQL comes from a small template family
//! driven by a trigger-phrase table, and values are copied from question
//! spans. They run the whole pipeline without learned models and serve as a
//! regression oracle on lexically unambiguous corpora.

mod filler;
mod generator;
mod index;
mod spans;
mod triggers;

use std::sync::Arc;

use crate::records::{parse_column_input, parse_table_input};
use crate::schema::{Question, Schema};
use crate::submodel::{
    CandidateSql, ColumnDecision, ColumnTagger, ColumnTagging, GenerationMode, ModelError,
    SqlGenerator, Submodels, TableScore, TableScorer, ValueFiller,
};

pub use index::{content_words, name_words, LexicalIndex, STOPWORDS};
pub use spans::{best_value_span, numeral_spans, word_positions, SpanMatch};
pub use triggers::{Trigger, TriggerError, TriggerHit, TriggerRole, TriggerTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineConfig {
    /// Edit budget when tagging columns and building conditions.
    pub tag_distance: usize,
    /// Edit budget when copying values out of the question.
    pub fill_distance: usize,
    pub mode: GenerationMode,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { tag_distance: 1, fill_distance: 2, mode: GenerationMode::Templated }
    }
}

struct Inner {
    schema: Schema,
    index: LexicalIndex,
    triggers: TriggerTable,
    config: BaselineConfig,
}

/// All four heuristic stages over one schema. Cheap to clone.
#[derive(Clone)]
pub struct Baseline {
    inner: Arc<Inner>,
}

impl Baseline {
    pub fn new(schema: Schema) -> Baseline {
        Baseline::with_config(schema, TriggerTable::default(), BaselineConfig::default())
    }

    pub fn with_config(schema: Schema, triggers: TriggerTable, config: BaselineConfig) -> Baseline {
        let index = LexicalIndex::build(&schema);
        Baseline { inner: Arc::new(Inner { schema, index, triggers, config }) }
    }

    pub fn schema(&self) -> &Schema {
        &self.inner.schema
    }

    pub fn index(&self) -> &LexicalIndex {
        &self.inner.index
    }

    pub fn config(&self) -> &BaselineConfig {
        &self.inner.config
    }

    pub fn submodels(&self) -> Submodels {
        Submodels {
            table: Box::new(self.clone()),
            column: Box::new(self.clone()),
            sqlgen: Box::new(self.clone()),
            filler: Box::new(self.clone()),
        }
    }

    /// Whether `column` of `table` is mentioned by name or by a cell value.
    pub fn column_hit(&self, question: &Question, table: &str, column: &str) -> bool {
        let words = word_positions(question);
        if generator::name_position(&words, column).is_some() {
            return true;
        }
        let schema = &self.inner.schema;
        let col = schema
            .column(table, column)
            .ok()
            .or_else(|| schema.tables.iter().find_map(|t| t.column(column)));
        col.is_some_and(|c| {
            best_value_span(question, &c.values, self.inner.config.tag_distance, &[]).is_some()
        })
    }
}

impl TableScorer for Baseline {
    fn score(&self, input: &str) -> Result<TableScore, ModelError> {
        let (question, table) = parse_table_input(input)?;
        let score = self
            .inner
            .index
            .score(&question, &table)
            .ok_or_else(|| ModelError::Contract(format!("unknown table `{table}`")))?;
        Ok(TableScore { table, score })
    }
}

impl ColumnTagger for Baseline {
    fn tag(&self, input: &str) -> Result<ColumnTagging, ModelError> {
        let listing = parse_column_input(input)?;
        let q = Question::new(listing.question.as_str());
        let decisions = listing
            .columns
            .iter()
            .map(|(name, _)| ColumnDecision {
                column: name.clone(),
                hit: self.column_hit(&q, &listing.table, name),
            })
            .collect();
        Ok(ColumnTagging { decisions })
    }
}

impl SqlGenerator for Baseline {
    fn generate(&self, input: &str, beam_width: usize) -> Result<Vec<CandidateSql>, ModelError> {
        let i = &self.inner;
        generator::generate(&i.schema, &i.triggers, &i.config, input, beam_width)
    }
}

impl ValueFiller for Baseline {
    fn fill(&self, input: &str) -> Result<String, ModelError> {
        filler::fill(&self.inner.schema, &self.inner.config, input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::{column_record_input, table_record_input, IdentifierMap};
    use crate::submodel::{check_candidates, check_column_tagging, validity_filter};

    fn baseline() -> Baseline {
        Baseline::new(Schema::from_json(include_str!("../../tests/fixtures/schema.json")).unwrap())
    }

    fn listing(cols: &[&str]) -> IdentifierMap {
        IdentifierMap::from_listing(&[(
            "power_bill".to_string(),
            cols.iter().map(|c| c.to_string()).collect(),
        )])
        .unwrap()
    }

    fn power_bill_input(b: &Baseline, q: &str) -> String {
        let cols: Vec<_> = b
            .schema()
            .table("power_bill")
            .unwrap()
            .columns
            .iter()
            .map(|c| (c.name.clone(), c.ctype))
            .collect();
        column_record_input(q, "power_bill", &cols)
    }

    #[test]
    fn table_scores() {
        let b = baseline();
        let s = b.score(&table_record_input("total amount for Alice in March", "power_bill")).unwrap();
        assert_eq!(s.score, 0.6);
        let s = b.score(&table_record_input("zebra quartz", "power_bill")).unwrap();
        assert_eq!(s.score, 0.0);
        assert!(b.score(&table_record_input("x", "ghost")).is_err());
    }

    #[test]
    fn column_tagging() {
        let b = baseline();
        let input = power_bill_input(&b, "amount for Alice");
        let t = b.tag(&input).unwrap();
        check_column_tagging(&input, &t).unwrap();
        // exhaustive oracle: name word present, or some cell value equal to a
        // one-token span up to a single edit
        let words = ["amount", "for", "alice"];
        let oracle: Vec<bool> = b.schema().table("power_bill").unwrap().columns.iter().map(|c| {
            words.contains(&c.name.as_str())
                || c.values.iter().any(|v| words.iter().any(|w| crate::schema::levenshtein(w, &v.to_lowercase()) <= 1))
        }).collect();
        let hits: Vec<bool> = t.decisions.iter().map(|d| d.hit).collect();
        assert_eq!(hits, oracle);
        assert_eq!(hits, [true, false, true]);

        let none = b.tag(&power_bill_input(&b, "zebra quartz")).unwrap();
        assert!(none.hits().next().is_none());
        let all = b.tag(&power_bill_input(&b, "user name month amount")).unwrap();
        assert_eq!(all.hits().count(), 3);
    }

    #[test]
    fn generator_total_amount() {
        let b = baseline();
        let map = listing(&["amount", "user_name"]);
        let input = map.render_input("total amount for Alice");
        let cands = b.generate(&input, 4).unwrap();
        check_candidates(4, &cands).unwrap();
        assert_eq!(
            cands[0].sql,
            "select sum(extra54 @ extra0) from extra54 where extra54 @ extra1 = 'extra1'"
        );
        assert_eq!(cands[0].score, 1.0);
        let kept = validity_filter(&cands, &input, b.schema(), GenerationMode::Templated).unwrap();
        assert_eq!(kept, cands);
        assert_eq!(b.generate(&input, 1).unwrap().len(), 1);
    }

    #[test]
    fn generator_defaults_and_failures() {
        let b = baseline();
        let map = listing(&["amount", "month"]);
        let cands = b.generate(&map.render_input("amount in March"), 4).unwrap();
        assert_eq!(cands[0].sql, "select extra54 @ extra0 from extra54 where extra54 @ extra1 = 'extra1'");
        let err = b.generate(&map.render_input("zebra quartz"), 4).unwrap_err();
        assert!(matches!(err, ModelError::NoTemplate));
    }

    #[test]
    fn generator_comparisons() {
        let b = baseline();
        let map = listing(&["user_name", "amount"]);
        let input = map.render_input("user name with amount at least 100");
        let cands = b.generate(&input, 4).unwrap();
        assert_eq!(cands[0].sql, "select extra54 @ extra0 from extra54 where extra54 @ extra1 >= 'extra1'");
        let input = map.render_input("amount for users other than Alice");
        let cands = b.generate(&input, 4).unwrap();
        assert_eq!(cands[0].sql, "select extra54 @ extra1 from extra54 where extra54 @ extra0 != 'extra1'");
    }

    #[test]
    fn merged_mode_inlines_exact_values() {
        let schema = b_schema();
        let b = Baseline::with_config(
            schema,
            TriggerTable::default(),
            BaselineConfig { mode: GenerationMode::Merged, ..BaselineConfig::default() },
        );
        let map = listing(&["amount", "user_name"]);
        let input = map.render_input("total amount for Alice above 90");
        let cands = b.generate(&input, 4).unwrap();
        assert_eq!(
            cands[0].sql,
            "select sum(extra54 @ extra0) from extra54 where extra54 @ extra1 = 'Alice' and extra54 @ extra0 > 90"
        );
        validity_filter(&cands, &input, b.schema(), GenerationMode::Merged).unwrap();
    }

    fn b_schema() -> Schema {
        Schema::from_json(include_str!("../../tests/fixtures/schema.json")).unwrap()
    }

    #[test]
    fn filler() {
        let b = baseline();
        let input = "total amount for Alice [SEP] select sum(power_bill @ amount) from power_bill \
                     where power_bill @ user_name = 'extra1' [SEP] total amount for Alice";
        assert_eq!(b.fill(input).unwrap(), "extra1 Alice");
        let input = "amount above 100 for Alcie [SEP] select power_bill @ month from power_bill \
                     where power_bill @ amount > 'extra1' and power_bill @ user_name = 'extra2' \
                     [SEP] amount above 100 for Alcie";
        assert_eq!(b.fill(input).unwrap(), "extra1 100 extra2 Alcie");
        let input = "bills of Zed [SEP] select power_bill @ amount from power_bill \
                     where power_bill @ user_name = 'extra1' [SEP] bills of Zed";
        assert!(matches!(b.fill(input), Err(ModelError::Unfillable(1))));
        let input = "q [SEP] select power_bill @ amount from power_bill [SEP] q";
        assert_eq!(b.fill(input).unwrap(), "");
    }

    #[test]
    fn deterministic() {
        let b = baseline();
        let input = listing(&["amount", "user_name"]).render_input("total amount for Alice");
        assert_eq!(b.generate(&input, 4).unwrap(), b.generate(&input, 4).unwrap());
    }
}
