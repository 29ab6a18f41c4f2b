//! End-to-end inference: table selection, column selection, SQL generation
//! and value filling, optionally wrapped by entity linking.

mod trace;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ner::{link_entities, substitute_backward, substitute_forward, EntityMapping};
use crate::records::{
    column_record_input, parse_value_output, table_record_input, validate_question,
    valuefill_record_input, IdentifierMap,
};
use crate::schema::{Question, Schema};
use crate::sql::{fill_values, resolve, SqlQuery, TemplatedSql};
use crate::submodel::{
    check_candidates, check_column_tagging, check_table_score, check_value_output, FilterOutcome,
    GenerationMode, Submodels, TableScore,
};

pub use trace::{PipelineTrace, Rejection, Stage, TraceEvent, TraceLine};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Baseline,
    Bridge,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Backend::Baseline),
            "bridge" => Ok(Backend::Bridge),
            _ => Err(format!("unknown backend `{s}` (expected baseline or bridge)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendSelection {
    pub table: Backend,
    pub column: Backend,
    pub sqlgen: Backend,
    pub valuefill: Backend,
}

impl BackendSelection {
    pub fn all(b: Backend) -> Self {
        BackendSelection { table: b, column: b, sqlgen: b, valuefill: b }
    }

    /// Applies `stage=backend`, where stage is table, column, sqlgen,
    /// valuefill or all.
    pub fn set(&mut self, spec: &str) -> Result<(), String> {
        let (stage, backend) = spec
            .split_once('=')
            .ok_or_else(|| format!("expected <stage>=<backend>, got `{spec}`"))?;
        let b: Backend = backend.parse()?;
        match stage {
            "table" => self.table = b,
            "column" => self.column = b,
            "sqlgen" => self.sqlgen = b,
            "valuefill" => self.valuefill = b,
            "all" => *self = BackendSelection::all(b),
            _ => return Err(format!("unknown stage `{stage}`")),
        }
        Ok(())
    }

    pub fn uses_bridge(&self) -> bool {
        [self.table, self.column, self.sqlgen, self.valuefill].contains(&Backend::Bridge)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Tables scoring at or above this are candidates for generation.
    pub table_threshold: f64,
    pub top_k: usize,
    pub beam_width: usize,
    pub ner: bool,
    /// Put the user's original wording back into literals after NER.
    pub restore_mode: bool,
    pub ner_max_distance: usize,
    pub mode: GenerationMode,
    /// Retry generation once with a wider beam when every candidate is
    /// rejected, instead of failing.
    pub repair: bool,
    pub record_timings: bool,
    pub backends: BackendSelection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            table_threshold: 0.5,
            top_k: 1,
            beam_width: 4,
            ner: true,
            restore_mode: true,
            ner_max_distance: 2,
            mode: GenerationMode::Templated,
            repair: false,
            record_timings: false,
            backends: BackendSelection::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.top_k == 0 {
            return Err("top_k must be at least 1".into());
        }
        if self.beam_width == 0 {
            return Err("beam_width must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.table_threshold) {
            return Err("table_threshold must be in [0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
#[error("{stage} failed: {reason}")]
pub struct StageFailure {
    pub stage: Stage,
    pub reason: String,
    /// Everything recorded up to the failure.
    pub trace: PipelineTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub sql: SqlQuery,
    pub mapping: EntityMapping,
    pub trace: PipelineTrace,
}

pub struct Pipeline {
    schema: Schema,
    models: Submodels,
    config: PipelineConfig,
}

struct Run {
    trace: PipelineTrace,
    timings: bool,
    started: Instant,
}

impl Run {
    fn record(&mut self, event: TraceEvent) {
        let elapsed = self.timings.then(|| self.started.elapsed().as_micros() as u64);
        self.trace.push(event, elapsed);
        self.started = Instant::now();
    }

    fn fail(&mut self, stage: Stage, reason: impl ToString) -> StageFailure {
        StageFailure { stage, reason: reason.to_string(), trace: std::mem::take(&mut self.trace) }
    }
}

impl Pipeline {
    pub fn new(schema: Schema, models: Submodels, config: PipelineConfig) -> Pipeline {
        Pipeline { schema, models, config }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn models(&self) -> &Submodels {
        &self.models
    }

    pub fn run(&self, question: &str) -> Result<PipelineOutput, StageFailure> {
        let cfg = &self.config;
        let mut run = Run {
            trace: PipelineTrace::default(),
            timings: cfg.record_timings,
            started: Instant::now(),
        };
        run.record(TraceEvent::Input { question: question.to_string() });
        if let Err(e) = cfg.validate() {
            return Err(run.fail(Stage::Input, e));
        }
        if let Err(e) = validate_question(question) {
            return Err(run.fail(Stage::Input, e));
        }

        let original = Question::new(question);
        let (q, mapping) = if cfg.ner {
            let mapping = link_entities(&original, &self.schema, cfg.ner_max_distance);
            let q = substitute_forward(&original, &mapping).map_err(|e| run.fail(Stage::Ner, e))?;
            run.record(TraceEvent::Ner { mapping: mapping.clone(), question: q.text.clone() });
            (q, mapping)
        } else {
            (original, EntityMapping::default())
        };
        let text = q.text.as_str();

        // table selection
        let inputs: Vec<String> = self.schema.tables.iter().map(|t| table_record_input(text, &t.name)).collect();
        let mut scores: Vec<TableScore> = Vec::new();
        for input in &inputs {
            let s = self
                .models
                .table
                .score(input)
                .and_then(|s| check_table_score(input, &s).map(|_| s))
                .map_err(|e| run.fail(Stage::TableSelection, e))?;
            scores.push(s);
        }
        let mut ranked: Vec<&TableScore> = scores.iter().filter(|s| s.score >= cfg.table_threshold).collect();
        ranked.sort_by(|a, b| b.score.total_cmp(&a.score));
        let kept: Vec<String> = ranked.iter().take(cfg.top_k).map(|s| s.table.clone()).collect();
        run.record(TraceEvent::TableSelection { inputs, scores: scores.clone(), kept: kept.clone() });
        if kept.is_empty() {
            return Err(run.fail(
                Stage::TableSelection,
                format!("no table scored at or above {}", cfg.table_threshold),
            ));
        }

        // column selection
        let mut listing: Vec<(String, Vec<String>)> = Vec::new();
        for table in &kept {
            let t = self.schema.table(table).expect("scored tables come from the schema");
            let cols: Vec<_> = t.columns.iter().map(|c| (c.name.clone(), c.ctype)).collect();
            let input = column_record_input(text, table, &cols);
            let tagging = self
                .models
                .column
                .tag(&input)
                .and_then(|tg| check_column_tagging(&input, &tg).map(|_| tg))
                .map_err(|e| run.fail(Stage::ColumnSelection, e))?;
            let hits: Vec<String> = tagging.hits().map(str::to_string).collect();
            run.record(TraceEvent::ColumnSelection {
                table: table.clone(),
                input,
                decisions: tagging.decisions,
            });
            if !hits.is_empty() {
                listing.push((table.clone(), hits));
            }
        }
        if listing.is_empty() {
            return Err(run.fail(Stage::ColumnSelection, "no column was selected"));
        }

        // SQL generation
        let map = IdentifierMap::from_listing(&listing).map_err(|e| run.fail(Stage::SqlGeneration, e))?;
        let input = map.render_input(text);
        let mut beam = cfg.beam_width;
        let attempts = if cfg.repair { 2 } else { 1 };
        let mut chosen = None;
        for _ in 0..attempts {
            let candidates = self
                .models
                .sqlgen
                .generate(&input, beam)
                .and_then(|c| check_candidates(beam, &c).map(|_| c))
                .map_err(|e| run.fail(Stage::SqlGeneration, e))?;
            let outcome = FilterOutcome::run(&candidates, &input, &self.schema, cfg.mode)
                .map_err(|e| run.fail(Stage::SqlGeneration, e))?;
            let best = outcome.kept.first().cloned();
            run.record(TraceEvent::SqlGeneration {
                input: input.clone(),
                beam_width: beam,
                candidates,
                rejected: outcome
                    .rejected
                    .into_iter()
                    .map(|(c, reason)| Rejection { sql: c.sql, reason })
                    .collect(),
                chosen: best.as_ref().map(|(c, _)| c.sql.clone()),
            });
            if let Some((_, query)) = best {
                chosen = Some(query);
                break;
            }
            beam *= 4;
        }
        let query = chosen.ok_or_else(|| run.fail(Stage::SqlGeneration, "every candidate was rejected"))?;

        // value filling
        let filled = match cfg.mode {
            GenerationMode::Merged => query,
            GenerationMode::Templated => {
                let templated = TemplatedSql::new(query).map_err(|e| run.fail(Stage::SqlGeneration, e))?;
                let input = valuefill_record_input(text, &templated);
                let output = self
                    .models
                    .filler
                    .fill(&input)
                    .and_then(|o| check_value_output(&input, &o).map(|_| o))
                    .map_err(|e| run.fail(Stage::ValueFilling, e))?;
                run.record(TraceEvent::ValueFilling { input, output: output.clone() });
                let assignment = parse_value_output(&output).map_err(|e| run.fail(Stage::ValueFilling, e))?;
                let q = fill_values(&templated, &assignment).map_err(|e| run.fail(Stage::ValueFilling, e))?;
                // re-resolve to type-check the copied literals
                resolve(&q.to_raw(), &self.schema).map_err(|e| run.fail(Stage::ValueFilling, e))?
            }
        };

        let sql = substitute_backward(&filled, &mapping, cfg.restore_mode);
        run.record(TraceEvent::Assembly { sql: sql.to_string() });
        Ok(PipelineOutput { sql, mapping, trace: run.trace })
    }
}
