use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::ner::EntityMapping;
use crate::submodel::{CandidateSql, ColumnDecision, TableScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Input,
    Ner,
    TableSelection,
    ColumnSelection,
    SqlGeneration,
    ValueFilling,
    Assembly,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Input => "input",
            Stage::Ner => "ner",
            Stage::TableSelection => "table-selection",
            Stage::ColumnSelection => "column-selection",
            Stage::SqlGeneration => "sql-generation",
            Stage::ValueFilling => "value-filling",
            Stage::Assembly => "assembly",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub sql: String,
    pub reason: String,
}

/// Stage-specific payload of one trace line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum TraceEvent {
    Input { question: String },
    Ner { mapping: EntityMapping, question: String },
    TableSelection { inputs: Vec<String>, scores: Vec<TableScore>, kept: Vec<String> },
    ColumnSelection { table: String, input: String, decisions: Vec<ColumnDecision> },
    SqlGeneration {
        input: String,
        beam_width: usize,
        candidates: Vec<CandidateSql>,
        rejected: Vec<Rejection>,
        chosen: Option<String>,
    },
    ValueFilling { input: String, output: String },
    Assembly { sql: String },
}

impl TraceEvent {
    pub fn stage(&self) -> Stage {
        match self {
            TraceEvent::Input { .. } => Stage::Input,
            TraceEvent::Ner { .. } => Stage::Ner,
            TraceEvent::TableSelection { .. } => Stage::TableSelection,
            TraceEvent::ColumnSelection { .. } => Stage::ColumnSelection,
            TraceEvent::SqlGeneration { .. } => Stage::SqlGeneration,
            TraceEvent::ValueFilling { .. } => Stage::ValueFilling,
            TraceEvent::Assembly { .. } => Stage::Assembly,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    #[serde(flatten)]
    pub event: TraceEvent,
    /// Wall-clock time spent in the stage; only present when timing is on,
    /// since it would otherwise break byte-identical replays.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_us: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub lines: Vec<TraceLine>,
}

impl PipelineTrace {
    pub fn push(&mut self, event: TraceEvent, elapsed_us: Option<u64>) {
        self.lines.push(TraceLine { event, elapsed_us });
    }

    pub fn events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.lines.iter().map(|l| &l.event)
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for line in &self.lines {
            serde_json::to_writer(&mut w, line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<PipelineTrace, serde_json::Error> {
        let mut trace = PipelineTrace::default();
        for line in r.lines() {
            let line = line.map_err(serde_json::Error::io)?;
            if line.trim().is_empty() {
                continue;
            }
            trace.lines.push(serde_json::from_str(&line)?);
        }
        Ok(trace)
    }
}
