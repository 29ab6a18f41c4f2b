//! Corpus splitting, logic-form accuracy, ablation grids and reports.

mod report;
mod store;
mod synth;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::{Pipeline, PipelineConfig};
use crate::records::QuestionSqlPair;
use crate::schema::Schema;
use crate::sql::logic_form_equal;
use crate::submodel::{ModelError, Submodels};

pub use report::{Cell, EvalReport, FOOTER};
pub use store::{execution_consistent, StoreError, StoreTable, ToyStore};
pub use synth::{audit_pair, synth_corpus, typo_variant, SynthCorpus, SynthError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("split ratio {0} is outside (0, 1)")]
    Ratio(f64),
    #[error("no variants to evaluate")]
    NoVariants,
    #[error("no datasets to evaluate")]
    NoDatasets,
    #[error("variant `{variant}`: {source}")]
    Backend {
        variant: String,
        #[source]
        source: ModelError,
    },
    #[error("variant `{0}`: {1}")]
    Config(String, String),
}

/// Deterministic shuffled split; the training side gets
/// `round(len * ratio)` samples.
pub fn split<T: Clone>(corpus: &[T], ratio: f64, seed: u64) -> Result<(Vec<T>, Vec<T>), EvalError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(EvalError::Ratio(ratio));
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (corpus.len() as f64 * ratio).round() as usize;
    let pick = |idx: &[usize]| idx.iter().map(|&i| corpus[i].clone()).collect();
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub index: usize,
    pub question: String,
    pub gold: String,
    pub predicted: Option<String>,
    /// Failing stage and reason when the pipeline did not produce SQL.
    pub failure: Option<String>,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub matches: usize,
    pub samples: usize,
    pub verdicts: Vec<Verdict>,
}

impl Evaluation {
    /// `matches / samples`; 0 for an empty test set.
    pub fn accuracy(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.matches as f64 / self.samples as f64
        }
    }
}

fn judge(pipeline: &Pipeline, index: usize, pair: &QuestionSqlPair) -> Verdict {
    let gold = pair.gold_sql.to_string();
    match pipeline.run(&pair.question.text) {
        Ok(out) => Verdict {
            index,
            question: pair.question.text.clone(),
            gold,
            predicted: Some(out.sql.to_string()),
            failure: None,
            matched: logic_form_equal(&out.sql, &pair.gold_sql),
        },
        Err(e) => Verdict {
            index,
            question: pair.question.text.clone(),
            gold,
            predicted: None,
            failure: Some(e.to_string()),
            matched: false,
        },
    }
}

/// Logic-form accuracy of `pipeline` on `test`; stage failures count as
/// misses. Samples run in parallel unless a backend is serial.
pub fn evaluate(pipeline: &Pipeline, test: &[QuestionSqlPair]) -> Evaluation {
    let verdicts: Vec<Verdict> = if pipeline.models().any_serial() {
        test.iter().enumerate().map(|(i, p)| judge(pipeline, i, p)).collect()
    } else {
        test.par_iter().enumerate().map(|(i, p)| judge(pipeline, i, p)).collect()
    };
    Evaluation { matches: verdicts.iter().filter(|v| v.matched).count(), samples: test.len(), verdicts }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    #[serde(default)]
    pub config: PipelineConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub pairs: Vec<QuestionSqlPair>,
}

/// Evaluates every variant on every dataset. Each cell builds its own
/// pipeline, so cells share no state.
pub fn ablation_matrix(
    variants: &[Variant],
    datasets: &[Dataset],
    schema: &Schema,
    models: impl Fn(&PipelineConfig) -> Result<Submodels, ModelError>,
) -> Result<EvalReport, EvalError> {
    if variants.is_empty() {
        return Err(EvalError::NoVariants);
    }
    if datasets.is_empty() {
        return Err(EvalError::NoDatasets);
    }
    let mut report = EvalReport::new(
        variants.iter().map(|v| v.name.clone()).collect(),
        datasets.iter().map(|d| d.name.clone()).collect(),
    );
    for v in variants {
        v.config.validate().map_err(|e| EvalError::Config(v.name.clone(), e))?;
        let mut row = Vec::new();
        for d in datasets {
            let m = models(&v.config).map_err(|source| EvalError::Backend { variant: v.name.clone(), source })?;
            let pipeline = Pipeline::new(schema.clone(), m, v.config.clone());
            row.push(evaluate(&pipeline, &d.pairs));
        }
        report.push_row(row);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::Baseline;
    use crate::sql::parse_sql;

    fn schema() -> Schema {
        Schema::from_json(include_str!("../../tests/fixtures/schema.json")).unwrap()
    }

    fn pair(q: &str, sql: &str) -> QuestionSqlPair {
        QuestionSqlPair::new(q, parse_sql(sql, &schema()).unwrap(), "marketing")
    }

    fn baseline_models(s: &Schema) -> impl Fn(&PipelineConfig) -> Result<Submodels, ModelError> + '_ {
        |_| Ok(Baseline::new(s.clone()).submodels())
    }

    #[test]
    fn split_sizes() {
        let big: Vec<usize> = (0..10880).collect();
        let (tr, te) = split(&big, 0.9, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (9792, 1088));
        let small: Vec<usize> = (0..10).collect();
        let (tr, te) = split(&small, 0.9, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (9, 1));
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort();
        assert_eq!(all, small);
        assert_eq!(split(&small, 0.9, 3).unwrap(), (tr, te));
        assert!(split(&small, 1.0, 3).is_err());
    }

    #[test]
    fn accuracy_counts_failures_as_misses() {
        let s = schema();
        let p = Pipeline::new(s.clone(), Baseline::new(s.clone()).submodels(), PipelineConfig::default());
        let test = vec![
            pair("total amount for Alice", "select sum(amount) from power_bill where user_name = 'Alice'"),
            pair("amount in March", "select amount from power_bill where month = 'March'"),
            pair("month for Bob", "select month from power_bill where user_name = 'Bob'"),
            pair("zebra quartz", "select month from power_bill"),
        ];
        let e = evaluate(&p, &test);
        assert_eq!((e.matches, e.samples), (3, 4));
        assert_eq!(e.accuracy(), 0.75);
        assert!(e.verdicts[3].failure.as_deref().unwrap().starts_with("table-selection"));
        let fails = vec![test[3].clone(), test[3].clone()];
        assert_eq!(evaluate(&p, &fails).accuracy(), 0.0);
    }

    #[test]
    fn matrix_cells_equal_independent_evaluations() {
        let s = schema();
        let d1 = Dataset {
            name: "a".into(),
            pairs: vec![pair("total amount for Alice", "select sum(amount) from power_bill where user_name = 'Alice'")],
        };
        let d2 = Dataset {
            name: "b".into(),
            pairs: vec![pair("amount for Ailce", "select amount from power_bill where user_name = 'Alice'")],
        };
        let on = Variant {
            name: "ner".into(),
            config: PipelineConfig { restore_mode: false, ..PipelineConfig::default() },
        };
        let off = Variant { name: "plain".into(), config: PipelineConfig { ner: false, ..PipelineConfig::default() } };
        let variants = [on, off];
        let datasets = [d1, d2];
        let r = ablation_matrix(&variants, &datasets, &s, baseline_models(&s)).unwrap();
        for (vi, v) in variants.iter().enumerate() {
            for (di, d) in datasets.iter().enumerate() {
                let p = Pipeline::new(s.clone(), Baseline::new(s.clone()).submodels(), v.config.clone());
                let e = evaluate(&p, &d.pairs);
                assert_eq!(r.cell(vi, di).matches, e.matches);
                assert_eq!(r.cell(vi, di).samples, e.samples);
            }
        }
        assert_eq!(r.cell(0, 1).matches, 1);
        assert_eq!(r.cell(1, 1).matches, 0);
        assert!(matches!(ablation_matrix(&[], &datasets, &s, baseline_models(&s)), Err(EvalError::NoVariants)));
        assert!(matches!(ablation_matrix(&variants, &[], &s, baseline_models(&s)), Err(EvalError::NoDatasets)));
    }
}
