//! Data augmentation over question/SQL pairs: keyword replacement,
//! paraphrasing, and column perturbation of listing records.

mod columns;
mod keywords;
mod paraphrase;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::{QuestionSqlPair, RecordError};
use crate::schema::Schema;
use crate::sql::{to_sql, SqlError};

pub use columns::{perturb_columns, ListingRecord};
pub use keywords::replace_keywords;
pub use paraphrase::{jaccard, paraphrase, rule_paraphraser, ParaphraseProvider, RuleParaphraser};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("similarity threshold {0} is outside [0, 1]")]
    Threshold(f64),
    #[error("provider reported similarity {0}, outside [0, 1]")]
    Similarity(f64),
    #[error("{name} = {value} is not a probability")]
    Probability { name: &'static str, value: f64 },
    #[error("multiplier {0} is below 1")]
    Multiplier(f64),
    #[error("paraphrase provider unavailable: {0}")]
    Provider(String),
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Sql(#[from] SqlError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentationConfig {
    pub keywords: bool,
    pub paraphrase: bool,
    pub columns: bool,
    /// Keyword-replaced variants drawn per pair.
    pub keyword_samples: usize,
    pub add_probability: f64,
    pub delete_probability: f64,
    pub replace_probability: f64,
    /// Paraphrases must score strictly above this.
    pub similarity_threshold: f64,
    /// Target output size as a multiple of the input size. Unset keeps every
    /// variant produced.
    pub multiplier: Option<f64>,
    pub seed: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        AugmentationConfig {
            keywords: true,
            paraphrase: true,
            columns: true,
            keyword_samples: 4,
            add_probability: 0.5,
            delete_probability: 0.5,
            replace_probability: 0.5,
            similarity_threshold: 0.95,
            multiplier: None,
            seed: 0,
        }
    }
}

impl AugmentationConfig {
    /// Every strategy off: augmentation returns its input unchanged.
    pub fn disabled() -> Self {
        AugmentationConfig { keywords: false, paraphrase: false, columns: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        for (name, value) in [
            ("add_probability", self.add_probability),
            ("delete_probability", self.delete_probability),
            ("replace_probability", self.replace_probability),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(AugmentError::Probability { name, value });
            }
        }
        if !(0.0..=1.0).contains(&self.similarity_threshold) {
            return Err(AugmentError::Threshold(self.similarity_threshold));
        }
        match self.multiplier {
            Some(m) if !(m >= 1.0) => Err(AugmentError::Multiplier(m)),
            _ => Ok(()),
        }
    }
}

/// Per-pair seed so that results do not depend on scheduling.
pub(crate) fn pair_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentCounts {
    pub original: usize,
    pub keywords: usize,
    pub paraphrase: usize,
}

impl AugmentCounts {
    pub fn total(&self) -> usize {
        self.original + self.keywords + self.paraphrase
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Augmented {
    pub pairs: Vec<QuestionSqlPair>,
    pub counts: AugmentCounts,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Source {
    Keywords,
    Paraphrase,
}

/// Originals first, then new pairs taken round-robin across source pairs
/// until the multiplier target is met or the candidates run out. Pairs that
/// repeat an earlier (question, sql) are skipped.
pub fn augment_corpus(
    pairs: &[QuestionSqlPair],
    schema: &Schema,
    provider: &dyn ParaphraseProvider,
    config: &AugmentationConfig,
) -> Result<Augmented, AugmentError> {
    config.validate()?;
    let candidates: Vec<Vec<(Source, QuestionSqlPair)>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, pair)| {
            let mut out = Vec::new();
            if config.keywords {
                let seed = pair_seed(config.seed, i);
                out.extend(
                    replace_keywords(pair, schema, config.keyword_samples, seed)
                        .into_iter()
                        .map(|p| (Source::Keywords, p)),
                );
            }
            if config.paraphrase {
                out.extend(
                    paraphrase(pair, provider, config.similarity_threshold)?
                        .into_iter()
                        .map(|p| (Source::Paraphrase, p)),
                );
            }
            Ok(out)
        })
        .collect::<Result<_, AugmentError>>()?;

    let key = |p: &QuestionSqlPair| (p.question.text.clone(), to_sql(&p.gold_sql));
    let mut seen: std::collections::HashSet<(String, String)> = pairs.iter().map(key).collect();
    let mut out = pairs.to_vec();
    let mut counts = AugmentCounts { original: pairs.len(), ..AugmentCounts::default() };
    let target = config.multiplier.map(|m| (pairs.len() as f64 * m).round() as usize);
    let depth = candidates.iter().map(Vec::len).max().unwrap_or(0);
    'fill: for round in 0..depth {
        for list in &candidates {
            if target.is_some_and(|t| out.len() >= t) {
                break 'fill;
            }
            let Some((source, p)) = list.get(round) else { continue };
            if !seen.insert(key(p)) {
                continue;
            }
            match source {
                Source::Keywords => counts.keywords += 1,
                Source::Paraphrase => counts.paraphrase += 1,
            }
            out.push(p.clone());
        }
    }
    Ok(Augmented { pairs: out, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::parse_sql;

    fn schema() -> Schema {
        Schema::from_json(include_str!("../../tests/fixtures/schema.json")).unwrap()
    }

    fn corpus() -> Vec<QuestionSqlPair> {
        let s = schema();
        [
            ("amount for Alice in March", "select amount from power_bill where user_name = 'Alice' and month = 'March'"),
            ("show the region for Bob", "select region from user_info where user_name = 'Bob'"),
            ("total amount for Carol", "select sum(amount) from power_bill where user_name = 'Carol'"),
        ]
        .iter()
        .map(|(q, sql)| QuestionSqlPair::new(*q, parse_sql(sql, &s).unwrap(), "marketing"))
        .collect()
    }

    #[test]
    fn disabled_is_identity() {
        let c = corpus();
        let out = augment_corpus(&c, &schema(), &RuleParaphraser, &AugmentationConfig::disabled()).unwrap();
        assert_eq!(out.pairs, c);
        assert_eq!(out.counts, AugmentCounts { original: 3, keywords: 0, paraphrase: 0 });
    }

    #[test]
    fn multiplier_caps_output_and_counts_add_up() {
        let c = corpus();
        let cfg = AugmentationConfig { multiplier: Some(3.0), seed: 4, ..AugmentationConfig::default() };
        let out = augment_corpus(&c, &schema(), &RuleParaphraser, &cfg).unwrap();
        assert_eq!(out.pairs.len(), 9);
        assert_eq!(out.counts.total(), 9);
        assert_eq!(&out.pairs[..3], c.as_slice());
        let again = augment_corpus(&c, &schema(), &RuleParaphraser, &cfg).unwrap();
        assert_eq!(out, again);
        let uncapped = AugmentationConfig { multiplier: None, ..cfg };
        let all = augment_corpus(&c, &schema(), &RuleParaphraser, &uncapped).unwrap();
        assert!(all.pairs.len() >= 9);
        assert!(all.counts.paraphrase >= 2);
    }

    #[test]
    fn config_validation() {
        let bad = AugmentationConfig { delete_probability: 1.5, ..AugmentationConfig::default() };
        assert!(matches!(bad.validate(), Err(AugmentError::Probability { name: "delete_probability", .. })));
        let bad = AugmentationConfig { similarity_threshold: -0.1, ..AugmentationConfig::default() };
        assert!(bad.validate().is_err());
        let bad = AugmentationConfig { multiplier: Some(0.5), ..AugmentationConfig::default() };
        assert!(bad.validate().is_err());
        let parsed: AugmentationConfig = toml::from_str("multiplier = 5.0\nkeywords = false").unwrap();
        assert_eq!(parsed.multiplier, Some(5.0));
        assert!(!parsed.keywords && parsed.paraphrase);
    }
}
