use std::collections::BTreeSet;

use super::keywords::word_occurrences;
use super::AugmentError;
use crate::records::{validate_question, QuestionSqlPair};
use crate::schema::Question;

/// Something that proposes rewrites of a question, each with a similarity
/// score in `[0, 1]`. How similarity is measured is up to the provider.
pub trait ParaphraseProvider: Send + Sync {
    fn paraphrase(&self, question: &str) -> Result<Vec<(String, f64)>, AugmentError>;
}

/// Token-set Jaccard over lowercased words; 1.0 for two empty questions.
pub fn jaccard(a: &str, b: &str) -> f64 {
    let a: BTreeSet<String> = Question::new(a).words().into_iter().collect();
    let b: BTreeSet<String> = Question::new(b).words().into_iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

const LEAD_VERBS: [&str; 3] = ["show", "list", "display"];
const CLAUSE_MARKERS: [&str; 2] = [" for ", " with "];

/// Template rewrites of `question`, scored by [`jaccard`] against it.
/// Rewrites identical to the input are left out.
pub fn rule_paraphraser(question: &str) -> Vec<(String, f64)> {
    let q = question.trim();
    if q.is_empty() {
        return Vec::new();
    }
    let lower = q.to_lowercase();
    let mut rewrites: Vec<String> = Vec::new();
    if !lower.starts_with("please ") {
        rewrites.push(format!("please {q}"));
    }
    if let Some((first, rest)) = q.split_once(' ') {
        let first = first.to_lowercase();
        if LEAD_VERBS.contains(&first.as_str()) {
            for v in LEAD_VERBS.iter().filter(|v| **v != first) {
                rewrites.push(format!("{v} {rest}"));
            }
        }
    }
    if lower.starts_with("what is the ") {
        rewrites.push(format!("tell me the {}", &q["what is the ".len()..]));
    }
    if let Some((at, marker)) = CLAUSE_MARKERS
        .iter()
        .filter_map(|m| lower.find(m).map(|at| (at, *m)))
        .min_by_key(|(at, _)| *at)
    {
        let head = &q[..at];
        let tail = &q[at + 1..];
        if !head.trim().is_empty() && tail.len() > marker.len() - 1 {
            rewrites.push(format!("{tail}, {head}"));
        }
    }
    let mut out: Vec<(String, f64)> = Vec::new();
    for r in rewrites {
        if r != q && !out.iter().any(|(o, _)| *o == r) {
            let sim = jaccard(q, &r);
            out.push((r, sim));
        }
    }
    out
}

/// The default provider, backed by [`rule_paraphraser`].
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleParaphraser;

impl ParaphraseProvider for RuleParaphraser {
    fn paraphrase(&self, question: &str) -> Result<Vec<(String, f64)>, AugmentError> {
        Ok(rule_paraphraser(question))
    }
}

/// Provider rewrites scoring strictly above `threshold`, each paired with
/// the unchanged gold query. Rewrites that no longer mention every literal of
/// the query are dropped, as are duplicates and the original question.
pub fn paraphrase(
    pair: &QuestionSqlPair,
    provider: &dyn ParaphraseProvider,
    threshold: f64,
) -> Result<Vec<QuestionSqlPair>, AugmentError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(AugmentError::Threshold(threshold));
    }
    let original = pair.question.text.trim();
    let mut out: Vec<QuestionSqlPair> = Vec::new();
    for (text, sim) in provider.paraphrase(&pair.question.text)? {
        if !(0.0..=1.0).contains(&sim) {
            return Err(AugmentError::Similarity(sim));
        }
        let text = text.trim();
        if sim <= threshold || text == original || validate_question(text).is_err() {
            continue;
        }
        let folded = text.to_lowercase();
        let anchored = pair
            .gold_sql
            .literals()
            .all(|lit| !word_occurrences(&folded, &lit.to_lowercase()).is_empty());
        if anchored && !out.iter().any(|p| p.question.text == text) {
            out.push(QuestionSqlPair::new(text, pair.gold_sql.clone(), pair.db_name.clone()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Schema;
    use crate::sql::parse_sql;

    struct Canned(Vec<(&'static str, f64)>);

    impl ParaphraseProvider for Canned {
        fn paraphrase(&self, _: &str) -> Result<Vec<(String, f64)>, AugmentError> {
            Ok(self.0.iter().map(|(t, s)| (t.to_string(), *s)).collect())
        }
    }

    fn bill_pair() -> QuestionSqlPair {
        let s = Schema::from_json(include_str!("../../tests/fixtures/schema.json")).unwrap();
        let sql = "select amount from power_bill where user_name = 'Alice' and month = 'March'";
        QuestionSqlPair::new("bill of Alice for March", parse_sql(sql, &s).unwrap(), "marketing")
    }

    // |A ∩ B| / |A ∪ B| by explicit counting
    fn set_oracle(a: &[&str], b: &[&str]) -> f64 {
        let inter = a.iter().filter(|w| b.contains(w)).count();
        let union = a.len() + b.iter().filter(|w| !a.contains(w)).count();
        inter as f64 / union as f64
    }

    #[test]
    fn rule_rewrites_with_hand_computed_scores() {
        let got = rule_paraphraser("show the amount for Alice");
        let base = ["show", "the", "amount", "for", "alice"];
        let expected = [
            ("please show the amount for Alice", set_oracle(&base, &["please", "show", "the", "amount", "for", "alice"])),
            ("list the amount for Alice", set_oracle(&base, &["list", "the", "amount", "for", "alice"])),
            ("display the amount for Alice", set_oracle(&base, &["display", "the", "amount", "for", "alice"])),
            ("for Alice, show the amount", 1.0),
        ];
        assert_eq!(got.len(), expected.len());
        for ((text, sim), (etext, esim)) in got.iter().zip(expected) {
            assert_eq!(text, etext);
            assert!((sim - esim).abs() < 1e-12, "{text}: {sim} vs {esim}");
        }
        assert!((got[0].1 - 5.0 / 6.0).abs() < 1e-12);
        assert!((got[1].1 - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn question_word_swap_and_edge_cases() {
        let got = rule_paraphraser("what is the region of Bob");
        assert!(got.iter().any(|(t, _)| t == "tell me the region of Bob"));
        assert_eq!(jaccard("a b c", "c b a"), 1.0);
        assert!(rule_paraphraser("").is_empty());
        assert!(rule_paraphraser("   ").is_empty());
        assert_eq!(rule_paraphraser("show x"), vec![
            ("please show x".to_string(), 2.0 / 3.0),
            ("list x".to_string(), 1.0 / 3.0),
            ("display x".to_string(), 1.0 / 3.0),
        ]);
    }

    #[test]
    fn threshold_and_value_anchoring() {
        let p = bill_pair();
        let provider = Canned(vec![
            ("what is Alice's bill for March", 0.97),
            ("bill of Alice for March please", 0.90),
            ("what is Alice's bill this month", 0.99),
            ("what is Alice's bill for March", 0.98),
            ("bill of Alice for March", 1.0),
        ]);
        let kept = paraphrase(&p, &provider, 0.95).unwrap();
        let texts: Vec<&str> = kept.iter().map(|k| k.question.text.as_str()).collect();
        assert_eq!(texts, vec!["what is Alice's bill for March"]);
        assert_eq!(kept[0].gold_sql, p.gold_sql);
        assert!(matches!(paraphrase(&p, &provider, 1.5), Err(AugmentError::Threshold(_))));
        assert!(matches!(paraphrase(&p, &Canned(vec![("x", 1.2)]), 0.5), Err(AugmentError::Similarity(_))));
    }

    #[test]
    fn reordered_clause_passes_default_threshold() {
        let kept = paraphrase(&bill_pair(), &RuleParaphraser, 0.95).unwrap();
        let texts: Vec<&str> = kept.iter().map(|k| k.question.text.as_str()).collect();
        assert_eq!(texts, vec!["for March, bill of Alice"]);
    }
}
