use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::records::{is_reserved_token, QuestionSqlPair};
use crate::schema::{tokenize, Schema};
use crate::sql::{CompareOp, ValueTerm};

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Byte offsets of every occurrence of `needle` in `text` that is not glued
/// to a neighbouring word character.
pub(crate) fn word_occurrences(text: &str, needle: &str) -> Vec<usize> {
    if needle.is_empty() {
        return Vec::new();
    }
    text.match_indices(needle)
        .filter(|(at, _)| {
            let before = text[..*at].chars().next_back();
            let after = text[at + needle.len()..].chars().next();
            !before.is_some_and(is_word_char) && !after.is_some_and(is_word_char)
        })
        .map(|(at, _)| at)
        .collect()
}

/// A literal that can be swapped: its condition index, its single position in
/// the question, and the alternatives from the same column.
struct Slot {
    condition: usize,
    at: usize,
    old: String,
    alternatives: Vec<String>,
}

fn slots(pair: &QuestionSqlPair, schema: &Schema) -> Vec<Slot> {
    let text = &pair.question.text;
    let literals: Vec<&str> = pair.gold_sql.literals().collect();
    let mut out = Vec::new();
    for (i, cond) in pair.gold_sql.conditions.iter().enumerate() {
        let ValueTerm::Literal(old) = &cond.value else { continue };
        if cond.op != CompareOp::Eq || literals.iter().filter(|l| *l == old).count() != 1 {
            continue;
        }
        let Ok(column) = schema.column(&cond.column.table, &cond.column.column) else { continue };
        if !column.values.contains(old) {
            continue;
        }
        let at = match word_occurrences(text, old).as_slice() {
            [at] => *at,
            _ => continue,
        };
        let alternatives: Vec<String> = column
            .values
            .iter()
            .filter(|v| *v != old && !literals.contains(&v.as_str()))
            .filter(|v| word_occurrences(text, v).is_empty())
            .filter(|v| !tokenize(v).iter().any(|t| is_reserved_token(&t.text)))
            .cloned()
            .collect();
        if !alternatives.is_empty() {
            out.push(Slot { condition: i, at, old: old.clone(), alternatives });
        }
    }
    out
}

/// Up to `n` variants of `pair` in which database values quoted in the
/// question are swapped, in question and SQL at once, for other values of
/// the same column.
pub fn replace_keywords(pair: &QuestionSqlPair, schema: &Schema, n: usize, seed: u64) -> Vec<QuestionSqlPair> {
    let slots = slots(pair, schema);
    if slots.is_empty() || n == 0 {
        return Vec::new();
    }
    let combinations = slots
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.alternatives.len()))
        .unwrap_or(usize::MAX);
    let wanted = n.min(combinations);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut out = Vec::new();
    // enumerate small spaces exhaustively in shuffled order, sample large ones
    let exhaustive = combinations <= 4 * wanted;
    let mut picks: Vec<Vec<usize>> = Vec::new();
    if exhaustive {
        picks.push(Vec::new());
        for s in &slots {
            picks = picks
                .into_iter()
                .flat_map(|p| (0..s.alternatives.len()).map(move |k| [p.clone(), vec![k]].concat()))
                .collect();
        }
        picks.shuffle(&mut rng);
    }
    let mut attempts = 0;
    while out.len() < wanted {
        let pick = if exhaustive {
            match picks.pop() {
                Some(p) => p,
                None => break,
            }
        } else if attempts < 32 * wanted {
            attempts += 1;
            slots.iter().map(|s| rng.gen_range(0..s.alternatives.len())).collect()
        } else {
            break;
        };
        if seen.contains(&pick) {
            continue;
        }
        out.push(apply(pair, &slots, &pick));
        seen.push(pick);
    }
    out
}

fn apply(pair: &QuestionSqlPair, slots: &[Slot], pick: &[usize]) -> QuestionSqlPair {
    let mut text = pair.question.text.clone();
    let mut sql = pair.gold_sql.clone();
    let mut order: Vec<(&Slot, &String)> = slots.iter().zip(pick).map(|(s, &k)| (s, &s.alternatives[k])).collect();
    // right to left so earlier offsets stay valid
    order.sort_by_key(|(s, _)| std::cmp::Reverse(s.at));
    for (slot, new) in order {
        text.replace_range(slot.at..slot.at + slot.old.len(), new);
        sql.conditions[slot.condition].value = ValueTerm::Literal(new.clone());
    }
    QuestionSqlPair::new(text, sql, pair.db_name.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{execution_consistent, ToyStore};
    use crate::sql::{logic_form_equal, parse_sql, strip_values};

    const FIXTURE: &str = include_str!("../../tests/fixtures/schema.json");

    fn pair(q: &str, sql: &str) -> QuestionSqlPair {
        let s = Schema::from_json(FIXTURE).unwrap();
        QuestionSqlPair::new(q, parse_sql(sql, &s).unwrap(), "marketing")
    }

    #[test]
    fn word_bounded_occurrences() {
        assert_eq!(word_occurrences("May and Mayor in May", "May"), vec![0, 17]);
        assert!(word_occurrences("Alicent", "Alice").is_empty());
        assert_eq!(word_occurrences("amount 250.5 due", "250.5"), vec![7]);
    }

    #[test]
    fn month_swaps_in_both_places() {
        let s = Schema::from_json(FIXTURE).unwrap();
        let p = pair("amount in March", "select amount from power_bill where month = 'March'");
        let out = replace_keywords(&p, &s, 5, 1);
        let mut got: Vec<(String, String)> =
            out.iter().map(|v| (v.question.text.clone(), v.gold_sql.to_string())).collect();
        got.sort();
        assert_eq!(
            got,
            vec![
                ("amount in April".into(), "select amount from power_bill where month = 'April'".into()),
                ("amount in May".into(), "select amount from power_bill where month = 'May'".into()),
            ]
        );
        let store = ToyStore::from_json(FIXTURE).unwrap();
        for v in &out {
            assert!(logic_form_equal(strip_values(&v.gold_sql).0.query(), strip_values(&p.gold_sql).0.query()));
            assert!(execution_consistent(&p.gold_sql, &v.gold_sql, &store));
        }
    }

    #[test]
    fn literal_absent_from_question_is_kept() {
        let s = Schema::from_json(FIXTURE).unwrap();
        let p = pair("amount for that month", "select amount from power_bill where month = 'March'");
        assert!(replace_keywords(&p, &s, 5, 1).is_empty());
    }

    #[test]
    fn single_valued_column_has_no_alternative() {
        let s = Schema::from_json(
            r#"{"db_name":"d","tables":[{"name":"t","columns":[
                {"name":"k","type":"text","values":["only"]},
                {"name":"v","type":"number","values":["1"]}]}]}"#,
        )
        .unwrap();
        let p = QuestionSqlPair::new("v for only", parse_sql("select v from t where k = 'only'", &s).unwrap(), "d");
        assert!(replace_keywords(&p, &s, 3, 0).is_empty());
    }

    #[test]
    fn two_literals_swap_together_and_reproduce() {
        let s = Schema::from_json(FIXTURE).unwrap();
        let p = pair(
            "amount for Alice in March",
            "select amount from power_bill where user_name = 'Alice' and month = 'March'",
        );
        let a = replace_keywords(&p, &s, 4, 9);
        assert_eq!(a.len(), 4);
        assert_eq!(a, replace_keywords(&p, &s, 4, 9));
        for v in &a {
            let lits: Vec<&str> = v.gold_sql.literals().collect();
            assert!(v.question.text.contains(lits[0]) && v.question.text.contains(lits[1]));
            assert_ne!(lits, vec!["Alice", "March"]);
        }
        // 3 users x 2 months
        assert_eq!(replace_keywords(&p, &s, 100, 9).len(), 6);
    }

    #[test]
    fn comparison_literals_are_not_swapped() {
        let s = Schema::from_json(FIXTURE).unwrap();
        let p = pair("month with amount above 100", "select month from power_bill where amount > 100");
        assert!(replace_keywords(&p, &s, 3, 0).is_empty());
    }
}
