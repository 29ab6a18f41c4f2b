use super::{CandidateSql, ColumnTagging, ModelError, TableScore};
use crate::records::{parse_column_input, parse_table_input, parse_value_output, parse_valuefill_input};
use crate::sql::parse_statement;

fn violation(msg: impl Into<String>) -> ModelError {
    ModelError::Contract(msg.into())
}

pub fn check_table_score(input: &str, score: &TableScore) -> Result<(), ModelError> {
    let (_, table) = parse_table_input(input)?;
    if score.table != table {
        return Err(violation(format!("scored `{}` for input table `{table}`", score.table)));
    }
    if !(0.0..=1.0).contains(&score.score) {
        return Err(violation(format!("score {} outside [0, 1]", score.score)));
    }
    Ok(())
}

/// Decisions must name exactly the listed columns, in listing order.
pub fn check_column_tagging(input: &str, tagging: &ColumnTagging) -> Result<(), ModelError> {
    let listing = parse_column_input(input)?;
    for d in &tagging.decisions {
        if !listing.columns.iter().any(|(name, _)| name == &d.column) {
            return Err(violation(format!("unknown column `{}`", d.column)));
        }
    }
    if tagging.decisions.len() != listing.columns.len()
        || tagging.decisions.iter().zip(&listing.columns).any(|(d, (n, _))| &d.column != n)
    {
        return Err(violation(format!(
            "{} decisions for {} listed columns",
            tagging.decisions.len(),
            listing.columns.len()
        )));
    }
    Ok(())
}

pub fn check_candidates(beam_width: usize, candidates: &[CandidateSql]) -> Result<(), ModelError> {
    if candidates.len() > beam_width {
        return Err(violation(format!("{} candidates for beam {beam_width}", candidates.len())));
    }
    if candidates.iter().any(|c| !c.score.is_finite()) {
        return Err(violation("non-finite candidate score"));
    }
    if candidates.windows(2).any(|w| w[0].score < w[1].score) {
        return Err(violation("candidates not sorted by descending score"));
    }
    Ok(())
}

/// Output must follow `extra1 v1 ... extraK vK` with K the number of
/// placeholders in the input's templated SQL.
pub fn check_value_output(input: &str, output: &str) -> Result<(), ModelError> {
    let (_, sql) = parse_valuefill_input(input)?;
    let expected = parse_statement(&sql)
        .map_err(|e| violation(format!("input SQL: {e}")))?
        .placeholders()
        .len();
    let got = parse_value_output(output)?.len();
    if got != expected {
        return Err(violation(format!("{got} values for {expected} placeholders")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submodel::ColumnDecision;

    #[test]
    fn table_score_range() {
        let ok = TableScore { table: "t".into(), score: 0.5 };
        assert!(check_table_score("q extra0 t", &ok).is_ok());
        let bad = TableScore { table: "t".into(), score: 1.5 };
        assert!(check_table_score("q extra0 t", &bad).is_err());
        let nan = TableScore { table: "t".into(), score: f64::NAN };
        assert!(check_table_score("q extra0 t", &nan).is_err());
        let wrong = TableScore { table: "u".into(), score: 0.1 };
        assert!(check_table_score("q extra0 t", &wrong).is_err());
    }

    #[test]
    fn tagging_must_cover_listing() {
        let input = "q extra0 t extra1 a text extra1 b number";
        let d = |c: &str, hit| ColumnDecision { column: c.into(), hit };
        assert!(check_column_tagging(input, &ColumnTagging { decisions: vec![d("a", true), d("b", false)] }).is_ok());
        assert!(check_column_tagging(input, &ColumnTagging { decisions: vec![d("a", true)] }).is_err());
        let unknown = check_column_tagging(input, &ColumnTagging { decisions: vec![d("a", true), d("zz", false)] });
        assert!(matches!(unknown, Err(ModelError::Contract(m)) if m.contains("unknown column")));
    }

    #[test]
    fn candidates_sorted_and_bounded() {
        let c = |s: f64| CandidateSql { sql: "select a from t".into(), score: s };
        assert!(check_candidates(2, &[c(0.9), c(0.5)]).is_ok());
        assert!(check_candidates(1, &[c(0.9), c(0.5)]).is_err());
        assert!(check_candidates(3, &[c(0.5), c(0.9)]).is_err());
        assert!(check_candidates(3, &[]).is_ok());
    }

    #[test]
    fn value_output_count() {
        let input = "q [SEP] select t @ a from t where t @ b = 'extra1' [SEP] q";
        assert!(check_value_output(input, "extra1 x").is_ok());
        assert!(check_value_output(input, "").is_err());
        assert!(check_value_output(input, "extra1 x extra2 y").is_err());
        let none = "q [SEP] select t @ a from t [SEP] q";
        assert!(check_value_output(none, "").is_ok());
    }
}
