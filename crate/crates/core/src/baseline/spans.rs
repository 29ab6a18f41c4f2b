use crate::schema::{fuzzy_allowance, is_decimal_numeral, levenshtein, tokenize, Question};

/// A question token range `from..to` matched against a cell value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanMatch {
    pub from: usize,
    pub to: usize,
    pub value: String,
    pub distance: usize,
}

pub(crate) fn overlaps(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

fn is_word(text: &str) -> bool {
    text.chars().any(|c| c.is_alphanumeric() || c == '_')
}

/// Word tokens of the question as (token index, lowercased text).
pub fn word_positions(q: &Question) -> Vec<(usize, String)> {
    q.tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| is_word(&t.text))
        .map(|(i, t)| (i, t.text.to_lowercase()))
        .collect()
}

/// Token ranges forming an unsigned decimal numeral (`100`, `250.5`).
pub fn numeral_spans(q: &Question) -> Vec<(usize, usize)> {
    let toks = &q.tokens;
    let digits = |i: usize| toks[i].text.bytes().all(|b| b.is_ascii_digit());
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        if !digits(i) {
            i += 1;
            continue;
        }
        let fractional = i + 2 < toks.len()
            && toks[i + 1].text == "."
            && toks[i + 1].start == toks[i].end
            && toks[i + 2].start == toks[i + 1].end
            && digits(i + 2);
        let end = if fractional { i + 3 } else { i + 1 };
        out.push((i, end));
        i = end;
    }
    out
}

/// Best span for any of `values` within the guarded fuzzy budget `max`,
/// skipping spans that overlap `blocked`. Ties go to the smaller distance,
/// then the earlier span, then the earlier value.
pub fn best_value_span(
    q: &Question,
    values: &[String],
    max: usize,
    blocked: &[(usize, usize)],
) -> Option<SpanMatch> {
    let mut best: Option<(usize, usize, usize, SpanMatch)> = None;
    for (vi, value) in values.iter().enumerate() {
        let len = tokenize(value).len();
        if len == 0 || len > q.tokens.len() {
            continue;
        }
        let folded = value.to_lowercase();
        for from in 0..=q.tokens.len() - len {
            let to = from + len;
            if !q.is_word_span(from, to) || blocked.iter().any(|b| overlaps(*b, (from, to))) {
                continue;
            }
            let span = q.span_text(from, to);
            let budget = fuzzy_allowance(span, value, max);
            let span_chars = span.chars().count();
            if span_chars.abs_diff(folded.chars().count()) > budget {
                continue;
            }
            let d = levenshtein(&span.to_lowercase(), &folded);
            if d > budget {
                continue;
            }
            let key = (d, from, vi);
            if best.as_ref().map_or(true, |(bd, bf, bv, _)| key < (*bd, *bf, *bv)) {
                best = Some((d, from, vi, SpanMatch { from, to, value: value.clone(), distance: d }));
            }
        }
    }
    best.map(|(_, _, _, m)| m)
}

pub(crate) fn numeral_text(q: &Question, span: (usize, usize)) -> &str {
    let text = q.span_text(span.0, span.1);
    debug_assert!(is_decimal_numeral(text));
    text
}
