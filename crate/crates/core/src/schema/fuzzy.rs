/// Shortest string (in characters) for which a non-zero edit distance is
/// tolerated when matching question spans against cell values.
pub const MIN_FUZZY_LEN: usize = 4;

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit budget for matching `span` against `value`: zero when either side
/// is shorter than [`MIN_FUZZY_LEN`] or is a numeral, `max` otherwise.
pub fn fuzzy_allowance(span: &str, value: &str, max: usize) -> usize {
    let short = span.chars().count() < MIN_FUZZY_LEN || value.chars().count() < MIN_FUZZY_LEN;
    let numeric = super::is_decimal_numeral(span) || super::is_decimal_numeral(value);
    if short || numeric {
        0
    } else {
        max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Plain recursive definition, memoized; independent of the two-row DP.
    fn oracle(a: &[char], b: &[char]) -> usize {
        fn go(a: &[char], b: &[char], memo: &mut std::collections::HashMap<(usize, usize), usize>) -> usize {
            if a.is_empty() {
                return b.len();
            }
            if b.is_empty() {
                return a.len();
            }
            if let Some(&v) = memo.get(&(a.len(), b.len())) {
                return v;
            }
            let cost = usize::from(a[0] != b[0]);
            let v = (go(&a[1..], &b[1..], memo) + cost)
                .min(go(&a[1..], b, memo) + 1)
                .min(go(a, &b[1..], memo) + 1);
            memo.insert((a.len(), b.len()), v);
            v
        }
        go(a, b, &mut Default::default())
    }

    #[test]
    fn known_distances() {
        assert_eq!(levenshtein("ailce", "alice"), 2);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("März", "Marz"), 1);
    }

    #[test]
    fn allowance_guard() {
        assert_eq!(fuzzy_allowance("Ailce", "Alice", 2), 2);
        assert_eq!(fuzzy_allowance("for", "Ford", 2), 0);
        assert_eq!(fuzzy_allowance("1001", "1000", 2), 0);
    }

    proptest! {
        #[test]
        fn matches_recursive_oracle(a in "[a-d]{0,7}", b in "[a-d]{0,7}") {
            let ac: Vec<char> = a.chars().collect();
            let bc: Vec<char> = b.chars().collect();
            prop_assert_eq!(levenshtein(&a, &b), oracle(&ac, &bc));
        }
    }
}
