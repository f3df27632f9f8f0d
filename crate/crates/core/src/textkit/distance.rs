use std::collections::BTreeMap;

use super::tokenize::{tokenize, TokenClass};

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let subst = prev[j] + usize::from(ca != cb);
            cur[j + 1] = subst.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Term-frequency counts of the lowercased non-punctuation tokens.
pub fn term_counts(text: &str) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for t in tokenize(text).tokens {
        if t.class != TokenClass::Punct {
            *counts.entry(t.norm).or_insert(0) += 1;
        }
    }
    counts
}

/// Cosine similarity of the two texts' term-frequency vectors; 0 when either is empty.
pub fn term_cosine(a: &str, b: &str) -> f64 {
    cosine_of_counts(&term_counts(a), &term_counts(b))
}

pub fn cosine_of_counts(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: u64 = small
        .iter()
        .filter_map(|(t, x)| large.get(t).map(|y| x * y))
        .sum();
    let na: u64 = a.values().map(|x| x * x).sum();
    let nb: u64 = b.values().map(|x| x * x).sum();
    // integer norms keep exact boundary values (3/sqrt(25) == 0.6)
    (dot as f64 / ((na as f64) * (nb as f64)).sqrt()).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Full-matrix recursion, independent of the two-row implementation.
    fn oracle(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in d[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
                d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
            }
        }
        d[a.len()][b.len()]
    }

    #[test]
    fn edit_distance_examples() {
        assert_eq!(edit_distance("abc", "abc"), 0);
        assert_eq!(edit_distance("", "abc"), 3);
        assert_eq!(edit_distance("kitten", "sitting"), 3);
        assert_eq!(oracle("kitten", "sitting"), 3);
        assert_eq!(edit_distance("Good mornng all", "Good morning all"), 1);
        assert_eq!(edit_distance("héllo", "hello"), 1);
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(term_cosine("the cat sat", "the cat sat"), 1.0);
        assert_eq!(term_cosine("red fox", "blue whale"), 0.0);
        assert!((term_cosine("a b", "a") - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(term_cosine("", "a"), 0.0);
        assert_eq!(term_cosine("!!!", "a"), 0.0);
        assert_eq!(term_cosine("w1 w2 w3 dd ee", "w1 w2 w3 ddd eeeeee"), 0.6);
    }

    proptest! {
        #[test]
        fn matches_oracle(a in "[abc]{0,8}", b in "[abc]{0,8}") {
            prop_assert_eq!(edit_distance(&a, &b), oracle(&a, &b));
        }

        #[test]
        fn edit_distance_is_a_metric(a in "\\PC{0,10}", b in "\\PC{0,10}", c in "\\PC{0,10}") {
            let ab = edit_distance(&a, &b);
            prop_assert_eq!(ab, edit_distance(&b, &a));
            prop_assert_eq!(ab == 0, a == b);
            prop_assert!(edit_distance(&a, &c) <= ab + edit_distance(&b, &c));
        }

        #[test]
        fn cosine_bounds_symmetry_order(words in proptest::collection::vec("[a-e]{1,3}", 0..8),
                                        other in proptest::collection::vec("[a-e]{1,3}", 0..8)) {
            let a = words.join(" ");
            let b = other.join(" ");
            let c = term_cosine(&a, &b);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert_eq!(c, term_cosine(&b, &a));
            let mut rev = words.clone();
            rev.reverse();
            prop_assert_eq!(c, term_cosine(&rev.join(" "), &b));
        }
    }
}
