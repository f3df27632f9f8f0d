use std::collections::HashMap;
use std::path::Path;

use super::tokenize::{Token, TokenClass, TokenList};
use crate::error::Result;

/// Normalization constant of the valence sum.
pub const NORMALIZER_ALPHA: f64 = 15.0;

pub const NEGATIONS: &[&str] = &["no", "not", "never"];

/// Word (or emoticon) to valence lookup, keys lowercased.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValenceTable {
    scores: HashMap<String, f64>,
}

impl ValenceTable {
    pub fn new(scores: impl IntoIterator<Item = (String, f64)>) -> Self {
        ValenceTable {
            scores: scores.into_iter().map(|(k, v)| (k.to_lowercase(), v)).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let map: HashMap<String, f64> = serde_json::from_str(text)?;
        Ok(ValenceTable::new(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        ValenceTable::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn builtin() -> Self {
        ValenceTable::from_json(crate::fixtures::VALENCE_JSON).expect("shipped valence table parses")
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.scores.get(word).copied()
    }

    /// The same table with every valence sign-flipped.
    pub fn negated(&self) -> Self {
        ValenceTable {
            scores: self.scores.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }
}

pub fn is_negation(token: &Token) -> bool {
    token.class == TokenClass::Word
        && (NEGATIONS.contains(&token.norm.as_str())
            || token.norm.ends_with("n't")
            || token.norm.ends_with("n\u{2019}t"))
}

/// Sum of token valences, flipping any valenced token that directly follows a negation.
pub fn valence_sum(tokens: &TokenList, valence: &ValenceTable) -> f64 {
    let mut sum = 0.0;
    for (i, tok) in tokens.tokens.iter().enumerate() {
        if !matches!(tok.class, TokenClass::Word | TokenClass::Emoticon) {
            continue;
        }
        let Some(v) = valence.get(&tok.norm) else {
            continue;
        };
        let negated = i > 0 && is_negation(&tokens.tokens[i - 1]);
        sum += if negated { -v } else { v };
    }
    sum
}

/// Valence sum squashed into (-1, 1) by `s / sqrt(s^2 + 15)`.
pub fn sentiment_score(tokens: &TokenList, valence: &ValenceTable) -> f64 {
    let s = valence_sum(tokens, valence);
    if s == 0.0 {
        return 0.0;
    }
    s / (s * s + NORMALIZER_ALPHA).sqrt()
}
