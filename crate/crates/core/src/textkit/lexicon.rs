use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tokenize::TokenList;
use crate::error::{Error, Result};

pub const LEXICON_DIMS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Category {
    pub name: String,
    words: HashSet<String>,
    prefixes: Vec<String>,
}

impl Category {
    pub fn new(name: impl Into<String>, patterns: &[&str]) -> Self {
        let mut words = HashSet::new();
        let mut prefixes = Vec::new();
        for p in patterns {
            let p = p.to_lowercase();
            match p.strip_suffix('*') {
                Some(prefix) => prefixes.push(prefix.to_string()),
                None => {
                    words.insert(p);
                }
            }
        }
        prefixes.sort();
        Category { name: name.into(), words, prefixes }
    }

    pub fn matches(&self, word: &str) -> bool {
        self.words.contains(word) || self.prefixes.iter().any(|p| word.starts_with(p.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty() && self.prefixes.is_empty()
    }
}

/// A closed-vocabulary word-category dictionary with exactly 64 categories.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    categories: Vec<Category>,
}

#[derive(Serialize, Deserialize)]
struct LexiconFile {
    categories: Vec<CategoryFile>,
}

#[derive(Serialize, Deserialize)]
struct CategoryFile {
    name: String,
    patterns: Vec<String>,
}

impl Lexicon {
    /// Builds a lexicon, padding with empty categories up to 64.
    pub fn new(mut categories: Vec<Category>) -> Result<Self> {
        if categories.len() > LEXICON_DIMS {
            return Err(Error::InvalidInput(format!(
                "lexicon has {} categories, at most {LEXICON_DIMS} allowed",
                categories.len()
            )));
        }
        let mut seen = HashSet::new();
        for c in &categories {
            if !seen.insert(c.name.clone()) {
                return Err(Error::InvalidInput(format!("duplicate lexicon category {}", c.name)));
            }
        }
        let mut pad = 0;
        while categories.len() < LEXICON_DIMS {
            categories.push(Category::new(format!("_pad{pad}"), &[]));
            pad += 1;
        }
        Ok(Lexicon { categories })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LexiconFile = serde_json::from_str(text)?;
        let cats = file
            .categories
            .iter()
            .map(|c| {
                let pats: Vec<&str> = c.patterns.iter().map(String::as_str).collect();
                Category::new(c.name.clone(), &pats)
            })
            .collect();
        Lexicon::new(cats)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Lexicon::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn builtin() -> Self {
        Lexicon::from_json(crate::fixtures::LEXICON_JSON).expect("shipped lexicon parses")
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.categories.iter().position(|c| c.name == name)
    }

    /// Per-category match flags for one lowercased word.
    pub fn word_hits(&self, word: &str) -> [bool; LEXICON_DIMS] {
        let mut hits = [false; LEXICON_DIMS];
        for (h, c) in hits.iter_mut().zip(&self.categories) {
            *h = c.matches(word);
        }
        hits
    }

    /// Raw per-category match counts over the word tokens.
    pub fn counts(&self, tokens: &TokenList) -> [u64; LEXICON_DIMS] {
        let mut counts = [0u64; LEXICON_DIMS];
        for w in tokens.words() {
            for (n, hit) in counts.iter_mut().zip(self.word_hits(w)) {
                *n += u64::from(hit);
            }
        }
        counts
    }
}

/// Percentage of word tokens matching each category; zeros without word tokens.
pub fn lexicon_score(tokens: &TokenList, lex: &Lexicon) -> Vec<f64> {
    let total = tokens.word_count();
    if total == 0 {
        return vec![0.0; LEXICON_DIMS];
    }
    lex.counts(tokens)
        .iter()
        .map(|&n| 100.0 * n as f64 / total as f64)
        .collect()
}
