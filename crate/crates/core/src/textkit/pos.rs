//! Part-of-speech tagging over the 25-tag Twitter tagset, plus the
//! tag-derived text statistics.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tokenize::{TokenClass, TokenList};
use crate::error::{Error, Result};

pub const POS_DIMS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PosTag {
    CommonNoun,
    Pronoun,
    ProperNoun,
    NominalPossessive,
    ProperPossessive,
    NominalVerbal,
    ProperVerbal,
    Verb,
    Adjective,
    Adverb,
    Interjection,
    Determiner,
    Preposition,
    Conjunction,
    Particle,
    Existential,
    ExistentialVerbal,
    Hashtag,
    Mention,
    Discourse,
    Url,
    Emoticon,
    Numeral,
    Punctuation,
    Other,
}

impl PosTag {
    pub const ALL: [PosTag; POS_DIMS] = [
        PosTag::CommonNoun,
        PosTag::Pronoun,
        PosTag::ProperNoun,
        PosTag::NominalPossessive,
        PosTag::ProperPossessive,
        PosTag::NominalVerbal,
        PosTag::ProperVerbal,
        PosTag::Verb,
        PosTag::Adjective,
        PosTag::Adverb,
        PosTag::Interjection,
        PosTag::Determiner,
        PosTag::Preposition,
        PosTag::Conjunction,
        PosTag::Particle,
        PosTag::Existential,
        PosTag::ExistentialVerbal,
        PosTag::Hashtag,
        PosTag::Mention,
        PosTag::Discourse,
        PosTag::Url,
        PosTag::Emoticon,
        PosTag::Numeral,
        PosTag::Punctuation,
        PosTag::Other,
    ];

    /// Single-character symbol used by the Twitter tagset.
    pub fn symbol(self) -> &'static str {
        use PosTag::*;
        match self {
            CommonNoun => "N",
            Pronoun => "O",
            ProperNoun => "^",
            NominalPossessive => "S",
            ProperPossessive => "Z",
            NominalVerbal => "L",
            ProperVerbal => "M",
            Verb => "V",
            Adjective => "A",
            Adverb => "R",
            Interjection => "!",
            Determiner => "D",
            Preposition => "P",
            Conjunction => "&",
            Particle => "T",
            Existential => "X",
            ExistentialVerbal => "Y",
            Hashtag => "#",
            Mention => "@",
            Discourse => "~",
            Url => "U",
            Emoticon => "E",
            Numeral => "$",
            Punctuation => ",",
            Other => "G",
        }
    }

    pub fn from_symbol(s: &str) -> Option<PosTag> {
        PosTag::ALL.into_iter().find(|t| t.symbol() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Noun, verb, adjective or adverb.
    pub fn is_content(self) -> bool {
        matches!(
            self,
            PosTag::CommonNoun | PosTag::ProperNoun | PosTag::Verb | PosTag::Adjective | PosTag::Adverb
        )
    }
}

/// Anything that can assign tagset symbols to a token list.
pub trait PosTagger: Send + Sync {
    fn tag(&self, tokens: &TokenList) -> Vec<String>;
}

/// Runs `tagger` and validates its output against the tagset and token count.
pub fn pos_tag(tokens: &TokenList, tagger: &dyn PosTagger) -> Result<Vec<PosTag>> {
    validate_tags(tokens, &tagger.tag(tokens))
}

pub fn validate_tags(tokens: &TokenList, raw: &[String]) -> Result<Vec<PosTag>> {
    if raw.len() != tokens.len() {
        return Err(Error::Contract(format!(
            "tagger produced {} tags for {} tokens",
            raw.len(),
            tokens.len()
        )));
    }
    raw.iter()
        .map(|s| PosTag::from_symbol(s).ok_or_else(|| Error::Contract(format!("unknown POS tag {s:?}"))))
        .collect()
}

pub fn tag_counts(tags: &[PosTag]) -> [u32; POS_DIMS] {
    let mut counts = [0u32; POS_DIMS];
    for t in tags {
        counts[t.index()] += 1;
    }
    counts
}

const PRONOUNS: &[&str] = &[
    "i", "me", "my", "mine", "myself", "you", "your", "yours", "u", "ur", "he", "him", "his", "she",
    "her", "hers", "it", "its", "we", "us", "our", "they", "them", "their", "this", "that", "these",
    "those", "who", "what", "which", "someone", "something", "everyone", "everything", "nothing",
];
const DETERMINERS: &[&str] = &["a", "an", "the", "some", "any", "every", "each", "no", "all", "both", "another"];
const PREPOSITIONS: &[&str] = &[
    "to", "of", "in", "on", "at", "for", "with", "from", "about", "into", "over", "under", "after",
    "before", "by", "during", "without", "through", "between", "like",
];
const CONJUNCTIONS: &[&str] = &["and", "but", "or", "nor", "yet", "&", "n"];
const INTERJECTIONS: &[&str] = &[
    "lol", "lmao", "haha", "hahaha", "omg", "wow", "oh", "ah", "ugh", "yay", "yes", "yeah", "no",
    "ok", "okay", "hey", "hi", "hello", "please", "wtf", "hmm", "um",
];
const VERBS: &[&str] = &[
    "is", "am", "are", "was", "were", "be", "been", "being", "have", "has", "had", "do", "does",
    "did", "will", "would", "can", "could", "should", "shall", "may", "might", "must", "go", "get",
    "got", "make", "made", "say", "said", "know", "think", "see", "want", "need", "love", "hate",
    "feel", "take", "come", "went", "came", "let", "tell", "give", "look", "try", "gonna", "wanna",
];
const PARTICLES: &[&str] = &["up", "out", "off", "down", "away"];
const ADJECTIVE_SUFFIXES: &[&str] = &["ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish", "y"];

/// Rule-based stand-in for a trained tagger: token classes map 1:1 to the
/// structural tags, closed-class word lists cover function words, and
/// suffix heuristics split the remaining words into noun/verb/adjective/adverb.
#[derive(Debug, Clone, Default)]
pub struct FallbackTagger;

impl FallbackTagger {
    pub fn tag_tokens(&self, tokens: &TokenList) -> Vec<PosTag> {
        tokens
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| match t.class {
                TokenClass::Mention => PosTag::Mention,
                TokenClass::Hashtag => PosTag::Hashtag,
                TokenClass::Url => PosTag::Url,
                TokenClass::Emoticon => PosTag::Emoticon,
                TokenClass::Punct => PosTag::Punctuation,
                TokenClass::Number => PosTag::Numeral,
                TokenClass::Word => {
                    let sentence_start = i == 0
                        || tokens.tokens[i - 1].class == TokenClass::Punct
                            && matches!(tokens.tokens[i - 1].surface.as_str(), "." | "!" | "?");
                    word_tag(&t.norm, &t.surface, sentence_start)
                }
            })
            .collect()
    }
}

fn word_tag(norm: &str, surface: &str, sentence_start: bool) -> PosTag {
    let has = |list: &[&str]| list.contains(&norm);
    if norm == "rt" {
        return PosTag::Discourse;
    }
    if norm == "there" {
        return PosTag::Existential;
    }
    if norm == "there's" {
        return PosTag::ExistentialVerbal;
    }
    if has(PRONOUNS) {
        return PosTag::Pronoun;
    }
    if has(DETERMINERS) && norm != "no" {
        return PosTag::Determiner;
    }
    if has(INTERJECTIONS) {
        return PosTag::Interjection;
    }
    if has(PREPOSITIONS) {
        return PosTag::Preposition;
    }
    if has(CONJUNCTIONS) {
        return PosTag::Conjunction;
    }
    if has(VERBS) {
        return PosTag::Verb;
    }
    if has(PARTICLES) {
        return PosTag::Particle;
    }
    let capitalized = surface.chars().next().is_some_and(char::is_uppercase);
    if let Some(stem) = norm.strip_suffix("'s").or_else(|| norm.strip_suffix("\u{2019}s")) {
        let _ = stem;
        return if capitalized { PosTag::ProperPossessive } else { PosTag::NominalPossessive };
    }
    if norm.contains('\'') || norm.contains('\u{2019}') {
        // i'm, you're, that'll
        return if capitalized && !sentence_start { PosTag::ProperVerbal } else { PosTag::NominalVerbal };
    }
    if capitalized && !sentence_start {
        return PosTag::ProperNoun;
    }
    if norm.chars().count() > 3 && norm.ends_with("ly") {
        return PosTag::Adverb;
    }
    if norm.chars().count() > 4 && (norm.ends_with("ing") || norm.ends_with("ed")) {
        return PosTag::Verb;
    }
    if norm.chars().count() > 4 && ADJECTIVE_SUFFIXES.iter().any(|s| norm.ends_with(s)) {
        return PosTag::Adjective;
    }
    if !norm.chars().any(char::is_alphabetic) {
        return PosTag::Other;
    }
    PosTag::CommonNoun
}

impl PosTagger for FallbackTagger {
    fn tag(&self, tokens: &TokenList) -> Vec<String> {
        self.tag_tokens(tokens).into_iter().map(|t| t.symbol().to_string()).collect()
    }
}

/// Tags supplied from a pre-tagged JSONL file (`{"id":..,"tags":[..]}`), keyed by tweet id.
#[derive(Debug, Clone, Default)]
pub struct PretaggedTags {
    by_id: HashMap<u64, Vec<String>>,
}

#[derive(Deserialize)]
struct PretaggedLine {
    id: u64,
    tags: Vec<String>,
}

impl PretaggedTags {
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut by_id = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: PretaggedLine = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
            by_id.insert(rec.id, rec.tags);
        }
        Ok(PretaggedTags { by_id })
    }

    pub fn load(path: &Path) -> Result<Self> {
        PretaggedTags::from_jsonl(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, id: u64) -> Option<&[String]> {
        self.by_id.get(&id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}

/// Lowercase dictionary word set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Wordlist {
    words: HashSet<String>,
}

impl Wordlist {
    pub fn from_text(text: &str) -> Self {
        Wordlist {
            words: text
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(Wordlist::from_text(&std::fs::read_to_string(path)?))
    }

    pub fn builtin() -> Self {
        Wordlist::from_text(crate::fixtures::WORDLIST_TXT)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextStats {
    pub lexical_density: f64,
    pub dictionary_fraction: f64,
}

/// Content-tag share and dictionary-word share, both over the word-token count.
pub fn text_stats(tokens: &TokenList, tags: &[PosTag], wordlist: &Wordlist) -> Result<TextStats> {
    if tags.len() != tokens.len() {
        return Err(Error::Contract(format!(
            "{} tags for {} tokens",
            tags.len(),
            tokens.len()
        )));
    }
    let words = tokens.word_count();
    if words == 0 {
        return Ok(TextStats { lexical_density: 0.0, dictionary_fraction: 0.0 });
    }
    let content = tags.iter().filter(|t| t.is_content()).count();
    let in_dict = tokens.words().filter(|w| wordlist.contains(w)).count();
    Ok(TextStats {
        lexical_density: content as f64 / words as f64,
        dictionary_fraction: in_dict as f64 / words as f64,
    })
}
