//! Tokenization and per-tweet linguistic measurements.

mod distance;
mod lexicon;
mod pos;
mod sentiment;
mod tokenize;

pub use distance::{cosine_of_counts, edit_distance, term_cosine, term_counts};
pub use lexicon::{lexicon_score, Category, Lexicon, LEXICON_DIMS};
pub use pos::{
    pos_tag, tag_counts, text_stats, validate_tags, FallbackTagger, PosTag, PosTagger, PretaggedTags,
    TextStats, Wordlist, POS_DIMS,
};
pub use sentiment::{is_negation, sentiment_score, valence_sum, ValenceTable, NEGATIONS, NORMALIZER_ALPHA};
pub use tokenize::{tokenize, Token, TokenClass, TokenList, EMOTICONS};
