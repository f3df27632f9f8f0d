//! Open toy resources shipped with the crate.

pub const LEXICON_JSON: &str = include_str!("../fixtures/lexicon.json");
pub const VALENCE_JSON: &str = include_str!("../fixtures/valence.json");
pub const WORDLIST_TXT: &str = include_str!("../fixtures/wordlist.txt");
pub const WHITELIST_TXT: &str = include_str!("../fixtures/whitelist.txt");
pub const TRAIT_TABLE_JSON: &str = include_str!("../fixtures/trait_table.json");
