use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenClass {
    Word,
    Mention,
    Hashtag,
    Url,
    Emoticon,
    Punct,
    Number,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Text exactly as it appeared in the input.
    pub surface: String,
    /// Lowercased view used for matching and counting.
    pub norm: String,
    pub class: TokenClass,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenList {
    pub tokens: Vec<Token>,
}

impl TokenList {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }

    pub fn count(&self, class: TokenClass) -> usize {
        self.tokens.iter().filter(|t| t.class == class).count()
    }

    /// Lowercased word tokens, in order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens
            .iter()
            .filter(|t| t.class == TokenClass::Word)
            .map(|t| t.norm.as_str())
    }

    pub fn word_count(&self) -> usize {
        self.count(TokenClass::Word)
    }
}

/// Emoticons recognized as single tokens, longest first.
pub const EMOTICONS: &[&str] = &[
    ":-)", ":-(", ":-D", ":-P", ":-p", ";-)", ":'(", "^_^", "-_-", "o_O", "O_o", ":)", ":(", ":D",
    ":P", ":p", ";)", ":/", ":|", ":o", ":O", "=)", "=(", "<3", "xD", "XD",
];

/// Splits tweet text into classed tokens.
///
/// Every non-whitespace character of the input ends up in exactly one token,
/// so joining the surfaces reproduces the input with whitespace removed.
pub fn tokenize(text: &str) -> TokenList {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let prev_is_alnum = i > 0 && chars[i - 1].is_alphanumeric();
        let (end, class) = if let Some(end) = match_url(&chars, i, prev_is_alnum) {
            (end, TokenClass::Url)
        } else if let Some(end) = match_emoticon(&chars, i, prev_is_alnum) {
            (end, TokenClass::Emoticon)
        } else if c == '@' && chars.get(i + 1).is_some_and(|n| is_handle_char(*n)) {
            (scan(&chars, i + 1, is_handle_char), TokenClass::Mention)
        } else if c == '#' && chars.get(i + 1).is_some_and(|n| is_tag_char(*n)) {
            (scan(&chars, i + 1, is_tag_char), TokenClass::Hashtag)
        } else if c.is_ascii_digit() {
            scan_number(&chars, i)
        } else if c.is_alphabetic() {
            (scan_word(&chars, i), TokenClass::Word)
        } else {
            // runs of one repeated symbol ("!!!", "...") stay together
            (scan(&chars, i + 1, |n| n == c), TokenClass::Punct)
        };
        let surface: String = chars[i..end].iter().collect();
        let norm = surface.to_lowercase();
        tokens.push(Token { surface, norm, class });
        i = end;
    }
    TokenList { tokens }
}

fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_tag_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn scan(chars: &[char], mut i: usize, pred: impl Fn(char) -> bool) -> usize {
    while i < chars.len() && pred(chars[i]) {
        i += 1;
    }
    i
}

fn scan_word(chars: &[char], start: usize) -> usize {
    let mut i = start;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() {
            i += 1;
        } else if matches!(c, '\'' | '\u{2019}' | '-')
            && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())
        {
            i += 2;
        } else {
            break;
        }
    }
    i
}

fn scan_number(chars: &[char], start: usize) -> (usize, TokenClass) {
    let mut i = scan(chars, start, |c| c.is_ascii_digit());
    while i + 1 < chars.len() && matches!(chars[i], '.' | ',' | ':') && chars[i + 1].is_ascii_digit() {
        i = scan(chars, i + 1, |c| c.is_ascii_digit());
    }
    if chars.get(i).is_some_and(|c| c.is_alphabetic()) {
        // "2nd", "3pm"
        return (scan_word(chars, i), TokenClass::Word);
    }
    (i, TokenClass::Number)
}

fn match_url(chars: &[char], i: usize, prev_is_alnum: bool) -> Option<usize> {
    if prev_is_alnum {
        return None;
    }
    let end = scan(chars, i, |c| !c.is_whitespace());
    let chunk: String = chars[i..end].iter().collect::<String>().to_ascii_lowercase();
    let is_url = chunk.starts_with("t.co/") || chunk.starts_with("www.") || has_scheme(&chunk);
    if !is_url {
        return None;
    }
    let mut e = end;
    while e > i + 1 && matches!(chars[e - 1], '.' | ',' | '!' | '?' | ';' | ':' | '"' | '\'' | ')') {
        e -= 1;
    }
    Some(e)
}

fn has_scheme(chunk: &str) -> bool {
    let Some(pos) = chunk.find("://") else {
        return false;
    };
    let scheme = &chunk[..pos];
    pos + 3 < chunk.len()
        && scheme.starts_with(|c: char| c.is_ascii_alphabetic())
        && scheme
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '.' | '-'))
}

fn match_emoticon(chars: &[char], i: usize, prev_is_alnum: bool) -> Option<usize> {
    for emo in EMOTICONS {
        let ec: Vec<char> = emo.chars().collect();
        if i + ec.len() > chars.len() || chars[i..i + ec.len()] != ec[..] {
            continue;
        }
        let first_alnum = ec[0].is_alphanumeric();
        let last_alnum = ec[ec.len() - 1].is_alphanumeric();
        if first_alnum && prev_is_alnum {
            continue;
        }
        if last_alnum && chars.get(i + ec.len()).is_some_and(|c| c.is_alphanumeric()) {
            continue;
        }
        return Some(i + ec.len());
    }
    None
}
