//! Feature extraction: sparse TF-IDF text vectors, the 112-slot dense
//! post-time block and the 93-slot response block.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::ops::Range;
use std::str::FromStr;

use chrono::{Datelike, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::ingest::{Corpus, Timestamp, TweetRecord, UserProfile};
use crate::textkit::{
    lexicon_score, sentiment_score, tag_counts, tokenize, validate_tags, FallbackTagger, Lexicon, PosTag,
    PretaggedTags, TokenClass, TokenList, ValenceTable, Wordlist, LEXICON_DIMS, POS_DIMS,
};

pub const DENSE_DIMS: usize = 112;
pub const RESPONSE_DIMS: usize = 93;

pub const SLOT_SENTIMENT: usize = 64;
pub const SLOT_HOUR: usize = 90;
pub const SLOT_WEEKDAY: usize = 91;
pub const SLOT_TIMEZONE: usize = 92;
pub const SLOT_IS_REPLY: usize = 93;
pub const SLOT_IS_QUOTE: usize = 94;
pub const SLOT_URLS: usize = 95;
pub const SLOT_MENTIONS: usize = 96;
pub const SLOT_HASHTAGS: usize = 97;
pub const SLOT_HAS_GEO: usize = 98;
pub const SLOT_ACCOUNT_AGE: usize = 99;
pub const SLOT_FOLLOWEES: usize = 107;
pub const SLOT_FOLLOWERS: usize = 108;
pub const SLOT_DERIVED: usize = 111;

const POS_START: usize = 65;
const RESPONSE_LEX_START: usize = 3;
const RESPONSE_POS_START: usize = RESPONSE_LEX_START + LEXICON_DIMS;
const RESPONSE_SENTIMENT: usize = RESPONSE_POS_START + POS_DIMS;

/// Named blocks of the dense layout, the unit of ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Lexicon,
    Sentiment,
    Pos,
    Tweet,
    User,
    DerivedOpenText,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 6] = [
        FeatureGroup::Lexicon,
        FeatureGroup::Sentiment,
        FeatureGroup::Pos,
        FeatureGroup::Tweet,
        FeatureGroup::User,
        FeatureGroup::DerivedOpenText,
    ];

    pub fn dense_range(self) -> Range<usize> {
        match self {
            FeatureGroup::Lexicon => 0..LEXICON_DIMS,
            FeatureGroup::Sentiment => SLOT_SENTIMENT..SLOT_SENTIMENT + 1,
            FeatureGroup::Pos => POS_START..POS_START + POS_DIMS,
            FeatureGroup::Tweet => SLOT_HOUR..SLOT_ACCOUNT_AGE,
            FeatureGroup::User => SLOT_ACCOUNT_AGE..SLOT_DERIVED,
            FeatureGroup::DerivedOpenText => SLOT_DERIVED..DENSE_DIMS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Lexicon => "lexicon",
            FeatureGroup::Sentiment => "sentiment",
            FeatureGroup::Pos => "pos",
            FeatureGroup::Tweet => "tweet",
            FeatureGroup::User => "user",
            FeatureGroup::DerivedOpenText => "derived_open_text",
        }
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown feature group {s:?}")))
    }
}

/// Lexical resources shared by every featurization step.
#[derive(Debug, Clone)]
pub struct TextResources {
    pub lexicon: Lexicon,
    pub valence: ValenceTable,
    pub wordlist: Wordlist,
    /// Externally produced tags; tweets missing here fall back to the rule tagger.
    pub pretagged: Option<PretaggedTags>,
}

impl TextResources {
    pub fn builtin() -> Self {
        TextResources {
            lexicon: Lexicon::builtin(),
            valence: ValenceTable::builtin(),
            wordlist: Wordlist::builtin(),
            pretagged: None,
        }
    }

    pub fn tags_for(&self, tweet_id: u64, tokens: &TokenList) -> Result<Vec<PosTag>> {
        match self.pretagged.as_ref().and_then(|p| p.get(tweet_id)) {
            Some(raw) => validate_tags(tokens, raw),
            None => Ok(FallbackTagger.tag_tokens(tokens)),
        }
    }

    /// Tokenizes and measures one text.
    pub fn analyze(&self, tweet_id: u64, text: &str) -> Result<TextView> {
        let tokens = tokenize(text);
        let tags = self.tags_for(tweet_id, &tokens)?;
        Ok(TextView {
            lexicon: lexicon_score(&tokens, &self.lexicon),
            sentiment: sentiment_score(&tokens, &self.valence),
            pos: tag_counts(&tags),
            tokens,
            tags,
        })
    }
}

/// Per-text measurements reused by featurization and analytics.
#[derive(Debug, Clone, PartialEq)]
pub struct TextView {
    pub tokens: TokenList,
    pub tags: Vec<PosTag>,
    pub lexicon: Vec<f64>,
    pub sentiment: f64,
    pub pos: [u32; POS_DIMS],
}

/// Sparse vector as `(index, weight)` pairs with strictly increasing indices.
pub type SparseVec = Vec<(u32, f64)>;

fn is_vocab_token(class: TokenClass) -> bool {
    !matches!(class, TokenClass::Mention | TokenClass::Url)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabData", into = "VocabData")]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<u64>,
    n_docs: u64,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabData {
    terms: Vec<String>,
    df: Vec<u64>,
    n_docs: u64,
}

impl From<VocabData> for Vocabulary {
    fn from(d: VocabData) -> Self {
        let index = d.terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocabulary { terms: d.terms, df: d.df, n_docs: d.n_docs, index }
    }
}

impl From<Vocabulary> for VocabData {
    fn from(v: Vocabulary) -> Self {
        VocabData { terms: v.terms, df: v.df, n_docs: v.n_docs }
    }
}

impl Vocabulary {
    /// Builds a vocabulary from token lists, one per document.
    pub fn from_documents<'a>(docs: impl IntoIterator<Item = &'a TokenList>) -> Result<Self> {
        let mut df: BTreeMap<String, u64> = BTreeMap::new();
        let mut n_docs = 0u64;
        for doc in docs {
            n_docs += 1;
            let distinct: BTreeSet<&str> =
                doc.iter().filter(|t| is_vocab_token(t.class)).map(|t| t.norm.as_str()).collect();
            for term in distinct {
                *df.entry(term.to_string()).or_default() += 1;
            }
        }
        if n_docs == 0 {
            return Err(Error::InvalidInput("cannot build a vocabulary from an empty corpus".into()));
        }
        let (terms, df): (Vec<String>, Vec<u64>) = df.into_iter().unzip();
        Ok(VocabData { terms, df, n_docs }.into())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn df(&self, term: &str) -> Option<u64> {
        self.index_of(term).map(|i| self.df[i as usize])
    }

    pub fn term(&self, index: u32) -> &str {
        &self.terms[index as usize]
    }

    pub fn idf(&self, index: u32) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.df[index as usize] as f64)).ln() + 1.0
    }
}

pub fn build_vocab(corpus: &Corpus) -> Result<Vocabulary> {
    let docs: Vec<TokenList> = corpus.tweets().iter().map(|t| tokenize(&t.tweet.text)).collect();
    Vocabulary::from_documents(&docs)
}

/// Raw in-vocabulary term counts, sorted by index.
pub fn term_frequencies(tokens: &TokenList, vocab: &Vocabulary) -> SparseVec {
    let mut tf: BTreeMap<u32, f64> = BTreeMap::new();
    for t in tokens.iter().filter(|t| is_vocab_token(t.class)) {
        if let Some(i) = vocab.index_of(&t.norm) {
            *tf.entry(i).or_default() += 1.0;
        }
    }
    tf.into_iter().collect()
}

/// Smoothed TF-IDF weights, L2-normalized; out-of-vocabulary terms are dropped.
pub fn open_text_vector(tokens: &TokenList, vocab: &Vocabulary) -> SparseVec {
    let mut v: SparseVec = term_frequencies(tokens, vocab)
        .into_iter()
        .map(|(i, tf)| (i, tf * vocab.idf(i)))
        .collect();
    let norm = v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in &mut v {
            *w /= norm;
        }
    }
    v
}

fn days_between(later: Timestamp, earlier: Timestamp) -> f64 {
    (later - earlier).num_seconds() as f64 / 86_400.0
}

/// Dense post-time block with slot 111 left at 0.0 for the stage-1 output.
///
/// `post_end` is the end of the posting window and anchors account age.
pub fn dense_features(
    tweet: &TweetRecord,
    profile: Option<&UserProfile>,
    res: &TextResources,
    post_end: Timestamp,
) -> Result<Vec<f64>> {
    let view = res.analyze(tweet.id(), &tweet.tweet.text)?;
    dense_from_view(tweet, &view, profile, post_end)
}

pub fn dense_from_view(
    tweet: &TweetRecord,
    view: &TextView,
    profile: Option<&UserProfile>,
    post_end: Timestamp,
) -> Result<Vec<f64>> {
    let p = profile.ok_or_else(|| {
        Error::InvalidInput(format!("tweet {} has no author profile", tweet.id()))
    })?;
    let t = &tweet.tweet;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let mut v = Vec::with_capacity(DENSE_DIMS);
    v.extend_from_slice(&view.lexicon);
    v.push(view.sentiment);
    v.extend(view.pos.iter().map(|&c| c as f64));
    v.extend([
        t.created_at.hour() as f64,
        t.created_at.weekday().num_days_from_monday() as f64,
        p.timezone_offset_min.unwrap_or(0) as f64,
        flag(t.in_reply_to_id.is_some()),
        flag(t.quoted_id.is_some()),
        t.urls.len() as f64,
        t.mentions.len() as f64,
        t.hashtags.len() as f64,
        flag(t.has_geo),
        days_between(post_end, p.account_created_at),
        flag(p.profile_customized),
        flag(p.custom_image),
        p.bio_length as f64,
        flag(p.geo_enabled),
        flag(p.has_location),
        flag(p.has_profile_url),
        p.favourites_count as f64,
        p.followees_count as f64,
        p.followers_count as f64,
        p.listed_count as f64,
        p.statuses_count as f64,
        0.0,
    ]);
    debug_assert_eq!(v.len(), DENSE_DIMS);
    Ok(v)
}

/// Counts and summed reply measurements over the tweets responding to `tweet`.
pub fn response_features(tweet: &TweetRecord, responses: &[&TweetRecord], res: &TextResources) -> Result<Vec<f64>> {
    let mut v = vec![0.0; RESPONSE_DIMS];
    let target = tweet.id();
    for r in responses {
        let t = &r.tweet;
        if t.retweet_of_id == Some(target) {
            v[0] += 1.0;
        }
        if t.quoted_id == Some(target) {
            v[1] += 1.0;
        }
        if t.in_reply_to_id == Some(target) {
            v[2] += 1.0;
            add_reply(&mut v, &res.analyze(r.id(), &t.text)?);
        }
    }
    Ok(v)
}

fn add_reply(v: &mut [f64], view: &TextView) {
    for (slot, x) in v[RESPONSE_LEX_START..].iter_mut().zip(&view.lexicon) {
        *slot += x;
    }
    for (slot, &c) in v[RESPONSE_POS_START..].iter_mut().zip(&view.pos) {
        *slot += c as f64;
    }
    v[RESPONSE_SENTIMENT] += view.sentiment;
}

/// Response block for a corpus tweet.
///
/// Counts come from the tweet's recorded links, which survive cleanup even
/// when the responding tweet itself was filtered out; reply text aggregates
/// cover the replies still present in `corpus`.
pub fn response_features_in(tweet: &TweetRecord, corpus: &Corpus, res: &TextResources) -> Result<Vec<f64>> {
    let replies: Vec<&TweetRecord> = tweet.reply_ids.iter().filter_map(|&id| corpus.get(id)).collect();
    let mut v = response_features(tweet, &replies, res)?;
    v[0] = tweet.retweet_ids.len() as f64;
    v[1] = tweet.quote_ids.len() as f64;
    v[2] = tweet.reply_ids.len() as f64;
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: u64,
    pub deleted: bool,
    pub sparse: SparseVec,
    pub dense: Vec<f64>,
    pub response: Option<Vec<f64>>,
}

/// Featurized corpus, serialized as an `RSF1` little-endian file.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub vocab_size: u32,
    pub rows: Vec<FeatureRow>,
}

const RSF_MAGIC: &[u8; 4] = b"RSF1";
const RSF_VERSION: u32 = 1;

impl FeatureMatrix {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let with_response = self.rows.first().is_some_and(|r| r.response.is_some());
        if self.rows.iter().any(|r| r.response.is_some() != with_response) {
            return Err(Error::InvalidInput("rows disagree on response features".into()));
        }
        w.write_all(RSF_MAGIC)?;
        w.write_all(&RSF_VERSION.to_le_bytes())?;
        w.write_all(&(self.rows.len() as u64).to_le_bytes())?;
        w.write_all(&(DENSE_DIMS as u32).to_le_bytes())?;
        let rdims = if with_response { RESPONSE_DIMS as u32 } else { 0 };
        w.write_all(&rdims.to_le_bytes())?;
        w.write_all(&self.vocab_size.to_le_bytes())?;
        for row in &self.rows {
            if row.dense.len() != DENSE_DIMS {
                return Err(Error::InvalidInput(format!("row {} has {} dense slots", row.id, row.dense.len())));
            }
            w.write_all(&row.id.to_le_bytes())?;
            w.write_all(&[row.deleted as u8])?;
            for x in row.dense.iter().chain(row.response.iter().flatten()) {
                w.write_all(&x.to_le_bytes())?;
            }
            w.write_all(&(row.sparse.len() as u32).to_le_bytes())?;
            for (i, x) in &row.sparse {
                w.write_all(&i.to_le_bytes())?;
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != RSF_MAGIC {
            return Err(Error::Format("not an RSF1 feature file".into()));
        }
        let version = read_u32(&mut r)?;
        if version != RSF_VERSION {
            return Err(Error::Format(format!("unsupported feature file version {version}")));
        }
        let n = read_u64(&mut r)?;
        let ddims = read_u32(&mut r)? as usize;
        let rdims = read_u32(&mut r)? as usize;
        let vocab_size = read_u32(&mut r)?;
        if ddims != DENSE_DIMS || (rdims != 0 && rdims != RESPONSE_DIMS) {
            return Err(Error::Format(format!("unexpected feature dimensions {ddims}/{rdims}")));
        }
        let mut rows = Vec::new();
        for _ in 0..n {
            let id = read_u64(&mut r)?;
            let mut flag = [0u8; 1];
            r.read_exact(&mut flag)?;
            let dense = (0..ddims).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
            let response = if rdims > 0 {
                Some((0..rdims).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?)
            } else {
                None
            };
            let nnz = read_u32(&mut r)?;
            let mut sparse = Vec::with_capacity(nnz as usize);
            for _ in 0..nnz {
                let i = read_u32(&mut r)?;
                if i >= vocab_size {
                    return Err(Error::Format(format!("sparse index {i} out of range")));
                }
                sparse.push((i, read_f64(&mut r)?));
            }
            rows.push(FeatureRow { id, deleted: flag[0] == 1, sparse, dense, response });
        }
        Ok(FeatureMatrix { vocab_size, rows })
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Featurizes every tweet of a cleaned corpus against a vocabulary built from it.
pub fn featurize_corpus(corpus: &Corpus, res: &TextResources, with_response: bool, exec: Exec) -> Result<FeatureMatrix> {
    let vocab = build_vocab(corpus)?;
    let profiles = corpus.profiles();
    let post_end = corpus.window.post_end;
    let tweets = corpus.tweets();
    let rows = exec.try_map_range(tweets.len(), |i| -> Result<FeatureRow> {
        let t = &tweets[i];
        let view = res.analyze(t.id(), &t.tweet.text)?;
        let profile = t.tweet.user.as_ref().or_else(|| profiles.get(&t.user_id()).copied());
        Ok(FeatureRow {
            id: t.id(),
            deleted: t.deleted,
            sparse: open_text_vector(&view.tokens, &vocab),
            dense: dense_from_view(t, &view, profile, post_end)?,
            response: if with_response { Some(response_features_in(t, corpus, res)?) } else { None },
        })
    })?;
    Ok(FeatureMatrix { vocab_size: vocab.len() as u32, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::tests::{profile, ts, tweet};
    use proptest::prelude::*;

    fn record(id: u64, text: &str) -> TweetRecord {
        let mut t = tweet(id, 1, "2015-08-05T23:10:00Z", text);
        t.user = Some(profile(1));
        TweetRecord::unlabeled(t)
    }

    #[test]
    fn vocabulary_counts_documents() {
        let docs = [tokenize("a b"), tokenize("b c")];
        let v = Vocabulary::from_documents(&docs).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.df("b"), Some(2));
        assert_eq!(v.index_of("a"), Some(0));
        assert_eq!(v.index_of("c"), Some(2));
        let v = Vocabulary::from_documents(&[tokenize("@x a")]).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v.index_of("@x").is_none());
        let v = Vocabulary::from_documents(&[tokenize("see http://t.co/abc now")]).unwrap();
        assert_eq!(v.len(), 2);
        assert!(Vocabulary::from_documents(&[]).is_err());
    }

    #[test]
    fn tfidf_examples() {
        let v = Vocabulary::from_documents(&[tokenize("a a b")]).unwrap();
        let x = open_text_vector(&tokenize("a a b"), &v);
        assert_eq!(x.len(), 2);
        assert!((x[0].1 / x[1].1 - 2.0).abs() < 1e-12);
        assert!(open_text_vector(&tokenize("zzz qqq"), &v).is_empty());
        let v = Vocabulary::from_documents(&[tokenize("a b"), tokenize("b c"), tokenize("c")]).unwrap();
        let x = open_text_vector(&tokenize("a b"), &v);
        // idf(a) = ln(4/2)+1, idf(b) = ln(4/3)+1
        let (ia, ib) = (2f64.ln() + 1.0, (4.0f64 / 3.0).ln() + 1.0);
        let n = (ia * ia + ib * ib).sqrt();
        assert!((x[0].1 - ia / n).abs() < 1e-12 && (x[1].1 - ib / n).abs() < 1e-12);
    }

    #[test]
    fn dense_calendar_and_entity_slots() {
        let res = TextResources::builtin();
        let rec = record(5, "see http://a.co http://b.co @amy #x #y #z");
        let v = dense_features(&rec, rec.tweet.user.as_ref(), &res, ts("2015-08-30T23:59:59Z")).unwrap();
        assert_eq!(v.len(), DENSE_DIMS);
        assert_eq!((v[SLOT_HOUR], v[SLOT_WEEKDAY]), (23.0, 2.0));
        assert_eq!((v[SLOT_URLS], v[SLOT_MENTIONS], v[SLOT_HASHTAGS]), (2.0, 1.0, 3.0));
        assert_eq!(v[SLOT_DERIVED], 0.0);
        assert!(v.iter().all(|x| x.is_finite()));
        assert!(dense_features(&rec, None, &res, ts("2015-08-30T23:59:59Z")).is_err());
    }

    #[test]
    fn response_examples() {
        let res = TextResources::builtin();
        let target = record(10, "hello");
        assert_eq!(response_features(&target, &[], &res).unwrap(), vec![0.0; RESPONSE_DIMS]);
        let mut rt = record(11, "hello");
        rt.tweet.retweet_of_id = Some(10);
        let mut q = record(12, "look");
        q.tweet.quoted_id = Some(10);
        let v = response_features(&target, &[&rt, &q], &res).unwrap();
        assert_eq!(&v[..3], &[1.0, 1.0, 0.0]);
        assert!(v[3..].iter().all(|&x| x == 0.0));
        let mut r1 = record(13, "good");
        r1.tweet.in_reply_to_id = Some(10);
        let mut r2 = record(14, "bad");
        r2.tweet.in_reply_to_id = Some(10);
        let s1 = res.analyze(13, "good").unwrap().sentiment;
        let s2 = res.analyze(14, "bad").unwrap().sentiment;
        let v = response_features(&target, &[&r1, &r2], &res).unwrap();
        assert_eq!(v[2], 2.0);
        assert!((v[RESPONSE_SENTIMENT] - (s1 + s2)).abs() < 1e-12);
    }

    #[test]
    fn feature_groups_tile_the_layout() {
        let mut covered = vec![0; DENSE_DIMS];
        for g in FeatureGroup::ALL {
            for i in g.dense_range() {
                covered[i] += 1;
            }
            assert_eq!(g.name().parse::<FeatureGroup>().unwrap(), g);
        }
        assert!(covered.iter().all(|&c| c == 1));
        assert_eq!(FeatureGroup::Tweet.dense_range().len(), 9);
        assert_eq!(FeatureGroup::User.dense_range().len(), 12);
        assert!("nope".parse::<FeatureGroup>().is_err());
    }

    #[test]
    fn rsf1_roundtrip() {
        let m = FeatureMatrix {
            vocab_size: 10,
            rows: vec![FeatureRow {
                id: 7,
                deleted: true,
                sparse: vec![(1, 0.6), (9, 0.8)],
                dense: (0..DENSE_DIMS).map(|i| i as f64 * 0.5).collect(),
                response: Some(vec![1.5; RESPONSE_DIMS]),
            }],
        };
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"RSF1");
        assert_eq!(FeatureMatrix::read_from(buf.as_slice()).unwrap(), m);
        assert!(FeatureMatrix::read_from(&b"RSF2...."[..]).is_err());
    }

    proptest! {
        #[test]
        fn tfidf_unit_norm(words in proptest::collection::vec("[a-e]{1,3}", 1..12)) {
            let text = words.join(" ");
            let toks = tokenize(&text);
            let v = Vocabulary::from_documents(&[toks.clone(), tokenize("a b c")]).unwrap();
            let x = open_text_vector(&toks, &v);
            let norm: f64 = x.iter().map(|(_, w)| w * w).sum();
            prop_assert!((norm - 1.0).abs() < 1e-9);
            prop_assert!(x.windows(2).all(|w| w[0].0 < w[1].0));
        }

        #[test]
        fn response_aggregation_is_additive(a in proptest::collection::vec("(good|bad|love|the|i|not) ?", 1..5),
                                           b in proptest::collection::vec("(happy|sad|lol|we) ?", 1..5)) {
            let res = TextResources::builtin();
            let target = record(1, "x");
            let mk = |id: u64, parts: &[String]| {
                let mut r = record(id, &parts.concat());
                r.tweet.in_reply_to_id = Some(1);
                r
            };
            let (ra, rb) = (mk(2, &a), mk(3, &b));
            let fa = response_features(&target, &[&ra], &res).unwrap();
            let fb = response_features(&target, &[&rb], &res).unwrap();
            let fab = response_features(&target, &[&ra, &rb], &res).unwrap();
            for i in 0..RESPONSE_DIMS {
                prop_assert!((fab[i] - fa[i] - fb[i]).abs() < 1e-9);
            }
        }
    }
}
