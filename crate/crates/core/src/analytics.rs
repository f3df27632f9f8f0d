//! Deleted vs non-deleted comparisons: user partition, NTD/NUD, user
//! attribute distributions, trait tally, hourly histograms, response
//! statistics and annotation aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use chrono::Timelike;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::features::{TextResources, TextView};
use crate::ingest::{Corpus, TweetRecord};
use crate::stats::{ccdf, fisher_exact, mann_whitney_u, median, Contingency2x2, TestResult};
use crate::textkit::{text_stats, TextStats, ValenceTable};

/// Minimum deleted and non-deleted tweets for a user to enter NUD.
pub const NUD_MIN_TWEETS: usize = 10;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserPartition {
    pub deleters: BTreeSet<u64>,
    pub non_deleters: BTreeSet<u64>,
}

impl UserPartition {
    pub fn is_deleter(&self, user: u64) -> bool {
        self.deleters.contains(&user)
    }
}

/// Splits active users by whether any of their cleaned tweets was deleted.
pub fn partition_users(corpus: &Corpus) -> UserPartition {
    let mut p = UserPartition::default();
    for (user, idx) in corpus.by_user() {
        if idx.iter().any(|&i| corpus.tweets()[i].deleted) {
            p.deleters.insert(user);
        } else {
            p.non_deleters.insert(user);
        }
    }
    p
}

/// Everything an attribute may look at for one tweet.
#[derive(Debug, Clone)]
pub struct TweetFacts<'a> {
    pub record: &'a TweetRecord,
    pub view: TextView,
    pub stats: TextStats,
}

/// Measures every tweet of `corpus` once.
pub fn tweet_facts<'a>(corpus: &'a Corpus, res: &TextResources, exec: Exec) -> Result<Vec<TweetFacts<'a>>> {
    let tweets = corpus.tweets();
    exec.try_map_range(tweets.len(), |i| {
        let record = &tweets[i];
        let view = res.analyze(record.id(), &record.tweet.text)?;
        let stats = text_stats(&view.tokens, &view.tags, &res.wordlist)?;
        Ok(TweetFacts { record, view, stats })
    })
}

type BinaryFn = dyn Fn(&TweetFacts) -> bool + Send + Sync;
type ScalarFn = dyn Fn(&TweetFacts) -> f64 + Send + Sync;
type ShareFn = dyn Fn(&TweetFacts) -> (u64, u64) + Send + Sync;

/// How an attribute is read off a tweet and aggregated over a tweet set.
#[derive(Clone)]
pub enum AttributeFn {
    /// Share of tweets having the attribute; compared with Fisher's test.
    Binary(Arc<BinaryFn>),
    /// Per-tweet value; groups compared by median with Mann–Whitney U.
    Scalar(Arc<ScalarFn>),
    /// `(matching, total)` word counts pooled over the set; Fisher on the pooled counts.
    VocabularyShare(Arc<ShareFn>),
}

#[derive(Clone)]
pub struct AttributeExtractor {
    pub name: String,
    pub eval: AttributeFn,
}

impl fmt::Debug for AttributeExtractor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AttributeExtractor").field("name", &self.name).field("basis", &self.basis()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeBasis {
    TweetsContaining,
    Median,
    VocabularyShare,
}

impl AttributeExtractor {
    pub fn binary(name: impl Into<String>, f: impl Fn(&TweetFacts) -> bool + Send + Sync + 'static) -> Self {
        AttributeExtractor { name: name.into(), eval: AttributeFn::Binary(Arc::new(f)) }
    }

    pub fn scalar(name: impl Into<String>, f: impl Fn(&TweetFacts) -> f64 + Send + Sync + 'static) -> Self {
        AttributeExtractor { name: name.into(), eval: AttributeFn::Scalar(Arc::new(f)) }
    }

    pub fn share(name: impl Into<String>, f: impl Fn(&TweetFacts) -> (u64, u64) + Send + Sync + 'static) -> Self {
        AttributeExtractor { name: name.into(), eval: AttributeFn::VocabularyShare(Arc::new(f)) }
    }

    pub fn basis(&self) -> AttributeBasis {
        match self.eval {
            AttributeFn::Binary(_) => AttributeBasis::TweetsContaining,
            AttributeFn::Scalar(_) => AttributeBasis::Median,
            AttributeFn::VocabularyShare(_) => AttributeBasis::VocabularyShare,
        }
    }
}

/// Entity, sentiment, readability and per-category attributes.
pub fn standard_attributes(res: &TextResources) -> Vec<AttributeExtractor> {
    let mut attrs = vec![
        AttributeExtractor::binary("tweets_with_hashtags", |f| !f.record.tweet.hashtags.is_empty()),
        AttributeExtractor::binary("tweets_with_urls", |f| !f.record.tweet.urls.is_empty()),
        AttributeExtractor::binary("tweets_with_mentions", |f| !f.record.tweet.mentions.is_empty()),
        AttributeExtractor::binary("tweets_with_replies", |f| !f.record.reply_ids.is_empty()),
        AttributeExtractor::binary("tweets_with_positive_sentiment", |f| f.view.sentiment > 0.0),
        AttributeExtractor::binary("tweets_with_negative_sentiment", |f| f.view.sentiment < 0.0),
        AttributeExtractor::scalar("lexical_density", |f| f.stats.lexical_density),
        AttributeExtractor::scalar("dictionary_words", |f| f.stats.dictionary_fraction),
    ];
    for (i, cat) in res.lexicon.categories().iter().enumerate() {
        if cat.is_empty() {
            continue;
        }
        attrs.push(AttributeExtractor::binary(format!("tweets_with_{}", cat.name), move |f| f.view.lexicon[i] > 0.0));
        let lex = res.lexicon.clone();
        attrs.push(AttributeExtractor::share(format!("vocabulary_{}", cat.name), move |f| {
            let words: Vec<&str> = f.view.tokens.words().collect();
            let hits = words.iter().filter(|w| lex.categories()[i].matches(w)).count();
            (hits as u64, words.len() as u64)
        }));
    }
    attrs
}

/// Percent relative difference `(del − nondel) / nondel × 100`.
pub fn ntd_value(del_frac: f64, nondel_frac: f64) -> Result<f64> {
    relative_difference(del_frac, nondel_frac, "NTD")
}

/// Same identity over the fractions of users significantly higher in each direction.
pub fn nud_value(del_user_frac: f64, nondel_user_frac: f64) -> Result<f64> {
    relative_difference(del_user_frac, nondel_user_frac, "NUD")
}

fn relative_difference(a: f64, b: f64, what: &'static str) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
        return Err(Error::InvalidInput(format!("{what} inputs must be finite non-negative fractions")));
    }
    if b == 0.0 {
        return Err(Error::Undefined(what));
    }
    Ok((a - b) / b * 100.0)
}

/// Group-level value and test of one attribute over two tweet sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetComparison {
    pub deleted_value: f64,
    pub non_deleted_value: f64,
    pub test: TestResult,
}

impl SetComparison {
    /// Whether the deleted side is significantly higher (+1), lower (−1) or neither (0).
    pub fn direction(&self) -> i8 {
        if !self.test.significant || self.deleted_value == self.non_deleted_value {
            0
        } else if self.deleted_value > self.non_deleted_value {
            1
        } else {
            -1
        }
    }
}

pub fn compare_sets(attr: &AttributeExtractor, del: &[&TweetFacts], nondel: &[&TweetFacts], alpha: f64) -> Result<SetComparison> {
    if del.is_empty() || nondel.is_empty() {
        return Err(Error::InvalidInput(format!("{}: both tweet sets must be non-empty", attr.name)));
    }
    match &attr.eval {
        AttributeFn::Binary(f) => {
            let a = del.iter().filter(|t| f(t)).count() as u64;
            let c = nondel.iter().filter(|t| f(t)).count() as u64;
            let (nd, nn) = (del.len() as u64, nondel.len() as u64);
            let test = fisher_exact(Contingency2x2::new(a, nd - a, c, nn - c)?, alpha)?;
            Ok(SetComparison { deleted_value: a as f64 / nd as f64, non_deleted_value: c as f64 / nn as f64, test })
        }
        AttributeFn::Scalar(f) => {
            let xs: Vec<f64> = del.iter().map(|t| f(t)).collect();
            let ys: Vec<f64> = nondel.iter().map(|t| f(t)).collect();
            let test = mann_whitney_u(&xs, &ys, alpha)?;
            Ok(SetComparison {
                deleted_value: median(&xs).unwrap_or(0.0),
                non_deleted_value: median(&ys).unwrap_or(0.0),
                test,
            })
        }
        AttributeFn::VocabularyShare(f) => {
            let pool = |set: &[&TweetFacts]| {
                set.iter().map(|t| f(t)).fold((0u64, 0u64), |(h, n), (a, b)| (h + a, n + b))
            };
            let (a, nd) = pool(del);
            let (c, nn) = pool(nondel);
            if nd == 0 || nn == 0 {
                return Err(Error::Insufficient(format!("{}: a tweet set has no words", attr.name)));
            }
            let test = fisher_exact(Contingency2x2::new(a, nd - a, c, nn - c)?, alpha)?;
            Ok(SetComparison { deleted_value: a as f64 / nd as f64, non_deleted_value: c as f64 / nn as f64, test })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NtdResult {
    pub value: f64,
    pub comparison: SetComparison,
}

pub fn ntd(attr: &AttributeExtractor, del: &[&TweetFacts], nondel: &[&TweetFacts], alpha: f64) -> Result<NtdResult> {
    let comparison = compare_sets(attr, del, nondel, alpha)?;
    let value = ntd_value(comparison.deleted_value, comparison.non_deleted_value)?;
    Ok(NtdResult { value, comparison })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NudResult {
    pub eligible_users: usize,
    pub higher_in_deleted: Vec<u64>,
    pub higher_in_non_deleted: Vec<u64>,
    pub value: Option<f64>,
}

impl NudResult {
    pub fn del_user_frac(&self) -> f64 {
        self.higher_in_deleted.len() as f64 / self.eligible_users.max(1) as f64
    }

    pub fn non_del_user_frac(&self) -> f64 {
        self.higher_in_non_deleted.len() as f64 / self.eligible_users.max(1) as f64
    }
}

/// Per-user tests for every user with enough deleted and non-deleted tweets.
///
/// The per-user counts are always returned; `value` is `None` when the NUD
/// denominator vanishes. No eligible user at all is an error.
pub fn nud(attr: &AttributeExtractor, facts: &[TweetFacts], alpha: f64) -> Result<NudResult> {
    let mut by_user: BTreeMap<u64, (Vec<&TweetFacts>, Vec<&TweetFacts>)> = BTreeMap::new();
    for f in facts {
        let e = by_user.entry(f.record.user_id()).or_default();
        if f.record.deleted {
            e.0.push(f);
        } else {
            e.1.push(f);
        }
    }
    let mut out = NudResult { eligible_users: 0, higher_in_deleted: vec![], higher_in_non_deleted: vec![], value: None };
    for (user, (del, nondel)) in by_user {
        if del.len() < NUD_MIN_TWEETS || nondel.len() < NUD_MIN_TWEETS {
            continue;
        }
        out.eligible_users += 1;
        let cmp = match compare_sets(attr, &del, &nondel, alpha) {
            Ok(c) => c,
            Err(Error::Insufficient(_)) => continue,
            Err(e) => return Err(e),
        };
        match cmp.direction() {
            1 => out.higher_in_deleted.push(user),
            -1 => out.higher_in_non_deleted.push(user),
            _ => {}
        }
    }
    if out.eligible_users == 0 {
        return Err(Error::Insufficient(format!(
            "{}: no user has {NUD_MIN_TWEETS} deleted and {NUD_MIN_TWEETS} non-deleted tweets",
            attr.name
        )));
    }
    out.value = nud_value(out.del_user_frac(), out.non_del_user_frac()).ok();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeRow {
    pub attribute: String,
    pub basis: AttributeBasis,
    pub deleted_value: Option<f64>,
    pub non_deleted_value: Option<f64>,
    pub ntd: Option<f64>,
    pub test: Option<TestResult>,
    pub nud: Option<f64>,
    pub eligible_users: usize,
    pub users_higher_in_deleted: usize,
    pub users_higher_in_non_deleted: usize,
    /// Why a value above is missing, if it is.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparisonReport {
    pub alpha: f64,
    pub deleted_tweets: usize,
    pub non_deleted_tweets: usize,
    pub rows: Vec<AttributeRow>,
}

/// NTD for every attribute; NUD too when `with_nud` is set.
pub fn compare_groups(
    facts: &[TweetFacts],
    attrs: &[AttributeExtractor],
    alpha: f64,
    with_nud: bool,
    exec: Exec,
) -> Result<GroupComparisonReport> {
    let del: Vec<&TweetFacts> = facts.iter().filter(|f| f.record.deleted).collect();
    let nondel: Vec<&TweetFacts> = facts.iter().filter(|f| !f.record.deleted).collect();
    if del.is_empty() || nondel.is_empty() {
        return Err(Error::Insufficient("need both deleted and non-deleted tweets".into()));
    }
    let rows = exec.try_map_range(attrs.len(), |i| -> Result<AttributeRow> {
        let attr = &attrs[i];
        let mut notes = Vec::new();
        let mut row = AttributeRow {
            attribute: attr.name.clone(),
            basis: attr.basis(),
            deleted_value: None,
            non_deleted_value: None,
            ntd: None,
            test: None,
            nud: None,
            eligible_users: 0,
            users_higher_in_deleted: 0,
            users_higher_in_non_deleted: 0,
            note: None,
        };
        match compare_sets(attr, &del, &nondel, alpha) {
            Ok(c) => {
                row.deleted_value = Some(c.deleted_value);
                row.non_deleted_value = Some(c.non_deleted_value);
                row.test = Some(c.test);
                match ntd_value(c.deleted_value, c.non_deleted_value) {
                    Ok(v) => row.ntd = Some(v),
                    Err(e) => notes.push(e.to_string()),
                }
            }
            Err(e @ Error::Insufficient(_)) => notes.push(e.to_string()),
            Err(e) => return Err(e),
        }
        if with_nud {
            match nud(attr, facts, alpha) {
                Ok(n) => {
                    row.eligible_users = n.eligible_users;
                    row.users_higher_in_deleted = n.higher_in_deleted.len();
                    row.users_higher_in_non_deleted = n.higher_in_non_deleted.len();
                    row.nud = n.value;
                    if n.value.is_none() {
                        notes.push(Error::Undefined("NUD").to_string());
                    }
                }
                Err(e @ Error::Insufficient(_)) => notes.push(e.to_string()),
                Err(e) => return Err(e),
            }
        }
        if !notes.is_empty() {
            row.note = Some(notes.join("; "));
        }
        Ok(row)
    })?;
    Ok(GroupComparisonReport { alpha, deleted_tweets: del.len(), non_deleted_tweets: nondel.len(), rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserComparison {
    pub metric: String,
    pub median_deleters: f64,
    pub median_non_deleters: f64,
    pub test: TestResult,
    pub ccdf_deleters: Vec<(f64, f64)>,
    pub ccdf_non_deleters: Vec<(f64, f64)>,
}

impl UserComparison {
    /// Medians as `"<deleters> vs <non-deleters>"`.
    pub fn medians_label(&self) -> String {
        format!("{} vs {}", format_number(self.median_deleters), format_number(self.median_non_deleters))
    }
}

fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.2}")
    }
}

pub fn user_group_compare(metric: &str, deleters: &[f64], non_deleters: &[f64], alpha: f64) -> Result<UserComparison> {
    if deleters.is_empty() || non_deleters.is_empty() {
        return Err(Error::InvalidInput(format!("{metric}: both user groups must be non-empty")));
    }
    Ok(UserComparison {
        metric: metric.to_string(),
        median_deleters: median(deleters).unwrap_or(0.0),
        median_non_deleters: median(non_deleters).unwrap_or(0.0),
        test: mann_whitney_u(deleters, non_deleters, alpha)?,
        ccdf_deleters: ccdf(deleters),
        ccdf_non_deleters: ccdf(non_deleters),
    })
}

pub const USER_METRICS: [&str; 4] = ["followers", "followees", "listed", "tweet_rate"];

/// Followers, followees, listed count and window tweet rate, per group.
pub fn user_metric_comparisons(corpus: &Corpus, partition: &UserPartition, alpha: f64) -> Result<Vec<UserComparison>> {
    let profiles = corpus.profiles();
    let days = corpus.window.post_days();
    let mut values: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (user, idx) in corpus.by_user() {
        let Some(p) = profiles.get(&user) else {
            continue;
        };
        let metrics = [
            p.followers_count as f64,
            p.followees_count as f64,
            p.listed_count as f64,
            idx.len() as f64 / days,
        ];
        for (name, v) in USER_METRICS.iter().zip(metrics) {
            let e = values.entry(name).or_default();
            if partition.is_deleter(user) {
                e.0.push(v);
            } else {
                e.1.push(v);
            }
        }
    }
    USER_METRICS
        .iter()
        .map(|m| {
            let (d, n) = values.get(m).cloned().unwrap_or_default();
            user_group_compare(m, &d, &n, alpha)
        })
        .collect()
}

/// Big-Five trait symbols: `O C E A N`, prefixed with `~` for the lower pole.
pub const TRAIT_SYMBOLS: [&str; 10] = ["O", "C", "E", "A", "N", "~O", "~C", "~E", "~A", "~N"];

fn flip_trait(sym: &str) -> String {
    match sym.strip_prefix('~') {
        Some(base) => base.to_string(),
        None => format!("~{sym}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitAttribute {
    pub name: String,
    /// `liwc` for lexicon categories, `tweet_share` for shares of tweets.
    pub source: String,
    pub key: String,
    pub non_deleters: f64,
    pub deleters: f64,
    pub traits_if_higher: Vec<String>,
}

/// Attribute → traits indicated when deleters score higher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitMap {
    pub attributes: Vec<TraitAttribute>,
}

impl TraitMap {
    pub fn from_json(text: &str) -> Result<Self> {
        let map: TraitMap = serde_json::from_str(text)?;
        for a in &map.attributes {
            if let Some(bad) = a.traits_if_higher.iter().find(|t| !TRAIT_SYMBOLS.contains(&t.as_str())) {
                return Err(Error::Config(format!("{}: unknown trait symbol {bad:?}", a.name)));
            }
        }
        Ok(map)
    }

    pub fn builtin() -> Self {
        TraitMap::from_json(crate::fixtures::TRAIT_TABLE_JSON).expect("shipped trait table is valid")
    }

    pub fn observations(&self) -> Vec<TraitObservation> {
        self.attributes
            .iter()
            .map(|a| TraitObservation { name: a.name.clone(), deleters: a.deleters, non_deleters: a.non_deleters })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitObservation {
    pub name: String,
    pub deleters: f64,
    pub non_deleters: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraitTally {
    pub counts: BTreeMap<String, u32>,
    pub unmapped: Vec<String>,
}

impl TraitTally {
    pub fn count(&self, symbol: &str) -> u32 {
        self.counts.get(symbol).copied().unwrap_or(0)
    }
}

/// Adds each attribute's traits when deleters are higher, and the opposite
/// poles when they are lower.
pub fn trait_tally(observations: &[TraitObservation], map: &TraitMap) -> TraitTally {
    let mut tally = TraitTally::default();
    for obs in observations {
        let Some(entry) = map.attributes.iter().find(|a| a.name == obs.name) else {
            tally.unmapped.push(obs.name.clone());
            continue;
        };
        if obs.deleters == obs.non_deleters {
            continue;
        }
        for sym in &entry.traits_if_higher {
            let s = if obs.deleters > obs.non_deleters { sym.clone() } else { flip_trait(sym) };
            *tally.counts.entry(s).or_default() += 1;
        }
    }
    tally
}

/// Group values for each mapped attribute measured on `corpus`: mean
/// category percentage for lexicon rows, percent of tweets for share rows.
pub fn trait_observations(facts: &[TweetFacts], partition: &UserPartition, map: &TraitMap, res: &TextResources) -> Vec<TraitObservation> {
    let (dels, nondels): (Vec<&TweetFacts>, Vec<&TweetFacts>) =
        facts.iter().partition(|f| partition.is_deleter(f.record.user_id()));
    let measure = |set: &[&TweetFacts], a: &TraitAttribute| -> Option<f64> {
        if set.is_empty() {
            return None;
        }
        let n = set.len() as f64;
        match a.source.as_str() {
            "liwc" => {
                let i = res.lexicon.index_of(&a.key)?;
                Some(set.iter().map(|f| f.view.lexicon[i]).sum::<f64>() / n)
            }
            "tweet_share" => {
                let hit = |f: &TweetFacts| match a.key.as_str() {
                    "positive_sentiment" => Some(f.view.sentiment > 0.0),
                    "negative_sentiment" => Some(f.view.sentiment < 0.0),
                    "hashtags" => Some(!f.record.tweet.hashtags.is_empty()),
                    "urls" => Some(!f.record.tweet.urls.is_empty()),
                    "mentions" => Some(!f.record.tweet.mentions.is_empty()),
                    _ => None,
                };
                let mut k = 0.0;
                for f in set {
                    if hit(f)? {
                        k += 1.0;
                    }
                }
                Some(100.0 * k / n)
            }
            _ => None,
        }
    };
    map.attributes
        .iter()
        .filter_map(|a| {
            Some(TraitObservation {
                name: a.name.clone(),
                deleters: measure(&dels, a)?,
                non_deleters: measure(&nondels, a)?,
            })
        })
        .collect()
}

/// Percent of tweets posted in each UTC hour; all zeros for an empty set.
pub fn temporal_histogram<'a>(tweets: impl IntoIterator<Item = &'a TweetRecord>) -> [f64; 24] {
    let mut counts = [0u64; 24];
    for t in tweets {
        counts[t.created_at().hour() as usize] += 1;
    }
    let total: u64 = counts.iter().sum();
    let mut out = [0.0; 24];
    if total > 0 {
        for (o, c) in out.iter_mut().zip(counts) {
            *o = 100.0 * c as f64 / total as f64;
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupResponses {
    pub tweets: usize,
    pub pct_with_replies: f64,
    pub pct_with_retweets: f64,
    pub pct_with_quotes: f64,
    pub median_first_reply_sec: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResponseReport {
    pub deleted: GroupResponses,
    pub non_deleted: GroupResponses,
    pub median_first_reply_sec: Option<f64>,
    pub median_deletion_lag_sec: Option<f64>,
    pub median_deletion_lag_replied_sec: Option<f64>,
}

/// Earliest reply present in `corpus` (ties broken by id).
pub fn first_reply<'a>(tweet: &TweetRecord, corpus: &'a Corpus) -> Option<&'a TweetRecord> {
    tweet
        .reply_ids
        .iter()
        .filter_map(|&id| corpus.get(id))
        .min_by_key(|r| (r.created_at(), r.id()))
}

pub fn response_report(corpus: &Corpus) -> ResponseReport {
    let mut all_first = Vec::new();
    let mut group = |deleted: bool| {
        let set: Vec<&TweetRecord> = corpus.tweets().iter().filter(|t| t.deleted == deleted).collect();
        let pct = |pred: &dyn Fn(&TweetRecord) -> bool| {
            if set.is_empty() {
                0.0
            } else {
                100.0 * set.iter().filter(|t| pred(t)).count() as f64 / set.len() as f64
            }
        };
        let firsts: Vec<f64> = set
            .iter()
            .filter_map(|t| first_reply(t, corpus).map(|r| (r.created_at() - t.created_at()).num_seconds() as f64))
            .collect();
        all_first.extend_from_slice(&firsts);
        GroupResponses {
            tweets: set.len(),
            pct_with_replies: pct(&|t| !t.reply_ids.is_empty()),
            pct_with_retweets: pct(&|t| !t.retweet_ids.is_empty()),
            pct_with_quotes: pct(&|t| !t.quote_ids.is_empty()),
            median_first_reply_sec: median(&firsts),
        }
    };
    let deleted = group(true);
    let non_deleted = group(false);
    let lags: Vec<f64> = corpus.tweets().iter().filter_map(|t| t.deletion_lag_sec).map(|l| l as f64).collect();
    let replied_lags: Vec<f64> = corpus
        .tweets()
        .iter()
        .filter(|t| !t.reply_ids.is_empty())
        .filter_map(|t| t.deletion_lag_sec)
        .map(|l| l as f64)
        .collect();
    ResponseReport {
        deleted,
        non_deleted,
        median_first_reply_sec: median(&all_first),
        median_deletion_lag_sec: median(&lags),
        median_deletion_lag_replied_sec: median(&replied_lags),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentSplit {
    pub replied: usize,
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
}

impl SentimentSplit {
    fn pct(&self, n: usize) -> f64 {
        if self.replied == 0 {
            0.0
        } else {
            100.0 * n as f64 / self.replied as f64
        }
    }

    pub fn pct_positive(&self) -> f64 {
        self.pct(self.positive)
    }

    pub fn pct_negative(&self) -> f64 {
        self.pct(self.negative)
    }

    pub fn pct_neutral(&self) -> f64 {
        self.pct(self.neutral)
    }

    /// `"63.13% / 36.86%"` style positive/negative shares.
    pub fn label(&self) -> String {
        format!("{:.2}% / {:.2}%", self.pct_positive(), self.pct_negative())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplySentimentReport {
    pub deleted: SentimentSplit,
    pub non_deleted: SentimentSplit,
}

/// Sentiment of the first reply to each replied tweet, per group.
pub fn reply_sentiment_split(corpus: &Corpus, valence: &ValenceTable) -> ReplySentimentReport {
    let mut report = ReplySentimentReport::default();
    for t in corpus.tweets() {
        let Some(r) = first_reply(t, corpus) else {
            continue;
        };
        let s = crate::textkit::sentiment_score(&crate::textkit::tokenize(&r.tweet.text), valence);
        let g = if t.deleted { &mut report.deleted } else { &mut report.non_deleted };
        g.replied += 1;
        if s > 0.0 {
            g.positive += 1;
        } else if s < 0.0 {
            g.negative += 1;
        } else {
            g.neutral += 1;
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
    CantSay,
}

/// One annotated tweet: three answers per category plus the regret question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedItem {
    pub id: String,
    pub deleted: bool,
    #[serde(default)]
    pub categories: BTreeMap<String, Vec<Answer>>,
    pub regret: Vec<Answer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Assigned,
    NotAssigned,
    Unclassified,
}

pub fn majority(answers: &[Answer]) -> Result<Verdict> {
    if answers.len() != 3 {
        return Err(Error::InvalidInput(format!("expected 3 answers, got {}", answers.len())));
    }
    let yes = answers.iter().filter(|&&a| a == Answer::Yes).count();
    let no = answers.iter().filter(|&&a| a == Answer::No).count();
    Ok(if yes >= 2 {
        Verdict::Assigned
    } else if no >= 2 {
        Verdict::NotAssigned
    } else {
        Verdict::Unclassified
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemVerdicts {
    pub id: String,
    pub deleted: bool,
    pub categories: BTreeMap<String, Verdict>,
    pub regret: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSummary {
    pub items: Vec<ItemVerdicts>,
    pub questions: usize,
    pub unanimous_rate: f64,
    pub majority_rate: f64,
    /// Rows: non-deleted, deleted; columns: regret yes, regret not yes.
    pub regret_table: Contingency2x2,
    pub regret_test: TestResult,
}

pub fn parse_annotations(text: &str) -> Result<Vec<AnnotatedItem>> {
    let mut items = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: AnnotatedItem =
            serde_json::from_str(line).map_err(|e| Error::Parse { line: n + 1, message: e.to_string() })?;
        items.push(item);
    }
    Ok(items)
}

pub fn aggregate_annotations(items: &[AnnotatedItem], alpha: f64) -> Result<AnnotationSummary> {
    let mut out = Vec::with_capacity(items.len());
    let (mut questions, mut unanimous, mut majority_agree) = (0usize, 0usize, 0usize);
    let mut tally = |answers: &[Answer]| -> Result<Verdict> {
        let v = majority(answers)?;
        questions += 1;
        if answers.iter().all(|a| *a == answers[0]) {
            unanimous += 1;
        }
        if answers[0] == answers[1] || answers[0] == answers[2] || answers[1] == answers[2] {
            majority_agree += 1;
        }
        Ok(v)
    };
    for item in items {
        let mut categories = BTreeMap::new();
        for (name, answers) in &item.categories {
            categories.insert(name.clone(), tally(answers).map_err(|e| Error::InvalidInput(format!("{} / {name}: {e}", item.id)))?);
        }
        let regret = tally(&item.regret).map_err(|e| Error::InvalidInput(format!("{} / regret: {e}", item.id)))?;
        out.push(ItemVerdicts { id: item.id.clone(), deleted: item.deleted, categories, regret });
    }
    let count = |deleted: bool| {
        let set: Vec<&ItemVerdicts> = out.iter().filter(|v| v.deleted == deleted).collect();
        let yes = set.iter().filter(|v| v.regret == Verdict::Assigned).count() as u64;
        (yes, set.len() as u64 - yes)
    };
    let (nd_yes, nd_rest) = count(false);
    let (d_yes, d_rest) = count(true);
    let table = Contingency2x2::new(nd_yes, nd_rest, d_yes, d_rest)?;
    let rate = |k: usize| if questions == 0 { 0.0 } else { k as f64 / questions as f64 };
    Ok(AnnotationSummary {
        items: out,
        questions,
        unanimous_rate: rate(unanimous),
        majority_rate: rate(majority_agree),
        regret_table: table,
        regret_test: fisher_exact(table, alpha)?,
    })
}
