//! Seeded synthetic tweet/deletion streams with a ground-truth ledger.
//!
//! The generator plants a known composition (filter classes, deletions,
//! typo-fix deletions, replies) and known signals, then records every
//! planted fact so downstream stages can be checked against it exactly.

use std::collections::BTreeMap;

use chrono::{Duration, TimeZone, Utc};
use rand::distributions::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson, Zipf};
use serde::{Deserialize, Serialize};

use crate::cleanup::{parse_whitelist, CleanupStage, StageReport, Tally};
use crate::error::{Error, Result};
use crate::ingest::{
    extract_entities, CollectionWindow, DeletePayload, Event, IngestStats, Timestamp, TweetPayload, UserProfile,
};
use crate::textkit::{cosine_of_counts, edit_distance, term_counts, Lexicon, ValenceTable, NEGATIONS};

const ID_BASE: u64 = 628_000_000_000_000_000;
const ID_STRIDE: u64 = 16;
const USER_BASE: u64 = 3_000_000;
const BACKGROUND_VOCAB: usize = 2000;
const ZIPF_EXPONENT: f64 = 1.05;
/// Generated texts of one user stay at least this far apart, well clear of the
/// near-duplicate thresholds used by cleanup.
const GUARD_COSINE_MAX: f64 = 0.45;
const GUARD_EDIT_MIN: usize = 8;
const GUARD_ATTEMPTS: usize = 200;
const AUTOMATED_CLIENTS: &[&str] = &["IFTTT", "dlvr.it", "twittbot.net", "Buffer", "RoundTeam"];
const NEGATIVE_CATEGORIES: &[&str] = &["negemo", "anger", "swear", "sad", "anx"];
const POSITIVE_CATEGORIES: &[&str] = &["posemo"];
const AFFECT_CATEGORIES: &[&str] = &["affect", "posemo", "negemo", "anx", "anger", "sad", "swear"];

/// A rate that differs between deleted and non-deleted tweets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Skew {
    pub deleted: f64,
    pub kept: f64,
}

impl Skew {
    fn pick(self, deleted: bool) -> f64 {
        if deleted {
            self.deleted
        } else {
            self.kept
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedSignals {
    /// Mean count of negative-emotion, anger, swear, sadness and anxiety words per tweet.
    pub negative_words: Skew,
    pub positive_words: Skew,
    /// Mean count of unskewed category words per tweet.
    pub neutral_words: f64,
    /// Probability that each of the profile flags `geo_enabled` and
    /// `has_location` is set in the author snapshot attached to a tweet.
    pub profile_flags: Skew,
    /// Probability that a tweet receives at least one reply.
    pub reply_rate: Skew,
    /// Mean number of replies beyond the first.
    pub extra_replies: Skew,
    /// Probability that a reply is negative rather than positive.
    pub negative_reply: Skew,
}

impl Default for PlantedSignals {
    fn default() -> Self {
        PlantedSignals {
            negative_words: Skew { deleted: 0.9, kept: 0.35 },
            positive_words: Skew { deleted: 0.35, kept: 0.9 },
            neutral_words: 2.0,
            profile_flags: Skew { deleted: 0.78, kept: 0.22 },
            reply_rate: Skew { deleted: 0.35, kept: 0.35 },
            extra_replies: Skew { deleted: 1.2, kept: 0.3 },
            negative_reply: Skew { deleted: 0.75, kept: 0.2 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_users: usize,
    /// Exact number of emitted tweets, including those posted outside the window.
    pub n_tweets: usize,
    pub post_start: Timestamp,
    pub post_days: u32,
    /// Days after the posting window during which deletions are observed.
    pub delete_days: u32,
    /// Range of per-user relative posting rates.
    pub tweet_rate: [f64; 2],
    pub deleter_fraction: f64,
    /// Expected share of in-window tweets that are deleted (before the late share is split off).
    pub deletion_rate: f64,
    /// Share of deletions surviving the first three filters that are typo-fix deletions.
    pub superficial_fraction: f64,
    pub non_english_fraction: f64,
    pub automated_fraction: f64,
    pub retweet_fraction: f64,
    pub outside_window_fraction: f64,
    /// Share of drawn deletions observed only after the deletion window closes.
    pub late_delete_fraction: f64,
    /// Deletion notices for ids that never appear in the stream.
    pub orphan_deletes: usize,
    pub lag_median_sec: f64,
    pub lag_sigma: f64,
    pub signals: PlantedSignals,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            n_users: 400,
            n_tweets: 20_000,
            post_start: Utc.with_ymd_and_hms(2015, 8, 1, 0, 0, 0).unwrap(),
            post_days: 7,
            delete_days: 7,
            tweet_rate: [1.0, 5.0],
            deleter_fraction: 0.55,
            deletion_rate: 0.1111,
            superficial_fraction: 0.1445,
            non_english_fraction: 0.08,
            automated_fraction: 0.05,
            retweet_fraction: 0.15,
            outside_window_fraction: 0.01,
            late_delete_fraction: 0.02,
            orphan_deletes: 25,
            lag_median_sec: 3600.0,
            lag_sigma: 1.5,
            signals: PlantedSignals::default(),
        }
    }
}

impl SynthConfig {
    pub fn window(&self) -> CollectionWindow {
        let post_end = self.post_start + Duration::days(self.post_days as i64);
        CollectionWindow {
            post_start: self.post_start,
            post_end,
            delete_end: post_end + Duration::days(self.delete_days as i64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_users == 0 || self.n_tweets == 0 {
            return bad("n_users and n_tweets must be positive".into());
        }
        if self.post_days == 0 || self.delete_days == 0 {
            return bad("post_days and delete_days must be positive".into());
        }
        let [lo, hi] = self.tweet_rate;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("tweet_rate range [{lo}, {hi}] must satisfy 0 < lo <= hi"));
        }
        let s = &self.signals;
        let fractions = [
            ("deleter_fraction", self.deleter_fraction),
            ("deletion_rate", self.deletion_rate),
            ("superficial_fraction", self.superficial_fraction),
            ("non_english_fraction", self.non_english_fraction),
            ("automated_fraction", self.automated_fraction),
            ("retweet_fraction", self.retweet_fraction),
            ("outside_window_fraction", self.outside_window_fraction),
            ("late_delete_fraction", self.late_delete_fraction),
            ("profile_flags.deleted", s.profile_flags.deleted),
            ("profile_flags.kept", s.profile_flags.kept),
            ("reply_rate.deleted", s.reply_rate.deleted),
            ("reply_rate.kept", s.reply_rate.kept),
            ("negative_reply.deleted", s.negative_reply.deleted),
            ("negative_reply.kept", s.negative_reply.kept),
        ];
        for (name, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} is not a fraction in [0, 1]"));
            }
        }
        let rates = [
            ("negative_words", s.negative_words.deleted.min(s.negative_words.kept)),
            ("positive_words", s.positive_words.deleted.min(s.positive_words.kept)),
            ("neutral_words", s.neutral_words),
            ("extra_replies", s.extra_replies.deleted.min(s.extra_replies.kept)),
            ("lag_median_sec", self.lag_median_sec),
            ("lag_sigma", self.lag_sigma),
        ];
        for (name, v) in rates {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a finite non-negative rate"));
            }
        }
        let exclusive = self.non_english_fraction
            + self.automated_fraction
            + self.retweet_fraction
            + self.outside_window_fraction;
        if exclusive > 1.0 {
            return bad(format!(
                "non-English, automated, retweet and outside-window fractions sum to {exclusive} > 1"
            ));
        }
        Ok(())
    }
}

/// Which filter (if any) a generated tweet is planted to fall into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TweetClass {
    Clean,
    NonEnglish,
    Automated,
    Retweet,
    OutsideWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetTruth {
    pub id: u64,
    pub user_id: u64,
    pub class: TweetClass,
    /// Deleted within the deletion window.
    pub deleted: bool,
    /// A deletion notice arrives after the deletion window closes.
    pub late_delete: bool,
    pub superficial: bool,
    /// For the corrected repost of a typo-fix deletion, the deleted tweet's id.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reply_to: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative_reply: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTruth {
    pub user_id: u64,
    pub deleter: bool,
    pub tweets: u64,
}

/// Counts that ingest and cleanup must reproduce on the generated stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCounts {
    pub ingest: IngestStats,
    pub before: Tally,
    pub stages: Vec<StageReport>,
    pub after: Tally,
}

impl ExpectedCounts {
    pub fn removed(&self, stage: CleanupStage) -> Tally {
        self.stages
            .iter()
            .find(|s| s.stage == stage)
            .map(|s| s.removed)
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub config: SynthConfig,
    pub window: CollectionWindow,
    pub expected: ExpectedCounts,
    pub users: Vec<UserTruth>,
    pub tweets: Vec<TweetTruth>,
    pub orphan_delete_ids: Vec<u64>,
}

impl Ledger {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn truth(&self, id: u64) -> Option<&TweetTruth> {
        self.tweets
            .binary_search_by_key(&id, |t| t.id)
            .ok()
            .map(|i| &self.tweets[i])
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    /// Tweet and deletion events in observation order.
    pub events: Vec<Event>,
    pub ledger: Ledger,
}

/// Word pools drawn from the shipped fixtures plus a pseudo-word background.
struct Vocab {
    background: Vec<String>,
    zipf: Zipf<f64>,
    negative: Vec<String>,
    positive: Vec<String>,
    neutral: Vec<String>,
    negative_valence: Vec<String>,
    positive_valence: Vec<String>,
    clients: Vec<String>,
}

#[derive(Deserialize)]
struct LexiconFile {
    categories: Vec<CategoryFile>,
}

#[derive(Deserialize)]
struct CategoryFile {
    name: String,
    patterns: Vec<String>,
}

fn plain_words(patterns: &[String]) -> impl Iterator<Item = String> + '_ {
    patterns
        .iter()
        .map(|p| p.trim_end_matches('*').to_string())
        .filter(|w| w.len() >= 2 && w.chars().all(|c| c.is_ascii_alphabetic()))
}

fn pool(file: &LexiconFile, keep: impl Fn(&str) -> bool) -> Vec<String> {
    let mut words: Vec<String> = file
        .categories
        .iter()
        .filter(|c| keep(&c.name))
        .flat_map(|c| plain_words(&c.patterns))
        .collect();
    words.sort();
    words.dedup();
    words
}

impl Vocab {
    fn new() -> Vocab {
        let file: LexiconFile =
            serde_json::from_str(crate::fixtures::LEXICON_JSON).expect("shipped lexicon parses");
        let negative = pool(&file, |n| NEGATIVE_CATEGORIES.contains(&n));
        let positive = pool(&file, |n| POSITIVE_CATEGORIES.contains(&n));
        let neutral: Vec<String> = pool(&file, |n| !AFFECT_CATEGORIES.contains(&n))
            .into_iter()
            .filter(|w| negative.binary_search(w).is_err() && positive.binary_search(w).is_err())
            .collect();

        let valence: BTreeMap<String, f64> =
            serde_json::from_str(crate::fixtures::VALENCE_JSON).expect("shipped valence table parses");
        let alpha = |w: &&String| w.chars().all(|c| c.is_ascii_alphabetic());
        let negative_valence = valence.iter().filter(|(w, &v)| v < -1.0 && alpha(w)).map(|(w, _)| w.clone()).collect();
        let positive_valence = valence.iter().filter(|(w, &v)| v > 1.0 && alpha(w)).map(|(w, _)| w.clone()).collect();

        let lexicon = Lexicon::builtin();
        let table = ValenceTable::builtin();
        let onsets = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr", "gl", "kr", "pl", "st", "tr", "zh"];
        let vowels = ["a", "e", "i", "o", "u", "ai", "ou"];
        let codas = ["", "n", "r", "l", "k", "x", "sh"];
        // a fixed stream, so the background vocabulary is the same for every seed
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b0c4);
        let mut seen = std::collections::BTreeSet::new();
        let mut background = Vec::with_capacity(BACKGROUND_VOCAB);
        while background.len() < BACKGROUND_VOCAB {
            let syllables = rng.gen_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(onsets.choose(&mut rng).unwrap());
                w.push_str(vowels.choose(&mut rng).unwrap());
                w.push_str(codas.choose(&mut rng).unwrap());
            }
            let taken = lexicon.word_hits(&w).iter().any(|&h| h)
                || table.get(&w).is_some()
                || NEGATIONS.contains(&w.as_str());
            if !taken && seen.insert(w.clone()) {
                background.push(w);
            }
        }
        let clients: Vec<String> = parse_whitelist(crate::fixtures::WHITELIST_TXT).into_iter().collect();
        Vocab {
            zipf: Zipf::new(background.len() as u64, ZIPF_EXPONENT).expect("valid Zipf parameters"),
            background,
            negative,
            positive,
            neutral,
            negative_valence,
            positive_valence,
            clients,
        }
    }

    fn background_word(&self, rng: &mut ChaCha8Rng) -> &str {
        let k = self.zipf.sample(rng) as usize;
        &self.background[k.clamp(1, self.background.len()) - 1]
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive Poisson mean").sample(rng) as usize
    }
}

#[derive(Debug, Clone)]
struct Draft {
    user: usize,
    class: TweetClass,
    at: Timestamp,
    id: u64,
    deleted: bool,
    late: bool,
    superficial: bool,
    fixes: Option<usize>,
    reply_to: Option<usize>,
    negative_reply: Option<bool>,
    retweet_of: Option<u64>,
    text: String,
}

struct SynthUser {
    id: u64,
    deleter: bool,
    profile: UserProfile,
}

/// Generates a stream and its ledger; identical configurations give identical output.
pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let window = cfg.window();
    let vocab = Vocab::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let users = make_users(cfg, &mut rng);
    let mut drafts = place_tweets(cfg, &window, &users, &mut rng);
    mark_deletions(cfg, &users, &mut drafts, &mut rng)?;
    let pairs = plant_superficial(cfg, &mut drafts, &mut rng)?;
    plant_replies(cfg, &mut drafts, &mut rng);
    plant_retweets(&mut drafts, &mut rng);
    write_texts(cfg, &vocab, &users, &mut drafts, &mut rng)?;

    let mut events = Vec::with_capacity(drafts.len() * 2);
    let post_days_sec = (window.delete_end - window.post_start).num_seconds();
    let lag = LogNormal::new(cfg.lag_median_sec.max(1.0).ln(), cfg.lag_sigma).map_err(|e| Error::Config(e.to_string()))?;
    for d in &drafts {
        let u = &users[d.user];
        let reply_to_id = d.reply_to.map(|t| drafts[t].id);
        events.push(Event::Tweet(payload(cfg, d, reply_to_id, u, &vocab, &mut rng)));
        if d.deleted {
            let room = (window.delete_end - d.at).num_seconds().max(1);
            let secs = if let Some(&fix) = pairs.get(&d.id) {
                (drafts[fix].at - d.at).num_seconds() + rng.gen_range(1..600)
            } else {
                lag.sample(&mut rng).round() as i64
            };
            let secs = secs.clamp(1, room);
            events.push(delete_event(d.id, u.id, d.at + Duration::seconds(secs)));
        } else if d.late {
            let secs = rng.gen_range(3600..3 * 86_400);
            events.push(delete_event(d.id, u.id, window.delete_end + Duration::seconds(secs)));
        }
    }
    let mut orphan_ids = Vec::with_capacity(cfg.orphan_deletes);
    for slot in rand::seq::index::sample(&mut rng, drafts.len() + cfg.orphan_deletes, cfg.orphan_deletes) {
        let id = ID_BASE + slot as u64 * ID_STRIDE + 7;
        let at = window.post_start + Duration::seconds(rng.gen_range(0..post_days_sec));
        let user = users[rng.gen_range(0..users.len())].id;
        orphan_ids.push(id);
        events.push(delete_event(id, user, at));
    }
    orphan_ids.sort_unstable();
    events.sort_by_key(event_key);

    let ledger = build_ledger(cfg, window, &users, &drafts, orphan_ids);
    Ok(SynthOutput { events, ledger })
}

fn event_key(e: &Event) -> (Timestamp, u8, u64) {
    match e {
        Event::Tweet(t) => (t.created_at, 0, t.id),
        Event::Delete(d) => (d.observed_at, 1, d.id),
    }
}

fn delete_event(id: u64, user_id: u64, observed_at: Timestamp) -> Event {
    Event::Delete(DeletePayload { id, user_id, observed_at })
}

fn make_users(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<SynthUser> {
    let offsets = [-480, -420, -300, -240, 0, 60, 120, 330, 540];
    (0..cfg.n_users)
        .map(|i| {
            let id = USER_BASE + i as u64;
            let followers: u64 = (LogNormal::new(5.5, 1.4).unwrap().sample(rng) as u64).min(5_000_000);
            let profile = UserProfile {
                user_id: id,
                account_created_at: cfg.post_start - Duration::days(rng.gen_range(30..2500)),
                profile_customized: rng.gen_bool(0.7),
                custom_image: rng.gen_bool(0.8),
                bio_length: rng.gen_range(0..160),
                geo_enabled: false,
                has_location: false,
                has_profile_url: rng.gen_bool(0.3),
                favourites_count: rng.gen_range(0..20_000),
                followees_count: rng.gen_range(20..2_000),
                followers_count: followers,
                listed_count: followers / 50,
                statuses_count: rng.gen_range(100..50_000),
                timezone_offset_min: if rng.gen_bool(0.8) { Some(*offsets.choose(rng).unwrap()) } else { None },
            };
            SynthUser { id, deleter: rng.gen_bool(cfg.deleter_fraction), profile }
        })
        .collect()
}

/// Assigns authors, classes and times, then ids in chronological order.
fn place_tweets(cfg: &SynthConfig, window: &CollectionWindow, users: &[SynthUser], rng: &mut ChaCha8Rng) -> Vec<Draft> {
    let [lo, hi] = cfg.tweet_rate;
    let weights: Vec<f64> = users.iter().map(|_| rng.gen_range(lo..=hi)).collect();
    let author = WeightedIndex::new(&weights).expect("positive rates");
    let span = (window.post_end - window.post_start).num_seconds();
    let cuts = [
        (cfg.outside_window_fraction, TweetClass::OutsideWindow),
        (cfg.non_english_fraction, TweetClass::NonEnglish),
        (cfg.automated_fraction, TweetClass::Automated),
        (cfg.retweet_fraction, TweetClass::Retweet),
    ];
    let mut drafts: Vec<(Draft, u32)> = (0..cfg.n_tweets)
        .map(|k| {
            let user = author.sample(rng);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut class = TweetClass::Clean;
            for (f, c) in cuts {
                acc += f;
                if u < acc {
                    class = c;
                    break;
                }
            }
            let at = if class == TweetClass::OutsideWindow {
                let off = Duration::seconds(rng.gen_range(60..2 * 86_400));
                if rng.gen_bool(0.5) {
                    window.post_start - off
                } else {
                    window.post_end + off
                }
            } else {
                window.post_start + Duration::seconds(rng.gen_range(0..span))
            };
            let d = Draft {
                user,
                class,
                at,
                id: 0,
                deleted: false,
                late: false,
                superficial: false,
                fixes: None,
                reply_to: None,
                negative_reply: None,
                retweet_of: None,
                text: String::new(),
            };
            (d, k as u32)
        })
        .collect();
    drafts.sort_by_key(|(d, k)| (d.at, *k));
    drafts
        .into_iter()
        .enumerate()
        .map(|(rank, (mut d, _))| {
            d.id = ID_BASE + rank as u64 * ID_STRIDE;
            d
        })
        .collect()
}

fn mark_deletions(cfg: &SynthConfig, users: &[SynthUser], drafts: &mut [Draft], rng: &mut ChaCha8Rng) -> Result<()> {
    let in_window = drafts.iter().filter(|d| d.class != TweetClass::OutsideWindow).count();
    let by_deleters = drafts
        .iter()
        .filter(|d| d.class != TweetClass::OutsideWindow && users[d.user].deleter)
        .count();
    if by_deleters == 0 {
        return if cfg.deletion_rate > 0.0 {
            Err(Error::Config("deletion_rate > 0 but no deleting user posted in the window".into()))
        } else {
            Ok(())
        };
    }
    let p = cfg.deletion_rate * in_window as f64 / by_deleters as f64;
    if p > 1.0 {
        return Err(Error::Config(format!(
            "deletion_rate {} cannot be reached with deleter_fraction {}",
            cfg.deletion_rate, cfg.deleter_fraction
        )));
    }
    for d in drafts.iter_mut() {
        if d.class != TweetClass::OutsideWindow && users[d.user].deleter && rng.gen_bool(p) {
            if rng.gen_bool(cfg.late_delete_fraction) {
                d.late = true;
            } else {
                d.deleted = true;
            }
        }
    }
    Ok(())
}

/// Chooses deleted clean tweets whose next clean tweet by the same author
/// becomes the corrected repost. Returns deleted id → repost index.
fn plant_superficial(cfg: &SynthConfig, drafts: &mut [Draft], rng: &mut ChaCha8Rng) -> Result<BTreeMap<u64, usize>> {
    let mut timelines: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, d) in drafts.iter().enumerate() {
        if d.class == TweetClass::Clean {
            timelines.entry(d.user).or_default().push(i);
        }
    }
    let eligible = drafts.iter().filter(|d| d.class == TweetClass::Clean && d.deleted).count();
    let wanted = (cfg.superficial_fraction * eligible as f64).round() as usize;
    let mut candidates: Vec<(usize, usize)> = timelines
        .values()
        .flat_map(|tl| tl.windows(2).map(|w| (w[0], w[1])))
        .filter(|&(a, b)| drafts[a].deleted && !drafts[b].deleted && drafts[b].at > drafts[a].at)
        .collect();
    if candidates.len() < wanted {
        return Err(Error::Config(format!(
            "superficial_fraction needs {wanted} typo-fix deletions but only {} deleted tweets have a usable next tweet",
            candidates.len()
        )));
    }
    candidates.shuffle(rng);
    let mut pairs = BTreeMap::new();
    for &(d, f) in &candidates[..wanted] {
        drafts[d].superficial = true;
        drafts[f].fixes = Some(d);
        pairs.insert(drafts[d].id, f);
    }
    Ok(pairs)
}

/// Turns later clean tweets by other authors into replies to earlier clean tweets.
fn plant_replies(cfg: &SynthConfig, drafts: &mut [Draft], rng: &mut ChaCha8Rng) {
    let s = &cfg.signals;
    let pool: Vec<usize> = (0..drafts.len())
        .filter(|&i| {
            let d = &drafts[i];
            d.class == TweetClass::Clean && !d.superficial && d.fixes.is_none()
        })
        .collect();
    for p in 0..pool.len() {
        let target = pool[p];
        let label = drafts[target].deleted;
        if !rng.gen_bool(s.reply_rate.pick(label)) {
            continue;
        }
        let wanted = 1 + poisson(rng, s.extra_replies.pick(label));
        let mut q = p + 1 + rng.gen_range(0..40);
        let mut placed = 0;
        while placed < wanted && q < pool.len() {
            let r = pool[q];
            q += 1;
            let free = drafts[r].reply_to.is_none()
                && drafts[r].user != drafts[target].user
                && drafts[r].at > drafts[target].at;
            if free {
                drafts[r].reply_to = Some(target);
                drafts[r].negative_reply = Some(rng.gen_bool(s.negative_reply.pick(label)));
                placed += 1;
                q += rng.gen_range(0..8);
            }
        }
    }
}

fn plant_retweets(drafts: &mut [Draft], rng: &mut ChaCha8Rng) {
    let mut earlier_clean: Vec<u64> = Vec::new();
    for (i, d) in drafts.iter_mut().enumerate() {
        match d.class {
            TweetClass::Clean => earlier_clean.push(d.id),
            TweetClass::Retweet => {
                d.retweet_of = Some(match earlier_clean.choose(rng) {
                    Some(&id) => id,
                    None => ID_BASE - 1 - i as u64,
                });
            }
            _ => {}
        }
    }
}

fn far_apart(a: &str, a_terms: &BTreeMap<String, u64>, b: &str, b_terms: &BTreeMap<String, u64>) -> bool {
    if cosine_of_counts(a_terms, b_terms) > GUARD_COSINE_MAX {
        return false;
    }
    let (la, lb) = (a.chars().count(), b.chars().count());
    la.abs_diff(lb) >= GUARD_EDIT_MIN || edit_distance(a, b) >= GUARD_EDIT_MIN
}

/// Writes every text; clean texts of one author are kept mutually distant
/// except for planted typo-fix pairs.
fn write_texts(cfg: &SynthConfig, vocab: &Vocab, users: &[SynthUser], drafts: &mut [Draft], rng: &mut ChaCha8Rng) -> Result<()> {
    let mut history: Vec<Vec<(String, BTreeMap<String, u64>)>> = vec![Vec::new(); users.len()];
    let mut fixed_text: BTreeMap<usize, String> = BTreeMap::new();
    for i in 0..drafts.len() {
        let d = drafts[i].clone();
        let text = match d.class {
            TweetClass::Clean => {
                if let Some(src) = d.fixes {
                    fixed_text.remove(&src).expect("deleted tweet precedes its correction")
                } else {
                    let mut accepted = None;
                    for _ in 0..GUARD_ATTEMPTS {
                        let candidate = clean_text(cfg, vocab, users, drafts, &d, rng);
                        let typo = d.superficial.then(|| with_typo(&candidate, rng)).flatten();
                        let mut probes = vec![candidate.clone()];
                        probes.extend(typo.clone());
                        let ok = probes.iter().all(|p| {
                            let terms = term_counts(p);
                            history[d.user].iter().all(|(h, ht)| far_apart(p, &terms, h, ht))
                        });
                        if ok && (!d.superficial || typo.is_some()) {
                            accepted = Some((candidate, typo));
                            break;
                        }
                    }
                    let (candidate, typo) = accepted.ok_or_else(|| {
                        Error::Contract(format!("could not draw a distinct text for user {}", users[d.user].id))
                    })?;
                    match typo {
                        Some(t) => {
                            fixed_text.insert(i, candidate);
                            t
                        }
                        None => candidate,
                    }
                }
            }
            TweetClass::Retweet => {
                let who = USER_BASE + rng.gen_range(0..users.len() as u64);
                format!("RT @user{who}: {}", background_words(vocab, rng, 4, 9).join(" "))
            }
            _ => background_words(vocab, rng, 5, 12).join(" "),
        };
        if d.class == TweetClass::Clean {
            let terms = term_counts(&text);
            history[d.user].push((text.clone(), terms));
        }
        drafts[i].text = text;
    }
    Ok(())
}

fn background_words(vocab: &Vocab, rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Vec<String> {
    let n = rng.gen_range(lo..=hi);
    (0..n).map(|_| vocab.background_word(rng).to_string()).collect()
}

fn clean_text(cfg: &SynthConfig, vocab: &Vocab, users: &[SynthUser], drafts: &[Draft], d: &Draft, rng: &mut ChaCha8Rng) -> String {
    let s = &cfg.signals;
    if let Some(t) = d.reply_to {
        let target_user = users[drafts[t].user].id;
        let mut words = background_words(vocab, rng, 3, 7);
        let pool = if d.negative_reply == Some(true) { &vocab.negative_valence } else { &vocab.positive_valence };
        for _ in 0..rng.gen_range(1..=2) {
            let at = rng.gen_range(0..=words.len());
            words.insert(at, pool.choose(rng).unwrap().clone());
        }
        return format!("@user{target_user} {}", words.join(" "));
    }
    let mut words = background_words(vocab, rng, 6, 11);
    let mut extra: Vec<String> = Vec::new();
    for _ in 0..poisson(rng, s.neutral_words) {
        extra.push(vocab.neutral.choose(rng).unwrap().clone());
    }
    for _ in 0..poisson(rng, s.negative_words.pick(d.deleted)) {
        extra.push(vocab.negative.choose(rng).unwrap().clone());
    }
    for _ in 0..poisson(rng, s.positive_words.pick(d.deleted)) {
        extra.push(vocab.positive.choose(rng).unwrap().clone());
    }
    if rng.gen_bool(0.2) {
        extra.push(format!("@user{}", USER_BASE + rng.gen_range(0..users.len() as u64)));
    }
    if rng.gen_bool(0.15) {
        extra.push(format!("#{}", vocab.background_word(rng)));
    }
    for w in extra {
        let at = rng.gen_range(0..=words.len());
        words.insert(at, w);
    }
    if rng.gen_bool(0.12) {
        let slug: String = (0..8).map(|_| rng.sample(rand::distributions::Alphanumeric) as char).collect();
        words.push(format!("https://t.co/{slug}"));
    }
    words.join(" ")
}

/// Drops one interior letter of a background word, giving edit distance 1.
fn with_typo(text: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let words: Vec<&str> = text.split(' ').collect();
    let spots: Vec<usize> = (0..words.len())
        .filter(|&i| words[i].len() >= 5 && words[i].chars().all(|c| c.is_ascii_lowercase()))
        .collect();
    let &w = spots.choose(rng)?;
    let word = words[w];
    let cut = rng.gen_range(1..word.len() - 1);
    let broken = format!("{}{}", &word[..cut], &word[cut + 1..]);
    let mut out: Vec<&str> = words.clone();
    out[w] = &broken;
    Some(out.join(" "))
}

fn payload(cfg: &SynthConfig, d: &Draft, reply_to_id: Option<u64>, u: &SynthUser, vocab: &Vocab, rng: &mut ChaCha8Rng) -> TweetPayload {
    let flag_p = cfg.signals.profile_flags.pick(d.deleted);
    let mut profile = u.profile.clone();
    profile.geo_enabled = rng.gen_bool(flag_p);
    profile.has_location = rng.gen_bool(flag_p);
    let source = match d.class {
        TweetClass::Automated => AUTOMATED_CLIENTS.choose(rng).unwrap().to_string(),
        _ => vocab.clients[rng.gen_range(0..vocab.clients.len().min(4))].clone(),
    };
    let lang = if d.class == TweetClass::NonEnglish { ["es", "pt", "ja", "fr"].choose(rng).unwrap() } else { &"en" };
    let e = extract_entities(&d.text);
    TweetPayload {
        id: d.id,
        user_id: u.id,
        created_at: d.at,
        text: d.text.clone(),
        lang: lang.to_string(),
        source,
        in_reply_to_id: reply_to_id,
        quoted_id: None,
        retweet_of_id: d.retweet_of,
        hashtags: e.hashtags,
        urls: e.urls,
        mentions: e.mentions,
        has_geo: profile.geo_enabled && rng.gen_bool(0.3),
        user: Some(profile),
    }
}

fn tally<'a>(drafts: impl Iterator<Item = &'a Draft>, users: &[SynthUser]) -> Tally {
    let mut t = Tally::default();
    let mut posted = std::collections::BTreeSet::new();
    let mut deleting = std::collections::BTreeSet::new();
    for d in drafts {
        t.tweets += 1;
        posted.insert(users[d.user].id);
        if d.deleted {
            t.deleted += 1;
            deleting.insert(users[d.user].id);
        }
    }
    t.users = posted.len() as u64;
    t.deleting_users = deleting.len() as u64;
    t
}

fn build_ledger(cfg: &SynthConfig, window: CollectionWindow, users: &[SynthUser], drafts: &[Draft], orphan_ids: Vec<u64>) -> Ledger {
    let inside = || drafts.iter().filter(|d| d.class != TweetClass::OutsideWindow);
    let stage_of = |d: &Draft| match d.class {
        TweetClass::NonEnglish => Some(CleanupStage::NonEnglish),
        TweetClass::Automated => Some(CleanupStage::Automated),
        TweetClass::Retweet => Some(CleanupStage::Retweet),
        TweetClass::Clean if d.superficial => Some(CleanupStage::Superficial),
        _ => None,
    };
    let deleted = inside().filter(|d| d.deleted).count() as u64;
    let late = inside().filter(|d| d.late).count() as u64;
    let retained = inside().count() as u64;
    let ingest = IngestStats {
        tweets_in: drafts.len() as u64,
        retained,
        outside_window: drafts.len() as u64 - retained,
        duplicates: 0,
        deletes_in: deleted + late + orphan_ids.len() as u64,
        deleted_tweets: deleted,
        orphan_deletes: orphan_ids.len() as u64,
        late_deletes: late,
        clamped_lags: 0,
    };
    let stages = CleanupStage::ORDER
        .iter()
        .map(|&stage| StageReport { stage, removed: tally(inside().filter(|d| stage_of(d) == Some(stage)), users) })
        .collect();
    let expected = ExpectedCounts {
        ingest,
        before: tally(inside(), users),
        stages,
        after: tally(inside().filter(|d| stage_of(d).is_none()), users),
    };
    let mut counts = vec![0u64; users.len()];
    for d in drafts {
        counts[d.user] += 1;
    }
    let tweets = drafts
        .iter()
        .map(|d| TweetTruth {
            id: d.id,
            user_id: users[d.user].id,
            class: d.class,
            deleted: d.deleted,
            late_delete: d.late,
            superficial: d.superficial,
            fixes: d.fixes.map(|i| drafts[i].id),
            reply_to: d.reply_to.map(|i| drafts[i].id),
            negative_reply: d.negative_reply,
        })
        .collect();
    Ledger {
        config: cfg.clone(),
        window,
        expected,
        users: users
            .iter()
            .zip(counts)
            .map(|(u, tweets)| UserTruth { user_id: u.id, deleter: u.deleter, tweets })
            .collect(),
        tweets,
        orphan_delete_ids: orphan_ids,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cleanup::{run_cleanup, CleanupConfig};
    use crate::ingest::{build_corpus, write_events};

    fn small(seed: u64) -> SynthConfig {
        SynthConfig { seed, n_users: 60, n_tweets: 3000, ..SynthConfig::default() }
    }

    fn stream_bytes(out: &SynthOutput) -> Vec<u8> {
        let mut buf = Vec::new();
        write_events(&mut buf, &out.events).unwrap();
        buf
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate(&small(5)).unwrap();
        let b = generate(&small(5)).unwrap();
        assert_eq!(stream_bytes(&a), stream_bytes(&b));
        assert_eq!(a.ledger.to_json().unwrap(), b.ledger.to_json().unwrap());
        let c = generate(&small(6)).unwrap();
        assert_ne!(stream_bytes(&a), stream_bytes(&c));
    }

    #[test]
    fn ingest_and_cleanup_reproduce_the_ledger() {
        for seed in [1, 2, 3] {
            let out = generate(&small(seed)).unwrap();
            let exp = &out.ledger.expected;
            let corpus = build_corpus(&out.events, out.ledger.window).unwrap();
            assert_eq!(corpus.stats, exp.ingest);
            let (_, report) = run_cleanup(&corpus, &CleanupConfig::default()).unwrap();
            assert_eq!(report.before, exp.before);
            assert_eq!(report.stages, exp.stages);
            assert_eq!(report.after, exp.after);
            assert!(exp.removed(CleanupStage::Superficial).tweets > 0);
        }
    }

    #[test]
    fn ledger_covers_every_event() {
        let out = generate(&small(9)).unwrap();
        for e in &out.events {
            match e {
                Event::Tweet(t) => {
                    let truth = out.ledger.truth(t.id).unwrap();
                    assert_eq!(truth.user_id, t.user_id);
                    assert_eq!(truth.reply_to, t.in_reply_to_id);
                }
                Event::Delete(d) => assert!(
                    out.ledger.truth(d.id).is_some_and(|t| t.deleted || t.late_delete)
                        || out.ledger.orphan_delete_ids.binary_search(&d.id).is_ok()
                ),
            }
        }
        assert_eq!(out.ledger.tweets.len(), 3000);
    }

    #[test]
    fn superficial_share_matches_the_request() {
        let out = generate(&small(4)).unwrap();
        let clean_deleted = out.ledger.tweets.iter().filter(|t| t.class == TweetClass::Clean && t.deleted).count();
        let planted = out.ledger.tweets.iter().filter(|t| t.superficial).count();
        assert_eq!(planted, (0.1445 * clean_deleted as f64).round() as usize);

        let none = generate(&SynthConfig { superficial_fraction: 0.0, ..small(4) }).unwrap();
        let corpus = build_corpus(&none.events, none.ledger.window).unwrap();
        let (_, report) = run_cleanup(&corpus, &CleanupConfig::default()).unwrap();
        assert_eq!(report.removed(CleanupStage::Superficial).tweets, 0);
    }

    #[test]
    fn deletion_count_stays_in_the_binomial_band() {
        let cfg = SynthConfig {
            n_tweets: 10_000,
            outside_window_fraction: 0.0,
            late_delete_fraction: 0.0,
            ..SynthConfig::default()
        };
        let out = generate(&cfg).unwrap();
        let deleted = out.ledger.expected.ingest.deleted_tweets as f64;
        // 99% band of Binomial(10000, 0.1111): mean 1111, sd 31.4
        assert!((deleted - 1111.0).abs() <= 2.576 * (10_000.0f64 * 0.1111 * 0.8889).sqrt(), "{deleted}");
    }

    #[test]
    fn contradictory_fractions_are_rejected() {
        let cfg = SynthConfig { non_english_fraction: 0.5, retweet_fraction: 0.6, ..SynthConfig::default() };
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));
        let cfg = SynthConfig { deletion_rate: 1.5, ..SynthConfig::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = SynthConfig { deletion_rate: 0.9, deleter_fraction: 0.2, ..small(1) };
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));
    }
}
