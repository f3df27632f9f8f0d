//! Event wire format and the tweet/deletion join.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::textkit::{tokenize, TokenClass};

pub type Timestamp = DateTime<Utc>;

/// Author snapshot carried on every tweet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: u64,
    pub account_created_at: Timestamp,
    pub profile_customized: bool,
    pub custom_image: bool,
    pub bio_length: u32,
    pub geo_enabled: bool,
    pub has_location: bool,
    pub has_profile_url: bool,
    pub favourites_count: u64,
    pub followees_count: u64,
    pub followers_count: u64,
    pub listed_count: u64,
    pub statuses_count: u64,
    pub timezone_offset_min: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetPayload {
    pub id: u64,
    pub user_id: u64,
    pub created_at: Timestamp,
    pub text: String,
    pub lang: String,
    pub source: String,
    pub in_reply_to_id: Option<u64>,
    pub quoted_id: Option<u64>,
    pub retweet_of_id: Option<u64>,
    pub hashtags: Vec<String>,
    pub urls: Vec<String>,
    pub mentions: Vec<String>,
    pub has_geo: bool,
    pub user: Option<UserProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletePayload {
    pub id: u64,
    pub user_id: u64,
    pub observed_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Tweet(TweetPayload),
    Delete(DeletePayload),
}

impl Event {
    pub fn id(&self) -> u64 {
        match self {
            Event::Tweet(t) => t.id,
            Event::Delete(d) => d.id,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("events always serialize")
    }
}

/// Lenient mirror of the tweet wire object; entity lists may be absent.
#[derive(Deserialize)]
struct TweetWire {
    id: u64,
    user_id: u64,
    created_at: Timestamp,
    text: String,
    #[serde(default = "undetermined_lang")]
    lang: String,
    #[serde(default)]
    source: String,
    #[serde(default)]
    in_reply_to_id: Option<u64>,
    #[serde(default)]
    quoted_id: Option<u64>,
    #[serde(default)]
    retweet_of_id: Option<u64>,
    hashtags: Option<Vec<String>>,
    urls: Option<Vec<String>>,
    mentions: Option<Vec<String>>,
    #[serde(default)]
    has_geo: bool,
    #[serde(default)]
    user: Option<UserProfile>,
}

fn undetermined_lang() -> String {
    "und".to_string()
}

const TWEET_REQUIRED: &[&str] = &["id", "user_id", "created_at", "text"];
const DELETE_REQUIRED: &[&str] = &["id", "user_id", "observed_at"];
const TIMESTAMP_FIELDS: &[&str] = &["created_at", "observed_at"];

/// Parses one JSON Lines record. `line_no` is 1-based and only used in errors.
pub fn parse_event(line: &str, line_no: usize) -> Result<Event> {
    let value: Value = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    let schema = |field: &str| Error::Schema { line: line_no, field: field.to_string() };
    let obj = value.as_object().ok_or_else(|| schema("kind"))?;
    let kind = obj.get("kind").and_then(Value::as_str).ok_or_else(|| schema("kind"))?;
    let required = match kind {
        "tweet" => TWEET_REQUIRED,
        "delete" => DELETE_REQUIRED,
        _ => return Err(schema("kind")),
    };
    for field in required {
        match obj.get(*field) {
            None | Some(Value::Null) => return Err(schema(field)),
            Some(v) if TIMESTAMP_FIELDS.contains(field) => {
                let ok = v.as_str().is_some_and(|s| DateTime::parse_from_rfc3339(s).is_ok());
                if !ok {
                    return Err(schema(field));
                }
            }
            _ => {}
        }
    }
    if obj.get("id").and_then(Value::as_u64).is_none_or(|id| id == 0) {
        return Err(schema("id"));
    }
    let event = match kind {
        "tweet" => {
            let w: TweetWire = serde_json::from_value(value.clone())
                .map_err(|e| schema(&field_from_serde(&e.to_string(), obj)))?;
            Event::Tweet(w.into_payload())
        }
        _ => {
            let d: DeletePayload = serde_json::from_value(value.clone())
                .map_err(|e| schema(&field_from_serde(&e.to_string(), obj)))?;
            Event::Delete(d)
        }
    };
    Ok(event)
}

/// Best-effort field name for a serde failure: a named missing field, or the
/// first top-level field whose name appears in the message.
fn field_from_serde(message: &str, obj: &serde_json::Map<String, Value>) -> String {
    if let Some(rest) = message.strip_prefix("missing field `") {
        if let Some(end) = rest.find('`') {
            let inner = &rest[..end];
            return if obj.contains_key("user") && !obj.contains_key(inner) {
                format!("user.{inner}")
            } else {
                inner.to_string()
            };
        }
    }
    obj.keys()
        .find(|k| message.contains(k.as_str()))
        .cloned()
        .unwrap_or_else(|| "user".to_string())
}

impl TweetWire {
    fn into_payload(self) -> TweetPayload {
        let needs_extraction = self.hashtags.is_none() || self.urls.is_none() || self.mentions.is_none();
        let extracted = if needs_extraction { extract_entities(&self.text) } else { Default::default() };
        TweetPayload {
            id: self.id,
            user_id: self.user_id,
            created_at: self.created_at,
            text: self.text,
            lang: self.lang,
            source: self.source,
            in_reply_to_id: self.in_reply_to_id,
            quoted_id: self.quoted_id,
            retweet_of_id: self.retweet_of_id,
            hashtags: self.hashtags.unwrap_or(extracted.hashtags),
            urls: self.urls.unwrap_or(extracted.urls),
            mentions: self.mentions.unwrap_or(extracted.mentions),
            has_geo: self.has_geo,
            user: self.user,
        }
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Entities {
    pub hashtags: Vec<String>,
    pub urls: Vec<String>,
    pub mentions: Vec<String>,
}

/// Entity lists recovered from the text's token classes (without the `#`/`@` sigils).
pub fn extract_entities(text: &str) -> Entities {
    let mut e = Entities::default();
    for t in tokenize(text).tokens {
        match t.class {
            TokenClass::Hashtag => e.hashtags.push(t.surface[1..].to_string()),
            TokenClass::Mention => e.mentions.push(t.surface[1..].to_string()),
            TokenClass::Url => e.urls.push(t.surface),
            _ => {}
        }
    }
    e
}

/// Reads a JSON Lines event stream, skipping blank lines.
pub fn read_events<R: BufRead>(reader: R) -> Result<Vec<Event>> {
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(parse_event(&line, i + 1)?);
    }
    Ok(events)
}

pub fn write_events<W: Write>(mut writer: W, events: &[Event]) -> Result<()> {
    for e in events {
        writeln!(writer, "{}", e.to_json_line())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionWindow {
    pub post_start: Timestamp,
    pub post_end: Timestamp,
    pub delete_end: Timestamp,
}

impl CollectionWindow {
    pub fn new(post_start: Timestamp, post_end: Timestamp, delete_end: Timestamp) -> Result<Self> {
        if post_start >= post_end || post_end > delete_end {
            return Err(Error::InvalidInput(
                "collection window needs post_start < post_end <= delete_end".into(),
            ));
        }
        Ok(CollectionWindow { post_start, post_end, delete_end })
    }

    pub fn parse(post_start: &str, post_end: &str, delete_end: &str) -> Result<Self> {
        let p = |s: &str| {
            DateTime::parse_from_rfc3339(s)
                .map(|d| d.with_timezone(&Utc))
                .map_err(|e| Error::InvalidInput(format!("bad timestamp {s:?}: {e}")))
        };
        CollectionWindow::new(p(post_start)?, p(post_end)?, p(delete_end)?)
    }

    pub fn contains_post(&self, t: Timestamp) -> bool {
        t >= self.post_start && t <= self.post_end
    }

    /// Length of the posting window in days.
    pub fn post_days(&self) -> f64 {
        (self.post_end - self.post_start).num_milliseconds() as f64 / 86_400_000.0
    }
}

/// One retained tweet with its deletion label and incoming response links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    #[serde(flatten)]
    pub tweet: TweetPayload,
    pub deleted: bool,
    pub deletion_lag_sec: Option<u64>,
    pub reply_ids: Vec<u64>,
    pub retweet_ids: Vec<u64>,
    pub quote_ids: Vec<u64>,
}

impl TweetRecord {
    pub fn unlabeled(tweet: TweetPayload) -> Self {
        TweetRecord {
            tweet,
            deleted: false,
            deletion_lag_sec: None,
            reply_ids: vec![],
            retweet_ids: vec![],
            quote_ids: vec![],
        }
    }

    pub fn id(&self) -> u64 {
        self.tweet.id
    }

    pub fn user_id(&self) -> u64 {
        self.tweet.user_id
    }

    pub fn created_at(&self) -> Timestamp {
        self.tweet.created_at
    }

    pub fn has_responses(&self) -> bool {
        !(self.reply_ids.is_empty() && self.retweet_ids.is_empty() && self.quote_ids.is_empty())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub tweets_in: u64,
    pub retained: u64,
    pub outside_window: u64,
    pub duplicates: u64,
    pub deletes_in: u64,
    pub deleted_tweets: u64,
    pub orphan_deletes: u64,
    pub late_deletes: u64,
    pub clamped_lags: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplicatePolicy {
    /// A repeated tweet id aborts the build.
    #[default]
    Reject,
    /// Repeated ids are counted; the copy with the smallest serialized form is kept.
    Skip,
}

/// Labeled tweets of one observation window, ordered by (created_at, id).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "CorpusData", into = "CorpusData")]
pub struct Corpus {
    pub window: CollectionWindow,
    pub stats: IngestStats,
    tweets: Vec<TweetRecord>,
    index: HashMap<u64, usize>,
}

#[derive(Serialize, Deserialize)]
struct CorpusData {
    window: CollectionWindow,
    stats: IngestStats,
    tweets: Vec<TweetRecord>,
}

impl From<CorpusData> for Corpus {
    fn from(d: CorpusData) -> Self {
        Corpus::from_records(d.window, d.stats, d.tweets)
    }
}

impl From<Corpus> for CorpusData {
    fn from(c: Corpus) -> Self {
        CorpusData { window: c.window, stats: c.stats, tweets: c.tweets }
    }
}

impl Corpus {
    /// Wraps already-labeled records, restoring the canonical order.
    pub fn from_records(window: CollectionWindow, stats: IngestStats, mut tweets: Vec<TweetRecord>) -> Self {
        tweets.sort_by_key(|t| (t.created_at(), t.id()));
        let index = tweets.iter().enumerate().map(|(i, t)| (t.id(), i)).collect();
        Corpus { window, stats, tweets, index }
    }

    pub fn tweets(&self) -> &[TweetRecord] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&TweetRecord> {
        self.index.get(&id).map(|&i| &self.tweets[i])
    }

    pub fn position(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Tweet positions per user, chronological within each user.
    pub fn by_user(&self) -> BTreeMap<u64, Vec<usize>> {
        let mut m: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, t) in self.tweets.iter().enumerate() {
            m.entry(t.user_id()).or_default().push(i);
        }
        m
    }

    /// Latest profile snapshot seen for each user.
    pub fn profiles(&self) -> BTreeMap<u64, &UserProfile> {
        let mut m = BTreeMap::new();
        for t in &self.tweets {
            if let Some(p) = &t.tweet.user {
                m.insert(t.user_id(), p);
            }
        }
        m
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Joins tweets and deletion notices over `window`.
///
/// All events are buffered, so the result does not depend on arrival order.
/// A tweet is deleted iff a notice with its id was observed no later than
/// `delete_end`; the earliest such notice sets the lag.
pub fn build_corpus(events: &[Event], window: CollectionWindow) -> Result<Corpus> {
    build_corpus_with(events, window, DuplicatePolicy::Reject)
}

pub fn build_corpus_with(events: &[Event], window: CollectionWindow, policy: DuplicatePolicy) -> Result<Corpus> {
    let mut stats = IngestStats::default();
    let mut tweets: BTreeMap<u64, &TweetPayload> = BTreeMap::new();
    let mut earliest_delete: BTreeMap<u64, Timestamp> = BTreeMap::new();

    for ev in events {
        match ev {
            Event::Tweet(t) => {
                stats.tweets_in += 1;
                if !window.contains_post(t.created_at) {
                    stats.outside_window += 1;
                    continue;
                }
                match tweets.get(&t.id) {
                    None => {
                        tweets.insert(t.id, t);
                    }
                    Some(existing) => match policy {
                        DuplicatePolicy::Reject => return Err(Error::DuplicateTweet(t.id)),
                        DuplicatePolicy::Skip => {
                            stats.duplicates += 1;
                            let a = serde_json::to_string(existing)?;
                            let b = serde_json::to_string(t)?;
                            if b < a {
                                tweets.insert(t.id, t);
                            }
                        }
                    },
                }
            }
            Event::Delete(d) => {
                stats.deletes_in += 1;
                let slot = earliest_delete.entry(d.id).or_insert(d.observed_at);
                if d.observed_at < *slot {
                    *slot = d.observed_at;
                }
            }
        }
    }

    let mut records: Vec<TweetRecord> = tweets.values().map(|t| TweetRecord::unlabeled((*t).clone())).collect();
    let pos: HashMap<u64, usize> = records.iter().enumerate().map(|(i, r)| (r.id(), i)).collect();

    for ev in events {
        let Event::Delete(d) = ev else { continue };
        if d.observed_at > window.delete_end {
            stats.late_deletes += 1;
        } else if !pos.contains_key(&d.id) {
            stats.orphan_deletes += 1;
        }
    }
    for (id, observed) in &earliest_delete {
        let Some(&i) = pos.get(id) else { continue };
        if *observed > window.delete_end {
            continue;
        }
        let rec = &mut records[i];
        let lag = (*observed - rec.created_at()).num_seconds();
        if lag < 0 {
            stats.clamped_lags += 1;
        }
        rec.deleted = true;
        rec.deletion_lag_sec = Some(lag.max(0) as u64);
        stats.deleted_tweets += 1;
    }

    // incoming links; ids ascend because records are in id order
    for i in 0..records.len() {
        let (id, reply, quote, retweet) = {
            let t = &records[i].tweet;
            (t.id, t.in_reply_to_id, t.quoted_id, t.retweet_of_id)
        };
        if let Some(j) = reply.and_then(|p| pos.get(&p)) {
            records[*j].reply_ids.push(id);
        }
        if let Some(j) = quote.and_then(|p| pos.get(&p)) {
            records[*j].quote_ids.push(id);
        }
        if let Some(j) = retweet.and_then(|p| pos.get(&p)) {
            records[*j].retweet_ids.push(id);
        }
    }

    stats.retained = records.len() as u64;
    Ok(Corpus::from_records(window, stats, records))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use chrono::TimeZone;

    pub fn ts(s: &str) -> Timestamp {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    pub fn profile(user_id: u64) -> UserProfile {
        UserProfile {
            user_id,
            account_created_at: Utc.with_ymd_and_hms(2012, 1, 1, 0, 0, 0).unwrap(),
            profile_customized: true,
            custom_image: true,
            bio_length: 40,
            geo_enabled: false,
            has_location: true,
            has_profile_url: false,
            favourites_count: 10,
            followees_count: 100,
            followers_count: 200,
            listed_count: 3,
            statuses_count: 1000,
            timezone_offset_min: Some(-300),
        }
    }

    pub fn tweet(id: u64, user: u64, at: &str, text: &str) -> TweetPayload {
        let e = extract_entities(text);
        TweetPayload {
            id,
            user_id: user,
            created_at: ts(at),
            text: text.into(),
            lang: "en".into(),
            source: "Twitter Web Client".into(),
            in_reply_to_id: None,
            quoted_id: None,
            retweet_of_id: None,
            hashtags: e.hashtags,
            urls: e.urls,
            mentions: e.mentions,
            has_geo: false,
            user: Some(profile(user)),
        }
    }

    pub fn delete(id: u64, user: u64, at: &str) -> Event {
        Event::Delete(DeletePayload { id, user_id: user, observed_at: ts(at) })
    }

    pub fn window() -> CollectionWindow {
        CollectionWindow::parse("2015-08-03T00:00:00Z", "2015-08-30T23:59:59Z", "2015-09-06T23:59:59Z").unwrap()
    }

    #[test]
    fn parse_delete_and_minimal_tweet() {
        let e = parse_event(r#"{"kind":"delete","id":7,"user_id":3,"observed_at":"2015-08-05T10:00:00Z"}"#, 1).unwrap();
        assert_eq!(e, delete(7, 3, "2015-08-05T10:00:00Z"));
        let e = parse_event(
            r#"{"kind":"tweet","id":1,"user_id":2,"created_at":"2015-08-05T10:00:00Z","text":"hello","extra":5}"#,
            1,
        )
        .unwrap();
        let Event::Tweet(t) = e else { panic!() };
        assert!(t.hashtags.is_empty() && t.urls.is_empty() && t.mentions.is_empty());
        assert_eq!(t.lang, "und");
        assert!(t.user.is_none());
    }

    #[test]
    fn parse_errors_name_the_problem() {
        match parse_event(r#"{"kind":"tweet"}"#, 4) {
            Err(Error::Schema { line: 4, field }) => assert_eq!(field, "id"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_event("{not json", 9), Err(Error::Parse { line: 9, .. })));
        let bad_ts = r#"{"kind":"delete","id":7,"user_id":3,"observed_at":"yesterday"}"#;
        assert!(matches!(parse_event(bad_ts, 1), Err(Error::Schema { field, .. }) if field == "observed_at"));
        let zero = r#"{"kind":"delete","id":0,"user_id":3,"observed_at":"2015-08-05T10:00:00Z"}"#;
        assert!(matches!(parse_event(zero, 1), Err(Error::Schema { field, .. }) if field == "id"));
        let bad_user = r#"{"kind":"tweet","id":1,"user_id":2,"created_at":"2015-08-05T10:00:00Z","text":"x","user":{"user_id":2}}"#;
        assert!(matches!(parse_event(bad_user, 1), Err(Error::Schema { field, .. }) if field.starts_with("user")));
    }

    #[test]
    fn entities_extracted_when_absent() {
        let line = r#"{"kind":"tweet","id":1,"user_id":2,"created_at":"2015-08-05T10:00:00Z","text":"@amy see #this http://t.co/x"}"#;
        let Event::Tweet(t) = parse_event(line, 1).unwrap() else { panic!() };
        assert_eq!(t.mentions, vec!["amy"]);
        assert_eq!(t.hashtags, vec!["this"]);
        assert_eq!(t.urls, vec!["http://t.co/x"]);
    }

    #[test]
    fn wire_round_trip() {
        let ev = Event::Tweet(tweet(5, 9, "2015-08-05T23:10:00Z", "hi #x"));
        let line = ev.to_json_line();
        assert!(line.starts_with(r#"{"kind":"tweet","id":5"#));
        assert_eq!(parse_event(&line, 1).unwrap(), ev);
    }

    #[test]
    fn join_semantics() {
        let events = vec![
            Event::Tweet(tweet(1, 10, "2015-08-05T10:00:00Z", "a")),
            delete(1, 10, "2015-08-05T10:05:00Z"),
            Event::Tweet(tweet(2, 10, "2015-08-29T10:00:00Z", "b")),
            delete(2, 10, "2015-09-07T10:00:00Z"),
            delete(99, 10, "2015-08-06T10:00:00Z"),
            Event::Tweet(tweet(3, 11, "2015-07-01T10:00:00Z", "old")),
        ];
        let c = build_corpus(&events, window()).unwrap();
        assert_eq!(c.len(), 2);
        let t1 = c.get(1).unwrap();
        assert!(t1.deleted);
        assert_eq!(t1.deletion_lag_sec, Some(300));
        let t2 = c.get(2).unwrap();
        assert!(!t2.deleted && t2.deletion_lag_sec.is_none());
        assert_eq!(c.stats.orphan_deletes, 1);
        assert_eq!(c.stats.late_deletes, 1);
        assert_eq!(c.stats.outside_window, 1);
        assert_eq!(c.stats.tweets_in, c.stats.retained + c.stats.outside_window + c.stats.duplicates);
    }

    #[test]
    fn duplicates_and_clamping() {
        let a = Event::Tweet(tweet(1, 10, "2015-08-05T10:00:00Z", "a"));
        assert!(matches!(build_corpus(&[a.clone(), a.clone()], window()), Err(Error::DuplicateTweet(1))));
        let c = build_corpus_with(&[a.clone(), a.clone()], window(), DuplicatePolicy::Skip).unwrap();
        assert_eq!((c.stats.retained, c.stats.duplicates), (1, 1));
        let early = delete(1, 10, "2015-08-05T09:00:00Z");
        let c = build_corpus(&[early, a], window()).unwrap();
        assert_eq!(c.get(1).unwrap().deletion_lag_sec, Some(0));
        assert_eq!(c.stats.clamped_lags, 1);
    }

    #[test]
    fn response_links_and_order_independence() {
        let mut r = tweet(2, 11, "2015-08-05T10:01:00Z", "@x reply");
        r.in_reply_to_id = Some(1);
        let mut q = tweet(3, 12, "2015-08-05T10:02:00Z", "quote");
        q.quoted_id = Some(1);
        let mut rt = tweet(4, 13, "2015-08-05T10:03:00Z", "RT");
        rt.retweet_of_id = Some(1);
        let mut events = vec![
            Event::Tweet(tweet(1, 10, "2015-08-05T10:00:00Z", "orig")),
            Event::Tweet(r),
            Event::Tweet(q),
            Event::Tweet(rt),
            delete(1, 10, "2015-08-05T12:00:00Z"),
            delete(1, 10, "2015-08-05T11:00:00Z"),
        ];
        let c = build_corpus(&events, window()).unwrap();
        let o = c.get(1).unwrap();
        assert_eq!((o.reply_ids.clone(), o.quote_ids.clone(), o.retweet_ids.clone()), (vec![2], vec![3], vec![4]));
        assert_eq!(o.deletion_lag_sec, Some(3600));
        events.reverse();
        assert_eq!(build_corpus(&events, window()).unwrap(), c);
        let json = c.to_json().unwrap();
        assert_eq!(Corpus::from_json(&json).unwrap(), c);
    }

    #[test]
    fn window_validation() {
        assert!(CollectionWindow::parse("2015-08-03T00:00:00Z", "2015-08-01T00:00:00Z", "2015-09-01T00:00:00Z").is_err());
        assert!((window().post_days() - 27.99998842).abs() < 1e-6);
    }
}
