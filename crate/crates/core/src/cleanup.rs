//! The four-filter cleanup cascade: non-English, automated clients,
//! retweets, then superficial (typo-fix) deletions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::ingest::{Corpus, TweetRecord};
use crate::textkit::{cosine_of_counts, edit_distance, term_counts};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleanupConfig {
    pub language_tag: String,
    pub client_whitelist: BTreeSet<String>,
    pub superficial_lookahead: usize,
    /// Followups strictly closer than this edit distance are near-duplicates.
    pub edit_distance_max: usize,
    /// Followups with term cosine strictly above this are near-duplicates.
    pub cosine_min: f64,
}

impl Default for CleanupConfig {
    fn default() -> Self {
        CleanupConfig {
            language_tag: "en".into(),
            client_whitelist: parse_whitelist(crate::fixtures::WHITELIST_TXT),
            superficial_lookahead: 3,
            edit_distance_max: 5,
            cosine_min: 0.6,
        }
    }
}

impl CleanupConfig {
    pub fn validate(&self) -> Result<()> {
        if self.client_whitelist.is_empty() {
            return Err(Error::Config("client whitelist is empty; every tweet would be dropped".into()));
        }
        if self.superficial_lookahead == 0 {
            return Err(Error::Config("superficial_lookahead must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.cosine_min) {
            return Err(Error::Config("cosine_min must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// One client name per line, matched exactly; blank lines skipped.
pub fn parse_whitelist(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect()
}

fn near_duplicate(
    deleted_text: &str,
    deleted_terms: &BTreeMap<String, u64>,
    followup: &str,
    cfg: &CleanupConfig,
) -> bool {
    edit_distance(deleted_text, followup) < cfg.edit_distance_max
        || cosine_of_counts(deleted_terms, &term_counts(followup)) > cfg.cosine_min
}

/// True iff one of the first `superficial_lookahead` followups is a near-duplicate.
pub fn detect_superficial(deleted: &TweetRecord, followups: &[&TweetRecord], cfg: &CleanupConfig) -> bool {
    let terms = term_counts(&deleted.tweet.text);
    followups
        .iter()
        .take(cfg.superficial_lookahead)
        .any(|f| near_duplicate(&deleted.tweet.text, &terms, &f.tweet.text, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CleanupStage {
    NonEnglish,
    Automated,
    Retweet,
    Superficial,
}

impl CleanupStage {
    pub const ORDER: [CleanupStage; 4] = [
        CleanupStage::NonEnglish,
        CleanupStage::Automated,
        CleanupStage::Retweet,
        CleanupStage::Superficial,
    ];

    pub fn title(self) -> &'static str {
        match self {
            CleanupStage::NonEnglish => "Non-english tweets",
            CleanupStage::Automated => "Automated tweets",
            CleanupStage::Retweet => "Retweets",
            CleanupStage::Superficial => "Superficial deletions",
        }
    }
}

/// Tweet and user tallies of one slice of the corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub tweets: u64,
    pub deleted: u64,
    pub users: u64,
    pub deleting_users: u64,
}

impl Tally {
    pub fn of<'a>(tweets: impl IntoIterator<Item = &'a TweetRecord>) -> Self {
        let mut t = Tally::default();
        let mut users = BTreeSet::new();
        let mut deleters = BTreeSet::new();
        for r in tweets {
            t.tweets += 1;
            users.insert(r.user_id());
            if r.deleted {
                t.deleted += 1;
                deleters.insert(r.user_id());
            }
        }
        t.users = users.len() as u64;
        t.deleting_users = deleters.len() as u64;
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: CleanupStage,
    pub removed: Tally,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanupReport {
    pub before: Tally,
    pub stages: Vec<StageReport>,
    pub after: Tally,
    /// Detection passes until no further superficial deletions were found.
    pub superficial_passes: usize,
}

impl CleanupReport {
    pub fn removed(&self, stage: CleanupStage) -> Tally {
        self.stages
            .iter()
            .find(|s| s.stage == stage)
            .map(|s| s.removed)
            .unwrap_or_default()
    }

    /// Removal counts in cascade order.
    pub fn stage_counts(&self) -> [u64; 4] {
        CleanupStage::ORDER.map(|s| self.removed(s).tweets)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Plain-text table in the layout of a dataset-accounting table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let pct = |a: u64, b: u64| if b == 0 { 0.0 } else { 100.0 * a as f64 / b as f64 };
        let block = |out: &mut String, title: &str, t: &Tally, with_deleted: bool| {
            let _ = writeln!(out, "{title}");
            let _ = writeln!(out, "  # Tweets posted                      {:>12}", t.tweets);
            if with_deleted {
                let _ = writeln!(
                    out,
                    "  # Tweets deleted                     {:>12} ({:.2}%)",
                    t.deleted,
                    pct(t.deleted, t.tweets)
                );
            }
            let _ = writeln!(out, "  # Users who posted at-least 1 tweet  {:>12}", t.users);
            if with_deleted {
                let _ = writeln!(
                    out,
                    "  # Users who deleted at-least 1 tweet {:>12} ({:.2}%)",
                    t.deleting_users,
                    pct(t.deleting_users, t.users)
                );
            }
        };
        block(&mut out, "Dataset before cleanup", &self.before, true);
        for s in &self.stages {
            block(&mut out, s.stage.title(), &s.removed, s.stage != CleanupStage::Superficial);
        }
        block(&mut out, "Dataset after cleanup", &self.after, true);
        out
    }
}

fn stage_of(t: &TweetRecord, cfg: &CleanupConfig) -> Option<CleanupStage> {
    if t.tweet.lang != cfg.language_tag {
        Some(CleanupStage::NonEnglish)
    } else if !cfg.client_whitelist.contains(&t.tweet.source) {
        Some(CleanupStage::Automated)
    } else if t.tweet.retweet_of_id.is_some() {
        Some(CleanupStage::Retweet)
    } else {
        None
    }
}

/// Positions (into `timeline`) of deleted tweets whose next followups include a near-duplicate.
fn superficial_in_timeline(timeline: &[&TweetRecord], cfg: &CleanupConfig) -> Vec<usize> {
    timeline
        .iter()
        .enumerate()
        .filter(|(i, t)| {
            t.deleted && {
                let end = (i + 1 + cfg.superficial_lookahead).min(timeline.len());
                detect_superficial(t, &timeline[i + 1..end], cfg)
            }
        })
        .map(|(i, _)| i)
        .collect()
}

pub fn run_cleanup(corpus: &Corpus, cfg: &CleanupConfig) -> Result<(Corpus, CleanupReport)> {
    run_cleanup_with(corpus, cfg, Exec::default())
}

/// Applies the cascade. Superficial detection runs on each user's timeline
/// after the first three filters and is repeated until no new superficial
/// deletion appears, which makes the cleanup idempotent.
pub fn run_cleanup_with(corpus: &Corpus, cfg: &CleanupConfig, exec: Exec) -> Result<(Corpus, CleanupReport)> {
    cfg.validate()?;
    let tweets = corpus.tweets();
    let mut removed_by: Vec<Option<CleanupStage>> = tweets.iter().map(|t| stage_of(t, cfg)).collect();

    let mut timelines: Vec<Vec<usize>> = corpus
        .by_user()
        .into_values()
        .map(|idx| idx.into_iter().filter(|&i| removed_by[i].is_none()).collect::<Vec<_>>())
        .filter(|v: &Vec<usize>| v.iter().any(|&i| tweets[i].deleted))
        .collect();

    let mut passes = 0;
    loop {
        passes += 1;
        let found: Vec<Vec<usize>> = exec.map(&timelines, |tl| {
            let recs: Vec<&TweetRecord> = tl.iter().map(|&i| &tweets[i]).collect();
            superficial_in_timeline(&recs, cfg).into_iter().map(|p| tl[p]).collect()
        });
        let mut any = false;
        for (tl, hits) in timelines.iter_mut().zip(&found) {
            if hits.is_empty() {
                continue;
            }
            any = true;
            for &i in hits {
                removed_by[i] = Some(CleanupStage::Superficial);
            }
            tl.retain(|i| !hits.contains(i));
        }
        if !any {
            break;
        }
    }

    let stages = CleanupStage::ORDER
        .iter()
        .map(|&stage| StageReport {
            stage,
            removed: Tally::of(
                tweets
                    .iter()
                    .zip(&removed_by)
                    .filter(|(_, r)| **r == Some(stage))
                    .map(|(t, _)| t),
            ),
        })
        .collect();
    let kept: Vec<TweetRecord> = tweets
        .iter()
        .zip(&removed_by)
        .filter(|(_, r)| r.is_none())
        .map(|(t, _)| t.clone())
        .collect();
    let report = CleanupReport {
        before: Tally::of(tweets),
        stages,
        after: Tally::of(&kept),
        superficial_passes: passes,
    };
    Ok((Corpus::from_records(corpus.window, corpus.stats, kept), report))
}
