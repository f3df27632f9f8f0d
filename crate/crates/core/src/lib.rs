//! Deleted-tweet analytics and deletion prediction.
//!
//! The pipeline runs in stages that each consume the previous stage's output:
//! [`ingest`] joins a tweet/deletion event stream into a labeled [`Corpus`],
//! [`cleanup`] removes non-English, automated, retweeted and superficially
//! deleted tweets, [`analytics`] compares deleted with non-deleted tweets and
//! deleters with non-deleters, and [`classify`] trains the two-stage deletion
//! classifier on [`features`]. [`synth`] produces seeded event streams with a
//! ground-truth ledger for end-to-end checks.

pub mod analytics;
pub mod classify;
pub mod cleanup;
pub mod error;
pub mod exec;
pub mod features;
pub mod fixtures;
pub mod ingest;
pub mod stats;
pub mod synth;
pub mod textkit;

pub use error::{Error, Result};
pub use exec::Exec;
pub use ingest::{CollectionWindow, Corpus, Event, TweetRecord, UserProfile};
