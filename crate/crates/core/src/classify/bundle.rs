use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use super::pipeline::{prepare_rows, FittedPipeline, TrainConfig};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::features::TextResources;
use crate::ingest::{build_corpus_with, CollectionWindow, DuplicatePolicy, Event, Timestamp};

const MAGIC: &[u8; 4] = b"RSB1";
const VERSION: u32 = 1;
/// Float arrays at least this long move out of the manifest into the binary section.
const MIN_PACKED_LEN: usize = 8;
const ARRAY_REF: &str = "$f64";

/// A trained pipeline with the configuration and seed that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub config: TrainConfig,
    pub seed: u64,
    /// Reference instant for account age, the end of the training posting window.
    pub post_end: Timestamp,
    pub pipeline: FittedPipeline,
}

impl ModelBundle {
    /// Writes `RSB1`, version, the JSON manifest, then the packed arrays, all little-endian.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let mut arrays = Vec::new();
        let manifest = pack(serde_json::to_value(self)?, &mut arrays);
        let bytes = serde_json::to_vec(&manifest)?;
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(bytes.len() as u64).to_le_bytes())?;
        w.write_all(&bytes)?;
        w.write_all(&(arrays.len() as u64).to_le_bytes())?;
        for a in &arrays {
            w.write_all(&(a.len() as u64).to_le_bytes())?;
            for x in a {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not an RSB1 model bundle".into()));
        }
        let version = u32::from_le_bytes(read_array(&mut r)?);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported bundle version {version}")));
        }
        let len = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let mut bytes = vec![0u8; len];
        r.read_exact(&mut bytes)?;
        let manifest: Value = serde_json::from_slice(&bytes)?;
        let n_arrays = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let mut arrays = Vec::with_capacity(n_arrays);
        for _ in 0..n_arrays {
            let n = u64::from_le_bytes(read_array(&mut r)?) as usize;
            let a = (0..n).map(|_| read_array(&mut r).map(f64::from_le_bytes)).collect::<std::io::Result<Vec<_>>>()?;
            arrays.push(a);
        }
        let value = unpack(manifest, &arrays)?;
        Ok(serde_json::from_value(value)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        ModelBundle::read_from(bytes)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_bytes()?)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        ModelBundle::from_bytes(&std::fs::read(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: u64,
    pub user_id: u64,
    /// Stage-2 decision value; positive means predicted deleted.
    pub score: f64,
    pub predicted_deleted: bool,
    /// Whether the stream itself carries a deletion notice for the tweet.
    pub observed_deleted: bool,
}

/// Scores every original (non-retweet) tweet in `events`.
///
/// Replies, quotes and retweets among the events are linked to their targets
/// first, so a bundle trained with response features sees them. Account age
/// is measured against the training window's end stored in the bundle.
pub fn predict_events(bundle: &ModelBundle, events: &[Event], res: &TextResources, exec: Exec) -> Result<Vec<Prediction>> {
    let times: Vec<Timestamp> = events
        .iter()
        .filter_map(|e| match e {
            Event::Tweet(t) => Some(t.created_at),
            Event::Delete(_) => None,
        })
        .collect();
    let (Some(&first), Some(&last)) = (times.iter().min(), times.iter().max()) else {
        return Ok(Vec::new());
    };
    let end = last + chrono::Duration::seconds(1);
    let window = CollectionWindow {
        post_start: first,
        post_end: end,
        delete_end: Timestamp::MAX_UTC,
    };
    let corpus = build_corpus_with(events, window, DuplicatePolicy::Skip)?;
    let picks: Vec<(usize, bool)> = corpus
        .tweets()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.tweet.retweet_of_id.is_none())
        .map(|(i, t)| (i, t.deleted))
        .collect();
    let with_responses = bundle.pipeline.with_responses;
    let rows = prepare_rows(&corpus, &picks, res, with_responses, bundle.post_end, exec)?;
    let refs: Vec<_> = rows.iter().collect();
    let scores = bundle.pipeline.decisions(&refs)?;
    Ok(picks
        .iter()
        .zip(scores)
        .map(|(&(i, observed), score)| {
            let t = &corpus.tweets()[i];
            Prediction {
                id: t.id(),
                user_id: t.user_id(),
                score,
                predicted_deleted: score > 0.0,
                observed_deleted: observed,
            }
        })
        .collect())
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> std::io::Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn pack(v: Value, arrays: &mut Vec<Vec<f64>>) -> Value {
    match v {
        Value::Array(items) if items.len() >= MIN_PACKED_LEN && items.iter().all(|x| x.as_number().is_some_and(Number::is_f64)) => {
            arrays.push(items.iter().filter_map(Value::as_f64).collect());
            let mut m = Map::new();
            m.insert(ARRAY_REF.into(), Value::from(arrays.len() - 1));
            Value::Object(m)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(|x| pack(x, arrays)).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, x)| (k, pack(x, arrays))).collect()),
        other => other,
    }
}

fn unpack(v: Value, arrays: &[Vec<f64>]) -> Result<Value> {
    Ok(match v {
        Value::Object(m) if m.len() == 1 && m.contains_key(ARRAY_REF) => {
            let k = m[ARRAY_REF].as_u64().ok_or_else(|| Error::Format("bad array reference".into()))? as usize;
            let a = arrays.get(k).ok_or_else(|| Error::Format(format!("missing array {k}")))?;
            Value::Array(
                a.iter()
                    .map(|&x| Number::from_f64(x).map(Value::Number).ok_or_else(|| Error::Format("non-finite value".into())))
                    .collect::<Result<_>>()?,
            )
        }
        Value::Array(items) => Value::Array(items.into_iter().map(|x| unpack(x, arrays)).collect::<Result<_>>()?),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, x)| Ok((k, unpack(x, arrays)?))).collect::<Result<_>>()?),
        other => other,
    })
}
