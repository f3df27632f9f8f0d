use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{Corpus, TweetRecord};

/// Draws equal numbers of deleted and non-deleted tweets from the same users.
///
/// Users are visited in a seeded random order; each contributes
/// `min(deleted, non-deleted)` pairs chosen at random among the tweets
/// passing `keep`. `n_per_class = None` takes every available pair.
/// Returns `(corpus position, deleted)` pairs.
pub fn balanced_sample(
    corpus: &Corpus,
    n_per_class: Option<usize>,
    seed: u64,
    keep: impl Fn(&TweetRecord) -> bool,
) -> Result<Vec<(usize, bool)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut users: Vec<Vec<usize>> = corpus.by_user().into_values().collect();
    users.shuffle(&mut rng);
    let tweets = corpus.tweets();
    let mut out = Vec::new();
    let mut taken = 0usize;
    for idx in users {
        if n_per_class.is_some_and(|n| taken >= n) {
            break;
        }
        let (mut del, mut non): (Vec<usize>, Vec<usize>) =
            idx.into_iter().filter(|&i| keep(&tweets[i])).partition(|&i| tweets[i].deleted);
        del.shuffle(&mut rng);
        non.shuffle(&mut rng);
        let mut k = del.len().min(non.len());
        if let Some(n) = n_per_class {
            k = k.min(n - taken);
        }
        for j in 0..k {
            out.push((del[j], true));
            out.push((non[j], false));
        }
        taken += k;
    }
    if let Some(n) = n_per_class {
        if taken < n {
            return Err(Error::Insufficient(format!(
                "requested {n} tweets per class but only {taken} same-user pairs exist"
            )));
        }
    }
    if taken == 0 {
        return Err(Error::Insufficient("no user has both deleted and non-deleted tweets".into()));
    }
    Ok(out)
}
