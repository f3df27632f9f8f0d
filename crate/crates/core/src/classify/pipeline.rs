use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bundle::ModelBundle;
use super::cv::{grid_search_cv, stratified_folds, CvReport};
use super::metrics::{evaluate, EvalMetrics};
use super::sample::balanced_sample;
use super::stage1::{derived_feature, train_stage1, Stage1Hyper, Stage1Model};
use super::stage2::{train_stage2, Stage2Hyper, Stage2Model};
use super::{derive_seed, DenseMatrix};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::features::{
    dense_from_view, open_text_vector, response_features_in, FeatureGroup, SparseVec, TextResources, Vocabulary,
    DENSE_DIMS, RESPONSE_DIMS, SLOT_DERIVED,
};
use crate::ingest::{Corpus, Timestamp};
use crate::textkit::TokenList;

/// One point of the hyperparameter grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HyperCell {
    pub stage1: Stage1Hyper,
    pub stage2: Stage2Hyper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Tweets per class; `None` uses every same-user pair.
    pub n_per_class: Option<usize>,
    pub test_fraction: f64,
    /// Inner folds producing out-of-fold derived features for training rows.
    pub derived_folds: usize,
    /// Cross-validation folds for the grid search; below 2 skips it.
    pub cv_folds: usize,
    pub stage1: Stage1Hyper,
    pub stage2: Stage2Hyper,
    /// Cells searched by cross-validation; empty means just `stage1`/`stage2`.
    pub grid: Vec<HyperCell>,
    /// Sample only tweets that received at least one reply.
    pub restrict_to_replied: bool,
    /// Append the response-time block to the dense features.
    pub with_responses: bool,
    /// Feature groups zeroed and excluded from training.
    pub mask: Vec<FeatureGroup>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_per_class: None,
            test_fraction: 0.2,
            derived_folds: 5,
            cv_folds: 10,
            stage1: Stage1Hyper::default(),
            stage2: Stage2Hyper::default(),
            grid: Vec::new(),
            restrict_to_replied: false,
            with_responses: false,
            mask: Vec::new(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config("test_fraction must lie strictly between 0 and 1".into()));
        }
        if self.derived_folds < 2 {
            return Err(Error::Config("derived_folds must be at least 2".into()));
        }
        if self.with_responses && !self.restrict_to_replied {
            return Err(Error::Config("with_responses requires restrict_to_replied".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<HyperCell> {
        if self.grid.is_empty() {
            vec![HyperCell { stage1: self.stage1, stage2: self.stage2 }]
        } else {
            self.grid.clone()
        }
    }

    /// Turns on response mode, which also restricts sampling to replied tweets.
    pub fn with_response_mode(mut self) -> Self {
        self.restrict_to_replied = true;
        self.with_responses = true;
        self
    }

    fn active_columns(&self, mask: &[FeatureGroup]) -> Vec<bool> {
        let width = DENSE_DIMS + if self.with_responses { RESPONSE_DIMS } else { 0 };
        let mut active = vec![true; width];
        for g in mask {
            for j in g.dense_range() {
                active[j] = false;
            }
        }
        active
    }
}

/// A sampled tweet ready for either stage.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedRow {
    pub id: u64,
    pub label: bool,
    pub tokens: TokenList,
    /// Dense block with the derived slot still at 0.0.
    pub dense: Vec<f64>,
    pub response: Option<Vec<f64>>,
}

pub fn prepare_rows(
    corpus: &Corpus,
    picks: &[(usize, bool)],
    res: &TextResources,
    with_responses: bool,
    post_end: Timestamp,
    exec: Exec,
) -> Result<Vec<PreparedRow>> {
    let profiles = corpus.profiles();
    exec.try_map_range(picks.len(), |k| {
        let (pos, label) = picks[k];
        let t = &corpus.tweets()[pos];
        let view = res.analyze(t.id(), &t.tweet.text)?;
        let profile = t.tweet.user.as_ref().or_else(|| profiles.get(&t.user_id()).copied());
        let dense = dense_from_view(t, &view, profile, post_end)?;
        let response = if with_responses { Some(response_features_in(t, corpus, res)?) } else { None };
        Ok(PreparedRow { id: t.id(), label, tokens: view.tokens, dense, response })
    })
}

/// Vocabulary, both stages and the column mask of one trained pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub cell: HyperCell,
    pub vocab: Vocabulary,
    pub stage1: Stage1Model,
    pub stage2: Stage2Model,
    pub active: Vec<bool>,
    pub with_responses: bool,
}

/// Stage-2 input: dense block with the derived slot set, plus the response block if used.
fn assemble(row: &PreparedRow, derived: f64, with_responses: bool) -> Result<Vec<f64>> {
    let mut v = row.dense.clone();
    v[SLOT_DERIVED] = derived;
    if with_responses {
        let r = row
            .response
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("tweet {} lacks response features", row.id)))?;
        v.extend_from_slice(r);
    }
    Ok(v)
}

impl FittedPipeline {
    /// Stage-2 decision values; positive means predicted deleted.
    pub fn decisions(&self, rows: &[&PreparedRow]) -> Result<Vec<f64>> {
        rows.iter()
            .map(|r| {
                let x = open_text_vector(&r.tokens, &self.vocab);
                let d = derived_feature(&self.stage1, &x)?;
                Ok(self.stage2.decision(&assemble(r, d, self.with_responses)?))
            })
            .collect()
    }
}

/// Trains both stages on `rows`.
///
/// Training rows get their derived feature from stage-1 models fit on the
/// other inner folds, so stage 2 never sees a score for a text its stage-1
/// model was trained on.
pub(crate) fn fit_pipeline(rows: &[&PreparedRow], cell: HyperCell, cfg: &TrainConfig, seed: u64) -> Result<FittedPipeline> {
    let vocab = Vocabulary::from_documents(rows.iter().map(|r| &r.tokens))?;
    let xs: Vec<SparseVec> = rows.iter().map(|r| open_text_vector(&r.tokens, &vocab)).collect();
    let y: Vec<bool> = rows.iter().map(|r| r.label).collect();
    let dim = vocab.len();
    let stage1 = train_stage1(&xs, &y, dim, cell.stage1, derive_seed(seed, 0))?;
    let mut derived = vec![0.0; rows.len()];
    if !cfg.mask.contains(&FeatureGroup::DerivedOpenText) {
        let inner = stratified_folds(&y, cfg.derived_folds, derive_seed(seed, 1))?;
        for f in 0..cfg.derived_folds {
            let (fit_x, fit_y): (Vec<SparseVec>, Vec<bool>) =
                (0..rows.len()).filter(|&i| inner[i] != f).map(|i| (xs[i].clone(), y[i])).unzip();
            let m = train_stage1(&fit_x, &fit_y, dim, cell.stage1, derive_seed(seed, 2 + f as u64))?;
            for i in (0..rows.len()).filter(|&i| inner[i] == f) {
                derived[i] = derived_feature(&m, &xs[i])?;
            }
        }
    }
    let active = cfg.active_columns(&cfg.mask);
    let dense: Vec<Vec<f64>> =
        rows.iter().zip(&derived).map(|(r, &d)| assemble(r, d, cfg.with_responses)).collect::<Result<_>>()?;
    let stage2 = train_stage2(&DenseMatrix::from_rows(&dense), &y, &active, cell.stage2)?;
    Ok(FittedPipeline { cell, vocab, stage1, stage2, active, with_responses: cfg.with_responses })
}

fn split_train_test(rows: &[PreparedRow], fraction: f64, seed: u64) -> Result<(Vec<&PreparedRow>, Vec<&PreparedRow>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_test = vec![false; rows.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].label == class).collect();
        idx.shuffle(&mut rng);
        let n_test = (idx.len() as f64 * fraction).round() as usize;
        if n_test == 0 || n_test >= idx.len() {
            return Err(Error::Insufficient(format!(
                "{} rows per class cannot be split with test fraction {fraction}",
                idx.len()
            )));
        }
        for &i in &idx[..n_test] {
            is_test[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (r, &t) in rows.iter().zip(&is_test) {
        if t {
            test.push(r);
        } else {
            train.push(r);
        }
    }
    Ok((train, test))
}

/// Metrics of a trained model, identical for identical inputs and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub cell: HyperCell,
    pub cross_validation: Option<CvReport>,
    pub held_out: EvalMetrics,
    pub stage2_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub bundle: ModelBundle,
    pub report: TrainReport,
}

struct Prepared {
    rows: Vec<PreparedRow>,
}

fn prepare(corpus: &Corpus, cfg: &TrainConfig, seed: u64, res: &TextResources, exec: Exec) -> Result<Prepared> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::InvalidInput("cannot train on an empty corpus".into()));
    }
    let replied_only = cfg.restrict_to_replied;
    let picks = balanced_sample(corpus, cfg.n_per_class, derive_seed(seed, 10), |t| {
        !replied_only || !t.reply_ids.is_empty()
    })?;
    let rows = prepare_rows(corpus, &picks, res, cfg.with_responses, corpus.window.post_end, exec)?;
    Ok(Prepared { rows })
}

/// Samples, splits, optionally grid-searches, then fits the final model on
/// the training split and scores it on the held-out split.
pub fn two_stage_train(corpus: &Corpus, cfg: &TrainConfig, seed: u64, res: &TextResources, exec: Exec) -> Result<TrainOutcome> {
    let prepared = prepare(corpus, cfg, seed, res, exec)?;
    let (train, test) = split_train_test(&prepared.rows, cfg.test_fraction, derive_seed(seed, 11))?;
    let cells = cfg.cells();
    let cv = if cfg.cv_folds >= 2 {
        let owned: Vec<PreparedRow> = train.iter().map(|r| (*r).clone()).collect();
        Some(grid_search_cv(&owned, &cells, cfg.cv_folds, cfg, derive_seed(seed, 12), exec)?)
    } else {
        None
    };
    let cell = cv.as_ref().map_or(cells[0], |r| r.best_cell().cell);
    let pipeline = fit_pipeline(&train, cell, cfg, derive_seed(seed, 13))?;
    let held_out = score(&pipeline, &test)?;
    let stage2_note = match &pipeline.stage2 {
        Stage2Model::Adaboost { boost, .. } => boost.stopped_early.clone(),
        Stage2Model::RbfSvm { .. } => None,
    };
    let report = TrainReport {
        seed,
        train_rows: train.len(),
        test_rows: test.len(),
        cell,
        cross_validation: cv,
        held_out,
        stage2_note,
    };
    let bundle = ModelBundle { config: cfg.clone(), seed, post_end: corpus.window.post_end, pipeline };
    Ok(TrainOutcome { bundle, report })
}

fn score(p: &FittedPipeline, rows: &[&PreparedRow]) -> Result<EvalMetrics> {
    let pred: Vec<bool> = p.decisions(rows)?.into_iter().map(|d| d > 0.0).collect();
    let truth: Vec<bool> = rows.iter().map(|r| r.label).collect();
    evaluate(&pred, &truth)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub group: FeatureGroup,
    pub metrics: EvalMetrics,
    pub delta_precision: f64,
    pub delta_recall: f64,
    pub delta_f1: f64,
    /// F1 change as a percentage of the baseline F1.
    pub relative_f1_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub seed: u64,
    pub cell: HyperCell,
    pub baseline: EvalMetrics,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    /// Group whose removal costs the most F1.
    pub fn largest_drop(&self) -> Option<FeatureGroup> {
        self.rows
            .iter()
            .min_by(|a, b| a.delta_f1.total_cmp(&b.delta_f1))
            .map(|r| r.group)
    }
}

/// Retrains with each group masked in turn on the same sample and split.
pub fn ablate(
    corpus: &Corpus,
    cfg: &TrainConfig,
    groups: &[FeatureGroup],
    seed: u64,
    res: &TextResources,
    exec: Exec,
) -> Result<AblationReport> {
    let groups: Vec<FeatureGroup> = groups.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let prepared = prepare(corpus, cfg, seed, res, exec)?;
    let (train, test) = split_train_test(&prepared.rows, cfg.test_fraction, derive_seed(seed, 11))?;
    let cell = cfg.cells()[0];
    let results = exec.try_map_range(groups.len() + 1, |k| -> Result<EvalMetrics> {
        let mut c = cfg.clone();
        if k > 0 && !c.mask.contains(&groups[k - 1]) {
            c.mask.push(groups[k - 1]);
        }
        let p = fit_pipeline(&train, cell, &c, derive_seed(seed, 13))?;
        score(&p, &test)
    })?;
    let baseline = results[0];
    let rows = groups
        .iter()
        .zip(&results[1..])
        .map(|(&group, m)| {
            let delta_f1 = m.f1 - baseline.f1;
            AblationRow {
                group,
                metrics: *m,
                delta_precision: m.precision - baseline.precision,
                delta_recall: m.recall - baseline.recall,
                delta_f1,
                relative_f1_pct: if baseline.f1 > 0.0 { 100.0 * delta_f1 / baseline.f1 } else { 0.0 },
            }
        })
        .collect();
    Ok(AblationReport { seed, cell, baseline, rows })
}
