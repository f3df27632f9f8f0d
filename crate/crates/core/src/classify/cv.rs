use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, EvalMetrics};
use super::pipeline::{fit_pipeline, HyperCell, PreparedRow, TrainConfig};
use super::derive_seed;
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Fold number per row; each class is shuffled and dealt round-robin.
pub fn stratified_folds(y: &[bool], k: usize, seed: u64) -> Result<Vec<usize>> {
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    if k < 2 || k > pos.len() || k > neg.len() {
        return Err(Error::InvalidInput(format!(
            "{k} folds need 2 ≤ k ≤ rows per class ({} / {})",
            pos.len(),
            neg.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; y.len()];
    for mut class in [pos, neg] {
        class.shuffle(&mut rng);
        for (r, i) in class.into_iter().enumerate() {
            fold[i] = r % k;
        }
    }
    Ok(fold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub cell: HyperCell,
    pub mean: EvalMetrics,
    pub fold_f1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub cells: Vec<CvCell>,
    pub best: usize,
}

impl CvReport {
    pub fn best_cell(&self) -> &CvCell {
        &self.cells[self.best]
    }
}

/// Stratified k-fold search picking the cell with the highest mean F1.
///
/// The whole pipeline, including the stage-1 model behind the derived
/// feature, is refit inside each training fold.
pub fn grid_search_cv(
    rows: &[PreparedRow],
    grid: &[HyperCell],
    k: usize,
    cfg: &TrainConfig,
    seed: u64,
    exec: Exec,
) -> Result<CvReport> {
    if grid.is_empty() {
        return Err(Error::Config("hyperparameter grid is empty".into()));
    }
    let y: Vec<bool> = rows.iter().map(|r| r.label).collect();
    let fold = stratified_folds(&y, k, seed)?;
    let results = exec.try_map_range(grid.len() * k, |job| -> Result<EvalMetrics> {
        let (c, f) = (job / k, job % k);
        let train: Vec<&PreparedRow> = rows.iter().zip(&fold).filter(|(_, &g)| g != f).map(|(r, _)| r).collect();
        let test: Vec<&PreparedRow> = rows.iter().zip(&fold).filter(|(_, &g)| g == f).map(|(r, _)| r).collect();
        let model = fit_pipeline(&train, grid[c], cfg, derive_seed(seed, job as u64))?;
        let pred: Vec<bool> = model.decisions(&test)?.into_iter().map(|d| d > 0.0).collect();
        let truth: Vec<bool> = test.iter().map(|r| r.label).collect();
        evaluate(&pred, &truth)
    })?;
    let cells: Vec<CvCell> = grid
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let per = &results[c * k..(c + 1) * k];
            CvCell { cell: *cell, mean: EvalMetrics::mean(per), fold_f1: per.iter().map(|m| m.f1).collect() }
        })
        .collect();
    let mut best = 0;
    for (i, c) in cells.iter().enumerate() {
        if c.mean.f1 > cells[best].mean.f1 {
            best = i;
        }
    }
    Ok(CvReport { folds: k, cells, best })
}
