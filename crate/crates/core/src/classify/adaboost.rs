use serde::{Deserialize, Serialize};

use super::tree::{fit_tree, DecisionTree, SortedColumns};
use super::{check_labels, DenseMatrix};
use crate::error::{Error, Result};

/// Error floor used to cap the weight of a perfect round.
const MIN_ERROR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostRound {
    pub tree: DecisionTree,
    pub weight: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub max_depth: usize,
    pub rounds: usize,
    pub stages: Vec<BoostRound>,
    /// Set when boosting ended before `rounds`; says why.
    pub stopped_early: Option<String>,
    /// Product of the per-round weight normalizers: a bound on training error.
    pub error_bound: f64,
    pub training_error: f64,
}

impl AdaBoostModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.stages.iter().map(|s| if s.tree.predict(x) { s.weight } else { -s.weight }).sum()
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) > 0.0
    }
}

/// Discrete two-class AdaBoost over depth-limited Gini trees.
///
/// Stops early when a round's weighted error reaches 0.5, and after a
/// perfect round, whose weight is computed with the error floored at 1e-10.
pub fn fit_adaboost(x: &DenseMatrix, y: &[bool], features: &[usize], max_depth: usize, rounds: usize) -> Result<AdaBoostModel> {
    if x.rows() != y.len() {
        return Err(Error::InvalidInput("feature and label counts differ".into()));
    }
    check_labels(y)?;
    if rounds == 0 {
        return Err(Error::Config("AdaBoost needs at least one round".into()));
    }
    let n = y.len();
    let sorted = SortedColumns::new(x);
    let mut w = vec![1.0 / n as f64; n];
    let mut stages = Vec::new();
    let mut stopped_early = None;
    let mut bound = 1.0;
    for _ in 0..rounds {
        let tree = fit_tree(x, y, &w, features, &sorted, max_depth);
        let hits: Vec<bool> = (0..n).map(|i| tree.predict(x.row(i)) == y[i]).collect();
        let error: f64 = (0..n).filter(|&i| !hits[i]).map(|i| w[i]).sum();
        if error >= 0.5 {
            stopped_early = Some(format!("round {} weighted error {error:.4} >= 0.5", stages.len() + 1));
            break;
        }
        let eff = error.max(MIN_ERROR);
        let weight = 0.5 * ((1.0 - eff) / eff).ln();
        let (up, down) = (weight.exp(), (-weight).exp());
        for i in 0..n {
            w[i] *= if hits[i] { down } else { up };
        }
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= z);
        bound *= z;
        stages.push(BoostRound { tree, weight, error });
        if error <= MIN_ERROR {
            stopped_early = Some(format!("round {} fits the training set exactly", stages.len()));
            break;
        }
    }
    let mut model = AdaBoostModel { max_depth, rounds, stages, stopped_early, error_bound: bound, training_error: 0.0 };
    let wrong = (0..n).filter(|&i| model.predict(x.row(i)) != y[i]).count();
    model.training_error = wrong as f64 / n as f64;
    if model.training_error > bound * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::Contract(format!(
            "boosting training error {} exceeds its bound {bound}",
            model.training_error
        )));
    }
    Ok(model)
}
