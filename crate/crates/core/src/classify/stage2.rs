use serde::{Deserialize, Serialize};

use super::adaboost::{fit_adaboost, AdaBoostModel};
use super::scaler::Scaler;
use super::smo::{fit_rbf_svm, RbfSvmModel};
use super::DenseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Stage2Hyper {
    RbfSvm { c: f64, gamma: f64 },
    Adaboost { max_depth: usize, rounds: usize },
}

impl Default for Stage2Hyper {
    fn default() -> Self {
        Stage2Hyper::Adaboost { max_depth: 5, rounds: 100 }
    }
}

impl Stage2Hyper {
    pub fn rbf_default() -> Self {
        Stage2Hyper::RbfSvm { c: 0.1, gamma: 0.001 }
    }
}

/// Dense-stage model. The kernel SVM carries its own z-score scaler; trees
/// see raw values with masked columns zeroed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Stage2Model {
    RbfSvm { scaler: Scaler, svm: RbfSvmModel },
    Adaboost { active: Vec<bool>, boost: AdaBoostModel },
}

impl Stage2Model {
    pub fn decision(&self, x: &[f64]) -> f64 {
        match self {
            Stage2Model::RbfSvm { scaler, svm } => {
                let mut row = x.to_vec();
                scaler.transform_row(&mut row);
                svm.decision(&row)
            }
            Stage2Model::Adaboost { active, boost } => {
                let row: Vec<f64> = x.iter().zip(active).map(|(&v, &a)| if a { v } else { 0.0 }).collect();
                boost.decision(&row)
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) > 0.0
    }
}

/// Trains the dense stage on the columns flagged in `active`.
pub fn train_stage2(x: &DenseMatrix, y: &[bool], active: &[bool], hyper: Stage2Hyper) -> Result<Stage2Model> {
    if active.len() != x.cols() {
        return Err(Error::InvalidInput("column mask does not match the feature width".into()));
    }
    match hyper {
        Stage2Hyper::RbfSvm { c, gamma } => {
            let scaler = Scaler::fit(x, active);
            let svm = fit_rbf_svm(&scaler.transform(x), y, c, gamma)?;
            Ok(Stage2Model::RbfSvm { scaler, svm })
        }
        Stage2Hyper::Adaboost { max_depth, rounds } => {
            let features: Vec<usize> = (0..x.cols()).filter(|&j| active[j]).collect();
            let boost = fit_adaboost(x, y, &features, max_depth, rounds)?;
            Ok(Stage2Model::Adaboost { active: active.to_vec(), boost })
        }
    }
}
