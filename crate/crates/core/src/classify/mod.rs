//! Two-stage deletion classifier.
//!
//! Stage 1 scores the sparse TF-IDF text; its signed score becomes dense slot
//! 111. Stage 2 classifies the dense block with an RBF-kernel SVM or boosted
//! trees. Labels are `bool` throughout with `true` meaning deleted.

mod adaboost;
mod bundle;
mod cv;
mod metrics;
mod pipeline;
mod sample;
mod scaler;
mod smo;
mod stage1;
mod stage2;
mod tree;

pub use adaboost::{fit_adaboost, AdaBoostModel, BoostRound};
pub use bundle::{predict_events, ModelBundle, Prediction};
pub use cv::{grid_search_cv, stratified_folds, CvCell, CvReport};
pub use metrics::{evaluate, EvalMetrics};
pub use pipeline::{
    ablate, prepare_rows, two_stage_train, AblationReport, AblationRow, FittedPipeline, HyperCell, PreparedRow,
    TrainConfig, TrainOutcome, TrainReport,
};
pub use sample::balanced_sample;
pub use scaler::Scaler;
pub use smo::{fit_rbf_svm, RbfSvmModel, MAX_RBF_ROWS};
pub use stage1::{derived_feature, train_stage1, LinearSvmModel, NbModel, Stage1Hyper, Stage1Model};
pub use stage2::{train_stage2, Stage2Hyper, Stage2Model};
pub use tree::{fit_tree, DecisionTree, SortedColumns, TreeNode};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        DenseMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        DenseMatrix { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn select(&self, idx: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        DenseMatrix { rows: idx.len(), cols: self.cols, data }
    }
}

/// Independent seed for cell `index` of a run seeded with `seed` (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn check_labels(y: &[bool]) -> crate::Result<()> {
    let pos = y.iter().filter(|&&b| b).count();
    if y.is_empty() || pos == 0 || pos == y.len() {
        return Err(crate::Error::InvalidInput("training data must contain both classes".into()));
    }
    Ok(())
}
