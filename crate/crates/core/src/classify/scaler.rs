use serde::{Deserialize, Serialize};

use super::DenseMatrix;

/// Per-column z-scoring; inactive (masked) columns are forced to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub active: Vec<bool>,
}

impl Scaler {
    pub fn fit(x: &DenseMatrix, active: &[bool]) -> Self {
        let (n, d) = (x.rows().max(1) as f64, x.cols());
        let mut mean = vec![0.0; d];
        let mut scale = vec![1.0; d];
        for j in (0..d).filter(|&j| active[j]) {
            let m = (0..x.rows()).map(|i| x.get(i, j)).sum::<f64>() / n;
            let var = (0..x.rows()).map(|i| (x.get(i, j) - m).powi(2)).sum::<f64>() / n;
            mean[j] = m;
            scale[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Scaler { mean, scale, active: active.to_vec() }
    }

    pub fn transform_row(&self, row: &mut [f64]) {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if self.active[j] { (*v - self.mean[j]) / self.scale[j] } else { 0.0 };
        }
    }

    pub fn transform(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut rows: Vec<Vec<f64>> = (0..x.rows()).map(|i| x.row(i).to_vec()).collect();
        rows.iter_mut().for_each(|r| self.transform_row(r));
        DenseMatrix::from_rows(&rows)
    }
}
