use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::check_labels;
use crate::error::{Error, Result};
use crate::features::SparseVec;

fn default_epochs() -> usize {
    30
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Stage1Hyper {
    MultinomialNb {
        alpha: f64,
    },
    LinearSvm {
        c: f64,
        #[serde(default = "default_epochs")]
        epochs: usize,
    },
}

impl Default for Stage1Hyper {
    fn default() -> Self {
        Stage1Hyper::LinearSvm { c: 1e-6, epochs: default_epochs() }
    }
}

/// Multinomial naive Bayes over sparse non-negative term weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub alpha: f64,
    /// Indexed by class: 0 = non-deleted, 1 = deleted.
    pub log_prior: [f64; 2],
    /// Class-major: `log_likelihood[c * dim + term]`.
    pub log_likelihood: Vec<f64>,
    pub dim: usize,
}

impl NbModel {
    pub fn log_joint(&self, x: &SparseVec) -> [f64; 2] {
        let mut out = self.log_prior;
        for (c, o) in out.iter_mut().enumerate() {
            let row = &self.log_likelihood[c * self.dim..(c + 1) * self.dim];
            for &(i, v) in x {
                if (i as usize) < self.dim {
                    *o += v * row[i as usize];
                }
            }
        }
        out
    }

    /// Posterior probability of the deleted class.
    pub fn posterior(&self, x: &SparseVec) -> f64 {
        let [l0, l1] = self.log_joint(x);
        1.0 / (1.0 + (l0 - l1).exp())
    }
}

/// Linear SVM `w·x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub c: f64,
    pub w: Vec<f64>,
    pub b: f64,
}

impl LinearSvmModel {
    pub fn decision(&self, x: &SparseVec) -> f64 {
        sparse_dot(&self.w, x) + self.b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Stage1Model {
    MultinomialNb(NbModel),
    LinearSvm(LinearSvmModel),
}

impl Stage1Model {
    pub fn predict(&self, x: &SparseVec) -> bool {
        match self {
            Stage1Model::MultinomialNb(m) => {
                let [l0, l1] = m.log_joint(x);
                l1 > l0
            }
            Stage1Model::LinearSvm(m) => m.decision(x) > 0.0,
        }
    }
}

fn sparse_dot(w: &[f64], x: &SparseVec) -> f64 {
    x.iter().filter(|(i, _)| (*i as usize) < w.len()).map(|&(i, v)| w[i as usize] * v).sum()
}

/// Signed distance to the SVM boundary, or the log-odds for naive Bayes.
pub fn derived_feature(m: &Stage1Model, x: &SparseVec) -> Result<f64> {
    match m {
        Stage1Model::LinearSvm(svm) => {
            let norm = svm.w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidInput("linear SVM has a zero weight vector".into()));
            }
            Ok(svm.decision(x) / norm)
        }
        Stage1Model::MultinomialNb(nb) => {
            let [l0, l1] = nb.log_joint(x);
            Ok(l1 - l0)
        }
    }
}

pub fn train_stage1(xs: &[SparseVec], y: &[bool], dim: usize, hyper: Stage1Hyper, seed: u64) -> Result<Stage1Model> {
    if xs.len() != y.len() {
        return Err(Error::InvalidInput("feature and label counts differ".into()));
    }
    check_labels(y)?;
    match hyper {
        Stage1Hyper::MultinomialNb { alpha } => train_nb(xs, y, dim, alpha).map(Stage1Model::MultinomialNb),
        Stage1Hyper::LinearSvm { c, epochs } => train_linear_svm(xs, y, dim, c, epochs, seed).map(Stage1Model::LinearSvm),
    }
}

fn train_nb(xs: &[SparseVec], y: &[bool], dim: usize, alpha: f64) -> Result<NbModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("naive Bayes smoothing must be positive, got {alpha}")));
    }
    let mut counts = vec![0.0; 2 * dim];
    let mut docs = [0usize; 2];
    for (x, &label) in xs.iter().zip(y) {
        let c = label as usize;
        docs[c] += 1;
        for &(i, v) in x {
            if v < 0.0 {
                return Err(Error::InvalidInput("naive Bayes needs non-negative term weights".into()));
            }
            counts[c * dim + i as usize] += v;
        }
    }
    let n = xs.len() as f64;
    let log_prior = [(docs[0] as f64 / n).ln(), (docs[1] as f64 / n).ln()];
    let mut log_likelihood = vec![0.0; 2 * dim];
    for c in 0..2 {
        let row = &counts[c * dim..(c + 1) * dim];
        let total: f64 = row.iter().sum::<f64>() + alpha * dim as f64;
        for (t, &v) in row.iter().enumerate() {
            log_likelihood[c * dim + t] = ((v + alpha) / total).ln();
        }
    }
    Ok(NbModel { alpha, log_prior, log_likelihood, dim })
}

/// Pegasos-style primal subgradient descent on the hinge loss.
///
/// `λ = 1/(C·n)`, step `1/(λt)`. The bias is an extra weight on a constant
/// input. The returned weights average the epoch-end iterates of the
/// second half of training.
fn train_linear_svm(xs: &[SparseVec], y: &[bool], dim: usize, c: f64, epochs: usize, seed: u64) -> Result<LinearSvmModel> {
    if !(c > 0.0 && c.is_finite()) || epochs == 0 {
        return Err(Error::Config("linear SVM needs C > 0 and at least one epoch".into()));
    }
    let n = xs.len();
    let lambda = 1.0 / (c * n as f64);
    // w = scale * v; v[dim] is the bias weight
    let mut v = vec![0.0; dim + 1];
    let mut scale = 1.0;
    let mut avg = vec![0.0; dim + 1];
    let mut averaged = 0usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0u64;
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let yi = if y[i] { 1.0 } else { -1.0 };
            let margin = yi * scale * (sparse_dot(&v[..dim], &xs[i]) + v[dim]);
            let eta = 1.0 / (lambda * t as f64);
            if t == 1 {
                v.iter_mut().for_each(|x| *x = 0.0);
                scale = 1.0;
            } else {
                scale *= 1.0 - 1.0 / t as f64;
            }
            if margin < 1.0 {
                let step = eta * yi / scale;
                for &(j, val) in &xs[i] {
                    v[j as usize] += step * val;
                }
                v[dim] += step;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|x| *x *= scale);
                scale = 1.0;
            }
        }
        if epoch >= epochs / 2 {
            for (a, x) in avg.iter_mut().zip(&v) {
                *a += scale * x;
            }
            averaged += 1;
        }
    }
    let k = averaged as f64;
    let b = avg[dim] / k;
    let w = avg[..dim].iter().map(|a| a / k).collect();
    Ok(LinearSvmModel { c, w, b })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<SparseVec>, Vec<bool>) {
        // terms: 0=a 1=b 2=c 3=d
        let xs = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0)], vec![(2, 1.0)], vec![(2, 1.0), (3, 1.0)]];
        (xs, vec![true, true, false, false])
    }

    #[test]
    fn nb_matches_hand_computation() {
        let (xs, y) = toy();
        let m = train_stage1(&xs, &y, 4, Stage1Hyper::MultinomialNb { alpha: 0.1 }, 0).unwrap();
        let Stage1Model::MultinomialNb(nb) = &m else { panic!() };
        // deleted: a=3 b=1 of 4 counted; non-deleted: c=2 d=1 of 3
        let pos = (3.1 / 4.4) * (1.1 / 4.4);
        let neg = (0.1 / 3.4) * (0.1 / 3.4);
        let expected = pos / (pos + neg);
        assert!((nb.posterior(&xs[0]) - expected).abs() < 1e-9);
        let probs: f64 = nb.log_likelihood[..4].iter().map(|l| l.exp()).sum();
        assert!((probs - 1.0).abs() < 1e-12);
        assert!(xs.iter().zip(&y).all(|(x, &l)| m.predict(x) == l));
    }

    #[test]
    fn nb_rejects_zero_smoothing() {
        let (xs, y) = toy();
        assert!(train_stage1(&xs, &y, 4, Stage1Hyper::MultinomialNb { alpha: 0.0 }, 0).is_err());
        assert!(train_stage1(&xs, &[true; 4], 4, Stage1Hyper::MultinomialNb { alpha: 1.0 }, 0).is_err());
    }

    #[test]
    fn nb_decisions_survive_duplication() {
        let (xs, y) = toy();
        let h = Stage1Hyper::MultinomialNb { alpha: 0.1 };
        let m1 = train_stage1(&xs, &y, 4, h, 0).unwrap();
        let xs2: Vec<SparseVec> = xs.iter().chain(&xs).cloned().collect();
        let y2: Vec<bool> = y.iter().chain(&y).copied().collect();
        let m2 = train_stage1(&xs2, &y2, 4, h, 0).unwrap();
        let (Stage1Model::MultinomialNb(a), Stage1Model::MultinomialNb(b)) = (&m1, &m2) else { panic!() };
        assert_eq!(a.log_prior, b.log_prior);
        let probes = [vec![(0, 1.0)], vec![(3, 2.0)], vec![(1, 1.0), (2, 1.0)], vec![(0, 0.5), (3, 0.5)]];
        for p in &probes {
            assert_eq!(m1.predict(p), m2.predict(p));
        }
    }

    fn separable() -> (Vec<SparseVec>, Vec<bool>) {
        let mut xs = Vec::new();
        let mut y = Vec::new();
        for k in 0..40u32 {
            let pos = k % 2 == 0;
            let base = if pos { 0 } else { 3 };
            let a = (k % 3) as f64 + 1.0;
            let x = vec![(base, a), (base + 1, 1.0), (6 + k % 4, 0.5)];
            let n = x.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            xs.push(x.into_iter().map(|(i, v)| (i, v / n)).collect());
            y.push(pos);
        }
        (xs, y)
    }

    #[test]
    fn linear_svm_separates_fixture() {
        let (xs, y) = separable();
        for c in [1e-6, 1.0] {
            let m = train_stage1(&xs, &y, 10, Stage1Hyper::LinearSvm { c, epochs: 30 }, 3).unwrap();
            assert!(xs.iter().zip(&y).all(|(x, &l)| m.predict(x) == l), "C={c}");
            for x in &xs {
                let d = derived_feature(&m, x).unwrap();
                assert_eq!(d > 0.0, m.predict(x));
            }
        }
    }

    #[test]
    fn derived_feature_properties() {
        let m = Stage1Model::LinearSvm(LinearSvmModel { c: 1.0, w: vec![3.0, 4.0], b: -5.0 });
        assert_eq!(derived_feature(&m, &vec![(0, 1.0), (1, 0.5)]).unwrap(), 0.0);
        let x = vec![(0, 2.0), (1, 1.0)];
        let d = derived_feature(&m, &x).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let scaled = Stage1Model::LinearSvm(LinearSvmModel { c: 1.0, w: vec![30.0, 40.0], b: -50.0 });
        assert!((derived_feature(&scaled, &x).unwrap() - d).abs() < 1e-12);
        let zero = Stage1Model::LinearSvm(LinearSvmModel { c: 1.0, w: vec![0.0; 2], b: 1.0 });
        assert!(derived_feature(&zero, &x).is_err());
    }

    #[test]
    fn svm_training_is_deterministic() {
        let (xs, y) = separable();
        let h = Stage1Hyper::default();
        assert_eq!(train_stage1(&xs, &y, 10, h, 5).unwrap(), train_stage1(&xs, &y, 10, h, 5).unwrap());
    }
}
