use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{check_labels, DenseMatrix};
use crate::error::{Error, Result};

/// Largest training set accepted by the kernel SVM.
pub const MAX_RBF_ROWS: usize = 20_000;

const TOLERANCE: f64 = 1e-3;
const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfSvmModel {
    pub c: f64,
    pub gamma: f64,
    pub dim: usize,
    /// Support vectors, row-major `n_sv × dim`.
    pub support: Vec<f64>,
    /// `α_i·y_i` per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

impl RbfSvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        let mut s = self.bias;
        for (sv, &a) in self.support.chunks_exact(self.dim).zip(&self.coef) {
            let d2: f64 = sv.iter().zip(x).map(|(p, q)| (p - q) * (p - q)).sum();
            s += a * (-self.gamma * d2).exp();
        }
        s
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) > 0.0
    }

    pub fn n_support(&self) -> usize {
        self.coef.len()
    }
}

struct KernelRows<'a> {
    x: &'a DenseMatrix,
    norms: Vec<f64>,
    gamma: f64,
    cache: HashMap<usize, Arc<Vec<f64>>>,
    fifo: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a DenseMatrix, gamma: f64) -> Self {
        let norms = (0..x.rows()).map(|i| x.row(i).iter().map(|v| v * v).sum()).collect();
        let capacity = (CACHE_BYTES / (8 * x.rows().max(1))).max(2);
        KernelRows { x, norms, gamma, cache: HashMap::new(), fifo: VecDeque::new(), capacity }
    }

    fn row(&mut self, i: usize) -> Arc<Vec<f64>> {
        if let Some(r) = self.cache.get(&i) {
            return r.clone();
        }
        let xi = self.x.row(i);
        let r: Vec<f64> = (0..self.x.rows())
            .map(|j| {
                let dot: f64 = xi.iter().zip(self.x.row(j)).map(|(a, b)| a * b).sum();
                let d2 = (self.norms[i] + self.norms[j] - 2.0 * dot).max(0.0);
                (-self.gamma * d2).exp()
            })
            .collect();
        let r = Arc::new(r);
        if self.fifo.len() >= self.capacity {
            if let Some(old) = self.fifo.pop_front() {
                self.cache.remove(&old);
            }
        }
        self.fifo.push_back(i);
        self.cache.insert(i, r.clone());
        r
    }
}

/// Soft-margin RBF SVM dual solved by SMO with maximal-violating-pair selection.
pub fn fit_rbf_svm(x: &DenseMatrix, y: &[bool], c: f64, gamma: f64) -> Result<RbfSvmModel> {
    let n = x.rows();
    if n != y.len() {
        return Err(Error::InvalidInput("feature and label counts differ".into()));
    }
    check_labels(y)?;
    if n > MAX_RBF_ROWS {
        return Err(Error::InvalidInput(format!(
            "RBF SVM is limited to {MAX_RBF_ROWS} training rows ({n} given); use adaboost for larger samples"
        )));
    }
    if !(c > 0.0 && c.is_finite() && gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Config("RBF SVM needs C > 0 and gamma > 0".into()));
    }
    let ys: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − eᵀα
    let mut grad = vec![-1.0; n];
    let mut kernel = KernelRows::new(x, gamma);
    let max_iter = 100_000 + 100 * n;
    let mut iter = 0;
    let in_up = |a: f64, yv: f64| (yv > 0.0 && a < c) || (yv < 0.0 && a > 0.0);
    let in_low = |a: f64, yv: f64| (yv > 0.0 && a > 0.0) || (yv < 0.0 && a < c);
    while iter < max_iter {
        let (mut i, mut gmax) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut gmin) = (usize::MAX, f64::INFINITY);
        for t in 0..n {
            let v = -ys[t] * grad[t];
            if in_up(alpha[t], ys[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], ys[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < TOLERANCE {
            break;
        }
        iter += 1;
        let ki = kernel.row(i);
        let kj = kernel.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if ys[i] != ys[j] {
            let quad = (ki[i] + kj[j] - 2.0 * ki[j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (ki[i] + kj[j] - 2.0 * ki[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += ys[t] * (ys[i] * ki[t] * di + ys[j] * kj[t] * dj);
        }
    }
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = ys[t] * grad[t];
        if alpha[t] >= c {
            if ys[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if ys[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };
    let mut support = Vec::new();
    let mut coef = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support.extend_from_slice(x.row(t));
            coef.push(alpha[t] * ys[t]);
        }
    }
    Ok(RbfSvmModel { c, gamma, dim: x.cols(), support, coef, bias: -rho, iterations: iter })
}
