//! Logistic-loss linear ranker over descriptor vectors, trained on
//! class-balanced batches with early stopping on validation logAUC.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::metrics::{log_auc, Entry, RankedList};
use crate::splits::{Split, SplitPlan};

/// Endless stream of index batches drawn with replacement, each draw
/// picking a class with probability proportional to 1/frequency (so 1:1)
/// and then a member of that class uniformly.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    actives: Vec<usize>,
    inactives: Vec<usize>,
    batch_size: usize,
    rng: ChaCha8Rng,
}

pub fn oversample_batches(labels: &[bool], batch_size: usize, seed: u64) -> Result<BatchSampler, BenchError> {
    let actives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let inactives: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if actives.is_empty() || inactives.is_empty() {
        return Err(BenchError::SingleClass);
    }
    Ok(BatchSampler {
        actives,
        inactives,
        batch_size: batch_size.max(1),
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

impl Iterator for BatchSampler {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let mut batch = Vec::with_capacity(self.batch_size);
        for _ in 0..self.batch_size {
            let pool = if self.rng.gen_bool(0.5) {
                &self.actives
            } else {
                &self.inactives
            };
            batch.push(pool[self.rng.gen_range(0..pool.len())]);
        }
        Some(batch)
    }
}

/// Per-column z-scores from training rows; constant columns pass through.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let dim = rows.first().map_or(0, |r| r.len());
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r.iter()) {
                *m += x / n;
            }
        }
        let mut var = vec![0.0; dim];
        for r in rows {
            for j in 0..dim {
                var[j] += (r[j] - mean[j]).powi(2) / n;
            }
        }
        let mut scale = vec![1.0; dim];
        for j in 0..dim {
            if var[j] > 0.0 {
                scale[j] = var[j].sqrt();
            } else {
                mean[j] = 0.0;
            }
        }
        Standardizer { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        LinearModel {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean logistic loss over the batch plus `l2/2 * |w|^2`, with gradients
/// for the weights and the bias.
pub fn loss_and_gradient(model: &LinearModel, xs: &[&[f64]], ys: &[bool], l2: f64) -> (f64, Vec<f64>, f64) {
    let n = xs.len().max(1) as f64;
    let mut loss = 0.0;
    let mut gw: Vec<f64> = model.weights.iter().map(|w| l2 * w).collect();
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z = model.score(x);
        let t = if y { 1.0 } else { 0.0 };
        loss += (softplus(z) - t * z) / n;
        let r = (sigmoid(z) - t) / n;
        for (g, v) in gw.iter_mut().zip(x.iter()) {
            *g += r * v;
        }
        gb += r;
    }
    loss += 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>();
    (loss, gw, gb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation logAUC improvement before stopping.
    pub patience: usize,
    pub l2: f64,
    /// Defaults to ceil(train size / batch size).
    pub batches_per_epoch: Option<usize>,
    pub seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            learning_rate: 0.05,
            batch_size: 128,
            max_epochs: 500,
            patience: 30,
            l2: 1e-4,
            batches_per_epoch: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldScores {
    pub fold: usize,
    pub test: Vec<(u64, f64)>,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub best_valid_log_auc: f64,
    pub model: LinearModel,
    pub standardizer: Standardizer,
}

fn nan_column(model: &LinearModel, rows: &[&[f64]]) -> usize {
    if let Some(j) = rows.iter().find_map(|r| r.iter().position(|v| !v.is_finite())) {
        return j;
    }
    if let Some(j) = model.weights.iter().position(|w| !w.is_finite()) {
        return j;
    }
    (0..model.weights.len())
        .max_by(|&a, &b| model.weights[a].abs().total_cmp(&model.weights[b].abs()))
        .unwrap_or(0)
}

fn train_fold(
    fold: usize,
    plan: &SplitPlan,
    features: &HashMap<u64, Vec<f64>>,
    labels: &HashMap<u64, bool>,
    cfg: &BaselineConfig,
) -> Result<FoldScores, BenchError> {
    let gather = |split: Split| -> Result<(Vec<u64>, Vec<&[f64]>, Vec<bool>), BenchError> {
        let cids = plan.members(split);
        let mut rows = Vec::with_capacity(cids.len());
        let mut ys = Vec::with_capacity(cids.len());
        for c in &cids {
            rows.push(features.get(c).ok_or(BenchError::MissingFeatures(*c))?.as_slice());
            ys.push(*labels.get(c).ok_or(BenchError::Unlabeled(*c))?);
        }
        Ok((cids, rows, ys))
    };
    let (_, train_raw, train_y) = gather(Split::Train)?;
    let (valid_cids, valid_raw, valid_y) = gather(Split::Valid)?;
    let (test_cids, test_raw, _) = gather(Split::Test)?;
    if !valid_y.iter().any(|&y| y) || valid_y.iter().all(|&y| y) {
        return Err(BenchError::DegenerateValidation { fold });
    }
    let std = Standardizer::fit(&train_raw);
    let train: Vec<Vec<f64>> = train_raw.iter().map(|r| std.apply(r)).collect();
    let valid: Vec<Vec<f64>> = valid_raw.iter().map(|r| std.apply(r)).collect();
    let dim = std.mean.len();

    let mut sampler = oversample_batches(&train_y, cfg.batch_size, cfg.seed.wrapping_add(fold as u64))?;
    let per_epoch = cfg
        .batches_per_epoch
        .unwrap_or_else(|| train.len().div_ceil(cfg.batch_size.max(1)))
        .max(1);
    let mut model = LinearModel::zeros(dim);
    let mut best = (f64::NEG_INFINITY, model.clone(), 0usize);
    let mut stale = 0;
    let mut epochs_run = 0;
    for epoch in 1..=cfg.max_epochs {
        epochs_run = epoch;
        for _ in 0..per_epoch {
            let idx = sampler.next().unwrap();
            let xs: Vec<&[f64]> = idx.iter().map(|&i| train[i].as_slice()).collect();
            let ys: Vec<bool> = idx.iter().map(|&i| train_y[i]).collect();
            let (loss, gw, gb) = loss_and_gradient(&model, &xs, &ys, cfg.l2);
            if !loss.is_finite() {
                return Err(BenchError::NanLoss {
                    fold,
                    epoch,
                    column: nan_column(&model, &xs),
                });
            }
            for (w, g) in model.weights.iter_mut().zip(&gw) {
                *w -= cfg.learning_rate * g;
            }
            model.bias -= cfg.learning_rate * gb;
        }
        let entries: Vec<Entry> = valid
            .iter()
            .zip(&valid_cids)
            .zip(&valid_y)
            .map(|((x, &cid), &active)| Entry {
                cid,
                score: model.score(x),
                active,
            })
            .collect();
        let list = RankedList::new(&entries, 0).map_err(|source| BenchError::Metric { fold, source })?;
        let v = log_auc(&list).map_err(|source| BenchError::Metric { fold, source })?;
        if v > best.0 {
            best = (v, model.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    let (best_valid_log_auc, model, best_epoch) = best;
    let test = test_cids
        .iter()
        .zip(&test_raw)
        .map(|(&c, r)| (c, model.score(&std.apply(r))))
        .collect();
    Ok(FoldScores {
        fold,
        test,
        best_epoch,
        epochs_run,
        best_valid_log_auc,
        model,
        standardizer: std,
    })
}

/// Trains one model per plan; folds run in parallel, each deterministic.
pub fn train_baseline(
    features: &HashMap<u64, Vec<f64>>,
    labels: &HashMap<u64, bool>,
    plans: &[SplitPlan],
    cfg: &BaselineConfig,
) -> Result<Vec<FoldScores>, BenchError> {
    plans
        .par_iter()
        .enumerate()
        .map(|(fold, plan)| train_fold(fold, plan, features, labels, cfg))
        .collect()
}
