use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::argmax;
use super::{derive_seed, GatedModel, ModelConfig};
use crate::data_io::{make_fold_ids, FoldPlan};
use crate::error::{Error, Result};
use crate::landscape::LandscapeStack;
use crate::signal::Signal;

const STREAM_FOLDS: u64 = 1;
const STREAM_INIT: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;
const EVAL_BATCH: usize = 256;

/// Labelled fixed-shape inputs, stored row-major one after another.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl TrainingSet {
    pub fn new(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        if data.len() != rows * cols * labels.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} samples of {} x {}", labels.len(), rows, cols),
                actual: format!("{} values", data.len()),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: num_classes,
            });
        }
        Ok(Self {
            rows,
            cols,
            data,
            labels,
            num_classes,
        })
    }

    /// One-row inputs holding the raw signal values.
    pub fn from_signals(signals: &[Signal], num_classes: usize) -> Result<Self> {
        let cols = signals.first().map_or(0, Signal::len);
        let mut data = Vec::with_capacity(cols * signals.len());
        let mut labels = Vec::with_capacity(signals.len());
        for (i, s) in signals.iter().enumerate() {
            if s.len() != cols {
                return Err(Error::ShapeMismatch {
                    expected: format!("signals of length {cols}"),
                    actual: format!("signal {i} of length {}", s.len()),
                });
            }
            data.extend_from_slice(s.values());
            labels.push(s.label().ok_or(Error::MissingLabel(i))?);
        }
        Self::new(1, cols, data, labels, num_classes)
    }

    pub fn from_stacks(
        stacks: &[LandscapeStack],
        labels: &[usize],
        num_classes: usize,
    ) -> Result<Self> {
        let (rows, cols) = stacks
            .first()
            .map_or((0, 0), |s| (s.num_levels(), s.grid().points));
        if stacks.len() != labels.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} labels", stacks.len()),
                actual: format!("{}", labels.len()),
            });
        }
        let mut data = Vec::with_capacity(rows * cols * stacks.len());
        for (i, s) in stacks.iter().enumerate() {
            if s.num_levels() != rows || s.grid().points != cols {
                return Err(Error::ShapeMismatch {
                    expected: format!("{rows} x {cols} stacks"),
                    actual: format!("stack {i} is {} x {}", s.num_levels(), s.grid().points),
                });
            }
            data.extend_from_slice(s.as_slice());
        }
        Self::new(rows, cols, data, labels.to_vec(), num_classes)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn input(&self, i: usize) -> &[f64] {
        let n = self.rows * self.cols;
        &self.data[i * n..(i + 1) * n]
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let n = self.rows * self.cols;
        let mut data = Vec::with_capacity(indices.len() * n);
        for &i in indices {
            data.extend_from_slice(self.input(i));
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr0: f64,
    pub lr_drop_every: usize,
    pub lr_drop_factor: f64,
    pub batch_size: usize,
    /// Number of cross-validation folds. With `folds == 1` a single
    /// stratified split of `train_fraction` is used instead.
    pub folds: usize,
    pub train_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 240,
            lr0: 0.01,
            lr_drop_every: 100,
            lr_drop_factor: 5.0,
            batch_size: 64,
            folds: 5,
            train_fraction: 0.8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.epochs == 0 || self.batch_size == 0 || self.folds == 0 || self.lr_drop_every == 0 {
            return bad("epochs, batch size, folds and lr drop period must be positive");
        }
        if !(self.lr0 > 0.0 && self.lr_drop_factor > 0.0) {
            return bad("learning rate and drop factor must be positive");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train fraction must lie in (0, 1)");
        }
        Ok(())
    }

    /// Step schedule: `lr0 / factor^(epoch / drop_every)`.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.lr0
            / self
                .lr_drop_factor
                .powi((epoch / self.lr_drop_every) as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub final_loss: f64,
    pub gates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub gating_mean: Vec<f64>,
    pub gating_std: Vec<f64>,
    pub folds: Vec<FoldResult>,
    pub model: ModelConfig,
    pub train: TrainConfig,
}

impl FitReport {
    fn from_folds(folds: Vec<FoldResult>, model: ModelConfig, train: TrainConfig) -> Self {
        let acc: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
        let (mean, std) = mean_std(&acc);
        let k = folds.first().map_or(0, |f| f.gates.len());
        let (gating_mean, gating_std) = (0..k)
            .map(|j| mean_std(&folds.iter().map(|f| f.gates[j]).collect::<Vec<_>>()))
            .unzip();
        Self {
            fold_accuracies: acc,
            mean,
            std,
            gating_mean,
            gating_std,
            folds,
            model,
            train,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Mean and population standard deviation.
pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn evaluate(model: &GatedModel, set: &TrainingSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut correct = 0usize;
    let indices: Vec<usize> = (0..set.len()).collect();
    for chunk in indices.chunks(EVAL_BATCH) {
        let inputs: Vec<&[f64]> = chunk.iter().map(|&i| set.input(i)).collect();
        for (probs, &i) in model.forward_batch(&inputs)?.iter().zip(chunk) {
            if argmax(probs) == set.labels[i] {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / set.len() as f64)
}

fn fit_one(
    train: &TrainingSet,
    model_config: &ModelConfig,
    cfg: &TrainConfig,
    fold: usize,
) -> Result<(GatedModel, f64)> {
    let mut init = model_config.clone();
    init.seed = derive_seed(model_config.seed, STREAM_INIT * 1000 + fold as u64);
    let mut model = GatedModel::new(init)?;
    // Keep the user-facing root seed in the trained model's config.
    model = GatedModel::from_parts(model_config.clone(), model.params().to_vec())?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
        model_config.seed,
        STREAM_SHUFFLE * 1000 + fold as u64,
    ));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut last_loss = f64::NAN;
    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate(epoch);
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&[f64], usize)> = chunk
                .iter()
                .map(|&i| (train.input(i), train.labels[i]))
                .collect();
            let (loss, grads) = model.loss_and_gradients(&batch)?;
            model.apply_gradients(&grads, lr);
            total += loss * chunk.len() as f64;
        }
        last_loss = total / train.len() as f64;
    }
    Ok((model, last_loss))
}

/// Stratified cross-validation; returns every fold's trained model and the
/// aggregated report. Folds train independently (in parallel when threads
/// are available) and results do not depend on scheduling.
pub fn train_folds(
    set: &TrainingSet,
    model_config: &ModelConfig,
    cfg: &TrainConfig,
) -> Result<(Vec<GatedModel>, FitReport)> {
    cfg.validate()?;
    model_config.validate()?;
    if set.shape() != (model_config.input_rows, model_config.input_cols) {
        return Err(Error::ShapeMismatch {
            expected: format!("{} x {}", model_config.input_rows, model_config.input_cols),
            actual: format!("{} x {}", set.rows, set.cols),
        });
    }
    if set.num_classes != model_config.num_classes {
        return Err(Error::InvalidConfig(format!(
            "model has {} classes, data has {}",
            model_config.num_classes, set.num_classes
        )));
    }
    let fold_seed = derive_seed(model_config.seed, STREAM_FOLDS);
    let (plan, runs) = if cfg.folds >= 2 {
        let plan = FoldPlan {
            assignments: make_fold_ids(&set.labels, set.num_classes, cfg.folds, fold_seed)?,
            folds: cfg.folds,
            seed: fold_seed,
        };
        (plan, cfg.folds)
    } else {
        // Holdout: split into enough pseudo-folds that one holds out roughly
        // 1 - train_fraction of each class.
        let parts = ((1.0 / (1.0 - cfg.train_fraction)).round() as usize).max(2);
        let plan = FoldPlan {
            assignments: make_fold_ids(&set.labels, set.num_classes, parts, fold_seed)?,
            folds: parts,
            seed: fold_seed,
        };
        (plan, 1)
    };

    let results: Vec<(GatedModel, FoldResult)> = (0..runs)
        .into_par_iter()
        .map(|fold| {
            let (train_idx, test_idx) = (plan.train_indices(fold), plan.test_indices(fold));
            let train = set.subset(&train_idx);
            let test = set.subset(&test_idx);
            let (model, final_loss) = fit_one(&train, model_config, cfg, fold)?;
            let accuracy = evaluate(&model, &test)?;
            let gates = model.gates();
            Ok((
                model,
                FoldResult {
                    fold,
                    train_size: train.len(),
                    test_size: test.len(),
                    accuracy,
                    final_loss,
                    gates,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let (models, folds): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let report = FitReport::from_folds(folds, model_config.clone(), cfg.clone());
    Ok((models, report))
}

/// Cross-validated training. The returned model is the one trained for the
/// first fold.
pub fn train(
    set: &TrainingSet,
    model_config: &ModelConfig,
    cfg: &TrainConfig,
) -> Result<(GatedModel, FitReport)> {
    let (mut models, report) = train_folds(set, model_config, cfg)?;
    Ok((models.swap_remove(0), report))
}
