//! Convolutional classifier with a per-row gating layer.
//!
//! Input is a `rows x cols` matrix (landscape levels by grid points, or a
//! single row holding a raw signal). Three blocks of
//! `conv(1 x kernel_width, same padding) -> ReLU -> maxpool(1 x pool_width)`
//! run along the column axis only, with kernels shared across rows, so each
//! row stays a separate strip of channels. After the last pool every row is
//! scaled by its gate `w_k = logistic(raw_k)`, the result is flattened row by
//! row and passed through `dense(hidden) -> ReLU -> dense(classes) -> softmax`.

mod checkpoint;
mod network;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use network::{GatedModel, Gradients, ParamGroup};
pub use train::{evaluate, train, train_folds, FitReport, FoldResult, TrainConfig, TrainingSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architecture hyperparameters. The channel counts, kernel and pool widths
/// and hidden size defaults are our own choice; only the layer structure is
/// fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_rows: usize,
    pub input_cols: usize,
    pub conv_channels: [usize; 3],
    pub kernel_width: usize,
    pub pool_width: usize,
    pub dense_hidden: usize,
    pub num_classes: usize,
    pub use_gating: bool,
    pub seed: u64,
}

impl ModelConfig {
    /// Default architecture for the given input shape. Gating is switched on
    /// for multi-row (landscape) input.
    pub fn new(input_rows: usize, input_cols: usize, num_classes: usize) -> Self {
        Self {
            input_rows,
            input_cols,
            conv_channels: [16, 32, 64],
            kernel_width: 3,
            pool_width: 2,
            dense_hidden: 64,
            num_classes,
            use_gating: input_rows > 1,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Column count after each of the three pooling stages.
    pub fn pooled_cols(&self) -> [usize; 3] {
        let p = self.pool_width.max(1);
        let a = self.input_cols / p;
        let b = a / p;
        [a, b, b / p]
    }

    pub fn flat_features(&self) -> usize {
        self.input_rows * self.conv_channels[2] * self.pooled_cols()[2]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.input_rows == 0 || self.input_cols == 0 {
            return bad("input shape must be positive".into());
        }
        if self.conv_channels.contains(&0) {
            return bad("conv channel counts must be positive".into());
        }
        if self.kernel_width == 0 || self.pool_width == 0 || self.dense_hidden == 0 {
            return bad("kernel width, pool width and hidden size must be positive".into());
        }
        if self.num_classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.num_classes));
        }
        if self.use_gating && self.input_rows < 2 {
            return bad("gating requires multi-row (landscape) input".into());
        }
        if self.pooled_cols()[2] == 0 {
            return bad(format!(
                "{} input columns vanish after three pools of width {}",
                self.input_cols, self.pool_width
            ));
        }
        Ok(())
    }
}

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Derives an independent stream seed from a root seed (splitmix64 mix).
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    let mut z = root ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
