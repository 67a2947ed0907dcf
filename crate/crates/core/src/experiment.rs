//! End-to-end runs shared by the command-line tool and the acceptance suite:
//! raw-signal training, landscape training with level selection, training on
//! reconstructions, and the zero-padding shift study.

use serde::{Deserialize, Serialize};

use crate::data_io::{shift_augment, Dataset};
use crate::error::{Error, Result};
use crate::landscape::{stack_dataset, LandscapeGrid, LandscapeStack};
use crate::model::{train, FitReport, ModelConfig, TrainConfig, TrainingSet};
use crate::reconstruction::{reconstruct_from_levels, PolylineMode};
use crate::selection::{restrict_stack, select_levels, SelectionResult};
use crate::signal::Signal;

/// Layer sizes of the classifier, independent of the input shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Architecture {
    pub conv_channels: [usize; 3],
    pub kernel_width: usize,
    pub pool_width: usize,
    pub dense_hidden: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        let c = ModelConfig::new(1, 8, 2);
        Self {
            conv_channels: c.conv_channels,
            kernel_width: c.kernel_width,
            pool_width: c.pool_width,
            dense_hidden: c.dense_hidden,
        }
    }
}

impl Architecture {
    /// Model configuration for a `rows x cols` input; gating follows
    /// `rows > 1`.
    pub fn config(&self, rows: usize, cols: usize, classes: usize, seed: u64) -> ModelConfig {
        let mut c = ModelConfig::new(rows, cols, classes).with_seed(seed);
        c.conv_channels = self.conv_channels;
        c.kernel_width = self.kernel_width;
        c.pool_width = self.pool_width;
        c.dense_hidden = self.dense_hidden;
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LandscapeOptions {
    pub levels: usize,
    pub grid_points: usize,
    pub normalize: bool,
}

impl Default for LandscapeOptions {
    fn default() -> Self {
        let grid = LandscapeGrid::default();
        Self {
            levels: crate::landscape::DEFAULT_LEVELS,
            grid_points: grid.points,
            normalize: true,
        }
    }
}

impl LandscapeOptions {
    pub fn grid(&self) -> Result<LandscapeGrid> {
        LandscapeGrid::unit(self.grid_points)
    }
}

pub fn landscape_stacks(d: &Dataset, opts: &LandscapeOptions) -> Result<Vec<LandscapeStack>> {
    stack_dataset(d.signals(), &opts.grid()?, opts.levels, opts.normalize)
}

/// Cross-validated training on the signals themselves (one input row).
pub fn fit_raw(d: &Dataset, arch: &Architecture, tc: &TrainConfig, seed: u64) -> Result<FitReport> {
    let set = TrainingSet::from_signals(d.signals(), d.class_count())?;
    let cfg = arch.config(1, d.signal_len(), d.class_count(), seed);
    Ok(train(&set, &cfg, tc)?.1)
}

/// Cross-validated training on landscape stacks with the dataset's labels.
pub fn fit_stacks(
    stacks: &[LandscapeStack],
    d: &Dataset,
    arch: &Architecture,
    tc: &TrainConfig,
    seed: u64,
) -> Result<FitReport> {
    let first = stacks.first().ok_or(Error::EmptyDataset)?;
    let set = TrainingSet::from_stacks(stacks, &d.labels(), d.class_count())?;
    let cfg = arch.config(
        first.num_levels(),
        first.grid().points,
        d.class_count(),
        seed,
    );
    Ok(train(&set, &cfg, tc)?.1)
}

/// Replaces every signal by its reconstruction from the given zero-based
/// levels. A signal without any persistence pair has nothing to match and
/// becomes the straight line between its end values, which is what the
/// anchors alone would give.
pub fn reconstruct_dataset(d: &Dataset, rows: &[usize]) -> Result<Dataset> {
    let signals = d
        .signals()
        .iter()
        .enumerate()
        .map(
            |(index, s)| match reconstruct_from_levels(s, rows, PolylineMode::Exact) {
                Ok(r) => Ok(r.simplified),
                Err(Error::NothingReconstructable) => endpoint_line(s),
                Err(e) => Err(Error::InvalidSignalAt {
                    index,
                    source: Box::new(e),
                }),
            },
        )
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(
        format!("{}-reconstructed", d.name),
        signals,
        d.class_count(),
    )
}

fn endpoint_line(s: &Signal) -> Result<Signal> {
    let v = s.values();
    let (a, b, n) = (v[0], v[v.len() - 1], v.len());
    let line = (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect();
    match s.label() {
        Some(l) => Signal::with_label(line, l),
        None => Signal::new(line),
    }
}

/// Full landscape run, level selection from the mean gates, and the rerun on
/// the selected prefix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelStudy {
    pub full: FitReport,
    pub selection: SelectionResult,
    pub selected: FitReport,
    /// Raw-input training on signals reconstructed from the selected levels.
    pub reconstructed: Option<FitReport>,
}

pub fn level_study(
    d: &Dataset,
    opts: &LandscapeOptions,
    arch: &Architecture,
    tc: &TrainConfig,
    seed: u64,
    with_reconstruction: bool,
) -> Result<LevelStudy> {
    let stacks = landscape_stacks(d, opts)?;
    let full = fit_stacks(&stacks, d, arch, tc, seed)?;
    let selection = select_levels(&full.gating_mean)?;
    let selected = if selection.selected.len() == opts.levels {
        full.clone()
    } else {
        let sub = stacks
            .iter()
            .map(|s| restrict_stack(s, &selection))
            .collect::<Result<Vec<_>>>()?;
        fit_stacks(&sub, d, arch, tc, seed)?
    };
    let reconstructed = if with_reconstruction {
        let r = reconstruct_dataset(d, &selection.rows())?;
        Some(fit_raw(&r, arch, tc, seed)?)
    } else {
        None
    };
    Ok(LevelStudy {
        full,
        selection,
        selected,
        reconstructed,
    })
}

/// Raw-input accuracy before and after zero padding, plus a bitwise check
/// that padding leaves the landscape stacks untouched.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftStudy {
    pub target_length: usize,
    pub raw: FitReport,
    pub padded: FitReport,
    pub stacks_identical: bool,
    /// Landscape-input result; identical stacks and fold plans make it the
    /// same for both datasets, so it is trained once.
    pub landscape: Option<FitReport>,
}

pub fn shift_study(
    d: &Dataset,
    target_length: usize,
    opts: &LandscapeOptions,
    arch: &Architecture,
    tc: &TrainConfig,
    seed: u64,
    with_landscape: bool,
) -> Result<ShiftStudy> {
    let padded = shift_augment(d, target_length, seed)?;
    let before = landscape_stacks(d, opts)?;
    let after = landscape_stacks(&padded, opts)?;
    let stacks_identical = before.len() == after.len()
        && before
            .iter()
            .zip(&after)
            .all(|(a, b)| bits(a.as_slice()) == bits(b.as_slice()));
    let raw = fit_raw(d, arch, tc, seed)?;
    let padded_fit = fit_raw(&padded, arch, tc, seed)?;
    let landscape = if with_landscape {
        Some(fit_stacks(&before, d, arch, tc, seed)?)
    } else {
        None
    };
    Ok(ShiftStudy {
        target_length,
        raw,
        padded: padded_fit,
        stacks_identical,
        landscape,
    })
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}
