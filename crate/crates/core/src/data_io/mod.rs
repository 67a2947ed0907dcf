//! Dataset ingestion, fold planning, padding augmentation and on-disk
//! artifacts.

mod artifacts;
mod folds;
mod mitbih;
mod ucr;

pub use artifacts::{
    load_dataset, load_stacks, read_json, save_dataset, save_stacks, write_atomic, write_json,
    write_stacks_csv, STACKS_VERSION,
};
pub use folds::{make_fold_ids, make_folds, FoldPlan};
pub use mitbih::{load_mitbih_csv, MITBIH_BEAT_LENGTH};
pub use ucr::load_ucr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Equal-length labelled signals with labels in `0..class_count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    signals: Vec<Signal>,
    class_count: usize,
    class_histogram: Vec<usize>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, signals: Vec<Signal>, class_count: usize) -> Result<Self> {
        let first_len = signals.first().ok_or(Error::EmptyDataset)?.len();
        let mut class_histogram = vec![0; class_count];
        for (i, s) in signals.iter().enumerate() {
            if s.len() != first_len {
                return Err(Error::ShapeMismatch {
                    expected: format!("signals of length {first_len}"),
                    actual: format!("signal {i} of length {}", s.len()),
                });
            }
            let label = s.label().ok_or(Error::MissingLabel(i))?;
            if label >= class_count {
                return Err(Error::LabelOutOfRange {
                    label,
                    classes: class_count,
                });
            }
            class_histogram[label] += 1;
        }
        Ok(Self {
            name: name.into(),
            signals,
            class_count,
            class_histogram,
        })
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn into_signals(self) -> Vec<Signal> {
        self.signals
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn signal_len(&self) -> usize {
        self.signals[0].len()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn class_histogram(&self) -> &[usize] {
        &self.class_histogram
    }

    pub fn labels(&self) -> Vec<usize> {
        self.signals
            .iter()
            .map(|s| s.label().expect("dataset signals are labelled"))
            .collect()
    }

    /// Fraction of samples in each class.
    pub fn class_shares(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.class_histogram.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Pads every signal with zeros up to `target_length`, splitting the zeros
/// between front and back uniformly at random.
pub fn shift_augment(d: &Dataset, target_length: usize, seed: u64) -> Result<Dataset> {
    let n = d.signal_len();
    if target_length < n {
        return Err(Error::PadTooShort {
            target: target_length,
            length: n,
        });
    }
    let pad = target_length - n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signals = d
        .signals
        .iter()
        .map(|s| {
            let front = rng.gen_range(0..=pad);
            let mut values = vec![0.0; target_length];
            values[front..front + n].copy_from_slice(s.values());
            Signal::with_label(values, s.label().expect("dataset signals are labelled"))
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(
        format!("{}-shift{}", d.name, target_length),
        signals,
        d.class_count,
    )
}
