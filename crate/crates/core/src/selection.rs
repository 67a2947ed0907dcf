//! Choosing the informative prefix of landscape levels from gate weights.
//!
//! An index `k` (1-based, `k >= 2`) is a significant drop when
//! `w_k < w_{k-1} / 2`. If some significant drop has `w_{k-1} > 0.1`, the
//! largest such `k` cuts the levels and `1..k` are kept. Otherwise the cut
//! is the smallest `k` whose prefix mass `w_1 + .. + w_{k-1}` strictly
//! exceeds the remaining mass `w_k + .. + w_K`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::LandscapeStack;

pub const DROP_RATIO: f64 = 0.5;
pub const DROP_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    LargestSignificantDrop,
    MassMajority,
    /// Neither rule produced a cut; every level is kept.
    AllLevels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// 1-based level indices `1..cut_index`.
    pub selected: Vec<usize>,
    pub cut_index: usize,
    pub rule_fired: SelectionRule,
    pub weights_used: Vec<f64>,
}

impl SelectionResult {
    /// Zero-based row indices of the selected levels.
    pub fn rows(&self) -> Vec<usize> {
        self.selected.iter().map(|&k| k - 1).collect()
    }
}

/// 1-based indices `k` with `w_k < w_{k-1} / 2`.
pub fn significant_drops(weights: &[f64]) -> Vec<usize> {
    (2..=weights.len())
        .filter(|&k| weights[k - 1] < DROP_RATIO * weights[k - 2])
        .collect()
}

pub fn select_levels(weights: &[f64]) -> Result<SelectionResult> {
    let n = weights.len();
    if n < 2 {
        return Err(Error::TooFewWeights(n));
    }
    let drop = significant_drops(weights)
        .into_iter()
        .filter(|&k| weights[k - 2] > DROP_FLOOR)
        .max();

    let (cut, rule) = match drop {
        Some(k) => (k, SelectionRule::LargestSignificantDrop),
        None => {
            let total: f64 = weights.iter().sum();
            let mut prefix = 0.0;
            let mut cut = None;
            for k in 2..=n {
                prefix += weights[k - 2];
                if prefix > total - prefix {
                    cut = Some(k);
                    break;
                }
            }
            match cut {
                Some(k) => (k, SelectionRule::MassMajority),
                None => (n + 1, SelectionRule::AllLevels),
            }
        }
    };

    Ok(SelectionResult {
        selected: (1..cut).collect(),
        cut_index: cut,
        rule_fired: rule,
        weights_used: weights.to_vec(),
    })
}

/// Projects a stack onto the selected levels.
pub fn restrict_stack(
    stack: &LandscapeStack,
    selection: &SelectionResult,
) -> Result<LandscapeStack> {
    if selection.selected.is_empty() {
        return Err(Error::EmptySelection);
    }
    if let Some(&bad) = selection
        .selected
        .iter()
        .find(|&&k| k == 0 || k > stack.num_levels())
    {
        return Err(Error::SelectionOutOfRange {
            level: bad,
            levels: stack.num_levels(),
        });
    }
    stack.select_rows(&selection.rows())
}
