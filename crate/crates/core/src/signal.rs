//! Uniformly sampled 1-D signals viewed as piecewise-linear functions.
//!
//! Sample `i` sits at `x = i`; the function between samples is the linear
//! interpolant. Runs of equal values (plateaus) are treated as a single
//! extremum located at the leftmost index of the run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    values: Vec<f64>,
    label: Option<usize>,
}

impl Signal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::validate(&values)?;
        Ok(Self {
            values,
            label: None,
        })
    }

    pub fn with_label(values: Vec<f64>, label: usize) -> Result<Self> {
        Self::validate(&values)?;
        Ok(Self {
            values,
            label: Some(label),
        })
    }

    fn validate(values: &[f64]) -> Result<()> {
        if values.len() < 2 {
            return Err(Error::SignalTooShort(values.len()));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index, value });
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    /// Affinely rescales the values onto `[0, 1]`. Constant signals map to
    /// all zeros.
    pub fn standardize(&self) -> Signal {
        let (lo, hi) = (self.min(), self.max());
        let span = hi - lo;
        let values = if span > 0.0 {
            self.values.iter().map(|&v| (v - lo) / span).collect()
        } else {
            vec![0.0; self.values.len()]
        };
        Signal {
            values,
            label: self.label,
        }
    }

    pub fn critical_points(&self) -> Vec<CriticalPoint> {
        critical_points(&self.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: f64,
    pub y: f64,
    pub kind: ExtremumKind,
}

impl CriticalPoint {
    /// Sample index of the point. Critical points of sampled signals always
    /// sit on the integer grid.
    pub fn index(&self) -> usize {
        self.x as usize
    }
}

/// A maximal run of equal consecutive samples.
#[derive(Debug, Clone, Copy)]
struct Run {
    start: usize,
    value: f64,
}

fn runs(values: &[f64]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last() {
            Some(r) if r.value == v => {}
            _ => out.push(Run { start: i, value: v }),
        }
    }
    out
}

/// Extrema of the piecewise-linear interpolant of `values`, ordered by `x`.
///
/// Both endpoints are always reported, classified against their inward
/// neighbour. A plateau contributes one point at its leftmost index. A
/// constant sequence has no extrema.
pub fn critical_points(values: &[f64]) -> Vec<CriticalPoint> {
    let runs = runs(values);
    if runs.len() < 2 {
        return Vec::new();
    }
    let point = |r: &Run, kind| CriticalPoint {
        x: r.start as f64,
        y: r.value,
        kind,
    };
    let last = runs.len() - 1;
    let mut out = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        let left = if i > 0 { Some(runs[i - 1].value) } else { None };
        let right = if i < last {
            Some(runs[i + 1].value)
        } else {
            None
        };
        // Adjacent runs always differ, so one inward neighbour settles the kind.
        let kind = match (left, right) {
            (None, Some(n)) | (Some(n), None) => {
                if n > r.value {
                    Some(ExtremumKind::Minimum)
                } else {
                    Some(ExtremumKind::Maximum)
                }
            }
            (Some(a), Some(b)) if a > r.value && b > r.value => Some(ExtremumKind::Minimum),
            (Some(a), Some(b)) if a < r.value && b < r.value => Some(ExtremumKind::Maximum),
            _ => None,
        };
        if let Some(kind) = kind {
            out.push(point(r, kind));
        }
    }
    out
}

/// Per-sample extremum kind; `Some` exactly at the indices reported by
/// [`critical_points`].
pub(crate) fn extremum_mask(values: &[f64]) -> Vec<Option<ExtremumKind>> {
    let mut mask = vec![None; values.len()];
    for p in critical_points(values) {
        mask[p.index()] = Some(p.kind);
    }
    mask
}
