//! Discretized persistence landscapes.
//!
//! Level `k` of the landscape is the pointwise `k`-th largest tent value
//! over all finite pairs of a diagram. A [`LandscapeStack`] holds the first
//! `K` levels sampled on a shared uniform grid, one level per row.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::{sublevel_diagram, PersistenceDiagram, PersistencePair};
use crate::signal::Signal;

pub const DEFAULT_LEVELS: usize = 10;
pub const DEFAULT_GRID_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentFunction {
    pub birth: f64,
    pub death: f64,
}

impl TentFunction {
    pub fn eval(&self, t: f64) -> f64 {
        (t - self.birth).min(self.death - t).max(0.0)
    }

    pub fn peak(&self) -> (f64, f64) {
        (
            0.5 * (self.birth + self.death),
            0.5 * (self.death - self.birth),
        )
    }
}

impl From<PersistencePair> for TentFunction {
    fn from(p: PersistencePair) -> Self {
        Self {
            birth: p.birth,
            death: p.death,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl LandscapeGrid {
    pub fn new(t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        let grid = Self {
            t_min,
            t_max,
            points,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// `[0, 1]`, the value range of standardized signals.
    pub fn unit(points: usize) -> Result<Self> {
        Self::new(0.0, 1.0, points)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min.is_finite() && self.t_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if self.t_min >= self.t_max {
            return Err(Error::InvalidGrid(format!(
                "t_min {} must be below t_max {}",
                self.t_min, self.t_max
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 grid points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.t_max - self.t_min) / (self.points - 1) as f64
    }

    pub fn at(&self, j: usize) -> f64 {
        if j + 1 == self.points {
            return self.t_max;
        }
        self.t_min + (self.t_max - self.t_min) * (j as f64) / ((self.points - 1) as f64)
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.at(j)).collect()
    }
}

impl Default for LandscapeGrid {
    fn default() -> Self {
        Self {
            t_min: 0.0,
            t_max: 1.0,
            points: DEFAULT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeStack {
    levels: Vec<f64>,
    num_levels: usize,
    grid: LandscapeGrid,
    normalized: bool,
}

impl LandscapeStack {
    pub fn zeros(num_levels: usize, grid: LandscapeGrid) -> Self {
        Self {
            levels: vec![0.0; num_levels * grid.points],
            num_levels,
            grid,
            normalized: false,
        }
    }

    /// Wraps a row-major `num_levels x grid.points` buffer.
    pub fn from_raw(
        levels: Vec<f64>,
        num_levels: usize,
        grid: LandscapeGrid,
        normalized: bool,
    ) -> Result<Self> {
        grid.validate()?;
        if levels.len() != num_levels * grid.points {
            return Err(Error::ShapeMismatch {
                expected: format!("{} x {}", num_levels, grid.points),
                actual: format!("{} values", levels.len()),
            });
        }
        Ok(Self {
            levels,
            num_levels,
            grid,
            normalized,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.num_levels
    }

    pub fn grid(&self) -> &LandscapeGrid {
        &self.grid
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Row for level `k`, zero-based (`row(0)` is the first level).
    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.grid.points;
        &self.levels[k * m..(k + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.levels.chunks_exact(self.grid.points)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.levels
    }

    pub fn into_raw(self) -> Vec<f64> {
        self.levels
    }

    /// Keeps only the given zero-based rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut levels = Vec::with_capacity(rows.len() * self.grid.points);
        for &k in rows {
            if k >= self.num_levels {
                return Err(Error::SelectionOutOfRange {
                    level: k + 1,
                    levels: self.num_levels,
                });
            }
            levels.extend_from_slice(self.row(k));
        }
        Ok(Self {
            levels,
            num_levels: rows.len(),
            grid: self.grid,
            normalized: self.normalized,
        })
    }

    /// Rescales every nonzero row to unit trapezoidal area on the grid.
    /// Zero rows stay zero. Rows already at unit area are left (numerically)
    /// unchanged, so calling this twice is harmless.
    pub fn normalize_area(mut self) -> Self {
        let m = self.grid.points;
        let h = self.grid.spacing();
        for row in self.levels.chunks_exact_mut(m) {
            let area = trapezoid_area(row, h);
            if area > 0.0 {
                row.iter_mut().for_each(|v| *v /= area);
            }
        }
        self.normalized = true;
        self
    }
}

pub fn trapezoid_area(row: &[f64], spacing: f64) -> f64 {
    match row.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = row[1..n - 1].iter().sum();
            spacing * (inner + 0.5 * (row[0] + row[n - 1]))
        }
    }
}

/// Inserts `v` into the descending top-`k` buffer `top` (length `k`).
fn insert_top(top: &mut [f64], v: f64) {
    let k = top.len();
    if k == 0 || v <= top[k - 1] {
        return;
    }
    let mut i = k - 1;
    while i > 0 && top[i - 1] < v {
        top[i] = top[i - 1];
        i -= 1;
    }
    top[i] = v;
}

/// First `num_levels` landscape levels of `diagram` sampled on `grid`.
pub fn landscape_stack(
    diagram: &PersistenceDiagram,
    grid: &LandscapeGrid,
    num_levels: usize,
) -> Result<LandscapeStack> {
    if num_levels == 0 {
        return Err(Error::NoLevels);
    }
    grid.validate()?;
    let m = grid.points;
    let tents: Vec<TentFunction> = diagram.pairs.iter().copied().map(Into::into).collect();
    let mut stack = LandscapeStack::zeros(num_levels, *grid);
    let mut top = vec![0.0; num_levels];
    for j in 0..m {
        let t = grid.at(j);
        top.iter_mut().for_each(|v| *v = 0.0);
        for tent in &tents {
            insert_top(&mut top, tent.eval(t));
        }
        for (k, &v) in top.iter().enumerate() {
            stack.levels[k * m + j] = v;
        }
    }
    Ok(stack)
}

/// Runs diagram -> landscape -> optional area normalization for every
/// signal, in parallel, preserving input order.
pub fn stack_dataset(
    signals: &[Signal],
    grid: &LandscapeGrid,
    num_levels: usize,
    normalize: bool,
) -> Result<Vec<LandscapeStack>> {
    if num_levels == 0 {
        return Err(Error::NoLevels);
    }
    grid.validate()?;
    signals
        .par_iter()
        .enumerate()
        .map(|(index, s)| {
            if let Some((i, &value)) = s.values().iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::InvalidSignalAt {
                    index,
                    source: Box::new(Error::NonFiniteValue { index: i, value }),
                });
            }
            if s.len() < 2 {
                return Err(Error::InvalidSignalAt {
                    index,
                    source: Box::new(Error::SignalTooShort(s.len())),
                });
            }
            let stack = landscape_stack(&sublevel_diagram(s), grid, num_levels)?;
            Ok(if normalize {
                stack.normalize_area()
            } else {
                stack
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diagram(pairs: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram {
            pairs: pairs
                .iter()
                .map(|&(b, d)| PersistencePair::new(b, d))
                .collect(),
            essential_birth: 0.0,
        }
    }

    #[test]
    fn single_tent_on_integer_grid() {
        let grid = LandscapeGrid::new(0.0, 4.0, 5).unwrap();
        let s = landscape_stack(&diagram(&[(1.0, 3.0)]), &grid, 2).unwrap();
        assert_eq!(s.row(0), &[0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(s.row(1), &[0.0; 5]);
        assert!(!s.is_normalized());
    }

    #[test]
    fn empty_diagram_gives_zero_stack() {
        let grid = LandscapeGrid::unit(7).unwrap();
        let s = landscape_stack(&diagram(&[]), &grid, 3).unwrap();
        assert!(s.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(s.num_levels(), 3);
    }

    #[test]
    fn overlapping_tents_at_crossing() {
        let grid = LandscapeGrid::new(0.0, 6.0, 7).unwrap();
        let s = landscape_stack(&diagram(&[(1.0, 4.0), (2.0, 5.0)]), &grid, 2).unwrap();
        assert_eq!(s.row(0)[3], 1.0);
        assert_eq!(s.row(1)[3], 1.0);
    }

    #[test]
    fn normalize_unit_tent_is_stable() {
        let grid = LandscapeGrid::new(0.0, 4.0, 4001).unwrap();
        let s = landscape_stack(&diagram(&[(1.0, 3.0)]), &grid, 1).unwrap();
        let before = s.row(0).to_vec();
        let n = s.normalize_area();
        for (a, b) in before.iter().zip(n.row(0)) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn normalize_wide_tent_halves_peak() {
        let grid = LandscapeGrid::new(0.0, 4.0, 4001).unwrap();
        let n = landscape_stack(&diagram(&[(0.0, 4.0)]), &grid, 1)
            .unwrap()
            .normalize_area();
        assert!(n.is_normalized());
        assert!((n.row(0)[2000] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn normalize_keeps_zero_rows() {
        let grid = LandscapeGrid::unit(11).unwrap();
        let n = landscape_stack(&diagram(&[(0.2, 0.6)]), &grid, 3)
            .unwrap()
            .normalize_area();
        assert!(n.row(1).iter().all(|&v| v == 0.0));
        assert!((trapezoid_area(n.row(0), grid.spacing()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stack_dataset_shapes() {
        let signals: Vec<Signal> = [
            vec![0.0, 1.0, 0.3, 0.8, 0.1],
            vec![1.0, 0.0, 0.5, 0.2, 0.9],
            vec![0.5, 0.5, 0.5, 0.5, 0.5],
        ]
        .into_iter()
        .map(|v| Signal::new(v).unwrap())
        .collect();
        let grid = LandscapeGrid::unit(20).unwrap();
        let stacks = stack_dataset(&signals, &grid, 4, true).unwrap();
        assert_eq!(stacks.len(), 3);
        assert!(stacks
            .iter()
            .all(|s| *s.grid() == grid && s.num_levels() == 4));
        assert!(stacks[2].as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_grid_and_zero_levels() {
        assert!(LandscapeGrid::new(1.0, 1.0, 10).is_err());
        assert!(LandscapeGrid::new(0.0, 1.0, 1).is_err());
        let grid = LandscapeGrid::unit(5).unwrap();
        assert!(matches!(
            landscape_stack(&diagram(&[]), &grid, 0),
            Err(Error::NoLevels)
        ));
    }

    #[test]
    fn select_rows_projects() {
        let grid = LandscapeGrid::unit(50).unwrap();
        let s = landscape_stack(&diagram(&[(0.1, 0.9), (0.2, 0.5), (0.3, 0.4)]), &grid, 5).unwrap();
        let r = s.select_rows(&[0, 2]).unwrap();
        assert_eq!(r.num_levels(), 2);
        assert_eq!(r.row(0), s.row(0));
        assert_eq!(r.row(1), s.row(2));
        assert!(s.select_rows(&[5]).is_err());
    }
}
