//! Recovering critical points of a signal from selected landscape levels.
//!
//! Every linear piece of a landscape level lies on a line `t - b` (rising)
//! or `d - t` (falling) for some birth `b` or death `d` of the diagram. A
//! take-off vertex therefore reads off a birth directly, and at every kink
//! the intercept of the outgoing line is `2 t - c` where `c` is the
//! intercept of the incoming one. The recovered values are then matched
//! against the extrema of the original signal, and the matched extrema are
//! joined into a simplified signal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::LandscapeStack;
use crate::persistence::{sublevel_diagram, PersistenceDiagram};
use crate::signal::{extremum_mask, CriticalPoint, Signal};

/// Squared-difference threshold for matching a recovered value to a sample.
pub const MATCH_THRESHOLD: f64 = 1e-4;

/// Default dense-grid resolution factor for sampled reconstruction.
pub const DENSE_GRID_FACTOR: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapePolyline {
    pub t: Vec<f64>,
    pub l: Vec<f64>,
}

impl LandscapePolyline {
    pub fn new(t: Vec<f64>, l: Vec<f64>) -> Result<Self> {
        if t.len() != l.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} landscape values", t.len()),
                actual: format!("{}", l.len()),
            });
        }
        Ok(Self { t, l })
    }

    /// Level `k` (zero-based row) of an unnormalized stack, with its grid.
    pub fn from_stack(stack: &LandscapeStack, k: usize) -> Result<Self> {
        if stack.is_normalized() {
            return Err(Error::NormalizedLandscape);
        }
        if k >= stack.num_levels() {
            return Err(Error::SelectionOutOfRange {
                level: k + 1,
                levels: stack.num_levels(),
            });
        }
        Ok(Self {
            t: stack.grid().ts(),
            l: stack.row(k).to_vec(),
        })
    }

    /// Level `k` (zero-based) of `diagram` with a vertex at every point
    /// where the level can bend: births, deaths and all crossings of a
    /// rising tent edge with a falling one. Linear interpolation between
    /// these vertices is the level itself, not an approximation.
    pub fn exact(diagram: &PersistenceDiagram, k: usize) -> Self {
        let pairs = &diagram.pairs;
        if pairs.is_empty() {
            return Self {
                t: Vec::new(),
                l: Vec::new(),
            };
        }
        let lo = pairs.iter().map(|p| p.birth).fold(f64::INFINITY, f64::min);
        let hi = pairs
            .iter()
            .map(|p| p.death)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut t = vec![lo - 1.0, hi + 1.0];
        for p in pairs {
            t.push(p.birth);
            t.push(p.death);
            for q in pairs {
                if p.birth <= q.death {
                    t.push(0.5 * (p.birth + q.death));
                }
            }
        }
        t.sort_by(f64::total_cmp);
        t.dedup();

        let mut vals = Vec::with_capacity(pairs.len());
        let l = t
            .iter()
            .map(|&x| {
                vals.clear();
                vals.extend(
                    pairs
                        .iter()
                        .map(|p| (x - p.birth).min(p.death - x))
                        .filter(|&v| v > 0.0),
                );
                if vals.len() <= k {
                    return 0.0;
                }
                vals.sort_by(|a, b| b.total_cmp(a));
                vals[k]
            })
            .collect();
        Self { t, l }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Maximal run of equal consecutive polyline values, inclusive bounds.
#[derive(Debug, Clone, Copy)]
struct Run {
    first: usize,
    last: usize,
    value: f64,
}

fn runs(l: &[f64]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::new();
    for (i, &v) in l.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.value == v => r.last = i,
            _ => out.push(Run {
                first: i,
                last: i,
                value: v,
            }),
        }
    }
    out
}

/// Birth and death values read off a landscape polyline, in scan order
/// with exact duplicates removed.
///
/// A take-off vertex (value 0 followed by a positive value) contributes its
/// `t`. A local extremum at `t` contributes `2 t - c` with `c` the
/// previously recorded value. A flat run counts as one vertex located at
/// its midpoint, except that the first vertex of a zero run reached from
/// above is the touchdown minimum.
pub fn get_y_values(p: &LandscapePolyline) -> Vec<f64> {
    let runs = runs(&p.l);
    let mut crits: Vec<f64> = Vec::new();
    let bend = |crits: &mut Vec<f64>, t: f64| match crits.last() {
        Some(&prev) => crits.push(2.0 * t - prev),
        // No incoming line to reflect: read it as a take-off.
        None => crits.push(t),
    };
    for (i, r) in runs.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| runs[j].value);
        let next = runs.get(i + 1).map(|n| n.value);
        if r.value == 0.0 {
            let from_above = prev.is_some_and(|v| v > 0.0);
            let takes_off = next.is_some_and(|v| v > 0.0);
            if from_above && !(takes_off && r.first == r.last) {
                bend(&mut crits, p.t[r.first]);
            }
            if takes_off {
                crits.push(p.t[r.last]);
            }
            continue;
        }
        let (Some(a), Some(b)) = (prev, next) else {
            continue;
        };
        let is_max = a < r.value && b < r.value;
        let is_min = a > r.value && b > r.value;
        if is_max || is_min {
            bend(&mut crits, 0.5 * (p.t[r.first] + p.t[r.last]));
        }
    }
    let mut out: Vec<f64> = Vec::with_capacity(crits.len());
    for c in crits {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Sample positions of the extrema of `original` whose value is within the
/// squared-difference `threshold` of some entry of `crits`. Order follows
/// `crits`, then sample index; each index appears once.
pub fn get_x_values(crits: &[f64], original: &Signal, threshold: f64) -> Vec<f64> {
    let values = original.values();
    let mask = extremum_mask(values);
    let mut seen = vec![false; values.len()];
    let mut candidates: Vec<usize> = Vec::new();
    for &c in crits {
        for (i, &v) in values.iter().enumerate() {
            if (v - c) * (v - c) < threshold && !seen[i] {
                seen[i] = true;
                candidates.push(i);
            }
        }
    }
    candidates
        .into_iter()
        .filter(|&i| mask[i].is_some())
        .map(|i| i as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub points: Vec<CriticalPoint>,
    pub simplified: Signal,
}

/// Joins the extrema of `original` matched by `levels` into a simplified
/// signal on the original grid.
///
/// The first and last extrema and the leftmost global minimum are always
/// kept as anchors: the global minimum founds the essential class, which no
/// landscape level describes. Outside the anchored range the simplified
/// signal is held flat.
pub fn reconstruct(
    levels: &[LandscapePolyline],
    original: &Signal,
    threshold: f64,
) -> Result<Reconstruction> {
    let mut xs: Vec<usize> = Vec::new();
    for level in levels {
        let ys = get_y_values(level);
        xs.extend(
            get_x_values(&ys, original, threshold)
                .into_iter()
                .map(|x| x as usize),
        );
    }
    if xs.is_empty() {
        return Err(Error::NothingReconstructable);
    }

    let values = original.values();
    let critical = original.critical_points();
    let (Some(first), Some(last)) = (critical.first(), critical.last()) else {
        return Err(Error::NothingReconstructable);
    };
    xs.push(first.index());
    xs.push(last.index());
    let lowest = critical
        .iter()
        .min_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)))
        .map(|p| p.index());
    xs.extend(lowest);
    xs.sort_unstable();
    xs.dedup();

    let mask = extremum_mask(values);
    let points: Vec<CriticalPoint> = xs
        .iter()
        .filter_map(|&i| {
            mask[i].map(|kind| CriticalPoint {
                x: i as f64,
                y: values[i],
                kind,
            })
        })
        .collect();

    let simplified = interpolate(&points, values.len());
    let simplified = match original.label() {
        Some(label) => Signal::with_label(simplified, label)?,
        None => Signal::new(simplified)?,
    };
    Ok(Reconstruction { points, simplified })
}

/// Piecewise-linear interpolation through `points` (sorted by x) sampled at
/// `0..n`, held constant beyond the first and last point.
fn interpolate(points: &[CriticalPoint], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for i in 0..n {
        let x = i as f64;
        while seg + 1 < points.len() && points[seg + 1].x <= x {
            seg += 1;
        }
        let a = &points[seg];
        if x <= a.x || seg + 1 == points.len() {
            out.push(a.y);
            continue;
        }
        let b = &points[seg + 1];
        let frac = (x - a.x) / (b.x - a.x);
        out.push(a.y + (b.y - a.y) * frac);
    }
    out
}

/// How landscape levels are turned into polylines for reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolylineMode {
    /// Breakpoint-exact levels; matching uses [`MATCH_THRESHOLD`].
    Exact,
    /// Levels sampled on a uniform grid of `points` over `[0, 1]`; matching
    /// uses `max(MATCH_THRESHOLD, spacing^2)`.
    Dense { points: usize },
}

impl PolylineMode {
    /// Dense grid with `DENSE_GRID_FACTOR` points per signal sample.
    pub fn dense_for(signal_len: usize) -> Self {
        PolylineMode::Dense {
            points: DENSE_GRID_FACTOR * signal_len,
        }
    }
}

/// Reconstructs a standardized signal from the given zero-based landscape
/// levels of its own sublevel diagram.
pub fn reconstruct_from_levels(
    original: &Signal,
    rows: &[usize],
    mode: PolylineMode,
) -> Result<Reconstruction> {
    let diagram = sublevel_diagram(original);
    match mode {
        PolylineMode::Exact => {
            let levels: Vec<_> = rows
                .iter()
                .map(|&k| LandscapePolyline::exact(&diagram, k))
                .collect();
            reconstruct(&levels, original, MATCH_THRESHOLD)
        }
        PolylineMode::Dense { points } => {
            let grid = crate::landscape::LandscapeGrid::unit(points)?;
            let levels = rows.iter().copied().max().map_or(0, |k| k + 1);
            if levels == 0 {
                return Err(Error::EmptySelection);
            }
            let stack = crate::landscape::landscape_stack(&diagram, &grid, levels)?;
            let polys = rows
                .iter()
                .map(|&k| LandscapePolyline::from_stack(&stack, k))
                .collect::<Result<Vec<_>>>()?;
            let h = grid.spacing();
            reconstruct(&polys, original, MATCH_THRESHOLD.max(h * h))
        }
    }
}

/// Number of nonzero levels of a diagram (the largest overlap depth of its
/// tents).
pub fn nonzero_levels(diagram: &PersistenceDiagram) -> usize {
    let mut events: Vec<(f64, i32)> = Vec::with_capacity(2 * diagram.pairs.len());
    for p in &diagram.pairs {
        events.push((p.birth, 1));
        events.push((p.death, -1));
    }
    // Closing before opening at equal t: tents touching at a point do not overlap.
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut depth = 0i32;
    let mut best = 0i32;
    for (_, e) in events {
        depth += e;
        best = best.max(depth);
    }
    best as usize
}
