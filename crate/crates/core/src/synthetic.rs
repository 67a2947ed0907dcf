//! Two-class synthetic signals that differ only in the depth of a secondary
//! dip, so only the second landscape level carries class information.
//!
//! Each signal linearly joins the vertices `1, a, p1, 0, p2, b, 1` placed at
//! integer positions. Its diagram is exactly `{(a, p1), (b, p2)}`: the tent
//! of `(b, p2)` is nested inside that of `(a, p1)`, so `λ1` is the first tent
//! and `λ2` the second. `a`, `p1`, `p2` and the vertex positions are drawn
//! independently of the class; `b` is drawn from disjoint class ranges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data_io::Dataset;
use crate::error::{Error, Result};
use crate::signal::Signal;

pub const A_RANGE: (f64, f64) = (0.10, 0.25);
pub const P1_RANGE: (f64, f64) = (0.88, 0.95);
pub const P2_RANGE: (f64, f64) = (0.75, 0.85);
/// Secondary dip bottom per class.
pub const B_RANGES: [(f64, f64); 2] = [(0.30, 0.42), (0.55, 0.68)];

const SEGMENTS: usize = 6;
const MIN_SEGMENT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipParams {
    pub a: f64,
    pub p1: f64,
    pub p2: f64,
    pub b: f64,
    pub class: usize,
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    rng.gen_range(lo..hi)
}

fn vertex_positions(rng: &mut ChaCha8Rng, length: usize) -> [usize; SEGMENTS + 1] {
    let mut seg = [MIN_SEGMENT; SEGMENTS];
    for _ in 0..(length - 1 - MIN_SEGMENT * SEGMENTS) {
        seg[rng.gen_range(0..SEGMENTS)] += 1;
    }
    let mut xs = [0; SEGMENTS + 1];
    for i in 0..SEGMENTS {
        xs[i + 1] = xs[i] + seg[i];
    }
    xs
}

fn render(xs: &[usize], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs[xs.len() - 1] + 1);
    for w in 0..xs.len() - 1 {
        let (x0, x1) = (xs[w], xs[w + 1]);
        for x in x0..x1 {
            let f = (x - x0) as f64 / (x1 - x0) as f64;
            out.push(ys[w] + (ys[w + 1] - ys[w]) * f);
        }
    }
    out.push(ys[ys.len() - 1]);
    out
}

/// `count` signals of the given length, classes alternating `0, 1, 0, ...`.
pub fn secondary_dip_dataset(
    count: usize,
    length: usize,
    seed: u64,
) -> Result<(Dataset, Vec<DipParams>)> {
    if length < MIN_SEGMENT * SEGMENTS + 1 {
        return Err(Error::InvalidConfig(format!(
            "synthetic signals need length >= {}",
            MIN_SEGMENT * SEGMENTS + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut signals = Vec::with_capacity(count);
    let mut params = Vec::with_capacity(count);
    for i in 0..count {
        let class = i % 2;
        let p = DipParams {
            a: draw(&mut rng, A_RANGE),
            p1: draw(&mut rng, P1_RANGE),
            p2: draw(&mut rng, P2_RANGE),
            b: draw(&mut rng, B_RANGES[class]),
            class,
        };
        let xs = vertex_positions(&mut rng, length);
        let values = render(&xs, &[1.0, p.a, p.p1, 0.0, p.p2, p.b, 1.0]);
        signals.push(Signal::with_label(values, class)?);
        params.push(p);
    }
    Ok((Dataset::new("secondary-dip", signals, 2)?, params))
}
