//! Test-side oracles, written independently of the library code paths.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdagate_core::landscape::LandscapeGrid;
use tdagate_core::model::{GatedModel, ModelConfig, ParamGroup};
use tdagate_core::persistence::PersistencePair;

/// Maximal runs of consecutive indices in `member`, each reported by the
/// minimum value it contains.
fn run_births(values: &[f64], member: &[bool]) -> Vec<(usize, usize, f64)> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < values.len() {
        if !member[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < values.len() && member[i] {
            i += 1;
        }
        let birth = values[start..i]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        runs.push((start, i, birth));
    }
    runs
}

/// Sublevel-sweep oracle for signals with distinct values: adds samples in
/// increasing order, recomputes the connected runs from scratch each time
/// and, whenever runs fuse, kills every fused run except the one with the
/// lowest birth at the value just added.
pub fn brute_force_pairs(values: &[f64]) -> Vec<PersistencePair> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut member = vec![false; values.len()];
    let mut prev: Vec<(usize, usize, f64)> = Vec::new();
    let mut pairs = Vec::new();
    for &i in &order {
        member[i] = true;
        let now = run_births(values, &member);
        for &(s, e, _) in &now {
            let mut inside: Vec<f64> = prev
                .iter()
                .filter(|&&(ps, pe, _)| ps >= s && pe <= e)
                .map(|&(_, _, b)| b)
                .collect();
            if inside.len() >= 2 {
                inside.sort_by(f64::total_cmp);
                for &b in &inside[1..] {
                    if b < values[i] {
                        pairs.push(PersistencePair::new(b, values[i]));
                    }
                }
            }
        }
        prev = now;
    }
    pairs.sort_by(|a, b| {
        a.birth
            .total_cmp(&b.birth)
            .then(a.death.total_cmp(&b.death))
    });
    pairs
}

fn tent(p: &PersistencePair, t: f64) -> f64 {
    (t - p.birth).min(p.death - t).max(0.0)
}

/// `λ_k(t)` by evaluating every tent, sorting descending and padding with 0.
pub fn landscape_by_sort(
    pairs: &[PersistencePair],
    grid: &LandscapeGrid,
    levels: usize,
) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; grid.points]; levels];
    for j in 0..grid.points {
        let t = grid.at(j);
        let mut vals: Vec<f64> = pairs.iter().map(|p| tent(p, t)).collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        for (k, row) in rows.iter_mut().enumerate() {
            row[j] = vals.get(k).copied().unwrap_or(0.0);
        }
    }
    rows
}

/// `n` distinct values in `[0, 1)`.
pub fn distinct_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        if s.windows(2).all(|w| w[0] != w[1]) {
            return v;
        }
    }
}

/// Random diagram with up to `max_pairs` pairs inside `[0, 1]`.
pub fn random_diagram(rng: &mut ChaCha8Rng, max_pairs: usize) -> Vec<PersistencePair> {
    let count = rng.gen_range(0..=max_pairs);
    (0..count)
        .map(|_| {
            let a: f64 = rng.gen();
            let b: f64 = rng.gen();
            PersistencePair::new(a.min(b), a.max(b))
        })
        .collect()
}

/// Random signal with value 0 at both ends.
pub fn zero_ended(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    v[0] = 0.0;
    v[n - 1] = 0.0;
    v
}

pub fn shuffled<T: Clone>(rng: &mut ChaCha8Rng, v: &[T]) -> Vec<T> {
    let mut out = v.to_vec();
    out.shuffle(rng);
    out
}

/// Gated model with `K = 3` rows, `m = 8` columns and 2 classes.
pub fn small_config(gating: bool) -> ModelConfig {
    let mut c = ModelConfig::new(3, 8, 2).with_seed(17);
    c.conv_channels = [2, 3, 2];
    c.dense_hidden = 5;
    c.use_gating = gating;
    c
}

/// Small gated model with gates and biases moved off their initial values
/// so every path carries gradient, plus a 4-sample batch.
pub fn gradient_check_inputs(seed: u64) -> (GatedModel, Vec<(Vec<f64>, usize)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = GatedModel::new(small_config(true)).unwrap();
    for g in [
        ParamGroup::GateRaw,
        ParamGroup::HiddenBias,
        ParamGroup::OutputBias,
        ParamGroup::ConvBias(0),
    ] {
        for p in model.group_mut(g) {
            *p = rng.gen_range(-0.5..0.5);
        }
    }
    let batch = (0..4)
        .map(|i| ((0..24).map(|_| rng.gen::<f64>()).collect(), i % 2))
        .collect();
    (model, batch)
}

/// Largest relative error between analytic and central-difference
/// gradients over every parameter of `group`.
pub fn worst_relative_error(
    model: &GatedModel,
    batch: &[(&[f64], usize)],
    group: ParamGroup,
) -> f64 {
    const H: f64 = 1e-5;
    // Absolute floor so parameters with (numerically) zero gradient do not
    // divide round-off by zero.
    const FLOOR: f64 = 1e-7;
    let (_, grads) = model.loss_and_gradients(batch).unwrap();
    let mut worst: f64 = 0.0;
    for (i, &a) in grads.group(group).iter().enumerate() {
        let mut plus = model.clone();
        plus.group_mut(group)[i] += H;
        let mut minus = model.clone();
        minus.group_mut(group)[i] -= H;
        let lp = plus.loss_and_gradients(batch).unwrap().0;
        let lm = minus.loss_and_gradients(batch).unwrap().0;
        let numeric = (lp - lm) / (2.0 * H);
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR);
        worst = worst.max(err);
    }
    worst
}
