//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Datasets are read from `$TDAGATE_DATA_DIR` (default `<workspace>/data`):
//! `ECG5000/` in UCR layout and `mitbih/mitbih_train.csv`.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdagate_core::data_io::{
    load_mitbih_csv, load_ucr, shift_augment, Dataset, MITBIH_BEAT_LENGTH,
};
use tdagate_core::experiment::{fit_raw, level_study, shift_study, Architecture, LandscapeOptions};
use tdagate_core::landscape::{landscape_stack, stack_dataset, trapezoid_area, LandscapeGrid};
use tdagate_core::model::{train, GatedModel, ModelConfig, TrainConfig, TrainingSet};
use tdagate_core::persistence::{
    sublevel_diagram, sublevel_diagram_of, PersistenceDiagram, PersistencePair,
};
use tdagate_core::reconstruction::{nonzero_levels, reconstruct_from_levels, PolylineMode};
use tdagate_core::selection::{select_levels, SelectionRule};
use tdagate_core::signal::Signal;
use tdagate_core::synthetic::secondary_dip_dataset;

type Outcome = Result<String, String>;

const SEED: u64 = 1;

fn data_dir() -> PathBuf {
    std::env::var_os("TDAGATE_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn diagram(pairs: Vec<PersistencePair>) -> PersistenceDiagram {
    PersistenceDiagram {
        pairs,
        essential_birth: 0.0,
    }
}

fn persistence_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for i in 0..10_000 {
        let n = rng.gen_range(2..=12);
        let v = common::distinct_values(&mut rng, n);
        let got = sublevel_diagram_of(&v).sorted_pairs();
        let want = common::brute_force_pairs(&v);
        if got != want {
            return Err(format!("signal {i} {v:?}: got {got:?}, oracle {want:?}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        secs < 30.0,
        format!("10000 signals match the sweep oracle in {secs:.2}s"),
    )
}

fn landscape_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let grid = LandscapeGrid::default();
    let levels = 8;
    let mut worst: f64 = 0.0;
    let mut worst_area: f64 = 0.0;
    for i in 0..1000 {
        let pairs = common::random_diagram(&mut rng, 6);
        let stack =
            landscape_stack(&diagram(pairs.clone()), &grid, levels).map_err(|e| e.to_string())?;
        let oracle = common::landscape_by_sort(&pairs, &grid, levels);
        for (k, row) in oracle.iter().enumerate() {
            for (a, b) in stack.row(k).iter().zip(row) {
                worst = worst.max((a - b).abs());
            }
            if k + 1 < levels
                && stack
                    .row(k)
                    .iter()
                    .zip(stack.row(k + 1))
                    .any(|(a, b)| a < b)
            {
                return Err(format!(
                    "diagram {i}: level {} below level {}",
                    k + 1,
                    k + 2
                ));
            }
        }
        let normalized = stack.normalize_area();
        for row in normalized.rows() {
            if row.iter().any(|&v| v != 0.0) {
                let area = trapezoid_area(row, grid.spacing());
                worst_area = worst_area.max((area - 1.0).abs());
            }
        }
    }
    check(
        worst <= 1e-12 && worst_area <= 1e-9,
        format!("max |stack - oracle| = {worst:.2e}, max |area - 1| = {worst_area:.2e}"),
    )
}

fn gradient_check() -> Outcome {
    let (model, batch) = common::gradient_check_inputs(303);
    let batch: Vec<(&[f64], usize)> = batch.iter().map(|(x, y)| (x.as_slice(), *y)).collect();
    let mut worst = (0.0, String::new());
    for g in model.groups() {
        let e = common::worst_relative_error(&model, &batch, g);
        if e >= worst.0 {
            worst = (e, g.name());
        }
    }
    check(
        worst.0 < 1e-4,
        format!("worst relative error {:.2e} ({})", worst.0, worst.1),
    )
}

fn reconstruction_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut done = 0;
    while done < 1000 {
        let n = rng.gen_range(3..=20);
        let s = Signal::new(common::distinct_values(&mut rng, n))
            .unwrap()
            .standardize();
        let diag = sublevel_diagram(&s);
        if diag.is_empty() {
            continue;
        }
        let rows: Vec<usize> = (0..nonzero_levels(&diag)).collect();
        let r = reconstruct_from_levels(&s, &rows, PolylineMode::Exact)
            .map_err(|e| format!("{:?}: {e}", s.values()))?;
        if r.points != s.critical_points() {
            return Err(format!("{:?}: recovered {:?}", s.values(), r.points));
        }
        if sublevel_diagram(&r.simplified).sorted_pairs() != diag.sorted_pairs() {
            return Err(format!("{:?}: diagram changed", s.values()));
        }
        done += 1;
    }
    Ok("1000 signals: every critical point recovered, diagrams equal".into())
}

fn selection_suite() -> Outcome {
    let a = select_levels(&[0.9, 0.7, 0.3, 0.1, 0.05, 0.04, 0.04, 0.03, 0.03, 0.02]).unwrap();
    let b = select_levels(&[0.5; 10]).unwrap();
    let mut w = vec![0.8, 0.3];
    w.extend([0.29; 8]);
    let c = select_levels(&w).unwrap();
    let examples = a.selected == [1, 2, 3]
        && a.cut_index == 4
        && a.rule_fired == SelectionRule::LargestSignificantDrop
        && b.selected == (1..=6).collect::<Vec<_>>()
        && b.cut_index == 7
        && b.rule_fired == SelectionRule::MassMajority
        && c.selected == [1]
        && c.rule_fired == SelectionRule::LargestSignificantDrop;
    if !examples {
        return Err(format!("worked examples: {a:?} / {b:?} / {c:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for _ in 0..100_000 {
        let w: Vec<f64> = (0..10)
            .map(|_| {
                let x: f64 = rng.gen();
                if x == 0.0 {
                    f64::MIN_POSITIVE
                } else {
                    x
                }
            })
            .collect();
        let r = select_levels(&w).map_err(|e| e.to_string())?;
        let prefix =
            !r.selected.is_empty() && r.selected.iter().enumerate().all(|(i, &k)| k == i + 1);
        if !prefix {
            return Err(format!("{w:?} -> {:?}", r.selected));
        }
    }
    Ok("3 worked examples exact, 100000 random weight vectors give nonempty prefixes".into())
}

fn shift_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let signals: Vec<Signal> = (0..1000)
        .map(|i| Signal::with_label(common::zero_ended(&mut rng, 40), i % 2).unwrap())
        .collect();
    let d = Dataset::new("zero-ended", signals, 2).unwrap();
    let target = 80;
    let padded = shift_augment(&d, target, 607).map_err(|e| e.to_string())?;
    let grid = LandscapeGrid::default();
    let before = stack_dataset(d.signals(), &grid, 10, true).unwrap();
    let after = stack_dataset(padded.signals(), &grid, 10, true).unwrap();
    let model = GatedModel::new(ModelConfig::new(10, grid.points, 2).with_seed(608)).unwrap();
    for (i, (s, p)) in d.signals().iter().zip(padded.signals()).enumerate() {
        if sublevel_diagram(s).sorted_pairs() != sublevel_diagram(p).sorted_pairs() {
            return Err(format!("signal {i}: diagram changed"));
        }
        let (x, y) = (&before[i], &after[i]);
        if x.as_slice()
            .iter()
            .zip(y.as_slice())
            .any(|(a, b)| a.to_bits() != b.to_bits())
        {
            return Err(format!("signal {i}: landscape stack changed"));
        }
        let (ox, oy) = (
            model.forward(x.as_slice()).unwrap(),
            model.forward(y.as_slice()).unwrap(),
        );
        if ox.iter().zip(&oy).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return Err(format!("signal {i}: model output changed"));
        }
    }
    Ok(format!(
        "1000 signals padded to {target}: pairs, stacks and outputs bit-identical"
    ))
}

fn synthetic_attribution() -> Outcome {
    let (d, params) = secondary_dip_dataset(1000, 60, 7).map_err(|e| e.to_string())?;
    let grid = LandscapeGrid::unit(50).unwrap();
    let levels = 10;

    // Construction oracle: the unnormalized stack is exactly tent(a, p1) on
    // top of tent(b, p2), and only the second tent's range depends on class.
    let raw = stack_dataset(d.signals(), &grid, levels, false).unwrap();
    let mut persistence = [[f64::INFINITY, f64::NEG_INFINITY]; 4];
    for (i, (stack, p)) in raw.iter().zip(&params).enumerate() {
        let first = common::landscape_by_sort(&[PersistencePair::new(p.a, p.p1)], &grid, 1);
        let second = common::landscape_by_sort(&[PersistencePair::new(p.b, p.p2)], &grid, 1);
        let close =
            |row: &[f64], want: &[f64]| row.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-12);
        if !close(stack.row(0), &first[0]) || !close(stack.row(1), &second[0]) {
            return Err(format!(
                "signal {i}: first two levels are not the constructed tents"
            ));
        }
        if (2..levels).any(|k| stack.row(k).iter().any(|&v| v != 0.0)) {
            return Err(format!("signal {i}: level 3 or deeper is nonzero"));
        }
        for (slot, pers) in [(p.class, p.p1 - p.a), (2 + p.class, p.p2 - p.b)] {
            persistence[slot][0] = persistence[slot][0].min(pers);
            persistence[slot][1] = persistence[slot][1].max(pers);
        }
    }
    let overlap = |x: [f64; 2], y: [f64; 2]| x[0] <= y[1] && y[0] <= x[1];
    if !overlap(persistence[0], persistence[1]) || overlap(persistence[2], persistence[3]) {
        return Err(format!("class ranges of tent persistence: {persistence:?}"));
    }

    let stacks: Vec<_> = raw.into_iter().map(|s| s.normalize_area()).collect();
    let set = TrainingSet::from_stacks(&stacks, &d.labels(), 2).unwrap();
    let mut cfg = ModelConfig::new(levels, grid.points, 2).with_seed(7);
    cfg.conv_channels = [4, 8, 8];
    cfg.dense_hidden = 16;
    let tc = TrainConfig {
        epochs: 40,
        lr0: 0.05,
        lr_drop_every: 16,
        batch_size: 32,
        ..TrainConfig::default()
    };
    let (_, report) = train(&set, &cfg, &tc).map_err(|e| e.to_string())?;
    let top_two = report
        .folds
        .iter()
        .filter(|f| f.gates.iter().filter(|&&g| g > f.gates[1]).count() <= 1)
        .count();
    check(
        report.mean >= 0.95 && top_two >= 4,
        format!(
            "mean accuracy {:.4}, gate of level 2 in top 2 in {top_two}/5 folds",
            report.mean
        ),
    )
}

fn load_ecg() -> Result<Dataset, String> {
    let dir = data_dir().join("ECG5000");
    load_ucr(&dir).map_err(|e| format!("ECG5000 not available under {}: {e}", dir.display()))
}

fn ecg5000(ecg: &Result<Dataset, String>) -> (Outcome, Outcome) {
    let d = match ecg {
        Ok(d) => d,
        Err(e) => return (Err(e.clone()), Err(e.clone())),
    };
    let arch = Architecture::default();
    let tc = TrainConfig::default();
    let raw = match fit_raw(d, &arch, &tc, SEED) {
        Ok(r) => r,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };
    let study = match level_study(d, &LandscapeOptions::default(), &arch, &tc, SEED, false) {
        Ok(s) => s,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };
    let (r, l) = (raw.mean, study.full.mean);
    let c8 = check(
        r >= 0.88 && l >= 0.86 && (r - l).abs() <= 0.06,
        format!(
            "raw {:.4} +- {:.4}, landscape {:.4} +- {:.4}, gap {:.4}",
            r,
            raw.std,
            l,
            study.full.std,
            (r - l).abs()
        ),
    );
    let s = study.selected.mean;
    let c9 = check(
        (s - l).abs() <= 0.02,
        format!(
            "levels {:?} ({:?}): {:.4} +- {:.4} vs full {:.4}, gates {:?}",
            study.selection.selected,
            study.selection.rule_fired,
            s,
            study.selected.std,
            l,
            study
                .full
                .gating_mean
                .iter()
                .map(|g| (g * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        ),
    );
    (c8, c9)
}

fn mitbih_shift() -> Outcome {
    let path = data_dir().join("mitbih").join("mitbih_train.csv");
    if !path.is_file() {
        return Err(format!(
            "MIT-BIH heartbeat CSV not found at {}",
            path.display()
        ));
    }
    let d = load_mitbih_csv(&path).map_err(|e| e.to_string())?;
    let s = shift_study(
        &d,
        2 * MITBIH_BEAT_LENGTH,
        &LandscapeOptions::default(),
        &Architecture::default(),
        &TrainConfig::default(),
        SEED,
        false,
    )
    .map_err(|e| e.to_string())?;
    check(
        s.padded.mean < s.raw.mean && s.stacks_identical,
        format!(
            "raw {:.4}, padded to {} {:.4}, stacks identical: {}",
            s.raw.mean, s.target_length, s.padded.mean, s.stacks_identical
        ),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome, started: Instant| {
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {n}: PASS {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failures += 1;
                println!("criterion {n}: FAIL {name}: {d} [{secs:.1}s]");
            }
        }
    };

    let t = Instant::now();
    report(1, "persistence oracle", persistence_oracle(), t);
    let t = Instant::now();
    report(2, "landscape oracle", landscape_oracle(), t);
    let t = Instant::now();
    report(3, "gradient check", gradient_check(), t);
    let t = Instant::now();
    report(
        4,
        "reconstruction round trip",
        reconstruction_round_trip(),
        t,
    );
    let t = Instant::now();
    report(5, "level selection", selection_suite(), t);
    let t = Instant::now();
    report(6, "shift invariance", shift_invariance(), t);
    let t = Instant::now();
    report(7, "synthetic attribution", synthetic_attribution(), t);
    let t = Instant::now();
    let (c8, c9) = ecg5000(&load_ecg());
    report(8, "ECG5000 raw vs landscape", c8, t);
    report(9, "ECG5000 selected vs full", c9, t);
    let t = Instant::now();
    report(10, "MIT-BIH shift direction", mitbih_shift(), t);

    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
