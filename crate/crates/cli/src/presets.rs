use std::fmt::Write;
use std::path::Path;

use anyhow::{Context, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tdagate_core::data_io::{load_mitbih_csv, load_ucr, Dataset, MITBIH_BEAT_LENGTH};
use tdagate_core::experiment::{
    fit_raw, level_study, shift_study, Architecture, LevelStudy, ShiftStudy,
};
use tdagate_core::model::{FitReport, TrainConfig};
use tdagate_core::reconstruction::{reconstruct_from_levels, PolylineMode};
use tdagate_core::synthetic::secondary_dip_dataset;

use crate::output::Outputs;
use crate::plot::{self, Series};
use crate::{gate_plot, Preset, RunConfig};

const SYNTHETIC_COUNT: usize = 1000;
const SYNTHETIC_LENGTH: usize = 60;

pub fn defaults(preset: Preset) -> RunConfig {
    match preset {
        // Small network and short schedule: the task is easy and this keeps
        // the run to about a minute.
        Preset::Synthetic => {
            let mut c = RunConfig {
                seed: 7,
                architecture: Architecture {
                    conv_channels: [4, 8, 8],
                    dense_hidden: 16,
                    ..Architecture::default()
                },
                train: TrainConfig {
                    epochs: 40,
                    lr0: 0.05,
                    lr_drop_every: 16,
                    batch_size: 32,
                    ..TrainConfig::default()
                },
                ..RunConfig::default()
            };
            c.landscape.grid_points = 50;
            c
        }
        _ => RunConfig {
            seed: 1,
            ..RunConfig::default()
        },
    }
}

fn subsample(d: Dataset, limit: Option<usize>, seed: u64) -> Result<Dataset> {
    let Some(n) = limit.filter(|&n| n < d.len()) else {
        return Ok(d);
    };
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(n);
    idx.sort_unstable();
    let name = format!("{}-subset{n}", d.name);
    let classes = d.class_count();
    let signals = d.into_signals();
    let picked = idx.into_iter().map(|i| signals[i].clone()).collect();
    Ok(Dataset::new(name, picked, classes)?)
}

fn cell(r: &FitReport) -> String {
    format!("{:.2} +- {:.2}", 100.0 * r.mean, 100.0 * r.std)
}

#[derive(Serialize)]
struct StudyResults<'a> {
    dataset: &'a str,
    config: &'a RunConfig,
    raw: &'a FitReport,
    study: &'a LevelStudy,
}

#[derive(Serialize)]
struct ShiftResults<'a> {
    dataset: &'a str,
    config: &'a RunConfig,
    study: &'a ShiftStudy,
}

pub fn run(
    preset: Preset,
    cfg: &RunConfig,
    data_dir: &Path,
    limit: Option<usize>,
    out: &mut Outputs,
) -> Result<()> {
    let d = match preset {
        Preset::Synthetic => secondary_dip_dataset(SYNTHETIC_COUNT, SYNTHETIC_LENGTH, cfg.seed)?.0,
        Preset::Ecg5000Table2 => {
            let dir = data_dir.join("ECG5000");
            out.add_input(&dir)
                .with_context(|| format!("ECG5000 not found under {}", data_dir.display()))?;
            load_ucr(&dir)?
        }
        Preset::MitbihTable3 | Preset::MitbihShift => {
            let file = data_dir.join("mitbih").join("mitbih_train.csv");
            out.add_input(&file).with_context(|| {
                format!("MIT-BIH heartbeat CSV not found at {}", file.display())
            })?;
            load_mitbih_csv(&file)?
        }
    };
    let d = subsample(d, limit, cfg.seed)?;
    eprintln!(
        "{}: {} signals of length {}, {} classes",
        d.name,
        d.len(),
        d.signal_len(),
        d.class_count()
    );

    if let Preset::MitbihShift = preset {
        let s = shift_study(
            &d,
            2 * MITBIH_BEAT_LENGTH,
            &cfg.landscape,
            &cfg.architecture,
            &cfg.train,
            cfg.seed,
            true,
        )?;
        out.write_json(
            "results.json",
            &ShiftResults {
                dataset: &d.name,
                config: cfg,
                study: &s,
            },
        )?;
        let mut md =
            String::from("| | Raw data | Double length | Landscape |\n|---|---|---|---|\n");
        let land = s.landscape.as_ref().map(cell).unwrap_or_default();
        writeln!(
            md,
            "| Accuracy (%) | {} | {} | {land} |",
            cell(&s.raw),
            cell(&s.padded)
        )
        .unwrap();
        writeln!(
            md,
            "\nLandscape stacks unchanged by padding: {}",
            s.stacks_identical
        )
        .unwrap();
        out.write("summary.md", md.as_bytes())?;
        eprint!("{md}");
        return Ok(());
    }

    let with_reconstruction = !matches!(preset, Preset::Ecg5000Table2);
    eprintln!("training on raw signals");
    let raw = fit_raw(&d, &cfg.architecture, &cfg.train, cfg.seed)?;
    eprintln!("training on landscapes");
    let study = level_study(
        &d,
        &cfg.landscape,
        &cfg.architecture,
        &cfg.train,
        cfg.seed,
        with_reconstruction,
    )?;
    out.write_json(
        "results.json",
        &StudyResults {
            dataset: &d.name,
            config: cfg,
            raw: &raw,
            study: &study,
        },
    )?;
    gate_plot(out, "gates.svg", &study.full)?;

    let k = cfg.landscape.levels;
    let sel = study.selection.selected.len();
    let mut md = format!("| | Raw data | {k} levels | {sel} levels |");
    let mut row = format!(
        "| Accuracy (%) | {} | {} | {} |",
        cell(&raw),
        cell(&study.full),
        cell(&study.selected)
    );
    let mut rule = String::from("|---|---|---|---|");
    if let Some(r) = &study.reconstructed {
        md.push_str(" Reconstructed |");
        write!(row, " {} |", cell(r)).unwrap();
        rule.push_str("---|");
    }
    let mut text = format!("{md}\n{rule}\n{row}\n");
    writeln!(
        text,
        "\nSelected levels {:?} ({:?})",
        study.selection.selected, study.selection.rule_fired
    )
    .unwrap();
    out.write("summary.md", text.as_bytes())?;
    eprint!("{text}");

    if with_reconstruction {
        let rows = study.selection.rows();
        for class in 0..d.class_count() {
            let Some(s) = d.signals().iter().find(|s| s.label() == Some(class)) else {
                continue;
            };
            let Ok(r) = reconstruct_from_levels(s, &rows, PolylineMode::Exact) else {
                continue;
            };
            let svg = plot::line_chart(
                &format!(
                    "Class {class}: reconstruction from levels {:?}",
                    study.selection.selected
                ),
                &[
                    Series::indexed("original", s.values()),
                    Series::indexed("reconstruction", r.simplified.values()),
                ],
            );
            out.write(&format!("reconstruction_class{class}.svg"), svg.as_bytes())?;
        }
    }
    Ok(())
}
