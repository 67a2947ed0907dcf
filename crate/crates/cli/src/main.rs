mod output;
mod plot;
mod presets;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use tdagate_core::data_io::{
    load_dataset, load_mitbih_csv, load_ucr, read_json, save_dataset, save_stacks,
    write_stacks_csv, Dataset,
};
use tdagate_core::experiment::{
    landscape_stacks, reconstruct_dataset, Architecture, LandscapeOptions,
};
use tdagate_core::model::{save_checkpoint, train, FitReport, TrainConfig, TrainingSet};
use tdagate_core::reconstruction::{reconstruct_from_levels, PolylineMode};
use tdagate_core::selection::{select_levels, SelectionResult};

use output::Outputs;
use plot::Series;

#[derive(Parser)]
#[command(
    name = "tdagate",
    version,
    about = "Persistence landscapes and gated level selection for time-series classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute landscape stacks for every signal of a dataset.
    Landscape(LandscapeCmd),
    /// Cross-validate the classifier on raw signals or landscapes.
    Train(TrainCmd),
    /// Pick the informative prefix of levels from gate weights.
    Select(SelectCmd),
    /// Rebuild signals from the critical points matched by chosen levels.
    Reconstruct(ReconstructCmd),
    /// Run a predefined experiment end to end.
    Experiment(ExperimentCmd),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Auto,
    Ucr,
    Mitbih,
    Dataset,
}

#[derive(Args)]
struct InputArgs {
    /// UCR file or directory, MIT-BIH heartbeat CSV, or a dataset CSV
    /// written by this tool.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: Format,
}

#[derive(Args, Default)]
struct LandscapeArgs {
    /// Number of landscape levels.
    #[arg(long)]
    levels: Option<usize>,
    /// Number of grid points on [0, 1].
    #[arg(long)]
    grid: Option<usize>,
    /// Scale every nonzero level to unit area (default).
    #[arg(long, overrides_with = "no_normalize")]
    normalize: bool,
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Args, Default)]
struct TrainArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// JSON file with `seed`, `architecture`, `train` and `landscape`
    /// sections; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct LandscapeCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    landscape: LandscapeArgs,
    /// Also write a flat CSV of every stack.
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Representation {
    Raw,
    Landscape,
}

#[derive(Args)]
struct TrainCmd {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "landscape")]
    repr: Representation,
    #[command(flatten)]
    landscape: LandscapeArgs,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelectCmd {
    /// Training report whose mean gate weights are used.
    #[arg(long, conflicts_with = "weights", required_unless_present = "weights")]
    report: Option<PathBuf>,
    /// Comma-separated weights, level 1 first.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructCmd {
    #[command(flatten)]
    input: InputArgs,
    /// 1-based levels to reconstruct from, e.g. `1,2,3`.
    #[arg(long, value_delimiter = ',', required = true)]
    select: Vec<usize>,
    /// Samples to plot.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    samples: Vec<usize>,
    /// Also write the whole reconstructed dataset as CSV.
    #[arg(long)]
    dataset: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Preset {
    /// Two-class signals that differ only in their second level.
    Synthetic,
    /// Raw vs landscape vs selected levels on ECG5000.
    Ecg5000Table2,
    /// Raw, 10 levels, selected levels and reconstructions on MIT-BIH.
    MitbihTable3,
    /// Raw accuracy before and after zero padding MIT-BIH to double length.
    MitbihShift,
}

#[derive(Args)]
struct ExperimentCmd {
    #[arg(value_enum)]
    preset: Preset,
    /// Directory holding `ECG5000/` and `mitbih/mitbih_train.csv`
    /// (default `$TDAGATE_DATA_DIR` or `./data`).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Keep a random subset of this many signals.
    #[arg(long)]
    limit: Option<usize>,
    #[command(flatten)]
    landscape: LandscapeArgs,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long)]
    out: PathBuf,
}

/// Everything that shapes a training run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub architecture: Architecture,
    pub train: TrainConfig,
    pub landscape: LandscapeOptions,
}

impl RunConfig {
    fn resolve(mut self, file: Option<&Path>, t: &TrainArgs, l: &LandscapeArgs) -> Result<Self> {
        if let Some(path) = file {
            self = read_json(path).with_context(|| format!("reading config {}", path.display()))?;
        }
        if let Some(s) = t.seed {
            self.seed = s;
        }
        if let Some(f) = t.folds {
            self.train.folds = f;
        }
        if let Some(e) = t.epochs {
            self.train.epochs = e;
        }
        l.apply(&mut self.landscape);
        Ok(self)
    }
}

impl LandscapeArgs {
    fn apply(&self, o: &mut LandscapeOptions) {
        if let Some(k) = self.levels {
            o.levels = k;
        }
        if let Some(m) = self.grid {
            o.grid_points = m;
        }
        if self.no_normalize {
            o.normalize = false;
        } else if self.normalize {
            o.normalize = true;
        }
    }

    fn options(&self) -> LandscapeOptions {
        let mut o = LandscapeOptions::default();
        self.apply(&mut o);
        o
    }
}

fn load_input(path: &Path, format: Format) -> Result<Dataset> {
    let format = match format {
        Format::Auto if path.is_dir() => Format::Ucr,
        Format::Auto => {
            let head = std::fs::read(path)
                .with_context(|| format!("reading {}", path.display()))?
                .into_iter()
                .take(7)
                .collect::<Vec<u8>>();
            let csv = path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            if head == b"# name=" {
                Format::Dataset
            } else if csv {
                Format::Mitbih
            } else {
                Format::Ucr
            }
        }
        f => f,
    };
    let d = match format {
        Format::Ucr | Format::Auto => load_ucr(path)?,
        Format::Mitbih => load_mitbih_csv(path)?,
        Format::Dataset => load_dataset(path)?,
    };
    Ok(d)
}

fn level_labels(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("λ{k}")).collect()
}

pub fn gate_plot(out: &mut Outputs, name: &str, report: &FitReport) -> Result<()> {
    if report.gating_mean.is_empty() {
        return Ok(());
    }
    let svg = plot::bar_chart(
        "Mean gate weight per level",
        &level_labels(report.gating_mean.len()),
        &report.gating_mean,
        &report.gating_std,
    );
    out.write(name, svg.as_bytes())?;
    Ok(())
}

fn run_landscape(cmd: &LandscapeCmd, out: &mut Outputs) -> Result<()> {
    out.add_input(&cmd.input.input)?;
    let d = load_input(&cmd.input.input, cmd.input.format)?;
    let opts = cmd.landscape.options();
    let stacks = landscape_stacks(&d, &opts)?;
    let labels: Vec<Option<usize>> = d.signals().iter().map(|s| s.label()).collect();
    save_stacks(out.path("stacks.bin"), &stacks, &labels)?;
    out.record("stacks.bin")?;
    if cmd.csv {
        write_stacks_csv(out.path("stacks.csv"), &stacks, &labels)?;
        out.record("stacks.csv")?;
    }
    out.write_json("landscape.json", &opts)?;
    let ts = stacks[0].grid().ts();
    let series: Vec<Series> = stacks[0]
        .rows()
        .enumerate()
        .map(|(k, row)| Series {
            name: format!("λ{}", k + 1),
            x: ts.clone(),
            y: row.to_vec(),
        })
        .collect();
    out.write(
        "landscape_0.svg",
        plot::line_chart("Landscape levels of sample 0", &series).as_bytes(),
    )?;
    eprintln!(
        "{} stacks of {} x {} written",
        stacks.len(),
        opts.levels,
        opts.grid_points
    );
    Ok(())
}

fn run_train(cmd: &TrainCmd, out: &mut Outputs) -> Result<()> {
    let cfg =
        RunConfig::default().resolve(cmd.train.config.as_deref(), &cmd.train, &cmd.landscape)?;
    out.set_seed(cfg.seed);
    out.add_input(&cmd.input.input)?;
    if let Some(c) = &cmd.train.config {
        out.add_input(c)?;
    }
    let d = load_input(&cmd.input.input, cmd.input.format)?;
    let set = match cmd.repr {
        Representation::Raw => TrainingSet::from_signals(d.signals(), d.class_count())?,
        Representation::Landscape => {
            let stacks = landscape_stacks(&d, &cfg.landscape)?;
            TrainingSet::from_stacks(&stacks, &d.labels(), d.class_count())?
        }
    };
    let (rows, cols) = set.shape();
    let model_cfg = cfg
        .architecture
        .config(rows, cols, d.class_count(), cfg.seed);
    let (model, report) = train(&set, &model_cfg, &cfg.train)?;
    out.write_json("config.json", &cfg)?;
    out.write_json("report.json", &report)?;
    save_checkpoint(out.path("model.ckpt"), &model)?;
    out.record("model.ckpt")?;
    gate_plot(out, "gates.svg", &report)?;
    eprintln!(
        "accuracy {:.4} +- {:.4} over {} fold(s)",
        report.mean,
        report.std,
        report.folds.len()
    );
    Ok(())
}

fn run_select(cmd: &SelectCmd, out: Option<&mut Outputs>) -> Result<SelectionResult> {
    let weights = match (&cmd.report, &cmd.weights) {
        (Some(path), _) => {
            let r: FitReport = read_json(path)?;
            if r.gating_mean.is_empty() {
                bail!(
                    "{} has no gate weights (trained without gating)",
                    path.display()
                );
            }
            r.gating_mean
        }
        (None, Some(w)) => w.clone(),
        (None, None) => bail!("pass --report or --weights"),
    };
    let sel = select_levels(&weights)?;
    if let Some(out) = out {
        if let Some(p) = &cmd.report {
            out.add_input(p)?;
        }
        out.write_json("selection.json", &sel)?;
    }
    Ok(sel)
}

fn run_reconstruct(cmd: &ReconstructCmd, out: &mut Outputs) -> Result<()> {
    out.add_input(&cmd.input.input)?;
    let d = load_input(&cmd.input.input, cmd.input.format)?;
    if let Some(&bad) = cmd.select.iter().find(|&&k| k == 0) {
        bail!("levels are 1-based, got {bad}");
    }
    let rows: Vec<usize> = cmd.select.iter().map(|k| k - 1).collect();
    let mut summary = Vec::new();
    for &i in &cmd.samples {
        let s = d
            .signals()
            .get(i)
            .with_context(|| format!("sample {i} out of range (dataset has {})", d.len()))?;
        let r = reconstruct_from_levels(s, &rows, PolylineMode::Exact)
            .with_context(|| format!("reconstructing sample {i}"))?;
        let svg = plot::line_chart(
            &format!("Sample {i} reconstructed from levels {:?}", cmd.select),
            &[
                Series::indexed("original", s.values()),
                Series::indexed("reconstruction", r.simplified.values()),
            ],
        );
        out.write(&format!("reconstruction_{i}.svg"), svg.as_bytes())?;
        summary.push(serde_json::json!({ "sample": i, "label": s.label(), "points": r.points }));
    }
    out.write_json("reconstruction.json", &summary)?;
    if cmd.dataset {
        let r = reconstruct_dataset(&d, &rows)?;
        save_dataset(out.path("reconstructed.csv"), &r)?;
        out.record("reconstructed.csv")?;
    }
    Ok(())
}

fn run_experiment(cmd: &ExperimentCmd, out: &mut Outputs) -> Result<()> {
    let base = presets::defaults(cmd.preset);
    let cfg = base.resolve(cmd.train.config.as_deref(), &cmd.train, &cmd.landscape)?;
    out.set_seed(cfg.seed);
    if let Some(c) = &cmd.train.config {
        out.add_input(c)?;
    }
    let data_dir = cmd
        .data_dir
        .clone()
        .or_else(|| std::env::var_os("TDAGATE_DATA_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"));
    presets::run(cmd.preset, &cfg, &data_dir, cmd.limit, out)
}

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    if let Err(e) = dispatch(&cli, &argv) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<()> {
    let out_dir = match &cli.command {
        Command::Landscape(c) => Some(&c.out),
        Command::Train(c) => Some(&c.out),
        Command::Select(c) => c.out.as_ref(),
        Command::Reconstruct(c) => Some(&c.out),
        Command::Experiment(c) => Some(&c.out),
    };
    let Some(dir) = out_dir else {
        if let Command::Select(c) = &cli.command {
            let sel = run_select(c, None)?;
            println!("{}", serde_json::to_string_pretty(&sel)?);
        }
        return Ok(());
    };
    let mut out = Outputs::create(dir)?;
    let result = match &cli.command {
        Command::Landscape(c) => run_landscape(c, &mut out),
        Command::Train(c) => run_train(c, &mut out),
        Command::Select(c) => run_select(c, Some(&mut out)).map(|sel| {
            println!(
                "{}",
                serde_json::to_string_pretty(&sel).expect("selection serializes")
            );
        }),
        Command::Reconstruct(c) => run_reconstruct(c, &mut out),
        Command::Experiment(c) => run_experiment(c, &mut out),
    };
    match result {
        Ok(()) => {
            let manifest = out.finish(argv)?;
            eprintln!("wrote {}", manifest.display());
            Ok(())
        }
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}
