//! `tactile-gcn`: dataset summaries, training, the experiment sweeps,
//! test-set evaluation and figure export.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use tactile_gcn::dataset::{count_summary, load_csv, ColumnMapping, DatasetSplit, Finger, Label, SplitKind};
use tactile_gcn::experiments::{
    connectivity_grid, cross_validate, evaluate, generalization_test, sweep_connectivity, sweep_depth_width, train,
    CvSettings, EpochPolicy, ExperimentReport, FoldRun, Topology, TrainConfig,
};
use tactile_gcn::fsutil::atomic_write;
use tactile_gcn::gcn::{load_model, save_model, Checkpoint, GcnConfig};
use tactile_gcn::sensor_graph::{load_layout, manual_edges, EdgeMode, EdgeSet};
use tactile_gcn::viz::{layout_csv, plot_csv, plot_points, render_channel_svg, PlotAxis, Projection};
use tactile_gcn::Error;

#[derive(Parser)]
#[command(name = "tactile-gcn", version, about = "Grasp stability prediction with graph convolutional networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the 24 taxel coordinates as CSV.
    Layout {
        #[arg(long, default_value = "layout.csv")]
        out: PathBuf,
    },
    /// Print sample counts per palm orientation and label.
    Summary {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Cross-validate a configuration, then fit it on the whole split and save the model.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Skip fitting and saving the final model.
        #[arg(long)]
        no_model: bool,
    },
    /// Run the depth/width or connectivity experiment.
    Sweep {
        kind: SweepKind,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Sweep every k from 1 to 23 instead of the odd values.
        #[arg(long)]
        full_k_grid: bool,
    },
    /// Evaluate a saved model on each palm orientation of a test split.
    Test {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Must match the edges the model was trained with.
        #[arg(long)]
        edges: Option<EdgeMode>,
        #[arg(long)]
        edge_file: Option<PathBuf>,
        #[arg(long, default_value = "slippery")]
        positive_class: ClassArg,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Render one grasp as an SVG per finger channel.
    Viz {
        #[command(flatten)]
        data: DataArgs,
        /// 1-based data row of the sample to draw.
        #[arg(long)]
        sample: usize,
        #[arg(long, default_value = "manual")]
        edges: EdgeMode,
        #[arg(long)]
        edge_file: Option<PathBuf>,
        #[arg(long, default_value = "xy")]
        plane: Projection,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Dataset CSV file.
    #[arg(long)]
    dataset: PathBuf,
    /// Column and token mapping for files that do not use the native schema.
    #[arg(long)]
    mapping: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value = "manual")]
    edges: EdgeMode,
    /// Manual edge list replacing the built-in one.
    #[arg(long)]
    edge_file: Option<PathBuf>,
    #[arg(long, conflicts_with = "widths", value_parser = clap::value_parser!(u32).range(1..=10))]
    depth: Option<u32>,
    /// Comma-separated conv widths, e.g. 8,8,16,16,32.
    #[arg(long, value_delimiter = ',')]
    widths: Option<Vec<usize>>,
    #[arg(long, default_value_t = 512)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 5e-4)]
    wd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cross-validation rounds; 0 skips cross-validation.
    #[arg(long, default_value_t = 10)]
    rounds: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value = "slippery")]
    positive_class: ClassArg,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write measured per-run times into the report CSV (makes it run dependent).
    #[arg(long)]
    record_wall_clock: bool,
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    DepthWidth,
    Connectivity,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Stable,
    Slippery,
}

impl From<ClassArg> for Label {
    fn from(c: ClassArg) -> Label {
        match c {
            ClassArg::Stable => Label::Stable,
            ClassArg::Slippery => Label::Slippery,
        }
    }
}

impl TrainArgs {
    fn config(&self) -> Result<TrainConfig> {
        let gcn = match (&self.widths, self.depth) {
            (Some(w), _) => GcnConfig::new(w.clone(), self.seed)?,
            (None, d) => GcnConfig::for_depth(d.unwrap_or(5) as usize, self.seed)?,
        };
        let config = TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch,
            lr: self.lr,
            weight_decay: self.wd,
            seed: self.seed,
            edge_mode: self.edges,
            gcn,
            positive_class: self.positive_class.into(),
        };
        config.validate()?;
        Ok(config)
    }
}

fn load_manual(edge_file: Option<&Path>) -> Result<EdgeSet> {
    Ok(manual_edges(edge_file)?)
}

fn load_split(data: &DataArgs, kind: SplitKind) -> Result<DatasetSplit> {
    if !data.dataset.is_file() {
        return Err(Error::Validation(format!("dataset file not found: {}", data.dataset.display())).into());
    }
    let mapping = data.mapping.as_deref().map(ColumnMapping::load).transpose()?;
    Ok(load_csv(&data.dataset, mapping.as_ref(), kind)?)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    atomic_write(path, bytes)?;
    Ok(())
}

fn write_report(dir: &Path, stem: &str, report: &ExperimentReport) -> Result<()> {
    write_file(&dir.join(format!("{stem}.csv")), &report.csv_bytes())?;
    write_file(&dir.join(format!("{stem}.meta.txt")), report.metadata_text().as_bytes())
}

fn progress_printer(quiet: bool) -> impl Fn(&FoldRun) + Sync {
    move |r: &FoldRun| {
        if !quiet {
            eprintln!(
                "depth {} k {} round {} fold {}: best {:.4} (epoch {}), final {:.4}",
                r.depth, r.k, r.round, r.fold, r.best.accuracy, r.best_epoch, r.last.accuracy
            );
        }
    }
}

fn print_aggregates(report: &ExperimentReport) {
    println!("{:<14}{:>6} {:<30}{:>4}{:>7}{:>5}{:>10}{:>10}", "experiment", "depth", "widths", "k", "epoch", "n", "acc mean", "acc std");
    for a in report.aggregates() {
        println!(
            "{:<14}{:>6} {:<30}{:>4}{:>7}{:>5}{:>10.4}{:>10.4}",
            a.experiment, a.depth, a.widths, a.k, a.epoch_policy.to_string(), a.n, a.accuracy.mean, a.accuracy.std
        );
    }
}

fn cmd_train(data: &DataArgs, args: &TrainArgs, no_model: bool) -> Result<()> {
    let config = args.config()?;
    let manual = load_manual(args.edge_file.as_deref())?;
    let split = load_split(data, SplitKind::Train)?;
    create_dir(&args.out)?;
    println!(
        "training {} samples, conv widths {}, edges {}",
        split.len(),
        config.gcn.widths_label(),
        config.edge_mode
    );

    let topology = Topology::new(config.edge_mode, &manual)?;
    if args.rounds > 0 {
        let progress = progress_printer(args.quiet);
        let settings = CvSettings {
            rounds: args.rounds,
            folds: args.folds,
            manual_edges: &manual,
            progress: Some(&progress),
        };
        let mut report = cross_validate(&config, &split, &settings)?;
        report.timing_in_csv = args.record_wall_clock;
        write_report(&args.out, "report", &report)?;
        print_aggregates(&report);
    }
    if !no_model {
        let outcome = train(&config, &topology, &split, None)?;
        let fit = evaluate(&outcome.model, &split, &topology.a_norm, config.positive_class)?;
        println!("final model training accuracy {:.4}", fit.accuracy);
        let ckpt = Checkpoint {
            model: outcome.model,
            edge_mode: config.edge_mode,
            edge_fingerprint: topology.fingerprint(),
        };
        let path = args.out.join("model.tgcn");
        save_model(&ckpt, &path)?;
        println!("saved {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(kind: SweepKind, data: &DataArgs, args: &TrainArgs, full_k_grid: bool) -> Result<()> {
    let config = args.config()?;
    let manual = load_manual(args.edge_file.as_deref())?;
    let split = load_split(data, SplitKind::Train)?;
    if args.rounds == 0 {
        return Err(Error::InvalidArgument("sweeps need at least one round".into()).into());
    }
    create_dir(&args.out)?;
    let progress = progress_printer(args.quiet);
    let settings = CvSettings {
        rounds: args.rounds,
        folds: args.folds,
        manual_edges: &manual,
        progress: Some(&progress),
    };
    let (mut report, stem, axis) = match kind {
        SweepKind::DepthWidth => (sweep_depth_width(&config, &split, &settings)?, "depth_width", PlotAxis::Depth),
        SweepKind::Connectivity => (
            sweep_connectivity(&config, &split, &settings, &connectivity_grid(full_k_grid))?,
            "connectivity",
            PlotAxis::K,
        ),
    };
    report.timing_in_csv = args.record_wall_clock;
    write_report(&args.out, stem, &report)?;
    for (policy, suffix) in [(EpochPolicy::Best, "plot"), (EpochPolicy::Final, "plot_final")] {
        let points = plot_points(&report.aggregates_for(policy), axis);
        write_file(&args.out.join(format!("{stem}_{suffix}.csv")), plot_csv(&points).as_bytes())?;
    }
    print_aggregates(&report);
    Ok(())
}

fn cmd_test(
    model_path: &Path,
    data: &DataArgs,
    edges: Option<EdgeMode>,
    edge_file: Option<&Path>,
    positive: Label,
    out: &Path,
) -> Result<()> {
    let ckpt = load_model(model_path)?;
    if let Some(requested) = edges {
        if requested != ckpt.edge_mode {
            return Err(Error::Mismatch(format!(
                "model was trained with edges {}, but {requested} was requested",
                ckpt.edge_mode
            ))
            .into());
        }
    }
    let topology = Topology::new(ckpt.edge_mode, &load_manual(edge_file)?)?;
    if topology.fingerprint() != ckpt.edge_fingerprint {
        return Err(Error::Mismatch(format!(
            "edge list ({}) differs from the one the model was trained with",
            ckpt.edge_mode
        ))
        .into());
    }
    let split = load_split(data, SplitKind::Test)?;
    let result = generalization_test(&ckpt.model, &topology, &split, positive)?;
    for o in &result.skipped {
        eprintln!("warning: no {} samples in the test split, row omitted", o.display_name());
    }
    println!("{:<6}{:>10}{:>11}{:>8}{:>8}", "", "accuracy", "precision", "recall", "f1");
    for (name, m) in &result.rows {
        println!("{name:<6}{:>10.3}{:>11.3}{:>8.3}{:>8.3}", m.accuracy, m.precision, m.recall, m.f1);
    }
    create_dir(out)?;
    write_report(out, "generalization", &result.report)
}

fn cmd_viz(
    data: &DataArgs,
    sample: usize,
    edges: EdgeMode,
    edge_file: Option<&Path>,
    plane: Projection,
    out: &Path,
) -> Result<()> {
    let split = load_split(data, SplitKind::Train)?;
    let s = sample
        .checked_sub(1)
        .and_then(|i| split.samples.get(i))
        .ok_or_else(|| Error::Validation(format!("sample {sample} does not exist (dataset has {} rows)", split.len())))?;
    let layout = load_layout();
    let edge_set = edges.resolve(&layout, &load_manual(edge_file)?)?;
    create_dir(out)?;
    for finger in Finger::ALL {
        let svg = render_channel_svg(s, finger, &edge_set, &layout, plane);
        let path = out.join(format!("sample{sample}_{}.svg", finger.name().to_lowercase()));
        write_file(&path, svg.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Layout { out } => {
            write_file(&out, layout_csv().as_bytes())?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Summary { data } => {
            let split = load_split(&data, SplitKind::Train)?;
            println!("{}", count_summary(&split));
            Ok(())
        }
        Command::Train { data, train, no_model } => cmd_train(&data, &train, no_model),
        Command::Sweep {
            kind,
            data,
            train,
            full_k_grid,
        } => cmd_sweep(kind, &data, &train, full_k_grid),
        Command::Test {
            model,
            data,
            edges,
            edge_file,
            positive_class,
            out,
        } => cmd_test(&model, &data, edges, edge_file.as_deref(), positive_class.into(), &out),
        Command::Viz {
            data,
            sample,
            edges,
            edge_file,
            plane,
            out,
        } => cmd_viz(&data, sample, edges, edge_file.as_deref(), plane, &out),
    }
}

/// 0 success, 2 I/O, 3 bad data, 4 model/config mismatch, 1 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Io { .. }) => 2,
        Some(Error::Mismatch(_)) => 4,
        Some(e) if e.is_data_error() => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}
