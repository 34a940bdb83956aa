use std::time::Instant;

use rayon::prelude::*;

use super::metrics::{evaluate_prepared, Metrics, PreparedSamples};
use super::report::{config_metadata, EpochPolicy, ExperimentReport, ReportRow};
use super::train::{train_prepared, Topology, TrainConfig};
use crate::dataset::{filter_orientation, make_folds, DatasetSplit, Orientation};
use crate::error::{Error, Result};
use crate::gcn::{GcnConfig, GcnModel, MAX_CONV_LAYERS};
use crate::rng::derive_seed;
use crate::sensor_graph::{EdgeMode, EdgeSet};

const RUN_STREAM: u64 = 0x5255_4E00; // "RUN"

/// Shared inputs of the cross-validated experiments.
pub struct CvSettings<'a> {
    pub rounds: usize,
    pub folds: usize,
    /// Edge list used for [`EdgeMode::Manual`].
    pub manual_edges: &'a EdgeSet,
    /// Called once per finished (round, fold), from worker threads.
    pub progress: Option<&'a (dyn Fn(&FoldRun) + Sync)>,
}

impl<'a> CvSettings<'a> {
    /// Ten rounds of five folds.
    pub fn new(manual_edges: &'a EdgeSet) -> Self {
        Self {
            rounds: 10,
            folds: 5,
            manual_edges,
            progress: None,
        }
    }
}

/// Result of one train/validate cycle.
#[derive(Debug, Clone)]
pub struct FoldRun {
    pub depth: usize,
    pub k: usize,
    pub round: usize,
    pub fold: usize,
    pub seed: u64,
    pub best_epoch: usize,
    pub best: Metrics,
    pub last: Metrics,
    pub wall_ms: u64,
}

/// Seed for the model and shuffling of one (round, fold), derived from the
/// configured seed so runs are independent but reproducible.
pub fn fold_seed(seed: u64, round: usize, fold: usize) -> u64 {
    derive_seed(seed, RUN_STREAM ^ ((round as u64) << 32) ^ fold as u64)
}

fn cv_runs(config: &TrainConfig, split: &DatasetSplit, data: &PreparedSamples, settings: &CvSettings) -> Result<Vec<FoldRun>> {
    if settings.rounds == 0 {
        return Err(Error::InvalidArgument("rounds must be at least 1".into()));
    }
    let topology = Topology::new(config.edge_mode, settings.manual_edges)?;
    let mut jobs = Vec::with_capacity(settings.rounds * settings.folds);
    for round in 0..settings.rounds {
        let assignment = make_folds(split, settings.folds, config.seed, round as u64)?;
        for fold in 0..settings.folds {
            let (train_idx, val_idx) = assignment.split_indices(fold);
            check_no_leak(split.len(), &train_idx, &val_idx, round, fold)?;
            jobs.push((round, fold, train_idx, val_idx));
        }
    }

    jobs.into_par_iter()
        .map(|(round, fold, train_idx, val_idx)| {
            let start = Instant::now();
            let seed = fold_seed(config.seed, round, fold);
            let run_config = TrainConfig {
                seed,
                gcn: GcnConfig {
                    init_seed: seed,
                    ..config.gcn.clone()
                },
                ..config.clone()
            };
            let outcome = train_prepared(
                &run_config,
                &topology.a_norm,
                &data.select(&train_idx),
                Some(&data.select(&val_idx)),
            )?;
            let best = outcome.best_epoch().expect("validation recorded");
            let run = FoldRun {
                depth: config.gcn.depth(),
                k: config.edge_mode.k(),
                round,
                fold,
                seed,
                best_epoch: best.epoch,
                best: best.val.expect("validation recorded"),
                last: outcome.final_epoch().and_then(|r| r.val).expect("validation recorded"),
                wall_ms: start.elapsed().as_millis() as u64,
            };
            if let Some(p) = settings.progress {
                p(&run);
            }
            Ok(run)
        })
        .collect()
}

fn check_no_leak(n: usize, train: &[usize], val: &[usize], round: usize, fold: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in train {
        seen[i] = true;
    }
    if let Some(&i) = val.iter().find(|&&i| seen[i]) {
        return Err(Error::InvalidState(format!(
            "round {round} fold {fold}: sample {i} is in both training and validation sets"
        )));
    }
    if train.len() + val.len() != n {
        return Err(Error::InvalidState(format!("round {round} fold {fold}: folds do not cover the split")));
    }
    Ok(())
}

fn rows_for(experiment: &str, config: &TrainConfig, runs: &[FoldRun]) -> Vec<ReportRow> {
    let mut rows = Vec::with_capacity(2 * runs.len());
    for policy in [EpochPolicy::Best, EpochPolicy::Final] {
        for r in runs {
            rows.push(ReportRow {
                experiment: experiment.to_string(),
                depth: config.gcn.depth(),
                widths: config.gcn.widths_label(),
                k: config.edge_mode.k(),
                round: Some(r.round),
                fold: Some(r.fold),
                epoch_policy: policy,
                metrics: if policy == EpochPolicy::Best { r.best } else { r.last },
                seed: r.seed,
                wall_ms: r.wall_ms,
            });
        }
    }
    rows
}

fn cv_metadata(config: &TrainConfig, split: &DatasetSplit, settings: &CvSettings) -> Vec<(String, String)> {
    let mut meta = config_metadata(config);
    meta.extend(
        [
            ("rounds", settings.rounds.to_string()),
            ("folds", settings.folds.to_string()),
            ("stratified", "true".to_string()),
            ("dataset_samples", split.len().to_string()),
            ("dataset_sha256", split.fingerprint()),
            ("manual_edges_sha256", settings.manual_edges.fingerprint()),
        ]
        .map(|(k, v)| (k.to_string(), v)),
    );
    meta
}

/// `rounds` × `folds` independent train/validate cycles on `split`. Rows
/// are ordered by epoch policy, then (round, fold).
pub fn cross_validate(config: &TrainConfig, split: &DatasetSplit, settings: &CvSettings) -> Result<ExperimentReport> {
    let start = Instant::now();
    let data = PreparedSamples::from_split(split)?;
    let runs = cv_runs(config, split, &data, settings)?;
    let mut meta = cv_metadata(config, split, settings);
    meta.push(("edges_sha256".into(), Topology::new(config.edge_mode, settings.manual_edges)?.fingerprint()));
    Ok(ExperimentReport::new(
        "cv",
        meta,
        rows_for("cv", config, &runs),
        start.elapsed().as_millis() as u64,
    ))
}

/// Cross-validation for depths 1 to 10 with manual edges.
pub fn sweep_depth_width(base: &TrainConfig, split: &DatasetSplit, settings: &CvSettings) -> Result<ExperimentReport> {
    let configs = (1..=MAX_CONV_LAYERS)
        .map(|d| {
            Ok(TrainConfig {
                edge_mode: EdgeMode::Manual,
                gcn: GcnConfig::for_depth(d, base.gcn.init_seed)?,
                ..base.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sweep("depth-width", base, &configs, split, settings)
}

/// Manual edges (reported as k = 0) followed by the odd k of 1..=23, or
/// every k when `full` is set.
pub fn connectivity_grid(full: bool) -> Vec<EdgeMode> {
    let step = if full { 1 } else { 2 };
    std::iter::once(EdgeMode::Manual)
        .chain((1..=23).step_by(step).map(EdgeMode::Knn))
        .collect()
}

/// Cross-validation of the depth-5 network over the given edge modes.
pub fn sweep_connectivity(
    base: &TrainConfig,
    split: &DatasetSplit,
    settings: &CvSettings,
    grid: &[EdgeMode],
) -> Result<ExperimentReport> {
    let gcn = GcnConfig::for_depth(5, base.gcn.init_seed)?;
    let configs: Vec<TrainConfig> = grid
        .iter()
        .map(|&edge_mode| TrainConfig {
            edge_mode,
            gcn: gcn.clone(),
            ..base.clone()
        })
        .collect();
    sweep("connectivity", base, &configs, split, settings)
}

fn sweep(
    experiment: &str,
    base: &TrainConfig,
    configs: &[TrainConfig],
    split: &DatasetSplit,
    settings: &CvSettings,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let data = PreparedSamples::from_split(split)?;
    let mut rows = Vec::new();
    let mut meta = cv_metadata(base, split, settings);
    meta.retain(|(k, _)| k != "edge_mode" && k != "conv_widths");
    for config in configs {
        let runs = cv_runs(config, split, &data, settings)?;
        rows.extend(rows_for(experiment, config, &runs));
        let topology = Topology::new(config.edge_mode, settings.manual_edges)?;
        meta.push((
            format!("row depth={} widths={} edges={}", config.gcn.depth(), config.gcn.widths_label(), config.edge_mode),
            format!("edges_sha256 {}", topology.fingerprint()),
        ));
    }
    Ok(ExperimentReport::new(experiment, meta, rows, start.elapsed().as_millis() as u64))
}

/// Test-set scores per orientation plus the whole set.
#[derive(Debug, Clone)]
pub struct GeneralizationResult {
    /// `(row name, metrics)` in the order Down, 45, Side, All; empty
    /// orientation subsets are left out.
    pub rows: Vec<(String, Metrics)>,
    pub skipped: Vec<Orientation>,
    pub report: ExperimentReport,
}

pub const GENERALIZATION_ORDER: [Orientation; 3] = [Orientation::PalmDown, Orientation::Palm45, Orientation::PalmSide];

fn row_name(o: Orientation) -> &'static str {
    match o {
        Orientation::PalmDown => "Down",
        Orientation::Palm45 => "45",
        Orientation::PalmSide => "Side",
    }
}

/// Evaluates a trained model on each palm orientation of `test` and on all
/// of it.
pub fn generalization_test(
    model: &GcnModel,
    topology: &Topology,
    test: &DatasetSplit,
    positive: crate::dataset::Label,
) -> Result<GeneralizationResult> {
    let start = Instant::now();
    if test.is_empty() {
        return Err(Error::Validation("test split is empty".into()));
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for o in GENERALIZATION_ORDER {
        let subset = filter_orientation(test, o);
        if subset.is_empty() {
            skipped.push(o);
            continue;
        }
        let m = evaluate_prepared(model, &PreparedSamples::from_split(&subset)?, &topology.a_norm, positive)?;
        rows.push((row_name(o).to_string(), m));
    }
    let all = evaluate_prepared(model, &PreparedSamples::from_split(test)?, &topology.a_norm, positive)?;
    rows.push(("All".to_string(), all));

    let config = model.config();
    let report_rows = rows
        .iter()
        .map(|(name, m)| ReportRow {
            experiment: format!("test:{}", name.to_lowercase()),
            depth: config.depth(),
            widths: config.widths_label(),
            k: topology.mode.k(),
            round: None,
            fold: None,
            epoch_policy: EpochPolicy::Final,
            metrics: *m,
            seed: config.init_seed,
            wall_ms: 0,
        })
        .collect();
    let meta = [
        ("edge_mode", topology.mode.to_string()),
        ("edges_sha256", topology.fingerprint()),
        ("conv_widths", config.widths_label()),
        ("init_seed", config.init_seed.to_string()),
        ("positive_class", positive.token().to_string()),
        ("dataset_samples", test.len().to_string()),
        ("dataset_sha256", test.fingerprint()),
    ]
    .map(|(k, v)| (k.to_string(), v))
    .to_vec();
    let report = ExperimentReport::new("generalization", meta, report_rows, start.elapsed().as_millis() as u64);
    Ok(GeneralizationResult { rows, skipped, report })
}
