use std::fmt::{self, Write as _};
use std::io::{Read, Write};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::metrics::Metrics;
use super::train::TrainConfig;
use crate::dataset::Label;
use crate::error::{Error, Result};

pub const REPORT_HEADER: [&str; 18] = [
    "run_id", "experiment", "depth", "widths", "k", "round", "fold", "epoch_policy", "accuracy", "precision",
    "recall", "f1", "tp", "fp", "fn", "tn", "seed", "wall_ms",
];

/// Which epoch of a training run a row scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EpochPolicy {
    Best,
    Final,
}

impl fmt::Display for EpochPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EpochPolicy::Best => "best",
            EpochPolicy::Final => "final",
        })
    }
}

impl FromStr for EpochPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "best" => Ok(EpochPolicy::Best),
            "final" => Ok(EpochPolicy::Final),
            _ => Err(Error::Format(format!("unknown epoch policy `{s}`"))),
        }
    }
}

/// One scored model: a (round, fold) of cross-validation, or a test subset.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub depth: usize,
    pub widths: String,
    pub k: usize,
    pub round: Option<usize>,
    pub fold: Option<usize>,
    pub epoch_policy: EpochPolicy,
    pub metrics: Metrics,
    pub seed: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: 0.0, std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { mean, std }
    }
}

/// Mean and spread of the rows sharing experiment, architecture, k and
/// epoch policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub experiment: String,
    pub depth: usize,
    pub widths: String,
    pub k: usize,
    pub epoch_policy: EpochPolicy,
    pub n: usize,
    pub accuracy: Summary,
    pub precision: Summary,
    pub recall: Summary,
    pub f1: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub run_id: String,
    pub rows: Vec<ReportRow>,
    /// Ordered `key = value` pairs written to the sidecar file.
    pub metadata: Vec<(String, String)>,
    /// Total wall-clock time, sidecar only.
    pub wall_ms: u64,
    /// Write measured per-row times into the CSV. Off by default so that
    /// identical runs produce identical files.
    pub timing_in_csv: bool,
}

pub(crate) fn config_metadata(config: &TrainConfig) -> Vec<(String, String)> {
    [
        ("epochs", config.epochs.to_string()),
        ("batch_size", config.batch_size.to_string()),
        ("lr", config.lr.to_string()),
        ("weight_decay", config.weight_decay.to_string()),
        ("adam_beta1", config.adam().beta1.to_string()),
        ("adam_beta2", config.adam().beta2.to_string()),
        ("adam_epsilon", config.adam().epsilon.to_string()),
        ("seed", config.seed.to_string()),
        ("edge_mode", config.edge_mode.to_string()),
        ("conv_widths", config.gcn.widths_label()),
        ("init_seed", config.gcn.init_seed.to_string()),
        ("positive_class", config.positive_class.token().to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Stable identifier: hash of the experiment name and metadata.
pub(crate) fn run_id(experiment: &str, metadata: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    h.update(experiment.as_bytes());
    for (k, v) in metadata {
        h.update(b"\n");
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
    }
    hex::encode(h.finalize())[..16].to_string()
}

impl ExperimentReport {
    pub(crate) fn new(experiment: &str, metadata: Vec<(String, String)>, rows: Vec<ReportRow>, wall_ms: u64) -> Self {
        Self {
            run_id: run_id(experiment, &metadata),
            rows,
            metadata,
            wall_ms,
            timing_in_csv: false,
        }
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Groups in order of first appearance.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        aggregate_rows(&self.rows)
    }

    pub fn aggregates_for(&self, policy: EpochPolicy) -> Vec<Aggregate> {
        self.aggregates().into_iter().filter(|a| a.epoch_policy == policy).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(REPORT_HEADER)?;
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let m = &r.metrics;
            w.write_record([
                self.run_id.clone(),
                r.experiment.clone(),
                r.depth.to_string(),
                r.widths.clone(),
                r.k.to_string(),
                opt(r.round),
                opt(r.fold),
                r.epoch_policy.to_string(),
                m.accuracy.to_string(),
                m.precision.to_string(),
                m.recall.to_string(),
                m.f1.to_string(),
                m.tp.to_string(),
                m.fp.to_string(),
                m.fn_.to_string(),
                m.tn.to_string(),
                r.seed.to_string(),
                if self.timing_in_csv { r.wall_ms } else { 0 }.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<report>".into(),
            source: e,
        })
    }

    pub fn csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        buf
    }

    /// Sidecar text: metadata, then one line per aggregate, with per-class
    /// and macro scores pooled over the group's confusion counts.
    pub fn metadata_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "run_id = {}", self.run_id).unwrap();
        for (k, v) in &self.metadata {
            writeln!(out, "{k} = {v}").unwrap();
        }
        writeln!(out, "wall_ms = {}", self.wall_ms).unwrap();
        writeln!(out, "\n[aggregates]").unwrap();
        writeln!(
            out,
            "experiment,depth,widths,k,epoch_policy,n,accuracy_mean,accuracy_std,precision_mean,recall_mean,f1_mean"
        )
        .unwrap();
        for a in self.aggregates() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                a.experiment,
                a.depth,
                a.widths,
                a.k,
                a.epoch_policy,
                a.n,
                a.accuracy.mean,
                a.accuracy.std,
                a.precision.mean,
                a.recall.mean,
                a.f1.mean
            )
            .unwrap();
        }
        writeln!(out, "\n[pooled per-class and macro scores]").unwrap();
        for group in group_rows(&self.rows) {
            let pooled = group[1..].iter().fold(group[0].metrics, |acc, r| acc.merged(&r.metrics));
            let other = pooled.swapped();
            let (mp, mr, mf) = pooled.macro_averages();
            let r = group[0];
            writeln!(
                out,
                "{} depth={} k={} {}: {} p={:.4} r={:.4} f1={:.4} | {} p={:.4} r={:.4} f1={:.4} | macro p={mp:.4} r={mr:.4} f1={mf:.4}",
                r.experiment,
                r.depth,
                r.k,
                r.epoch_policy,
                pooled.positive,
                pooled.precision,
                pooled.recall,
                pooled.f1,
                other.positive,
                other.precision,
                other.recall,
                other.f1,
            )
            .unwrap();
        }
        out
    }
}

fn group_rows(rows: &[ReportRow]) -> Vec<Vec<&ReportRow>> {
    let mut groups: Vec<Vec<&ReportRow>> = Vec::new();
    for r in rows {
        let key = |x: &ReportRow| (x.experiment.clone(), x.depth, x.widths.clone(), x.k, x.epoch_policy);
        match groups.iter_mut().find(|g| key(g[0]) == key(r)) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
}

pub fn aggregate_rows(rows: &[ReportRow]) -> Vec<Aggregate> {
    group_rows(rows)
        .into_iter()
        .map(|g| {
            let pick = |f: fn(&Metrics) -> f64| Summary::of(&g.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>());
            Aggregate {
                experiment: g[0].experiment.clone(),
                depth: g[0].depth,
                widths: g[0].widths.clone(),
                k: g[0].k,
                epoch_policy: g[0].epoch_policy,
                n: g.len(),
                accuracy: pick(|m| m.accuracy),
                precision: pick(|m| m.precision),
                recall: pick(|m| m.recall),
                f1: pick(|m| m.f1),
            }
        })
        .collect()
}

/// Rows of a report CSV, with the run id they carry. Metric values are
/// rebuilt from the confusion counts and checked against the stored columns.
pub fn read_report_csv<R: Read>(reader: R, positive: Label) -> Result<(Option<String>, Vec<ReportRow>)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(Error::Format(format!("unexpected report header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut run_id = None;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |col: &str| Error::Row {
            row: line,
            msg: format!("bad `{col}` value"),
        };
        let int = |idx: usize, col: &str| rec[idx].parse::<usize>().map_err(|_| bad(col));
        let opt = |idx: usize, col: &str| {
            if rec[idx].is_empty() {
                Ok(None)
            } else {
                int(idx, col).map(Some)
            }
        };
        let real = |idx: usize, col: &str| rec[idx].parse::<f64>().map_err(|_| bad(col));
        run_id.get_or_insert_with(|| rec[0].to_string());
        let metrics = Metrics::from_counts(positive, int(12, "tp")?, int(13, "fp")?, int(14, "fn")?, int(15, "tn")?);
        let stored = [real(8, "accuracy")?, real(9, "precision")?, real(10, "recall")?, real(11, "f1")?];
        if stored != [metrics.accuracy, metrics.precision, metrics.recall, metrics.f1] {
            return Err(Error::Row {
                row: line,
                msg: "metric columns disagree with confusion counts".into(),
            });
        }
        rows.push(ReportRow {
            experiment: rec[1].to_string(),
            depth: int(2, "depth")?,
            widths: rec[3].to_string(),
            k: int(4, "k")?,
            round: opt(5, "round")?,
            fold: opt(6, "fold")?,
            epoch_policy: rec[7].parse()?,
            metrics,
            seed: rec[16].parse().map_err(|_| bad("seed"))?,
            wall_ms: rec[17].parse().map_err(|_| bad("wall_ms"))?,
        });
    }
    Ok((run_id, rows))
}
