//! Grasp samples, dataset splits, CSV ingestion and cross-validation folds.

mod folds;
mod io;

use std::fmt;

use sha2::{Digest, Sha256};

pub use folds::{make_folds, FoldAssignment};
pub use io::{load_csv, read_csv, write_csv, ColumnMapping, NATIVE_COLUMNS};

use crate::sensor_graph::TAXEL_COUNT;

/// Largest raw electrode value (12-bit).
pub const MAX_READING: i64 = 4095;

/// Fingers carrying a sensor, in feature-column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Finger {
    Index,
    Middle,
    Thumb,
}

impl Finger {
    pub const ALL: [Finger; 3] = [Finger::Index, Finger::Middle, Finger::Thumb];

    pub fn name(self) -> &'static str {
        match self {
            Finger::Index => "index",
            Finger::Middle => "middle",
            Finger::Thumb => "thumb",
        }
    }

    /// Column prefix in the native CSV schema.
    pub fn column_prefix(self) -> char {
        match self {
            Finger::Index => 'i',
            Finger::Middle => 'm',
            Finger::Thumb => 't',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    PalmDown,
    PalmSide,
    Palm45,
}

impl Orientation {
    pub const ALL: [Orientation; 3] = [Orientation::PalmDown, Orientation::PalmSide, Orientation::Palm45];

    pub fn token(self) -> &'static str {
        match self {
            Orientation::PalmDown => "down",
            Orientation::PalmSide => "side",
            Orientation::Palm45 => "45",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "down" => Some(Orientation::PalmDown),
            "side" => Some(Orientation::PalmSide),
            "45" => Some(Orientation::Palm45),
            _ => None,
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Orientation::PalmDown => "Palm Down",
            Orientation::PalmSide => "Palm Side",
            Orientation::Palm45 => "Palm 45",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Stable,
    Slippery,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Stable, Label::Slippery];

    /// Class id used for the network output: stable 0, slippery 1.
    pub fn class_id(self) -> usize {
        match self {
            Label::Stable => 0,
            Label::Slippery => 1,
        }
    }

    pub fn from_class_id(id: usize) -> Option<Self> {
        match id {
            0 => Some(Label::Stable),
            1 => Some(Label::Slippery),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Label::Stable => "stable",
            Label::Slippery => "slippery",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "stable" => Some(Label::Stable),
            "slippery" => Some(Label::Slippery),
            _ => None,
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Stable => Label::Slippery,
            Label::Slippery => Label::Stable,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// One recorded grasp. Readings are index electrodes 1–24, then middle, then
/// thumb.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraspSample {
    pub object_id: String,
    pub orientation: Orientation,
    pub readings: [i64; 3 * TAXEL_COUNT],
    pub label: Label,
}

impl GraspSample {
    pub fn finger_readings(&self, finger: Finger) -> &[i64] {
        let start = match finger {
            Finger::Index => 0,
            Finger::Middle => TAXEL_COUNT,
            Finger::Thumb => 2 * TAXEL_COUNT,
        };
        &self.readings[start..start + TAXEL_COUNT]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Train,
    Test,
}

impl SplitKind {
    pub fn name(self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub samples: Vec<GraspSample>,
    pub kind: SplitKind,
}

impl DatasetSplit {
    pub fn new(samples: Vec<GraspSample>, kind: SplitKind) -> Self {
        Self { samples, kind }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> DatasetSplit {
        DatasetSplit {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            kind: self.kind,
        }
    }

    /// SHA-256 over the native CSV rendering of the samples, hex encoded.
    /// Independent of the source file's column names and ordering.
    pub fn fingerprint(&self) -> String {
        let mut buf = Vec::new();
        write_csv(self, &mut buf).expect("writing to memory cannot fail");
        hex::encode(Sha256::digest(&buf))
    }
}

/// Per orientation and label sample counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountSummary {
    cells: [[usize; 2]; 3],
}

impl CountSummary {
    pub fn get(&self, orientation: Orientation, label: Label) -> usize {
        self.cells[orientation as usize][label.class_id()]
    }

    pub fn label_total(&self, label: Label) -> usize {
        self.cells.iter().map(|row| row[label.class_id()]).sum()
    }

    pub fn total(&self) -> usize {
        self.cells.iter().flatten().sum()
    }
}

impl fmt::Display for CountSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12}{:>8}{:>10}", "orientation", "stable", "slippery")?;
        for o in Orientation::ALL {
            writeln!(
                f,
                "{:<12}{:>8}{:>10}",
                o.display_name(),
                self.get(o, Label::Stable),
                self.get(o, Label::Slippery)
            )?;
        }
        write!(
            f,
            "{:<12}{:>8}{:>10}",
            "All",
            self.label_total(Label::Stable),
            self.label_total(Label::Slippery)
        )
    }
}

pub fn count_summary(split: &DatasetSplit) -> CountSummary {
    let mut summary = CountSummary::default();
    for s in &split.samples {
        summary.cells[s.orientation as usize][s.label.class_id()] += 1;
    }
    summary
}

/// Samples with the given orientation, in their original order.
pub fn filter_orientation(split: &DatasetSplit, orientation: Orientation) -> DatasetSplit {
    DatasetSplit {
        samples: split
            .samples
            .iter()
            .filter(|s| s.orientation == orientation)
            .cloned()
            .collect(),
        kind: split.kind,
    }
}
