use crate::dataset::{DatasetSplit, Label};
use crate::error::{Error, Result};
use crate::gcn::{forward, GcnModel};
use crate::sensor_graph::{build_graph, EdgeSet, NormalizedAdjacency};
use crate::tensor::Matrix;
use std::sync::Arc;

/// Binary classification metrics with respect to `positive`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub positive: Label,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    /// Precision or recall with a zero denominator is 0, and so is F1 when
    /// both are 0.
    pub fn from_counts(positive: Label, tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            positive,
            accuracy: ratio(tp + tn, tp + fp + fn_ + tn),
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
            tn,
        }
    }

    /// Same predictions scored with the other class as positive.
    pub fn swapped(&self) -> Self {
        Self::from_counts(self.positive.other(), self.tn, self.fn_, self.fp, self.tp)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Unweighted means of precision, recall and F1 over both classes.
    pub fn macro_averages(&self) -> (f64, f64, f64) {
        let o = self.swapped();
        (
            (self.precision + o.precision) / 2.0,
            (self.recall + o.recall) / 2.0,
            (self.f1 + o.f1) / 2.0,
        )
    }

    /// Adds confusion counts of `other` (same positive class).
    pub fn merged(&self, other: &Metrics) -> Self {
        debug_assert_eq!(self.positive, other.positive);
        Self::from_counts(
            self.positive,
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn_ + other.fn_,
            self.tn + other.tn,
        )
    }
}

/// Index of the larger logit; ties go to class 0.
pub(crate) fn predict_class(logits: &Matrix) -> usize {
    if logits[(0, 1)] > logits[(0, 0)] {
        1
    } else {
        0
    }
}

pub(crate) fn score(predictions: impl IntoIterator<Item = (usize, usize)>, positive: Label) -> Metrics {
    let p = positive.class_id();
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (predicted, actual) in predictions {
        match (predicted == p, actual == p) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Metrics::from_counts(positive, tp, fp, fn_, tn)
}

/// Feature matrices and class ids ready for the network.
#[derive(Debug, Clone)]
pub struct PreparedSamples {
    pub features: Vec<Matrix>,
    pub classes: Vec<usize>,
}

impl PreparedSamples {
    pub fn from_split(split: &DatasetSplit) -> Result<Self> {
        let edges = Arc::new(EdgeSet::empty(false));
        let mut features = Vec::with_capacity(split.len());
        let mut classes = Vec::with_capacity(split.len());
        for s in &split.samples {
            features.push(build_graph(s, edges.clone())?.features().clone());
            classes.push(s.label.class_id());
        }
        Ok(Self { features, classes })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            classes: indices.iter().map(|&i| self.classes[i]).collect(),
        }
    }
}

pub(crate) fn evaluate_prepared(
    model: &GcnModel,
    samples: &PreparedSamples,
    a_norm: &NormalizedAdjacency,
    positive: Label,
) -> Result<Metrics> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate on an empty sample set".into()));
    }
    let mut pairs = Vec::with_capacity(samples.len());
    for (x, &y) in samples.features.iter().zip(&samples.classes) {
        let (logits, _) = forward(model, x, a_norm)?;
        pairs.push((predict_class(&logits), y));
    }
    Ok(score(pairs, positive))
}

/// Argmax predictions on every sample, scored against `positive`.
pub fn evaluate(
    model: &GcnModel,
    samples: &DatasetSplit,
    a_norm: &NormalizedAdjacency,
    positive: Label,
) -> Result<Metrics> {
    evaluate_prepared(model, &PreparedSamples::from_split(samples)?, a_norm, positive)
}
