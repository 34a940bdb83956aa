use std::sync::Arc;

use super::edges::EdgeSet;
use super::layout::{load_layout, TaxelLayout, TAXEL_COUNT};
use crate::dataset::{Finger, GraspSample, Label, MAX_READING};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Raw electrode values are divided by this to land in `[0, 1)`.
pub const FEATURE_SCALE: f64 = 4096.0;

/// One grasp as a graph: taxel nodes with per-finger pressure features, the
/// connectivity, and the stability label.
#[derive(Debug, Clone)]
pub struct TactileGraph {
    pub layout: Arc<TaxelLayout>,
    pub edges: Arc<EdgeSet>,
    features: Matrix,
    pub label: Label,
}

impl TactileGraph {
    /// Builds a graph from an already scaled 24×3 feature matrix.
    pub fn from_features(
        layout: Arc<TaxelLayout>,
        edges: Arc<EdgeSet>,
        features: Matrix,
        label: Label,
    ) -> Result<Self> {
        if features.shape() != (TAXEL_COUNT, Finger::ALL.len()) {
            return Err(Error::Shape {
                op: "tactile graph features",
                lhs: (TAXEL_COUNT, Finger::ALL.len()),
                rhs: features.shape(),
            });
        }
        if let Some(v) = features.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("feature {v} outside [0, 1]")));
        }
        Ok(Self {
            layout,
            edges,
            features,
            label,
        })
    }

    /// 24×3, columns index / middle / thumb.
    pub fn features(&self) -> &Matrix {
        &self.features
    }
}

/// Scales each reading by 1/4096 into a 24×3 node feature matrix.
pub fn build_graph(sample: &GraspSample, edges: Arc<EdgeSet>) -> Result<TactileGraph> {
    build_graph_with_layout(sample, edges, Arc::new(load_layout()))
}

pub fn build_graph_with_layout(
    sample: &GraspSample,
    edges: Arc<EdgeSet>,
    layout: Arc<TaxelLayout>,
) -> Result<TactileGraph> {
    let mut features = Matrix::zeros(TAXEL_COUNT, Finger::ALL.len());
    for (col, finger) in Finger::ALL.into_iter().enumerate() {
        for (node, &raw) in sample.finger_readings(finger).iter().enumerate() {
            if !(0..=MAX_READING).contains(&raw) {
                return Err(Error::ReadingRange {
                    finger: finger.name(),
                    electrode: node + 1,
                    value: raw,
                });
            }
            features[(node, col)] = raw as f64 / FEATURE_SCALE;
        }
    }
    TactileGraph::from_features(layout, edges, features, sample.label)
}

/// `D̂^{-1/2} (A + I) D̂^{-1/2}` as a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    matrix: Matrix,
}

impl NormalizedAdjacency {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn node_count(&self) -> usize {
        self.matrix.rows()
    }

    /// Wraps an arbitrary square matrix. Used for permuted copies in tests
    /// and diagnostics; no normalization is applied.
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::Shape {
                op: "adjacency",
                lhs: (matrix.rows(), matrix.rows()),
                rhs: matrix.shape(),
            });
        }
        Ok(Self { matrix })
    }
}

/// Adds self-loops and applies symmetric degree normalization. For directed
/// sets `A[src][dst] = 1`; the left factor uses row degrees of `A + I` and the
/// right factor uses column degrees.
pub fn normalize_adjacency(edges: &EdgeSet, n: usize) -> Result<NormalizedAdjacency> {
    if let Some(&(s, d)) = edges.edges().iter().find(|&&(s, d)| s >= n || d >= n) {
        return Err(Error::InvalidArgument(format!(
            "edge ({s}, {d}) references a node outside [0, {n})"
        )));
    }

    let mut a_hat = Matrix::identity(n);
    for &(s, d) in edges.edges() {
        a_hat[(s, d)] = 1.0;
    }
    let mut row_deg = vec![0.0; n];
    let mut col_deg = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let v = a_hat[(i, j)];
            row_deg[i] += v;
            col_deg[j] += v;
        }
    }
    let row_scale: Vec<f64> = row_deg.iter().map(|d| 1.0 / d.sqrt()).collect();
    let col_scale: Vec<f64> = col_deg.iter().map(|d| 1.0 / d.sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            a_hat[(i, j)] *= row_scale[i] * col_scale[j];
        }
    }
    Ok(NormalizedAdjacency { matrix: a_hat })
}
