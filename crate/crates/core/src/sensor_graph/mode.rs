use std::fmt;
use std::str::FromStr;

use super::edges::{knn_edges, EdgeSet};
use super::layout::TaxelLayout;
use crate::error::{Error, Result};

/// Which connectivity a graph uses: the hand-specified list (reported as
/// `k = 0`) or directed k-nearest-neighbor edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeMode {
    Manual,
    Knn(usize),
}

impl EdgeMode {
    /// `0` for manual, otherwise `k`.
    pub fn k(self) -> usize {
        match self {
            EdgeMode::Manual => 0,
            EdgeMode::Knn(k) => k,
        }
    }

    /// Edges for this mode. `manual` supplies the list used for
    /// [`EdgeMode::Manual`].
    pub fn resolve(self, layout: &TaxelLayout, manual: &EdgeSet) -> Result<EdgeSet> {
        match self {
            EdgeMode::Manual => Ok(manual.clone()),
            EdgeMode::Knn(k) => knn_edges(layout, k),
        }
    }
}

impl fmt::Display for EdgeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeMode::Manual => f.write_str("manual"),
            EdgeMode::Knn(k) => write!(f, "knn:{k}"),
        }
    }
}

impl FromStr for EdgeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "manual" {
            return Ok(EdgeMode::Manual);
        }
        s.strip_prefix("knn:")
            .and_then(|k| k.parse().ok())
            .filter(|k| (1..=23).contains(k))
            .map(EdgeMode::Knn)
            .ok_or_else(|| Error::InvalidArgument(format!("edge mode `{s}`: expected `manual` or `knn:<1..23>`")))
    }
}
