//! Taxel geometry and the construction of tactile graphs: edge generation,
//! node features, and adjacency normalization.

mod edges;
mod graph;
mod layout;
mod mode;

pub use edges::{
    knn_edges, manual_edges, parse_edge_list, validate_manual_degrees, EdgeSet, CENTER_NODE,
};
pub use graph::{
    build_graph, build_graph_with_layout, normalize_adjacency, NormalizedAdjacency, TactileGraph,
    FEATURE_SCALE,
};

pub use mode::EdgeMode;
pub(crate) use layout::TAXEL_POSITION_TEXT;
pub use layout::{load_layout, z_mirror_permutation, Point3, TaxelLayout, TAXEL_COUNT};
