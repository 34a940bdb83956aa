//! Grasp-stability prediction from BioTac SP tactile readings with a graph
//! convolutional network.
//!
//! - [`sensor_graph`]: taxel geometry, manual and k-NN edges, node features,
//!   normalized adjacency
//! - [`dataset`]: CSV ingestion, split summaries, stratified folds
//! - [`tensor`]: dense matrices, hand-written gradients, ADAM
//! - [`gcn`]: the GCNConv stack with flatten + fully connected readout
//! - [`experiments`]: training, metrics, cross-validation and the sweeps
//! - [`viz`]: SVG renderings of tactile graphs and plot-ready CSV

pub mod dataset;
pub mod error;
pub mod experiments;
pub mod fsutil;
pub mod gcn;
pub mod rng;
pub mod sensor_graph;
pub mod tensor;
pub mod viz;

pub use error::{Error, Result};
