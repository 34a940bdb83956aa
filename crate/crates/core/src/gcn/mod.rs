//! GCNConv stack over the fixed 24-node tactile graph, flattened into two
//! fully connected layers that produce stable/slippery logits.

mod checkpoint;
mod forward;
mod model;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_model, save_model, Checkpoint, FORMAT_VERSION};
pub use forward::{backward, forward, gcn_layer_forward, ForwardCache};
pub use model::{
    glorot_bound, init_model, Dense, GcnConfig, GcnModel, FC_HIDDEN, INPUT_FEATURES, MAX_CONV_LAYERS,
    OUTPUT_CLASSES, WIDTH_SCHEDULE,
};
