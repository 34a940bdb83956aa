//! Dense `f64` matrices, the forward/backward kernels the classifier needs,
//! and the optimizer.

mod adam;
mod matrix;
mod ops;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use matrix::{matmul, matmul_nt, matmul_tn, Matrix};
pub use ops::{
    add_row_broadcast, linear_backward, linear_forward, relu, relu_grad, softmax,
    softmax_cross_entropy, LinearGrads,
};
