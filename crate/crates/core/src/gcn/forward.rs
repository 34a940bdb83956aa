use super::model::{Dense, GcnModel};
use crate::error::{Error, Result};
use crate::sensor_graph::{NormalizedAdjacency, TAXEL_COUNT};
use crate::tensor::{add_row_broadcast, linear_backward, linear_forward, matmul, matmul_nt, matmul_tn, relu, relu_grad, Matrix};

/// `ReLU(Â·H·W + b)` with the bias broadcast over nodes.
pub fn gcn_layer_forward(h: &Matrix, a_norm: &NormalizedAdjacency, w: &Matrix, b: &Matrix) -> Result<Matrix> {
    Ok(relu(&conv_pre_activation(h, a_norm, w, b)?.1))
}

/// Returns `(Â·H, Â·H·W + b)`.
fn conv_pre_activation(h: &Matrix, a_norm: &NormalizedAdjacency, w: &Matrix, b: &Matrix) -> Result<(Matrix, Matrix)> {
    let ah = matmul(a_norm.matrix(), h)?;
    let mut z = matmul(&ah, w)?;
    add_row_broadcast(&mut z, b)?;
    Ok((ah, z))
}

#[derive(Debug, Clone)]
struct ConvCache {
    propagated: Matrix,
    pre_activation: Matrix,
}

/// Intermediates of one forward pass, consumed by [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    revision: u64,
    widths: Vec<usize>,
    a_norm: Matrix,
    conv: Vec<ConvCache>,
    flat: Matrix,
    hidden_pre: Matrix,
    hidden: Matrix,
}

/// Logits (1×2) for one graph. `features` is the 24×3 node feature matrix.
pub fn forward(model: &GcnModel, features: &Matrix, a_norm: &NormalizedAdjacency) -> Result<(Matrix, ForwardCache)> {
    if features.rows() != TAXEL_COUNT || a_norm.node_count() != TAXEL_COUNT {
        return Err(Error::Shape {
            op: "gcn forward",
            lhs: features.shape(),
            rhs: a_norm.matrix().shape(),
        });
    }
    let mut h = features.clone();
    let mut conv = Vec::with_capacity(model.conv.len());
    for Dense { weight, bias } in &model.conv {
        let (propagated, pre_activation) = conv_pre_activation(&h, a_norm, weight, bias)?;
        h = relu(&pre_activation);
        conv.push(ConvCache {
            propagated,
            pre_activation,
        });
    }
    let width = h.len();
    let flat = h.reshape(1, width)?;
    let hidden_pre = linear_forward(&flat, &model.fc1.weight, &model.fc1.bias)?;
    let hidden = relu(&hidden_pre);
    let logits = linear_forward(&hidden, &model.fc2.weight, &model.fc2.bias)?;
    let cache = ForwardCache {
        revision: model.revision(),
        widths: model.config().conv_widths.clone(),
        a_norm: a_norm.matrix().clone(),
        conv,
        flat,
        hidden_pre,
        hidden,
    };
    Ok((logits, cache))
}

/// Gradients of a scalar loss with respect to every parameter, in the
/// model's declaration order, given `d loss / d logits`.
pub fn backward(model: &GcnModel, cache: &ForwardCache, grad_logits: &Matrix) -> Result<Vec<Matrix>> {
    if cache.revision != model.revision() || cache.widths != model.config().conv_widths {
        return Err(Error::InvalidState(
            "forward cache does not belong to this model state".into(),
        ));
    }
    let fc2 = linear_backward(&cache.hidden, &model.fc2.weight, grad_logits)?;
    let d_hidden_pre = relu_grad(&cache.hidden_pre, &fc2.x)?;
    let fc1 = linear_backward(&cache.flat, &model.fc1.weight, &d_hidden_pre)?;

    let last_width = model.config().last_width();
    let mut upstream = fc1.x.reshape(TAXEL_COUNT, last_width)?;
    let mut conv_grads = Vec::with_capacity(2 * model.conv.len());
    for (layer, c) in model.conv.iter().zip(&cache.conv).rev() {
        let dz = relu_grad(&c.pre_activation, &upstream)?;
        let dw = matmul_tn(&c.propagated, &dz)?;
        let db = dz.sum_rows();
        let d_propagated = matmul_nt(&dz, &layer.weight)?;
        upstream = matmul_tn(&cache.a_norm, &d_propagated)?;
        conv_grads.push(db);
        conv_grads.push(dw);
    }
    conv_grads.reverse();
    conv_grads.extend([fc1.w, fc1.b, fc2.w, fc2.b]);
    Ok(conv_grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcn::model::{init_model, GcnConfig};
    use crate::sensor_graph::{manual_edges, normalize_adjacency, EdgeSet};
    use crate::tensor::{softmax, softmax_cross_entropy};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_features(seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_vec(24, 3, (0..72).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn identity_propagation() {
        let a = normalize_adjacency(&EdgeSet::empty(false), 24).unwrap();
        let h = random_features(1);
        let out = gcn_layer_forward(&h, &a, &Matrix::identity(3), &Matrix::zeros(1, 3)).unwrap();
        assert_eq!(out, h);
    }

    #[test]
    fn ones_input_gives_row_sums() {
        let a = normalize_adjacency(&manual_edges(None).unwrap(), 24).unwrap();
        let out = gcn_layer_forward(&Matrix::filled(24, 1, 1.0), &a, &Matrix::filled(1, 1, 1.0), &Matrix::zeros(1, 1)).unwrap();
        for r in 0..24 {
            let s: f64 = a.matrix().row(r).iter().sum();
            assert!((out[(r, 0)] - s).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_features_and_biases_give_zero_logits() {
        let model = init_model(&GcnConfig::for_depth(5, 3).unwrap()).unwrap();
        let a = normalize_adjacency(&manual_edges(None).unwrap(), 24).unwrap();
        let (logits, cache) = forward(&model, &Matrix::zeros(24, 3), &a).unwrap();
        assert_eq!(logits, Matrix::zeros(1, 2));
        assert_eq!(cache.flat.cols(), 768);
    }

    #[test]
    fn softmax_of_logits_sums_to_one() {
        let model = init_model(&GcnConfig::for_depth(5, 3).unwrap()).unwrap();
        let a = normalize_adjacency(&manual_edges(None).unwrap(), 24).unwrap();
        for seed in 0..10 {
            let (logits, _) = forward(&model, &random_features(seed), &a).unwrap();
            assert!(logits.is_finite());
            let p = softmax(&logits);
            assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let model = init_model(&GcnConfig::for_depth(3, 3).unwrap()).unwrap();
        let a = normalize_adjacency(&manual_edges(None).unwrap(), 24).unwrap();
        let (_, cache) = forward(&model, &random_features(2), &a).unwrap();
        let grads = backward(&model, &cache, &Matrix::zeros(1, 2)).unwrap();
        assert_eq!(grads.len(), model.params().len());
        for (g, p) in grads.iter().zip(model.params()) {
            assert_eq!(g.shape(), p.shape());
            assert!(g.as_slice().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut model = init_model(&GcnConfig::for_depth(2, 3).unwrap()).unwrap();
        let a = normalize_adjacency(&manual_edges(None).unwrap(), 24).unwrap();
        let (_, cache) = forward(&model, &random_features(2), &a).unwrap();
        let _ = model.params_mut();
        assert!(matches!(backward(&model, &cache, &Matrix::zeros(1, 2)), Err(Error::InvalidState(_))));

        let other = init_model(&GcnConfig::for_depth(3, 3).unwrap()).unwrap();
        let (_, cache) = forward(&other, &random_features(2), &a).unwrap();
        let fresh = init_model(&GcnConfig::for_depth(2, 3).unwrap()).unwrap();
        assert!(matches!(backward(&fresh, &cache, &Matrix::zeros(1, 2)), Err(Error::InvalidState(_))));
    }

    #[test]
    fn duplicate_batch_matches_single_sample_gradient() {
        let model = init_model(&GcnConfig::for_depth(2, 8).unwrap()).unwrap();
        let a = normalize_adjacency(&manual_edges(None).unwrap(), 24).unwrap();
        let x = random_features(4);
        let (logits, cache) = forward(&model, &x, &a).unwrap();
        let (_, g1) = softmax_cross_entropy(&logits, &[1]).unwrap();
        let single = backward(&model, &cache, &g1).unwrap();

        let batch = Matrix::from_rows(&[logits.row(0), logits.row(0)]);
        let (_, g2) = softmax_cross_entropy(&batch, &[1, 1]).unwrap();
        let mut summed: Vec<Matrix> = single.iter().map(|g| Matrix::zeros(g.rows(), g.cols())).collect();
        for r in 0..2 {
            let row = Matrix::row_vector(g2.row(r));
            for (acc, g) in summed.iter_mut().zip(backward(&model, &cache, &row).unwrap()) {
                acc.add_assign(&g).unwrap();
            }
        }
        for (a, b) in summed.iter().zip(&single) {
            assert!(a.max_abs_diff(b).unwrap() < 1e-15);
        }
    }
}
