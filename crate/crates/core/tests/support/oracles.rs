//! Independent reference computations used by the integration and acceptance
//! tests. Nothing here calls into the library's numerical kernels.

#![allow(dead_code)]

use tactile_gcn::gcn::{backward, forward, GcnModel};
use tactile_gcn::sensor_graph::{EdgeSet, NormalizedAdjacency};
use tactile_gcn::tensor::{softmax_cross_entropy, Matrix};

/// Denominator floor for relative gradient errors. Central differences at
/// h = 1e-6 in f64 carry ~1e-10 absolute round-off, so smaller gradients
/// cannot be resolved relatively by the oracle.
pub const REL_ERR_FLOOR: f64 = 1e-4;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERR_FLOOR)
}

pub type Dense = Vec<Vec<f64>>;

pub fn to_dense(m: &Matrix) -> Dense {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

pub fn naive_matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let inner = b.len();
    let m = if inner == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = 0.0;
            for p in 0..inner {
                acc += a[i][p] * b[p][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn max_abs_diff(a: &Dense, b: &Matrix) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((v - b[(i, j)]).abs());
        }
    }
    worst
}

/// Explicit `Â = A + I`, `D̂` as a diagonal matrix, `D̂^{-1/2}` by elementwise
/// inversion of its diagonal, then two dense products. Directed edges use the
/// row degree on the left and the column degree on the right.
pub fn brute_force_normalized(edges: &EdgeSet, n: usize) -> Dense {
    let mut a_hat = vec![vec![0.0; n]; n];
    for i in 0..n {
        a_hat[i][i] = 1.0;
    }
    for &(s, d) in edges.edges() {
        a_hat[s][d] = 1.0;
    }
    let mut d_left = vec![vec![0.0; n]; n];
    let mut d_right = vec![vec![0.0; n]; n];
    for i in 0..n {
        let row: f64 = a_hat[i].iter().sum();
        let col: f64 = (0..n).map(|r| a_hat[r][i]).sum();
        d_left[i][i] = 1.0 / row.sqrt();
        d_right[i][i] = 1.0 / col.sqrt();
    }
    naive_matmul(&naive_matmul(&d_left, &a_hat), &d_right)
}

/// One GCNConv layer from first principles: materialize the normalized
/// adjacency, multiply by features and weights, add bias, rectify.
pub fn brute_force_gcn_layer(h: &Matrix, edges: &EdgeSet, w: &Matrix, b: &Matrix) -> Dense {
    let n = h.rows();
    let a = brute_force_normalized(edges, n);
    let z = naive_matmul(&naive_matmul(&a, &to_dense(h)), &to_dense(w));
    z.into_iter()
        .map(|row| {
            row.into_iter()
                .enumerate()
                .map(|(j, v)| (v + b[(0, j)]).max(0.0))
                .collect()
        })
        .collect()
}

pub struct GradCheck {
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    pub checked: usize,
}

/// Compares analytic parameter gradients of the cross-entropy loss with
/// central differences over every parameter of `model`.
pub fn check_network_gradients(
    model: &mut GcnModel,
    features: &Matrix,
    a_norm: &NormalizedAdjacency,
    label: usize,
    h: f64,
) -> GradCheck {
    let (logits, cache) = forward(model, features, a_norm).unwrap();
    let (_, grad_logits) = softmax_cross_entropy(&logits, &[label]).unwrap();
    let analytic = backward(model, &cache, &grad_logits).unwrap();

    let loss = |m: &GcnModel| {
        let (logits, _) = forward(m, features, a_norm).unwrap();
        softmax_cross_entropy(&logits, &[label]).unwrap().0
    };

    let mut report = GradCheck {
        max_rel_err: 0.0,
        max_abs_err: 0.0,
        checked: 0,
    };
    for (pi, grad) in analytic.iter().enumerate() {
        for ei in 0..grad.len() {
            let orig = model.params()[pi].as_slice()[ei];
            model.params_mut()[pi].as_mut_slice()[ei] = orig + h;
            let plus = loss(model);
            model.params_mut()[pi].as_mut_slice()[ei] = orig - h;
            let minus = loss(model);
            model.params_mut()[pi].as_mut_slice()[ei] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let a = grad.as_slice()[ei];
            report.max_rel_err = report.max_rel_err.max(relative_error(a, numeric));
            report.max_abs_err = report.max_abs_err.max((a - numeric).abs());
            report.checked += 1;
        }
    }
    report
}
