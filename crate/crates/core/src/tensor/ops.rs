use super::matrix::{matmul, matmul_nt, matmul_tn, same_shape, Matrix};
use crate::error::{Error, Result};

pub fn relu(x: &Matrix) -> Matrix {
    x.map(|v| v.max(0.0))
}

/// Passes `upstream` where `x > 0`. The subgradient at exactly zero is 0.
pub fn relu_grad(x: &Matrix, upstream: &Matrix) -> Result<Matrix> {
    same_shape("relu_grad", x, upstream)?;
    let data = x
        .as_slice()
        .iter()
        .zip(upstream.as_slice())
        .map(|(&xv, &g)| if xv > 0.0 { g } else { 0.0 })
        .collect();
    Matrix::from_vec(x.rows(), x.cols(), data)
}

/// Adds the 1×cols row vector `b` to every row of `x` in place.
pub fn add_row_broadcast(x: &mut Matrix, b: &Matrix) -> Result<()> {
    if b.rows() != 1 || b.cols() != x.cols() {
        return Err(Error::Shape {
            op: "bias broadcast",
            lhs: x.shape(),
            rhs: b.shape(),
        });
    }
    let cols = x.cols();
    for row in x.as_mut_slice().chunks_exact_mut(cols) {
        for (v, bias) in row.iter_mut().zip(b.as_slice()) {
            *v += bias;
        }
    }
    Ok(())
}

/// `x·w + b`, with `b` broadcast over rows.
pub fn linear_forward(x: &Matrix, w: &Matrix, b: &Matrix) -> Result<Matrix> {
    let mut out = matmul(x, w)?;
    add_row_broadcast(&mut out, b)?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct LinearGrads {
    pub x: Matrix,
    pub w: Matrix,
    pub b: Matrix,
}

/// Gradients of `x·w + b` given the gradient flowing into its output.
pub fn linear_backward(x: &Matrix, w: &Matrix, upstream: &Matrix) -> Result<LinearGrads> {
    if upstream.rows() != x.rows() || upstream.cols() != w.cols() {
        return Err(Error::Shape {
            op: "linear_backward",
            lhs: (x.rows(), w.cols()),
            rhs: upstream.shape(),
        });
    }
    Ok(LinearGrads {
        x: matmul_nt(upstream, w)?,
        w: matmul_tn(x, upstream)?,
        b: upstream.sum_rows(),
    })
}

/// Row-wise softmax computed through log-sum-exp.
pub fn softmax(logits: &Matrix) -> Matrix {
    let cols = logits.cols();
    let mut out = logits.clone();
    for row in out.as_mut_slice().chunks_exact_mut(cols) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Mean cross-entropy over the batch and its gradient
/// `(softmax - one_hot) / B` with respect to the logits.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<(f64, Matrix)> {
    let (batch, classes) = logits.shape();
    if batch == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    if labels.len() != batch {
        return Err(Error::InvalidArgument(format!(
            "{} labels for a batch of {batch}",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::InvalidArgument(format!(
            "label {bad} out of range for {classes} classes"
        )));
    }

    let inv_batch = 1.0 / batch as f64;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(batch, classes);
    for (r, &label) in labels.iter().enumerate() {
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = row.iter().map(|v| (v - max).exp()).sum();
        let log_z = max + sum_exp.ln();
        loss += log_z - row[label];
        for (c, &v) in row.iter().enumerate() {
            let p = (v - log_z).exp();
            let target = if c == label { 1.0 } else { 0.0 };
            grad[(r, c)] = (p - target) * inv_batch;
        }
    }
    Ok((loss * inv_batch, grad))
}
