//! Softmax output layer and the class-weighted cross-entropy.

use super::tensor::Tensor2;
use crate::error::{Error, Result};

/// Class indices in probability pairs and logits.
pub const CLASS_B: usize = 0;
pub const CLASS_NB: usize = 1;

/// Probabilities below this are clamped before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Numerically stable two-class softmax.
pub fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

/// Logits `W x + b` for every row of `x`; `W` is `2 × cols(x)`.
pub fn dense_forward(x: &Tensor2, w: &Tensor2, b: &[f64]) -> Result<Tensor2> {
    if w.shape() != (2, x.cols()) || b.len() != 2 {
        return Err(Error::Shape(format!(
            "output layer {:?} with bias {} cannot read {} features",
            w.shape(),
            b.len(),
            x.cols()
        )));
    }
    let mut logits = Tensor2::zeros(x.rows(), 2);
    for t in 0..x.rows() {
        let row = logits.row_mut(t);
        row.copy_from_slice(b);
        w.matvec_acc(x.row(t), row);
    }
    Ok(logits)
}

/// `(P(B), P(NB))` for a single feature vector.
pub fn dense_softmax(x: &[f64], w: &Tensor2, b: &[f64]) -> Result<[f64; 2]> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite input to the output layer".into()));
    }
    let xs = Tensor2::from_vec(1, x.len(), x.to_vec())?;
    let logits = dense_forward(&xs, w, b)?;
    Ok(softmax2([logits.get(0, 0), logits.get(0, 1)]))
}

/// Accumulates output-layer gradients and returns the gradient of `x`.
pub fn dense_backward(x: &Tensor2, w: &Tensor2, d_logits: &Tensor2, grad_w: &mut Tensor2, grad_b: &mut [f64]) -> Tensor2 {
    let mut d_x = Tensor2::zeros(x.rows(), x.cols());
    for t in 0..x.rows() {
        let g = d_logits.row(t);
        grad_w.add_outer(g, x.row(t));
        grad_b[0] += g[0];
        grad_b[1] += g[1];
        w.matvec_t_acc(g, d_x.row_mut(t));
    }
    d_x
}

/// Result of [`weighted_cross_entropy`].
///
/// `grad` holds `weight(y_t) · (p_t − onehot(y_t))` per position, the
/// gradient of the unnormalized sum; divide by the total weight (of this
/// call or of a whole minibatch) for the gradient of the mean.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedLoss {
    pub sum: f64,
    pub weight: f64,
    pub grad: Vec<[f64; 2]>,
    /// Positions whose true-class probability hit [`PROB_FLOOR`].
    pub clamped: usize,
}

impl WeightedLoss {
    /// `−Σ w ln p(y) / Σ w`, or 0 when nothing was scored.
    pub fn loss(&self) -> f64 {
        if self.weight > 0.0 {
            self.sum / self.weight
        } else {
            0.0
        }
    }
}

/// Class-weighted cross-entropy over the positions where `mask` is set.
/// `weights` is indexed by class.
pub fn weighted_cross_entropy(probs: &[[f64; 2]], labels: &[usize], mask: &[bool], weights: [f64; 2]) -> Result<WeightedLoss> {
    if probs.len() != labels.len() || probs.len() != mask.len() {
        return Err(Error::Shape(format!(
            "{} probabilities, {} labels, {} mask entries",
            probs.len(),
            labels.len(),
            mask.len()
        )));
    }
    if !(weights[0] > 0.0 && weights[1] > 0.0) {
        return Err(Error::Argument(format!("class weights must be positive, got {weights:?}")));
    }
    let mut out = WeightedLoss {
        sum: 0.0,
        weight: 0.0,
        grad: vec![[0.0; 2]; probs.len()],
        clamped: 0,
    };
    for t in 0..probs.len() {
        if !mask[t] {
            continue;
        }
        let y = labels[t];
        let w = weights[y];
        let mut p = probs[t][y];
        if p < PROB_FLOOR {
            p = PROB_FLOOR;
            out.clamped += 1;
        }
        out.sum -= w * p.ln();
        out.weight += w;
        for c in 0..2 {
            let target = if c == y { 1.0 } else { 0.0 };
            out.grad[t][c] = w * (probs[t][c] - target);
        }
    }
    Ok(out)
}
