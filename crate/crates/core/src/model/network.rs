use std::collections::BTreeMap;

use rand::Rng;

use super::config::ModelConfig;
use super::lexicon::WindowInstance;
use crate::error::{Error, Result};
use crate::nn::{
    bilstm_backward, bilstm_forward, cell_blocks, cell_blocks_mut, conv1d_backward, conv1d_forward, dense_backward,
    dense_forward, dropout, dropout_backward, maxpool_backward, maxpool_temporal, softmax2, weighted_cross_entropy,
    BiLstmOutput, ConvLayer, ConvOutput, LstmCell, Parameters, PoolOutput, Tensor2, CLASS_B, CLASS_NB,
};

pub(crate) const FWD_NAMES: [&str; 8] = [
    "lstm_fwd.w_i",
    "lstm_fwd.w_f",
    "lstm_fwd.w_o",
    "lstm_fwd.w_g",
    "lstm_fwd.b_i",
    "lstm_fwd.b_f",
    "lstm_fwd.b_o",
    "lstm_fwd.b_g",
];
pub(crate) const BWD_NAMES: [&str; 8] = [
    "lstm_bwd.w_i",
    "lstm_bwd.w_f",
    "lstm_bwd.w_o",
    "lstm_bwd.w_g",
    "lstm_bwd.b_i",
    "lstm_bwd.b_f",
    "lstm_bwd.b_o",
    "lstm_bwd.b_g",
];

/// Everything above the embedding lookup.
#[derive(Clone, Debug, PartialEq)]
pub struct RcnnLayers {
    pub conv: ConvLayer,
    pub lstm_fwd: LstmCell,
    pub lstm_bwd: LstmCell,
    /// `2 × 2·hidden`, row 0 scores B.
    pub out_w: Tensor2,
    pub out_b: Vec<f64>,
    pub pool_width: usize,
}

impl RcnnLayers {
    pub fn init<R: Rng + ?Sized>(cfg: &ModelConfig, rng: &mut R) -> Result<Self> {
        let conv = ConvLayer::init(cfg.n_filters, cfg.conv_width, cfg.dim, rng)?;
        let lstm_fwd = LstmCell::init(cfg.n_filters, cfg.hidden, rng);
        let lstm_bwd = LstmCell::init(cfg.n_filters, cfg.hidden, rng);
        let out_w = Tensor2::glorot(2, 2 * cfg.hidden, 2 * cfg.hidden, 2, rng);
        Ok(RcnnLayers { conv, lstm_fwd, lstm_bwd, out_w, out_b: vec![0.0; 2], pool_width: cfg.pool_width })
    }

    /// Checks the chain `d → n_f → 2·n_r → 2`.
    pub fn check_shapes(&self, dim: usize) -> Result<()> {
        if self.conv.input_dim() != dim {
            return Err(Error::Config(format!(
                "convolution reads {} features but embeddings have {dim}",
                self.conv.input_dim()
            )));
        }
        for cell in [&self.lstm_fwd, &self.lstm_bwd] {
            cell.check_shapes()?;
            if cell.input_dim() != self.conv.n_filters() {
                return Err(Error::Shape(format!(
                    "LSTM reads {} features, convolution has {} filters",
                    cell.input_dim(),
                    self.conv.n_filters()
                )));
            }
        }
        if self.lstm_fwd.hidden() != self.lstm_bwd.hidden() {
            return Err(Error::Shape("LSTM directions differ in hidden size".into()));
        }
        if self.out_w.shape() != (2, 2 * self.lstm_fwd.hidden()) || self.out_b.len() != 2 {
            return Err(Error::Shape(format!("output layer {:?} does not fit the LSTM", self.out_w.shape())));
        }
        if self.pool_width % 2 == 0 {
            return Err(Error::Shape(format!("pooling width {} is even", self.pool_width)));
        }
        Ok(())
    }
}

impl Parameters for RcnnLayers {
    fn blocks(&self) -> Vec<(&'static str, &[f64])> {
        let mut v = self.conv.blocks();
        v.extend(cell_blocks(&self.lstm_fwd, &FWD_NAMES));
        v.extend(cell_blocks(&self.lstm_bwd, &BWD_NAMES));
        v.push(("out.w", self.out_w.as_slice()));
        v.push(("out.b", &self.out_b));
        v
    }

    fn blocks_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        let mut v = self.conv.blocks_mut();
        v.extend(cell_blocks_mut(&mut self.lstm_fwd, &FWD_NAMES));
        v.extend(cell_blocks_mut(&mut self.lstm_bwd, &BWD_NAMES));
        v.push(("out.w", self.out_w.as_mut_slice()));
        v.push(("out.b", &mut self.out_b));
        v
    }

    fn zeros_like(&self) -> Self {
        RcnnLayers {
            conv: self.conv.zeros_like(),
            lstm_fwd: self.lstm_fwd.zeros_like(),
            lstm_bwd: self.lstm_bwd.zeros_like(),
            out_w: Tensor2::zeros(2, self.out_w.cols()),
            out_b: vec![0.0; 2],
            pool_width: self.pool_width,
        }
    }
}

/// Full parameter set: embedding matrix plus layers.
#[derive(Clone, Debug, PartialEq)]
pub struct RcnnParams {
    /// One row per lexicon row, padding and unknown rows first.
    pub embedding: Tensor2,
    pub layers: RcnnLayers,
}

impl RcnnParams {
    pub fn dim(&self) -> usize {
        self.embedding.cols()
    }

    pub fn check_shapes(&self) -> Result<()> {
        self.layers.check_shapes(self.embedding.cols())
    }
}

impl Parameters for RcnnParams {
    fn blocks(&self) -> Vec<(&'static str, &[f64])> {
        let mut v = vec![("embedding", self.embedding.as_slice())];
        v.extend(self.layers.blocks());
        v
    }

    fn blocks_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        let mut v = vec![("embedding", self.embedding.as_mut_slice())];
        v.extend(self.layers.blocks_mut());
        v
    }

    fn zeros_like(&self) -> Self {
        RcnnParams {
            embedding: Tensor2::zeros(self.embedding.rows(), self.embedding.cols()),
            layers: self.layers.zeros_like(),
        }
    }
}

/// Forward caches of one window.
pub(crate) struct WindowPass {
    input: Tensor2,
    conv: ConvOutput,
    pool: PoolOutput,
    bi: BiLstmOutput,
    dropped: Tensor2,
    drop_mask: Option<Vec<f64>>,
    pub probs: Vec<[f64; 2]>,
}

/// Stacks embedding rows, replacing positions listed in `overrides`.
pub(crate) fn gather(embedding: &Tensor2, ids: &[usize], overrides: &[(usize, Vec<f64>)]) -> Tensor2 {
    let d = embedding.cols();
    let mut x = Tensor2::zeros(ids.len(), d);
    for (t, &id) in ids.iter().enumerate() {
        x.row_mut(t).copy_from_slice(embedding.row(id));
    }
    for (t, v) in overrides {
        x.row_mut(*t).copy_from_slice(v);
    }
    x
}

pub(crate) fn forward<R: Rng + ?Sized>(
    layers: &RcnnLayers,
    input: Tensor2,
    dropout_rate: f64,
    training: bool,
    rng: &mut R,
) -> Result<WindowPass> {
    let conv = conv1d_forward(&input, &layers.conv)?;
    let pool = maxpool_temporal(&conv.out, layers.pool_width)?;
    let bi = bilstm_forward(&layers.lstm_fwd, &layers.lstm_bwd, &pool.out)?;
    let (dropped, drop_mask) = dropout(&bi.out, dropout_rate, training, rng)?;
    let logits = dense_forward(&dropped, &layers.out_w, &layers.out_b)?;
    let probs: Vec<[f64; 2]> = (0..logits.rows())
        .map(|t| softmax2([logits.get(t, 0), logits.get(t, 1)]))
        .collect();
    if probs.iter().flatten().any(|p| !p.is_finite()) {
        return Err(Error::Numeric("non-finite output probability".into()));
    }
    Ok(WindowPass { input, conv, pool, bi, dropped, drop_mask, probs })
}

/// Backward pass from logit gradients; layer gradients are accumulated
/// into `grads`, the input gradient is returned.
pub(crate) fn backward(layers: &RcnnLayers, pass: &WindowPass, d_logits: &Tensor2, grads: &mut RcnnLayers) -> Tensor2 {
    let d_dropped = dense_backward(&pass.dropped, &layers.out_w, d_logits, &mut grads.out_w, &mut grads.out_b);
    let d_bi = dropout_backward(&d_dropped, pass.drop_mask.as_deref());
    let d_pool = bilstm_backward(
        &layers.lstm_fwd,
        &layers.lstm_bwd,
        &pass.bi,
        &d_bi,
        &mut grads.lstm_fwd,
        &mut grads.lstm_bwd,
    );
    let d_conv = maxpool_backward(&pass.pool, &d_pool);
    conv1d_backward(&pass.input, &layers.conv, &pass.conv, &d_conv, &mut grads.conv)
}

pub(crate) fn class_index(window: &WindowInstance) -> Vec<usize> {
    window
        .labels
        .iter()
        .map(|l| if l.is_boundary() { CLASS_B } else { CLASS_NB })
        .collect()
}

/// Weighted loss of a minibatch together with its gradient.
#[derive(Clone, Debug)]
pub struct BatchGradient {
    /// `Σ w·(−ln p(y)) / Σ w` over the real positions of the batch.
    pub loss: f64,
    pub loss_sum: f64,
    pub weight: f64,
    pub layers: RcnnLayers,
    /// Input gradient per touched embedding row.
    pub rows: BTreeMap<usize, Vec<f64>>,
    /// Positions whose true-class probability was floored.
    pub clamped: usize,
    /// Normalized loss gradient with respect to each window's logits.
    pub logit_grads: Vec<Vec<[f64; 2]>>,
}

impl BatchGradient {
    /// Writes the sparse row gradients into a dense embedding-shaped tensor.
    pub fn dense(&self, params: &RcnnParams) -> RcnnParams {
        let mut g = RcnnParams {
            embedding: Tensor2::zeros(params.embedding.rows(), params.embedding.cols()),
            layers: self.layers.clone(),
        };
        for (&r, v) in &self.rows {
            g.embedding.row_mut(r).copy_from_slice(v);
        }
        g
    }
}

/// Loss and gradient of a minibatch, normalized by the total class weight
/// of its real positions. Dropout is active when `dropout_rate > 0`.
pub fn batch_gradient<R: Rng + ?Sized>(
    params: &RcnnParams,
    windows: &[WindowInstance],
    weights: [f64; 2],
    dropout_rate: f64,
    rng: &mut R,
) -> Result<BatchGradient> {
    let training = dropout_rate > 0.0;
    let mut passes = Vec::with_capacity(windows.len());
    let mut losses = Vec::with_capacity(windows.len());
    let (mut sum, mut weight, mut clamped) = (0.0, 0.0, 0);
    for w in windows {
        let input = gather(&params.embedding, &w.ids, &[]);
        let pass = forward(&params.layers, input, dropout_rate, training, rng)?;
        let wl = weighted_cross_entropy(&pass.probs, &class_index(w), &w.mask, weights)?;
        sum += wl.sum;
        weight += wl.weight;
        clamped += wl.clamped;
        passes.push(pass);
        losses.push(wl);
    }
    let mut out = BatchGradient {
        loss: if weight > 0.0 { sum / weight } else { 0.0 },
        loss_sum: sum,
        weight,
        layers: params.layers.zeros_like(),
        rows: BTreeMap::new(),
        clamped,
        logit_grads: Vec::with_capacity(windows.len()),
    };
    if weight == 0.0 {
        return Ok(out);
    }
    let d = params.dim();
    for ((w, pass), wl) in windows.iter().zip(&passes).zip(&losses) {
        let mut d_logits = Tensor2::zeros(w.ids.len(), 2);
        for (t, g) in wl.grad.iter().enumerate() {
            d_logits.set(t, 0, g[0] / weight);
            d_logits.set(t, 1, g[1] / weight);
        }
        let d_input = backward(&params.layers, pass, &d_logits, &mut out.layers);
        out.logit_grads.push((0..d_logits.rows()).map(|t| [d_logits.get(t, 0), d_logits.get(t, 1)]).collect());
        for (t, &id) in w.ids.iter().enumerate() {
            let acc = out.rows.entry(id).or_insert_with(|| vec![0.0; d]);
            for (a, g) in acc.iter_mut().zip(d_input.row(t)) {
                *a += g;
            }
        }
    }
    Ok(out)
}

/// Loss of a minibatch with dropout off.
pub fn batch_loss(params: &RcnnParams, windows: &[WindowInstance], weights: [f64; 2]) -> Result<f64> {
    let mut sum = 0.0;
    let mut weight = 0.0;
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    for w in windows {
        let input = gather(&params.embedding, &w.ids, &[]);
        let pass = forward(&params.layers, input, 0.0, false, &mut rng)?;
        let wl = weighted_cross_entropy(&pass.probs, &class_index(w), &w.mask, weights)?;
        sum += wl.sum;
        weight += wl.weight;
    }
    Ok(if weight > 0.0 { sum / weight } else { 0.0 })
}
