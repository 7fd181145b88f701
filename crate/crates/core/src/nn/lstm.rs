use rand::Rng;

use super::params::Parameters;
use super::tensor::{axpy, Tensor2};
use crate::error::{Error, Result};

/// LSTM cell with input, forget and output gates.
///
/// Every gate reads the concatenation `[x; h_prev]`:
///
/// ```text
/// i = σ(W_i z + b_i)   f = σ(W_f z + b_f)   o = σ(W_o z + b_o)
/// g = tanh(W_g z + b_g)
/// c = f ⊙ c_prev + i ⊙ g
/// h = o ⊙ tanh(c)
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCell {
    input_dim: usize,
    hidden: usize,
    pub w_i: Tensor2,
    pub w_f: Tensor2,
    pub w_o: Tensor2,
    pub w_g: Tensor2,
    pub b_i: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_o: Vec<f64>,
    pub b_g: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmCell {
    /// Glorot-initialized gates, zero biases except the forget bias of 1.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let cols = input_dim + hidden;
        let mut gate = || Tensor2::glorot(hidden, cols, cols, hidden, rng);
        let (w_i, w_f, w_o, w_g) = (gate(), gate(), gate(), gate());
        LstmCell {
            input_dim,
            hidden,
            w_i,
            w_f,
            w_o,
            w_g,
            b_i: vec![0.0; hidden],
            b_f: vec![1.0; hidden],
            b_o: vec![0.0; hidden],
            b_g: vec![0.0; hidden],
        }
    }

    /// Assembles a cell from gate matrices `[W_i, W_f, W_o, W_g]` and biases
    /// in the same order. Sizes are read from the input-gate matrix.
    pub fn from_parts(weights: [Tensor2; 4], biases: [Vec<f64>; 4]) -> Result<Self> {
        let hidden = weights[0].rows();
        let input_dim = weights[0].cols().checked_sub(hidden).ok_or_else(|| {
            Error::Shape(format!("LSTM gate matrix {:?} is narrower than it is tall", weights[0].shape()))
        })?;
        let [w_i, w_f, w_o, w_g] = weights;
        let [b_i, b_f, b_o, b_g] = biases;
        let cell = LstmCell { input_dim, hidden, w_i, w_f, w_o, w_g, b_i, b_f, b_o, b_g };
        cell.check_shapes()?;
        Ok(cell)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn check_shapes(&self) -> Result<()> {
        let want = (self.hidden, self.input_dim + self.hidden);
        for w in [&self.w_i, &self.w_f, &self.w_o, &self.w_g] {
            if w.shape() != want {
                return Err(Error::Shape(format!("LSTM gate matrix {:?}, expected {want:?}", w.shape())));
            }
        }
        for b in [&self.b_i, &self.b_f, &self.b_o, &self.b_g] {
            if b.len() != self.hidden {
                return Err(Error::Shape(format!("LSTM bias of length {}, expected {}", b.len(), self.hidden)));
            }
        }
        Ok(())
    }
}

/// Everything the backward pass needs from one step.
#[derive(Clone, Debug)]
pub struct LstmStepCache {
    z: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    o: Vec<f64>,
    g: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// One time step; returns `(h_t, c_t)` and the step cache.
pub fn lstm_step(cell: &LstmCell, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>, LstmStepCache)> {
    if x.len() != cell.input_dim || h_prev.len() != cell.hidden || c_prev.len() != cell.hidden {
        return Err(Error::Shape(format!(
            "LSTM step: x {}, h {}, c {} for a cell of input {} and hidden {}",
            x.len(),
            h_prev.len(),
            c_prev.len(),
            cell.input_dim,
            cell.hidden
        )));
    }
    let mut z = Vec::with_capacity(x.len() + h_prev.len());
    z.extend_from_slice(x);
    z.extend_from_slice(h_prev);
    let gate = |w: &Tensor2, b: &[f64], act: fn(f64) -> f64| -> Vec<f64> {
        let mut a = b.to_vec();
        w.matvec_acc(&z, &mut a);
        a.into_iter().map(act).collect()
    };
    let i = gate(&cell.w_i, &cell.b_i, sigmoid);
    let f = gate(&cell.w_f, &cell.b_f, sigmoid);
    let o = gate(&cell.w_o, &cell.b_o, sigmoid);
    let g = gate(&cell.w_g, &cell.b_g, f64::tanh);
    let c: Vec<f64> = (0..cell.hidden).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h: Vec<f64> = (0..cell.hidden).map(|k| o[k] * tanh_c[k]).collect();
    let cache = LstmStepCache {
        z,
        i,
        f,
        o,
        g,
        c_prev: c_prev.to_vec(),
        tanh_c,
    };
    Ok((h, c, cache))
}

/// Backward through one step. Takes the gradients flowing into `h_t` and
/// `c_t`, accumulates parameter gradients and returns the gradients for
/// `x`, `h_prev` and `c_prev`.
pub fn lstm_step_backward(
    cell: &LstmCell,
    cache: &LstmStepCache,
    d_h: &[f64],
    d_c_next: &[f64],
    grads: &mut LstmCell,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = cell.hidden;
    let mut da_i = vec![0.0; n];
    let mut da_f = vec![0.0; n];
    let mut da_o = vec![0.0; n];
    let mut da_g = vec![0.0; n];
    let mut d_c_prev = vec![0.0; n];
    for k in 0..n {
        let (i, f, o, g, tc) = (cache.i[k], cache.f[k], cache.o[k], cache.g[k], cache.tanh_c[k]);
        let d_o = d_h[k] * tc;
        let d_c = d_c_next[k] + d_h[k] * o * (1.0 - tc * tc);
        da_i[k] = d_c * g * i * (1.0 - i);
        da_f[k] = d_c * cache.c_prev[k] * f * (1.0 - f);
        da_o[k] = d_o * o * (1.0 - o);
        da_g[k] = d_c * i * (1.0 - g * g);
        d_c_prev[k] = d_c * f;
    }
    let mut d_z = vec![0.0; cache.z.len()];
    for (w, gw, gb, da) in [
        (&cell.w_i, &mut grads.w_i, &mut grads.b_i, &da_i),
        (&cell.w_f, &mut grads.w_f, &mut grads.b_f, &da_f),
        (&cell.w_o, &mut grads.w_o, &mut grads.b_o, &da_o),
        (&cell.w_g, &mut grads.w_g, &mut grads.b_g, &da_g),
    ] {
        gw.add_outer(da, &cache.z);
        axpy(1.0, da, gb);
        w.matvec_t_acc(da, &mut d_z);
    }
    let d_h_prev = d_z.split_off(cell.input_dim);
    (d_z, d_h_prev, d_c_prev)
}

/// Hidden states of a pass over a whole sequence, one row per input row in
/// input order, with the caches in processing order.
#[derive(Clone, Debug)]
pub struct LstmSequence {
    pub hidden: Tensor2,
    reverse: bool,
    steps: Vec<LstmStepCache>,
}

/// Runs the cell from zero states left to right, or right to left when
/// `reverse` is set.
pub fn lstm_forward(cell: &LstmCell, xs: &Tensor2, reverse: bool) -> Result<LstmSequence> {
    let len = xs.rows();
    let n = cell.hidden;
    let mut hidden = Tensor2::zeros(len, n);
    let mut h = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut steps = Vec::with_capacity(len);
    for k in 0..len {
        let t = if reverse { len - 1 - k } else { k };
        let (h_t, c_t, cache) = lstm_step(cell, xs.row(t), &h, &c)?;
        hidden.row_mut(t).copy_from_slice(&h_t);
        steps.push(cache);
        h = h_t;
        c = c_t;
    }
    Ok(LstmSequence { hidden, reverse, steps })
}

/// Backpropagation through time for [`lstm_forward`].
pub fn lstm_backward(cell: &LstmCell, seq: &LstmSequence, d_hidden: &Tensor2, grads: &mut LstmCell) -> Tensor2 {
    let len = seq.steps.len();
    let n = cell.hidden;
    let mut d_xs = Tensor2::zeros(len, cell.input_dim);
    let mut d_h_next = vec![0.0; n];
    let mut d_c_next = vec![0.0; n];
    for k in (0..len).rev() {
        let t = if seq.reverse { len - 1 - k } else { k };
        let mut d_h = d_hidden.row(t).to_vec();
        axpy(1.0, &d_h_next, &mut d_h);
        let (d_x, d_h_prev, d_c_prev) = lstm_step_backward(cell, &seq.steps[k], &d_h, &d_c_next, grads);
        d_xs.row_mut(t).copy_from_slice(&d_x);
        d_h_next = d_h_prev;
        d_c_next = d_c_prev;
    }
    d_xs
}

/// Bidirectional pass: output row `t` is `[h_fwd(t); h_bwd(t)]`.
#[derive(Clone, Debug)]
pub struct BiLstmOutput {
    pub out: Tensor2,
    pub forward: LstmSequence,
    pub backward: LstmSequence,
}

pub fn bilstm_forward(cell_fwd: &LstmCell, cell_bwd: &LstmCell, sequence: &Tensor2) -> Result<BiLstmOutput> {
    if cell_fwd.hidden != cell_bwd.hidden {
        return Err(Error::Shape("forward and backward cells differ in hidden size".into()));
    }
    let forward = lstm_forward(cell_fwd, sequence, false)?;
    let backward = lstm_forward(cell_bwd, sequence, true)?;
    let n = cell_fwd.hidden;
    let mut out = Tensor2::zeros(sequence.rows(), 2 * n);
    for t in 0..sequence.rows() {
        let row = out.row_mut(t);
        row[..n].copy_from_slice(forward.hidden.row(t));
        row[n..].copy_from_slice(backward.hidden.row(t));
    }
    Ok(BiLstmOutput { out, forward, backward })
}

pub fn bilstm_backward(
    cell_fwd: &LstmCell,
    cell_bwd: &LstmCell,
    cache: &BiLstmOutput,
    d_out: &Tensor2,
    grads_fwd: &mut LstmCell,
    grads_bwd: &mut LstmCell,
) -> Tensor2 {
    let n = cell_fwd.hidden;
    let len = d_out.rows();
    let mut d_f = Tensor2::zeros(len, n);
    let mut d_b = Tensor2::zeros(len, n);
    for t in 0..len {
        d_f.row_mut(t).copy_from_slice(&d_out.row(t)[..n]);
        d_b.row_mut(t).copy_from_slice(&d_out.row(t)[n..]);
    }
    let mut d_x = lstm_backward(cell_fwd, &cache.forward, &d_f, grads_fwd);
    let d_x_b = lstm_backward(cell_bwd, &cache.backward, &d_b, grads_bwd);
    axpy(1.0, d_x_b.as_slice(), d_x.as_mut_slice());
    d_x
}

/// Parameter blocks of an LSTM cell, named for its role in a model.
pub(crate) fn cell_blocks<'a>(cell: &'a LstmCell, names: &[&'static str; 8]) -> Vec<(&'static str, &'a [f64])> {
    vec![
        (names[0], cell.w_i.as_slice()),
        (names[1], cell.w_f.as_slice()),
        (names[2], cell.w_o.as_slice()),
        (names[3], cell.w_g.as_slice()),
        (names[4], &cell.b_i),
        (names[5], &cell.b_f),
        (names[6], &cell.b_o),
        (names[7], &cell.b_g),
    ]
}

pub(crate) fn cell_blocks_mut<'a>(cell: &'a mut LstmCell, names: &[&'static str; 8]) -> Vec<(&'static str, &'a mut [f64])> {
    vec![
        (names[0], cell.w_i.as_mut_slice()),
        (names[1], cell.w_f.as_mut_slice()),
        (names[2], cell.w_o.as_mut_slice()),
        (names[3], cell.w_g.as_mut_slice()),
        (names[4], &mut cell.b_i),
        (names[5], &mut cell.b_f),
        (names[6], &mut cell.b_o),
        (names[7], &mut cell.b_g),
    ]
}

const CELL_NAMES: [&str; 8] = ["lstm.w_i", "lstm.w_f", "lstm.w_o", "lstm.w_g", "lstm.b_i", "lstm.b_f", "lstm.b_o", "lstm.b_g"];

impl Parameters for LstmCell {
    fn blocks(&self) -> Vec<(&'static str, &[f64])> {
        cell_blocks(self, &CELL_NAMES)
    }

    fn blocks_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        cell_blocks_mut(self, &CELL_NAMES)
    }

    fn zeros_like(&self) -> Self {
        let z = || Tensor2::zeros(self.hidden, self.input_dim + self.hidden);
        LstmCell {
            input_dim: self.input_dim,
            hidden: self.hidden,
            w_i: z(),
            w_f: z(),
            w_o: z(),
            w_g: z(),
            b_i: vec![0.0; self.hidden],
            b_f: vec![0.0; self.hidden],
            b_o: vec![0.0; self.hidden],
            b_g: vec![0.0; self.hidden],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_everything_gives_zero_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cell = LstmCell::init(3, 2, &mut rng).zeros_like();
        cell.b_f = vec![0.0; 2];
        let (h, c, _) = lstm_step(&cell, &[0.0; 3], &[0.0; 2], &[0.0; 2]).unwrap();
        assert_eq!(h, vec![0.0; 2]);
        assert_eq!(c, vec![0.0; 2]);
    }

    #[test]
    fn forget_gate_preserves_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cell = LstmCell::init(2, 3, &mut rng).zeros_like();
        // Saturated gates: f = σ(800) = 1, i = σ(-800) = 0 in f64.
        cell.b_f = vec![800.0; 3];
        cell.b_i = vec![-800.0; 3];
        let c_prev = [0.25, -1.5, 3.0];
        let (_, c, _) = lstm_step(&cell, &[1.0, -1.0], &[0.1, 0.2, 0.3], &c_prev).unwrap();
        assert_eq!(c, c_prev);
    }

    #[test]
    fn init_sets_forget_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cell = LstmCell::init(2, 3, &mut rng);
        assert_eq!(cell.b_f, vec![1.0; 3]);
        cell.check_shapes().unwrap();
    }

    #[test]
    fn step_shape_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cell = LstmCell::init(2, 3, &mut rng);
        assert!(lstm_step(&cell, &[1.0], &[0.0; 3], &[0.0; 3]).is_err());
        assert!(lstm_step(&cell, &[1.0, 2.0], &[0.0; 2], &[0.0; 3]).is_err());
    }

    #[test]
    fn single_step_bilstm() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = LstmCell::init(2, 3, &mut rng);
        let b = LstmCell::init(2, 3, &mut rng);
        let x = Tensor2::from_vec(1, 2, vec![0.3, -0.7]).unwrap();
        let out = bilstm_forward(&f, &b, &x).unwrap();
        let (hf, _, _) = lstm_step(&f, x.row(0), &[0.0; 3], &[0.0; 3]).unwrap();
        let (hb, _, _) = lstm_step(&b, x.row(0), &[0.0; 3], &[0.0; 3]).unwrap();
        assert_eq!(&out.out.row(0)[..3], &hf[..]);
        assert_eq!(&out.out.row(0)[3..], &hb[..]);
    }

    #[test]
    fn reversal_swaps_halves() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cell = LstmCell::init(3, 4, &mut rng);
        let len = 5;
        let data: Vec<f64> = (0..len * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = Tensor2::from_vec(len, 3, data.clone()).unwrap();
        let mut rev = Tensor2::zeros(len, 3);
        for t in 0..len {
            rev.row_mut(t).copy_from_slice(x.row(len - 1 - t));
        }
        let out = bilstm_forward(&cell, &cell, &x).unwrap().out;
        let out_rev = bilstm_forward(&cell, &cell, &rev).unwrap().out;
        for t in 0..len {
            assert_eq!(&out_rev.row(t)[..4], &out.row(len - 1 - t)[4..]);
        }
    }
}
