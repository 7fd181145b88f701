use rand::Rng;

use super::params::Parameters;
use super::tensor::{axpy, dot, Tensor2};
use crate::error::{Error, Result};

/// Shared filters over a window of `width` consecutive rows, zero-padded by
/// `width / 2` rows on each side so the output has one row per input row.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer {
    width: usize,
    input_dim: usize,
    /// `n_filters × (width · input_dim)`; column `k · input_dim + j` weighs
    /// feature `j` of the `k`-th row of the window.
    pub filters: Tensor2,
    pub bias: Vec<f64>,
}

/// Output length of a stride-1 convolution with `padding` rows on each side.
pub fn conv_output_len(len: usize, width: usize, padding: usize) -> usize {
    (len + 2 * padding + 1).saturating_sub(width)
}

impl ConvLayer {
    pub fn new(filters: Tensor2, bias: Vec<f64>, width: usize, input_dim: usize) -> Result<Self> {
        if width == 0 || width % 2 == 0 {
            return Err(Error::Config(format!("convolution width must be odd, got {width}")));
        }
        if filters.cols() != width * input_dim || bias.len() != filters.rows() {
            return Err(Error::Shape(format!(
                "filters {:?} and bias {} do not fit width {width} over {input_dim} features",
                filters.shape(),
                bias.len()
            )));
        }
        Ok(ConvLayer {
            width,
            input_dim,
            filters,
            bias,
        })
    }

    pub fn init<R: Rng + ?Sized>(n_filters: usize, width: usize, input_dim: usize, rng: &mut R) -> Result<Self> {
        let fan_in = width * input_dim;
        let filters = Tensor2::glorot(n_filters, fan_in, fan_in, n_filters, rng);
        ConvLayer::new(filters, vec![0.0; n_filters], width, input_dim)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn n_filters(&self) -> usize {
        self.filters.rows()
    }

    pub fn padding(&self) -> usize {
        self.width / 2
    }
}

impl Parameters for ConvLayer {
    fn blocks(&self) -> Vec<(&'static str, &[f64])> {
        vec![("conv.filters", self.filters.as_slice()), ("conv.bias", &self.bias)]
    }

    fn blocks_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        vec![("conv.filters", self.filters.as_mut_slice()), ("conv.bias", &mut self.bias)]
    }

    fn zeros_like(&self) -> Self {
        ConvLayer {
            width: self.width,
            input_dim: self.input_dim,
            filters: Tensor2::zeros(self.filters.rows(), self.filters.cols()),
            bias: vec![0.0; self.bias.len()],
        }
    }
}

/// Pre-activations and ReLU outputs.
#[derive(Clone, Debug)]
pub struct ConvOutput {
    pub pre: Tensor2,
    pub out: Tensor2,
}

/// Gathers the zero-padded window ending at row `t + width - 1` of the
/// padded input, i.e. centered on input row `t`.
fn window(input: &Tensor2, t: usize, width: usize, buf: &mut [f64]) {
    let d = input.cols();
    let pad = width / 2;
    for k in 0..width {
        let src = (t + k) as isize - pad as isize;
        let dst = &mut buf[k * d..(k + 1) * d];
        if src < 0 || src >= input.rows() as isize {
            dst.fill(0.0);
        } else {
            dst.copy_from_slice(input.row(src as usize));
        }
    }
}

pub fn conv1d_forward(input: &Tensor2, layer: &ConvLayer) -> Result<ConvOutput> {
    if input.cols() != layer.input_dim {
        return Err(Error::Shape(format!(
            "convolution expects {} input features, got {}",
            layer.input_dim,
            input.cols()
        )));
    }
    let len = conv_output_len(input.rows(), layer.width, layer.padding());
    let nf = layer.n_filters();
    let mut pre = Tensor2::zeros(len, nf);
    let mut buf = vec![0.0; layer.width * layer.input_dim];
    for t in 0..len {
        window(input, t, layer.width, &mut buf);
        let row = pre.row_mut(t);
        for (f, r) in row.iter_mut().enumerate() {
            *r = layer.bias[f] + dot(layer.filters.row(f), &buf);
        }
    }
    let mut out = pre.clone();
    for x in out.as_mut_slice() {
        *x = x.max(0.0);
    }
    Ok(ConvOutput { pre, out })
}

/// Accumulates filter and bias gradients into `grads` and returns the
/// gradient with respect to the input.
pub fn conv1d_backward(
    input: &Tensor2,
    layer: &ConvLayer,
    cache: &ConvOutput,
    d_out: &Tensor2,
    grads: &mut ConvLayer,
) -> Tensor2 {
    let d = layer.input_dim;
    let pad = layer.padding() as isize;
    let mut d_input = Tensor2::zeros(input.rows(), d);
    let mut buf = vec![0.0; layer.width * d];
    let mut d_window = vec![0.0; layer.width * d];
    for t in 0..cache.pre.rows() {
        let d_pre: Vec<f64> = d_out
            .row(t)
            .iter()
            .zip(cache.pre.row(t))
            .map(|(&g, &p)| if p > 0.0 { g } else { 0.0 })
            .collect();
        if d_pre.iter().all(|&g| g == 0.0) {
            continue;
        }
        window(input, t, layer.width, &mut buf);
        grads.filters.add_outer(&d_pre, &buf);
        axpy(1.0, &d_pre, &mut grads.bias);
        d_window.fill(0.0);
        layer.filters.matvec_t_acc(&d_pre, &mut d_window);
        for k in 0..layer.width {
            let src = t as isize + k as isize - pad;
            if src >= 0 && src < input.rows() as isize {
                axpy(1.0, &d_window[k * d..(k + 1) * d], d_input.row_mut(src as usize));
            }
        }
    }
    d_input
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn output_length_matches_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let layer = ConvLayer::init(2, 3, 4, &mut rng).unwrap();
        let input = Tensor2::zeros(10, 4);
        let out = conv1d_forward(&input, &layer).unwrap();
        assert_eq!(layer.padding(), 1);
        assert_eq!(out.out.rows(), 10 - 3 + 2 + 1);
    }

    #[test]
    fn ones_filter_on_ones_input() {
        let layer = ConvLayer::new(Tensor2::from_vec(1, 3, vec![1.0; 3]).unwrap(), vec![0.0], 3, 1).unwrap();
        let input = Tensor2::from_vec(6, 1, vec![1.0; 6]).unwrap();
        let out = conv1d_forward(&input, &layer).unwrap();
        assert_eq!(out.pre.as_slice(), &[2.0, 3.0, 3.0, 3.0, 3.0, 2.0]);
    }

    #[test]
    fn identity_filter() {
        let layer = ConvLayer::new(Tensor2::from_vec(1, 1, vec![1.0]).unwrap(), vec![0.0], 1, 1).unwrap();
        let input = Tensor2::from_vec(4, 1, vec![0.5, 2.0, 3.5, 1.0]).unwrap();
        let out = conv1d_forward(&input, &layer).unwrap();
        assert_eq!(out.out, input);
    }

    #[test]
    fn relu_applied() {
        let layer = ConvLayer::new(Tensor2::from_vec(1, 1, vec![-1.0]).unwrap(), vec![0.0], 1, 1).unwrap();
        let input = Tensor2::from_vec(2, 1, vec![1.0, -2.0]).unwrap();
        let out = conv1d_forward(&input, &layer).unwrap();
        assert_eq!(out.out.as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn rejects_bad_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let layer = ConvLayer::init(2, 3, 4, &mut rng).unwrap();
        assert!(matches!(conv1d_forward(&Tensor2::zeros(5, 3), &layer), Err(Error::Shape(_))));
        assert!(ConvLayer::init(2, 4, 4, &mut rng).is_err());
    }
}
