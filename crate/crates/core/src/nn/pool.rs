use super::tensor::Tensor2;
use crate::error::{Error, Result};

/// Same-length temporal max-pooling: row `t` of the output is the
/// column-wise maximum over the `width` rows centered on `t` (rows past
/// either end are ignored). `argmax` records the winning source row of
/// every output cell, the earliest one on ties.
#[derive(Clone, Debug)]
pub struct PoolOutput {
    pub out: Tensor2,
    pub argmax: Vec<usize>,
}

pub fn maxpool_temporal(features: &Tensor2, width: usize) -> Result<PoolOutput> {
    if width == 0 || width % 2 == 0 {
        return Err(Error::Config(format!("pooling width must be odd, got {width}")));
    }
    let (len, cols) = features.shape();
    let half = width / 2;
    let mut out = Tensor2::zeros(len, cols);
    let mut argmax = vec![0; len * cols];
    for t in 0..len {
        let lo = t.saturating_sub(half);
        let hi = (t + half).min(len - 1);
        for c in 0..cols {
            let mut best = lo;
            for s in lo + 1..=hi {
                if features.get(s, c) > features.get(best, c) {
                    best = s;
                }
            }
            out.set(t, c, features.get(best, c));
            argmax[t * cols + c] = best;
        }
    }
    Ok(PoolOutput { out, argmax })
}

/// Routes each output gradient to its argmax source row.
pub fn maxpool_backward(cache: &PoolOutput, d_out: &Tensor2) -> Tensor2 {
    let (len, cols) = d_out.shape();
    let mut d_in = Tensor2::zeros(len, cols);
    for t in 0..len {
        for c in 0..cols {
            let src = cache.argmax[t * cols + c];
            let cur = d_in.get(src, c);
            d_in.set(src, c, cur + d_out.get(t, c));
        }
    }
    d_in
}
