use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tensor::Tensor2;
use crate::error::{Error, Result};

/// Inverted dropout. In training mode each entry is zeroed with
/// probability `rate` and survivors are scaled by `1 / (1 - rate)`;
/// otherwise the input passes through. The returned mask holds the factor
/// applied to every entry, for the backward pass.
pub fn dropout<R: Rng + ?Sized>(x: &Tensor2, rate: f64, training: bool, rng: &mut R) -> Result<(Tensor2, Option<Vec<f64>>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Argument(format!("dropout rate must be in [0, 1), got {rate}")));
    }
    if !training || rate == 0.0 {
        return Ok((x.clone(), None));
    }
    let keep = 1.0 / (1.0 - rate);
    let mask: Vec<f64> = (0..x.as_slice().len())
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect();
    let mut out = x.clone();
    for (o, m) in out.as_mut_slice().iter_mut().zip(&mask) {
        *o *= m;
    }
    Ok((out, Some(mask)))
}

/// [`dropout`] with a fresh generator seeded by `seed`.
pub fn dropout_seeded(x: &Tensor2, rate: f64, training: bool, seed: u64) -> Result<(Tensor2, Option<Vec<f64>>)> {
    dropout(x, rate, training, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn dropout_backward(d_out: &Tensor2, mask: Option<&[f64]>) -> Tensor2 {
    let mut d = d_out.clone();
    if let Some(mask) = mask {
        for (g, m) in d.as_mut_slice().iter_mut().zip(mask) {
            *g *= m;
        }
    }
    d
}
