//! Shared fixtures for the benchmarks in `benches/`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbd_core::corpus::Label;
use sbd_core::model::{WindowInstance, PAD_ID};
use sbd_core::Tensor2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with entries uniform in [-1, 1).
pub fn random_tensor(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor2 {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Tensor2::from_vec(rows, cols, data).expect("shape matches")
}

/// Labels with boundaries at rate `p`.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<Label> {
    (0..n)
        .map(|_| if rng.gen_bool(p) { Label::Boundary } else { Label::NoBoundary })
        .collect()
}

/// Full windows of `len` ids drawn from rows `1..rows`.
pub fn random_windows(rng: &mut ChaCha8Rng, count: usize, len: usize, rows: usize) -> Vec<WindowInstance> {
    (0..count)
        .map(|i| {
            let real = if i + 1 == count { len / 2 } else { len };
            let mut ids: Vec<usize> = (0..real).map(|_| rng.gen_range(1..rows)).collect();
            let mut labels = random_labels(rng, real, 0.12);
            ids.resize(len, PAD_ID);
            labels.resize(len, Label::NoBoundary);
            let mut mask = vec![true; real];
            mask.resize(len, false);
            WindowInstance { start: 0, ids, labels, mask }
        })
        .collect()
}
