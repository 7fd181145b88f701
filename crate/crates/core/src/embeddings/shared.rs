//! Parameter matrix shared between training workers.
//!
//! Elements are `f32` bit patterns in relaxed atomics. Workers read and
//! write rows without any synchronization, so concurrent updates to the
//! same row may overwrite each other; with a single worker the behavior is
//! that of a plain matrix.

use std::sync::atomic::{AtomicU32, Ordering::Relaxed};

pub(crate) struct SharedMatrix {
    cols: usize,
    data: Vec<AtomicU32>,
}

impl SharedMatrix {
    pub fn from_vec(cols: usize, values: Vec<f32>) -> Self {
        debug_assert!(cols > 0 && values.len() % cols == 0);
        SharedMatrix {
            cols,
            data: values.into_iter().map(|x| AtomicU32::new(x.to_bits())).collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_vec(cols, vec![0.0; rows * cols])
    }

    #[cfg(test)]
    pub fn rows(&self) -> usize {
        self.data.len() / self.cols
    }

    fn row(&self, r: usize) -> &[AtomicU32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn read_row(&self, r: usize, out: &mut [f32]) {
        for (o, x) in out.iter_mut().zip(self.row(r)) {
            *o = f32::from_bits(x.load(Relaxed));
        }
    }

    /// Adds `scale * v` to the row.
    pub fn add_to_row(&self, r: usize, v: &[f32], scale: f32) {
        for (x, &d) in self.row(r).iter().zip(v) {
            let cur = f32::from_bits(x.load(Relaxed));
            x.store((cur + scale * d).to_bits(), Relaxed);
        }
    }

    /// Accumulates the row into `out`.
    pub fn add_row_into(&self, r: usize, out: &mut [f32]) {
        for (o, x) in out.iter_mut().zip(self.row(r)) {
            *o += f32::from_bits(x.load(Relaxed));
        }
    }

    pub fn dot_row(&self, r: usize, v: &[f32]) -> f32 {
        self.row(r)
            .iter()
            .zip(v)
            .map(|(x, &y)| f32::from_bits(x.load(Relaxed)) * y)
            .sum()
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data.into_iter().map(|x| f32::from_bits(x.into_inner())).collect()
    }
}
