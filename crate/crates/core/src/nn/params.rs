/// A set of named parameter blocks. Gradient and optimizer-state containers
/// use the same type as the parameters they belong to.
pub trait Parameters {
    fn blocks(&self) -> Vec<(&'static str, &[f64])>;

    fn blocks_mut(&mut self) -> Vec<(&'static str, &mut [f64])>;

    /// Same shapes, all zeros.
    fn zeros_like(&self) -> Self
    where
        Self: Sized;

    fn fill_zero(&mut self) {
        for (_, b) in self.blocks_mut() {
            b.fill(0.0);
        }
    }

    fn len(&self) -> usize {
        self.blocks().iter().map(|(_, b)| b.len()).sum()
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `self += scale * other`, block by block.
    fn add_scaled(&mut self, other: &Self, scale: f64)
    where
        Self: Sized,
    {
        for ((_, dst), (_, src)) in self.blocks_mut().into_iter().zip(other.blocks()) {
            super::tensor::axpy(scale, src, dst);
        }
    }
}

/// A single flat parameter block.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVec(pub Vec<f64>);

impl Parameters for ParamVec {
    fn blocks(&self) -> Vec<(&'static str, &[f64])> {
        vec![("values", &self.0)]
    }

    fn blocks_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        vec![("values", &mut self.0)]
    }

    fn zeros_like(&self) -> Self {
        ParamVec(vec![0.0; self.0.len()])
    }
}
