use super::params::Parameters;
use crate::error::{Error, Result};

/// RMSProp state: running mean of squared gradients per parameter.
///
/// ```text
/// ms ← ρ·ms + (1 − ρ)·g²
/// θ  ← θ − η·g / √(ms + ε)
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct RmsProp<P> {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    mean_square: P,
}

impl<P: Parameters> RmsProp<P> {
    pub fn new(params: &P, learning_rate: f64, decay: f64, epsilon: f64) -> Result<Self> {
        if !(decay > 0.0 && decay < 1.0) {
            return Err(Error::Config(format!("RMSProp decay must be in (0, 1), got {decay}")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::Config(format!("RMSProp epsilon must be positive, got {epsilon}")));
        }
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {learning_rate}")));
        }
        Ok(RmsProp {
            learning_rate,
            decay,
            epsilon,
            mean_square: params.zeros_like(),
        })
    }

    /// Defaults: η = 1e-3, ρ = 0.9, ε = 1e-8.
    pub fn with_defaults(params: &P) -> Self {
        Self::new(params, 1e-3, 0.9, 1e-8).expect("defaults are valid")
    }

    pub fn mean_square(&self) -> &P {
        &self.mean_square
    }

    /// Applies one update. Nothing is modified if any gradient entry is
    /// non-finite.
    pub fn update(&mut self, params: &mut P, grads: &P) -> Result<()> {
        for (name, g) in grads.blocks() {
            if let Some(pos) = g.iter().position(|x| !x.is_finite()) {
                return Err(Error::Numeric(format!("non-finite gradient in {name} at index {pos}")));
            }
        }
        let (rho, eta, eps) = (self.decay, self.learning_rate, self.epsilon);
        for (((_, theta), (_, g)), (_, ms)) in params
            .blocks_mut()
            .into_iter()
            .zip(grads.blocks())
            .zip(self.mean_square.blocks_mut())
        {
            for ((t, &g), m) in theta.iter_mut().zip(g).zip(ms.iter_mut()) {
                *m = rho * *m + (1.0 - rho) * g * g;
                *t -= eta * g / (*m + eps).sqrt();
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::params::ParamVec;

    #[test]
    fn closed_form_single_step() {
        let mut theta = ParamVec(vec![0.0]);
        let mut opt = RmsProp::new(&theta, 0.1, 0.9, 1e-8).unwrap();
        opt.update(&mut theta, &ParamVec(vec![1.0])).unwrap();
        assert!((opt.mean_square().0[0] - 0.1).abs() < 1e-15);
        let expected = -0.1 / (0.1f64 + 1e-8).sqrt();
        assert!((theta.0[0] - expected).abs() < 1e-12);
        assert!((theta.0[0] + 0.31623).abs() < 1e-5);
    }

    #[test]
    fn zero_gradient_decays_state_only() {
        let mut theta = ParamVec(vec![1.5, -2.0]);
        let mut opt = RmsProp::new(&theta, 0.1, 0.9, 1e-8).unwrap();
        opt.update(&mut theta, &ParamVec(vec![2.0, -1.0])).unwrap();
        let after_first = theta.clone();
        let ms = opt.mean_square().0.clone();
        opt.update(&mut theta, &ParamVec(vec![0.0, 0.0])).unwrap();
        opt.update(&mut theta, &ParamVec(vec![0.0, 0.0])).unwrap();
        assert_eq!(theta, after_first);
        for (a, b) in opt.mean_square().0.iter().zip(&ms) {
            assert!((a - b * 0.81).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut theta = ParamVec(vec![1.0, 1.0]);
        let mut opt = RmsProp::with_defaults(&theta);
        let err = opt.update(&mut theta, &ParamVec(vec![0.5, f64::INFINITY])).unwrap_err();
        assert!(err.to_string().contains("values"));
        assert_eq!(theta.0, vec![1.0, 1.0]);
    }

    #[test]
    fn invalid_hyperparameters() {
        let p = ParamVec(vec![0.0]);
        assert!(RmsProp::new(&p, 0.1, 1.0, 1e-8).is_err());
        assert!(RmsProp::new(&p, 0.1, 0.9, 0.0).is_err());
        assert!(RmsProp::new(&p, -0.1, 0.9, 1e-8).is_err());
    }
}
