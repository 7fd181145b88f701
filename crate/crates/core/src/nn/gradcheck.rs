//! Central finite-difference verification of analytic gradients.

use super::params::Parameters;

/// Default step for central differences.
pub const DEFAULT_STEP: f64 = 1e-5;

/// `|a − n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockError {
    pub name: &'static str,
    pub max_relative_error: f64,
    /// Element with the largest error.
    pub worst_index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub blocks: Vec<BlockError>,
}

impl GradCheckReport {
    pub fn max_relative_error(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.max_relative_error)
            .fold(0.0, f64::max)
    }
}

/// Compares `analytic` with `(loss(θ + h·e_i) − loss(θ − h·e_i)) / 2h` for
/// every parameter. `loss` must be deterministic; `params` is restored
/// exactly afterwards.
pub fn grad_check<P, F>(params: &mut P, analytic: &P, mut loss: F, step: f64) -> GradCheckReport
where
    P: Parameters,
    F: FnMut(&P) -> f64,
{
    let names: Vec<&'static str> = params.blocks().iter().map(|(n, _)| *n).collect();
    let mut blocks = Vec::with_capacity(names.len());
    for (b, name) in names.into_iter().enumerate() {
        let len = params.blocks()[b].1.len();
        let mut worst = BlockError {
            name,
            max_relative_error: 0.0,
            worst_index: 0,
        };
        for i in 0..len {
            let original = params.blocks()[b].1[i];
            params.blocks_mut()[b].1[i] = original + step;
            let plus = loss(params);
            params.blocks_mut()[b].1[i] = original - step;
            let minus = loss(params);
            params.blocks_mut()[b].1[i] = original;
            let numeric = (plus - minus) / (2.0 * step);
            let err = relative_error(analytic.blocks()[b].1[i], numeric);
            if err > worst.max_relative_error {
                worst.max_relative_error = err;
                worst.worst_index = i;
            }
        }
        blocks.push(worst);
    }
    GradCheckReport { blocks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::params::ParamVec;

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(1.0, 1.1) - 0.1 / 1.1).abs() < 1e-15);
        assert_eq!(relative_error(1e-10, 0.0), 1e-10 / 1e-8);
    }

    #[test]
    fn linear_map_is_exact() {
        let coeffs = [0.5, -1.25, 3.0, 0.125];
        let loss = |p: &ParamVec| p.0.iter().zip(&coeffs).map(|(a, c)| a * c).sum::<f64>();
        let mut params = ParamVec(vec![0.3, -0.2, 1.7, 0.05]);
        let analytic = ParamVec(coeffs.to_vec());
        let before = params.clone();
        let report = grad_check(&mut params, &analytic, loss, DEFAULT_STEP);
        assert!(report.max_relative_error() < 1e-7, "{report:?}");
        assert_eq!(params, before);
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let loss = |p: &ParamVec| p.0.iter().map(|x| x * x * x).sum::<f64>();
        let mut params = ParamVec(vec![0.7, -1.3]);
        let mut analytic = ParamVec(params.0.iter().map(|x| 3.0 * x * x).collect());
        assert!(grad_check(&mut params, &analytic, loss, DEFAULT_STEP).max_relative_error() < 1e-7);
        analytic.0[1] *= 1.1;
        let report = grad_check(&mut params, &analytic, loss, DEFAULT_STEP);
        assert!(report.max_relative_error() > 1e-2);
        assert_eq!(report.blocks[0].worst_index, 1);
    }
}
