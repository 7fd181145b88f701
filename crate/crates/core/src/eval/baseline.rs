use std::collections::HashMap;

use crate::corpus::{Dataset, FoldSplit, Label, Token, Transcript};
use crate::error::Result;
use crate::model::{inverse_frequency_weights, ClassWeightMode, DEFAULT_THRESHOLD};

use super::metrics::{compute_metrics, MetricsReport};

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Logistic regression on a one-hot encoding of the current token, with a
/// bias and an L2 penalty on the token weights.
#[derive(Clone, Debug, PartialEq)]
pub struct UnigramLogistic {
    pub bias: f64,
    pub weights: HashMap<String, f64>,
}

impl UnigramLogistic {
    /// Fits by coordinate-wise Newton steps on the class-weighted log loss.
    pub fn fit(transcripts: &[&Transcript], mode: ClassWeightMode, l2: f64) -> Self {
        let class_w = match mode {
            ClassWeightMode::Manual { boundary, no_boundary } => [boundary, no_boundary],
            ClassWeightMode::InverseFrequency => {
                let b = transcripts.iter().flat_map(|t| t.labels()).filter(|l| l.is_boundary()).count();
                let n: usize = transcripts.iter().map(|t| t.len()).sum();
                inverse_frequency_weights(b, n - b)
            }
        };
        // Weighted (boundary, other) mass per token type.
        let mut stats: HashMap<&str, (f64, f64)> = HashMap::new();
        for t in transcripts {
            for (tok, l) in t.tokens().iter().zip(t.labels()) {
                let e = stats.entry(tok.as_str()).or_default();
                if l.is_boundary() {
                    e.0 += class_w[0];
                } else {
                    e.1 += class_w[1];
                }
            }
        }
        let mut keys: Vec<&str> = stats.keys().copied().collect();
        keys.sort_unstable();
        let mut theta = vec![0.0; keys.len()];
        let mut bias = 0.0;
        let step = |g: f64, h: f64| (g / h).clamp(-5.0, 5.0);
        for _ in 0..100 {
            let (mut g, mut h) = (0.0, 1e-12);
            for (k, th) in keys.iter().zip(&theta) {
                let (a, c) = stats[k];
                let p = sigmoid(bias + th);
                g += (a + c) * p - a;
                h += (a + c) * p * (1.0 - p);
            }
            bias -= step(g, h);
            for (k, th) in keys.iter().zip(theta.iter_mut()) {
                let (a, c) = stats[k];
                let p = sigmoid(bias + *th);
                let g = (a + c) * p - a + l2 * *th;
                let h = (a + c) * p * (1.0 - p) + l2;
                *th -= step(g, h);
            }
        }
        UnigramLogistic {
            bias,
            weights: keys.into_iter().map(str::to_owned).zip(theta).collect(),
        }
    }

    pub fn probability(&self, token: &str) -> f64 {
        sigmoid(self.bias + self.weights.get(token).copied().unwrap_or(0.0))
    }

    pub fn predict(&self, tokens: &[Token], threshold: f64) -> Vec<Label> {
        tokens
            .iter()
            .map(|t| if self.probability(t.as_str()) >= threshold { Label::Boundary } else { Label::NoBoundary })
            .collect()
    }
}

/// Fold-by-fold boundary metrics of [`UnigramLogistic`] on the same splits
/// as the neural runs.
pub fn unigram_baseline_cv(dataset: &Dataset, folds: &FoldSplit, mode: ClassWeightMode) -> Result<Vec<MetricsReport>> {
    let all = dataset.transcripts();
    (0..folds.k())
        .map(|fold| {
            let (train_idx, test_idx) = folds.split(dataset, fold);
            let train: Vec<&Transcript> = train_idx.iter().map(|&i| &all[i]).collect();
            let model = UnigramLogistic::fit(&train, mode, 1e-2);
            let mut pred = Vec::new();
            let mut gold = Vec::new();
            for &i in &test_idx {
                pred.extend(model.predict(all[i].tokens(), DEFAULT_THRESHOLD));
                gold.extend_from_slice(all[i].labels());
            }
            compute_metrics(&pred, &gold)
        })
        .collect()
}
