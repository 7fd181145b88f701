use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ClassWeightMode, ModelConfig};
use super::lexicon::{windowize, Lexicon, PAD_ID, RESERVED_ROWS};
use super::network::{batch_gradient, RcnnLayers, RcnnParams};
use super::{SbdModel, DEFAULT_THRESHOLD};
use crate::corpus::{Dataset, Label, Transcript};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::eval::compute_metrics;
use crate::nn::{Parameters, RmsProp, Tensor2, CLASS_B, CLASS_NB};

/// One line of training history.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Class-weighted cross-entropy over the epoch's training windows.
    pub loss: f64,
    /// Boundary F1 on the held-out transcripts, when there are any.
    pub validation_f1: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub model: SbdModel,
    pub history: Vec<EpochStats>,
}

/// `N / (2 · N_class)` per class, indexed B then NB. An absent class gets
/// weight 1.
pub fn inverse_frequency_weights(boundaries: usize, others: usize) -> [f64; 2] {
    let n = (boundaries + others) as f64;
    let w = |c: usize| if c == 0 { 1.0 } else { n / (2.0 * c as f64) };
    [w(boundaries), w(others)]
}

fn class_weights(mode: ClassWeightMode, transcripts: &[&Transcript]) -> [f64; 2] {
    match mode {
        ClassWeightMode::Manual { boundary, no_boundary } => {
            let mut w = [0.0; 2];
            w[CLASS_B] = boundary;
            w[CLASS_NB] = no_boundary;
            w
        }
        ClassWeightMode::InverseFrequency => {
            let b = transcripts
                .iter()
                .flat_map(|t| t.labels())
                .filter(|l| l.is_boundary())
                .count();
            let total: usize = transcripts.iter().map(|t| t.len()).sum();
            inverse_frequency_weights(b, total - b)
        }
    }
}

/// Embedding rows in lexicon order: padding (zero), unknown (zero), the
/// table's words, then, when the table carries n-gram buckets, composed
/// rows for training words the table lacks.
fn initial_embedding(table: &EmbeddingTable, train: &[&Transcript]) -> Result<(Lexicon, Tensor2)> {
    let mut lexicon = Lexicon::from_words(table.vocab().words().map(str::to_owned).collect())?;
    let d = table.dim();
    let mut data = vec![0.0; RESERVED_ROWS * d];
    data.extend(table.vectors().iter().map(|&x| f64::from(x)));
    if let Some(sub) = table.subword() {
        for t in train {
            for tok in t.tokens() {
                if lexicon.row(tok.as_str()).is_none() {
                    lexicon.push(tok.as_str().to_owned());
                    data.extend(sub.compose(tok.as_str(), None).iter().map(|&x| f64::from(x)));
                }
            }
        }
    }
    let rows = lexicon.rows();
    Ok((lexicon, Tensor2::from_vec(rows, d, data)?))
}

fn split_validation(n: usize, fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let n_val = if n >= 2 && fraction > 0.0 {
        ((n as f64 * fraction).round() as usize).clamp(1, n - 1)
    } else {
        0
    };
    let mut val = order[..n_val].to_vec();
    let mut train = order[n_val..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    (train, val)
}

fn validation_f1(model: &SbdModel, transcripts: &[&Transcript]) -> Result<Option<f64>> {
    if transcripts.is_empty() {
        return Ok(None);
    }
    let mut pred: Vec<Label> = Vec::new();
    let mut gold: Vec<Label> = Vec::new();
    for t in transcripts {
        pred.extend(model.predict(t.tokens())?.labels(DEFAULT_THRESHOLD));
        gold.extend_from_slice(t.labels());
    }
    Ok(Some(compute_metrics(&pred, &gold)?.f1))
}

/// Sparse RMSProp step on the embedding rows that received gradient.
fn update_rows(
    params: &mut Tensor2,
    mean_square: &mut Tensor2,
    rows: &std::collections::BTreeMap<usize, Vec<f64>>,
    cfg: &ModelConfig,
    frozen_from: usize,
) {
    let (rho, eta, eps) = (cfg.rms_decay, cfg.learning_rate, cfg.rms_epsilon);
    for (&r, g) in rows {
        if r == PAD_ID || (r >= frozen_from) {
            continue;
        }
        for ((t, m), &g) in params.row_mut(r).iter_mut().zip(mean_square.row_mut(r)).zip(g) {
            *m = rho * *m + (1.0 - rho) * g * g;
            *t -= eta * g / (*m + eps).sqrt();
        }
    }
}

pub fn train(dataset: &Dataset, embeddings: &EmbeddingTable, cfg: &ModelConfig) -> Result<TrainedModel> {
    train_with_progress(dataset, embeddings, cfg, |_| {})
}

/// Minibatch RMSProp over shuffled training windows; `on_epoch` sees each
/// history entry as soon as it is known.
pub fn train_with_progress<F>(
    dataset: &Dataset,
    embeddings: &EmbeddingTable,
    cfg: &ModelConfig,
    mut on_epoch: F,
) -> Result<TrainedModel>
where
    F: FnMut(&EpochStats),
{
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::Data(format!("dataset {:?} has no transcripts", dataset.name())));
    }
    if embeddings.dim() != cfg.dim {
        return Err(Error::Config(format!(
            "embedding dimension {} does not match model dimension {}",
            embeddings.dim(),
            cfg.dim
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let all = dataset.transcripts();
    let (train_idx, val_idx) = split_validation(all.len(), cfg.validation_fraction, &mut rng);
    let train_set: Vec<&Transcript> = train_idx.iter().map(|&i| &all[i]).collect();
    let val_set: Vec<&Transcript> = val_idx.iter().map(|&i| &all[i]).collect();

    let (lexicon, embedding) = initial_embedding(embeddings, &train_set)?;
    let layers = RcnnLayers::init(cfg, &mut rng)?;
    let mut model = SbdModel {
        config: cfg.clone(),
        method: embeddings.method(),
        lexicon,
        params: RcnnParams { embedding, layers },
        subword: embeddings.subword().map(|s| {
            let (lo, hi) = s.ngram_range();
            crate::embeddings::SubwordTable::new(s.dim(), lo, hi, s.hash_seed(), Vec::new(), s.buckets().to_vec())
                .expect("valid subword table")
        }),
    };
    // Rows from here on are pretrained and move only when fine-tuning.
    let frozen_from = if cfg.fine_tune { usize::MAX } else { RESERVED_ROWS };

    let weights = class_weights(cfg.class_weights, &train_set);
    let mut windows = Vec::new();
    for t in &train_set {
        windows.extend(windowize(t, &model.lexicon, cfg.window, cfg.train_stride())?);
    }
    let mut optimizer = RmsProp::new(&model.params.layers, cfg.learning_rate, cfg.rms_decay, cfg.rms_epsilon)?;
    let mut emb_ms = Tensor2::zeros(model.params.embedding.rows(), model.params.embedding.cols());

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..windows.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut sum, mut weight) = (0.0, 0.0);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<_> = chunk.iter().map(|&i| windows[i].clone()).collect();
            let grad = batch_gradient(&model.params, &batch, weights, cfg.dropout, &mut rng)
                .map_err(|e| match e {
                    Error::Numeric(_) => Error::Divergence { epoch, loss: f64::NAN },
                    other => other,
                })?;
            if !grad.loss.is_finite() {
                return Err(Error::Divergence { epoch, loss: grad.loss });
            }
            sum += grad.loss_sum;
            weight += grad.weight;
            let layer_grads = &grad.layers;
            if layer_grads.blocks().iter().any(|(_, b)| b.iter().any(|x| !x.is_finite())) {
                return Err(Error::Divergence { epoch, loss: grad.loss });
            }
            optimizer.update(&mut model.params.layers, layer_grads)?;
            update_rows(&mut model.params.embedding, &mut emb_ms, &grad.rows, cfg, frozen_from);
        }
        let loss = if weight > 0.0 { sum / weight } else { 0.0 };
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch, loss });
        }
        let stats = EpochStats { epoch, loss, validation_f1: validation_f1(&model, &val_set)? };
        on_epoch(&stats);
        history.push(stats);
    }
    Ok(TrainedModel { model, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_frequency_example() {
        let [b, nb] = inverse_frequency_weights(10, 90);
        assert!((b - 5.0).abs() < 1e-12);
        assert!((nb - 100.0 / 180.0).abs() < 1e-12);
        assert!((nb - 0.5556).abs() < 1e-4);
        assert_eq!(inverse_frequency_weights(3, 0), [0.5, 1.0]);
    }

    #[test]
    fn validation_split_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (t, v) = split_validation(20, 0.1, &mut rng);
        assert_eq!((t.len(), v.len()), (18, 2));
        let (t, v) = split_validation(1, 0.1, &mut rng);
        assert_eq!((t.len(), v.len()), (1, 0));
        let (t, v) = split_validation(3, 0.1, &mut rng);
        assert_eq!((t.len(), v.len()), (2, 1));
        let (t, v) = split_validation(5, 0.0, &mut rng);
        assert_eq!((t.len(), v.len()), (5, 0));
    }
}
