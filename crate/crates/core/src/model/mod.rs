//! Recurrent-convolutional boundary labeler: embedding lookup, convolution,
//! temporal max-pooling, bidirectional LSTM, dropout and a two-way softmax
//! per token.

mod config;
mod lexicon;
mod network;
mod train;

use std::path::Path;

use rand::rngs::mock::StepRng;

pub use self::config::{ClassWeightMode, ModelConfig};
pub use self::lexicon::{window_starts, windowize, Lexicon, WindowInstance, PAD_ID, RESERVED_ROWS, UNK_ID};
pub use self::network::{batch_gradient, batch_loss, BatchGradient, RcnnLayers, RcnnParams};
pub use self::train::{inverse_frequency_weights, train, train_with_progress, EpochStats, TrainedModel};

use self::network::{forward, gather, BWD_NAMES, FWD_NAMES};
use crate::corpus::{Label, Token};
use crate::embeddings::{MethodTag, SubwordTable};
use crate::error::{Error, Result};
use crate::nn::{Checkpoint, ConvLayer, LstmCell, Tensor2, CLASS_B};

/// Default decision threshold on P(B).
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Per-token probability that the token precedes a sentence boundary.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundaryPrediction {
    pub probs: Vec<f64>,
}

impl BoundaryPrediction {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `B` wherever `P(B) >= threshold`.
    pub fn labels(&self, threshold: f64) -> Vec<Label> {
        self.probs
            .iter()
            .map(|&p| if p >= threshold { Label::Boundary } else { Label::NoBoundary })
            .collect()
    }
}

/// A trained labeler.
#[derive(Clone, Debug, PartialEq)]
pub struct SbdModel {
    pub config: ModelConfig,
    pub method: MethodTag,
    pub lexicon: Lexicon,
    pub params: RcnnParams,
    /// N-gram buckets for composing unseen words (subword family only).
    pub subword: Option<SubwordTable>,
}

/// Averages overlapping window outputs: `windows` holds `(start, P(B) of
/// each real position)`.
pub fn merge_window_probabilities(len: usize, windows: &[(usize, Vec<f64>)]) -> Vec<f64> {
    let mut sum = vec![0.0; len];
    let mut count = vec![0usize; len];
    for (start, probs) in windows {
        for (k, p) in probs.iter().enumerate() {
            sum[start + k] += p;
            count[start + k] += 1;
        }
    }
    sum.iter().zip(&count).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect()
}

/// Splits `tokens` after every token with `P(B) >= threshold`; the last
/// token always closes the last sentence.
pub fn segment(tokens: &[Token], prediction: &BoundaryPrediction, threshold: f64) -> Result<Vec<Vec<Token>>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Argument(format!("threshold must be in (0, 1), got {threshold}")));
    }
    if tokens.len() != prediction.len() {
        return Err(Error::Argument(format!(
            "{} tokens but {} probabilities",
            tokens.len(),
            prediction.len()
        )));
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    for (tok, &p) in tokens.iter().zip(&prediction.probs) {
        current.push(tok.clone());
        if p >= threshold {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    Ok(out)
}

fn as_f64(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| f64::from(x)).collect()
}

fn row_tensor(v: &[f64]) -> Tensor2 {
    Tensor2::from_vec(1, v.len(), v.to_vec()).expect("parameters are finite")
}

impl SbdModel {
    /// Embedding rows of `tokens`, plus composed vectors for unseen words
    /// when n-gram buckets are available.
    fn encode(&self, tokens: &[Token]) -> (Vec<usize>, Vec<(usize, Vec<f64>)>) {
        let mut ids = Vec::with_capacity(tokens.len());
        let mut overrides = Vec::new();
        for (t, tok) in tokens.iter().enumerate() {
            match self.lexicon.row(tok.as_str()) {
                Some(r) => ids.push(r),
                None => {
                    ids.push(UNK_ID);
                    if let Some(sub) = &self.subword {
                        overrides.push((t, as_f64(&sub.compose(tok.as_str(), None))));
                    }
                }
            }
        }
        (ids, overrides)
    }

    /// P(B) for every token, from windows with stride ⌈window/2⌉ whose
    /// outputs are averaged where they overlap. Dropout is off.
    pub fn predict(&self, tokens: &[Token]) -> Result<BoundaryPrediction> {
        let n = tokens.len();
        let phi = self.config.window;
        let (ids, overrides) = self.encode(tokens);
        let mut rng = StepRng::new(0, 0);
        let mut outputs = Vec::new();
        for start in window_starts(n, phi, self.config.predict_stride())? {
            let end = (start + phi).min(n);
            let mut win_ids = ids[start..end].to_vec();
            win_ids.resize(phi, PAD_ID);
            let local: Vec<(usize, Vec<f64>)> = overrides
                .iter()
                .filter(|(t, _)| (start..end).contains(t))
                .map(|(t, v)| (t - start, v.clone()))
                .collect();
            let input = gather(&self.params.embedding, &win_ids, &local);
            let pass = forward(&self.params.layers, input, 0.0, false, &mut rng)?;
            outputs.push((start, pass.probs[..end - start].iter().map(|p| p[CLASS_B]).collect()));
        }
        Ok(BoundaryPrediction { probs: merge_window_probabilities(n, &outputs) })
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut meta = vec![
            ("kind".to_owned(), "sbd-model".to_owned()),
            ("method".to_owned(), self.method.to_string()),
        ];
        meta.extend(self.config.to_pairs().into_iter().map(|(k, v)| (format!("config.{k}"), v)));
        let p = &self.params;
        let l = &p.layers;
        let mut blocks = vec![
            ("embedding".to_owned(), p.embedding.clone()),
            ("conv.filters".to_owned(), l.conv.filters.clone()),
            ("conv.bias".to_owned(), row_tensor(&l.conv.bias)),
        ];
        for (cell, names) in [(&l.lstm_fwd, &FWD_NAMES), (&l.lstm_bwd, &BWD_NAMES)] {
            for (name, w) in names[..4].iter().zip([&cell.w_i, &cell.w_f, &cell.w_o, &cell.w_g]) {
                blocks.push((name.to_string(), w.clone()));
            }
            for (name, b) in names[4..].iter().zip([&cell.b_i, &cell.b_f, &cell.b_o, &cell.b_g]) {
                blocks.push((name.to_string(), row_tensor(b)));
            }
        }
        blocks.push(("out.w".to_owned(), l.out_w.clone()));
        blocks.push(("out.b".to_owned(), row_tensor(&l.out_b)));
        if let Some(sub) = &self.subword {
            let (lo, hi) = sub.ngram_range();
            meta.push(("subword.ngram_min".into(), lo.to_string()));
            meta.push(("subword.ngram_max".into(), hi.to_string()));
            meta.push(("subword.hash_seed".into(), sub.hash_seed().to_string()));
            let t = Tensor2::from_vec(sub.bucket_count(), sub.dim(), as_f64(sub.buckets())).expect("finite buckets");
            blocks.push(("subword.buckets".to_owned(), t));
        }
        Checkpoint { meta, blocks, vocab: self.lexicon.words().to_vec() }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let bad = |m: String| Error::format("checkpoint", 0, m);
        if ck.meta("kind") != Some("sbd-model") {
            return Err(bad("not a boundary model checkpoint".into()));
        }
        let method: MethodTag = ck
            .meta("method")
            .ok_or_else(|| bad("missing method".into()))?
            .parse()
            .map_err(|_| bad("invalid method".into()))?;
        let config = ModelConfig::from_pairs(
            ck.meta.iter().filter_map(|(k, v)| k.strip_prefix("config.").map(|k| (k, v.as_str()))),
        )?;
        let block = |name: &str| ck.block(name).cloned().ok_or_else(|| bad(format!("missing block {name}")));
        let vector = |name: &str| -> Result<Vec<f64>> {
            let t = block(name)?;
            if t.rows() != 1 {
                return Err(bad(format!("block {name} must have one row")));
            }
            Ok(t.into_vec())
        };
        let cell = |names: &[&str; 8]| -> Result<LstmCell> {
            LstmCell::from_parts(
                [block(names[0])?, block(names[1])?, block(names[2])?, block(names[3])?],
                [vector(names[4])?, vector(names[5])?, vector(names[6])?, vector(names[7])?],
            )
        };
        let conv = ConvLayer::new(block("conv.filters")?, vector("conv.bias")?, config.conv_width, config.dim)?;
        let layers = RcnnLayers {
            conv,
            lstm_fwd: cell(&FWD_NAMES)?,
            lstm_bwd: cell(&BWD_NAMES)?,
            out_w: block("out.w")?,
            out_b: vector("out.b")?,
            pool_width: config.pool_width,
        };
        let params = RcnnParams { embedding: block("embedding")?, layers };
        params.check_shapes()?;
        let lexicon = Lexicon::from_words(ck.vocab.clone())?;
        if params.embedding.rows() != lexicon.rows() {
            return Err(bad(format!(
                "embedding has {} rows for {} lexicon rows",
                params.embedding.rows(),
                lexicon.rows()
            )));
        }
        let subword = match ck.block("subword.buckets") {
            None => None,
            Some(t) => {
                let num = |k: &str| -> Result<u64> {
                    ck.meta(k).and_then(|v| v.parse().ok()).ok_or_else(|| bad(format!("missing or invalid {k}")))
                };
                let buckets: Vec<f32> = t.as_slice().iter().map(|&x| x as f32).collect();
                Some(SubwordTable::new(
                    t.cols(),
                    num("subword.ngram_min")? as usize,
                    num("subword.ngram_max")? as usize,
                    num("subword.hash_seed")?,
                    Vec::new(),
                    buckets,
                )?)
            }
        };
        Ok(SbdModel { config, method, lexicon, params, subword })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_checkpoint().write(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::read(path)?)
    }
}
