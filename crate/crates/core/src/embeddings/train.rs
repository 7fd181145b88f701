//! Negative-sampling SGD for the plain, order-sensitive and subword
//! families.
//!
//! Every method trains an input matrix (the embeddings) and an output
//! matrix against a logistic loss: the observed (input, output) pair is
//! pushed towards probability 1, `negatives` words drawn from the noise
//! distribution towards 0.
//!
//! Input matrix rows are words, followed by n-gram buckets for the subword
//! family. Output layouts differ per method:
//!
//! * plain and subword: one row per word;
//! * concatenated-window CBOW: one row of width `2 * window * dim` per word;
//! * structured skip-gram: `2 * window` blocks of word rows, one block per
//!   relative offset `-window..=-1, 1..=window`.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Family, InductionConfig, Mode};
use super::shared::SharedMatrix;
use super::subword::{ngram_buckets, SubwordTable};
use super::table::EmbeddingTable;
use super::vocab::{build_vocab, unigram_noise, NoiseDistribution, Vocabulary};
use crate::error::{Error, Result};

/// Learning rate floor, as a fraction of the initial rate.
const MIN_LR_FRACTION: f32 = 1e-4;

/// Trains embeddings of any family. `corpus` is a list of documents;
/// context windows never cross document boundaries.
pub fn train<S>(corpus: &[Vec<S>], cfg: &InductionConfig) -> Result<EmbeddingTable>
where
    S: AsRef<str> + Sync,
{
    cfg.validate()?;
    let vocab = build_vocab(corpus.iter().flatten(), cfg.min_count)?;
    let docs: Vec<Vec<u32>> = corpus
        .iter()
        .map(|doc| {
            doc.iter()
                .filter_map(|w| vocab.id(w.as_ref()).map(|i| i as u32))
                .collect()
        })
        .collect();
    let total: u64 = docs.iter().map(|d| d.len() as u64).sum();
    if total < 2 {
        return Err(Error::Data(format!(
            "corpus has {total} in-vocabulary tokens; at least 2 are needed"
        )));
    }
    let model = Model::init(&vocab, cfg);
    run_epochs(&model, &vocab, &docs, total, cfg)?;
    Ok(model.finish(vocab, cfg))
}

/// Plain CBOW / skip-gram.
pub fn train_plain<S: AsRef<str> + Sync>(corpus: &[Vec<S>], cfg: &InductionConfig) -> Result<EmbeddingTable> {
    expect_family(cfg, Family::Plain)?;
    train(corpus, cfg)
}

/// Concatenated-window CBOW / structured skip-gram.
pub fn train_order<S: AsRef<str> + Sync>(corpus: &[Vec<S>], cfg: &InductionConfig) -> Result<EmbeddingTable> {
    expect_family(cfg, Family::Order)?;
    train(corpus, cfg)
}

/// Subword CBOW / skip-gram. The returned table carries its
/// [`SubwordTable`], reachable through [`EmbeddingTable::subword`].
pub fn train_subword<S: AsRef<str> + Sync>(corpus: &[Vec<S>], cfg: &InductionConfig) -> Result<EmbeddingTable> {
    expect_family(cfg, Family::Subword)?;
    train(corpus, cfg)
}

fn expect_family(cfg: &InductionConfig, family: Family) -> Result<()> {
    if cfg.family != family {
        return Err(Error::Config(format!(
            "expected a {family} configuration, got {}",
            cfg.family
        )));
    }
    Ok(())
}

/// Keep probability min(1, sqrt(t/f) + t/f) per word; `t = 0` keeps all.
fn keep_probabilities(vocab: &Vocabulary, threshold: f64) -> Vec<f64> {
    let total = vocab.total_count() as f64;
    (0..vocab.len())
        .map(|i| {
            if threshold <= 0.0 {
                return 1.0;
            }
            let ratio = threshold / (vocab.count(i) as f64 / total);
            (ratio.sqrt() + ratio).min(1.0)
        })
        .collect()
}

fn run_epochs(model: &Model, vocab: &Vocabulary, docs: &[Vec<u32>], total: u64, cfg: &InductionConfig) -> Result<()> {
    let noise = unigram_noise(vocab, cfg.noise_power)?;
    let keep = keep_probabilities(vocab, cfg.subsample);
    let progress = AtomicU64::new(0);
    let schedule = Schedule {
        initial: cfg.learning_rate,
        expected: (cfg.epochs as u64 * total).max(1),
    };
    if cfg.workers == 1 {
        let mut worker = Worker::new(model, cfg, &noise, &keep, cfg.seed.wrapping_add(1));
        for _ in 0..cfg.epochs {
            for doc in docs {
                worker.process_document(doc, &progress, &schedule);
            }
        }
        return Ok(());
    }
    let chunk = docs.len().div_ceil(cfg.workers).max(1);
    std::thread::scope(|scope| {
        for (k, part) in docs.chunks(chunk).enumerate() {
            let (noise, keep, progress, schedule) = (&noise, &keep, &progress, &schedule);
            scope.spawn(move || {
                let seed = cfg.seed.wrapping_add(1 + k as u64);
                let mut worker = Worker::new(model, cfg, noise, keep, seed);
                for _ in 0..cfg.epochs {
                    for doc in part {
                        worker.process_document(doc, progress, schedule);
                    }
                }
            });
        }
    });
    Ok(())
}

struct Schedule {
    initial: f32,
    expected: u64,
}

impl Schedule {
    fn rate(&self, processed: u64) -> f32 {
        let frac = 1.0 - processed as f64 / self.expected as f64;
        self.initial * (frac as f32).max(MIN_LR_FRACTION)
    }
}

/// Shared training state.
pub(crate) struct Model {
    family: Family,
    mode: Mode,
    dim: usize,
    window: usize,
    vocab_len: usize,
    input: SharedMatrix,
    output: SharedMatrix,
    /// Bucket rows (already offset past the word rows) per word id.
    subwords: Vec<Vec<u32>>,
}

impl Model {
    pub(crate) fn init(vocab: &Vocabulary, cfg: &InductionConfig) -> Self {
        let m = vocab.len();
        let d = cfg.dim;
        let buckets = if cfg.family == Family::Subword { cfg.buckets } else { 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let bound = 0.5 / d as f32;
        let input: Vec<f32> = (0..(m + buckets) * d)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        let span = 2 * cfg.window;
        let output = match (cfg.family, cfg.mode) {
            (Family::Order, Mode::Cbow) => SharedMatrix::zeros(m, span * d),
            (Family::Order, Mode::Skipgram) => SharedMatrix::zeros(span * m, d),
            _ => SharedMatrix::zeros(m, d),
        };
        let subwords = if cfg.family == Family::Subword {
            vocab
                .words()
                .map(|w| {
                    ngram_buckets(w, cfg.ngram_min, cfg.ngram_max, cfg.hash_seed, cfg.buckets)
                        .into_iter()
                        .map(|b| (m + b) as u32)
                        .collect()
                })
                .collect()
        } else {
            Vec::new()
        };
        Model {
            family: cfg.family,
            mode: cfg.mode,
            dim: d,
            window: cfg.window,
            vocab_len: m,
            input: SharedMatrix::from_vec(d, input),
            output,
            subwords,
        }
    }

    fn finish(self, vocab: Vocabulary, cfg: &InductionConfig) -> EmbeddingTable {
        let d = self.dim;
        let m = self.vocab_len;
        let method = cfg.method();
        let mut all = self.input.into_vec();
        if self.family != Family::Subword {
            all.truncate(m * d);
            return EmbeddingTable::new(method, vocab, d, all).expect("trained table is consistent");
        }
        let buckets = all.split_off(m * d);
        let sub = SubwordTable::new(d, cfg.ngram_min, cfg.ngram_max, cfg.hash_seed, all, buckets)
            .expect("trained subword table is consistent");
        let mut vectors = Vec::with_capacity(m * d);
        for (id, w) in vocab.words().enumerate() {
            vectors.extend(sub.compose(w, Some(id)));
        }
        EmbeddingTable::new(method, vocab, d, vectors)
            .expect("trained table is consistent")
            .with_subword(sub)
            .expect("subword table matches")
    }

    /// Input rows whose sum is the representation of `word`.
    fn contributors(&self, word: u32) -> impl Iterator<Item = usize> + '_ {
        let extra: &[u32] = if self.family == Family::Subword {
            &self.subwords[word as usize]
        } else {
            &[]
        };
        std::iter::once(word as usize).chain(extra.iter().map(|&r| r as usize))
    }

    fn contributor_count(&self, word: u32) -> usize {
        if self.family == Family::Subword {
            1 + self.subwords[word as usize].len()
        } else {
            1
        }
    }

    /// Sums the input rows of `word` into `out`, scaled by `scale`.
    fn compose_into(&self, word: u32, out: &mut [f32], scale: f32, tmp: &mut [f32]) {
        tmp.fill(0.0);
        for r in self.contributors(word) {
            self.input.add_row_into(r, tmp);
        }
        for (o, t) in out.iter_mut().zip(tmp.iter()) {
            *o += scale * *t;
        }
    }

    /// Spreads `delta` over the input rows of `word` so that the composed
    /// representation moves by `scale * delta`.
    fn apply_input(&self, word: u32, delta: &[f32], scale: f32) {
        let share = scale / self.contributor_count(word) as f32;
        for r in self.contributors(word) {
            self.input.add_to_row(r, delta, share);
        }
    }

    fn offset_slot(&self, offset: isize) -> usize {
        let w = self.window as isize;
        debug_assert!(offset != 0 && offset.abs() <= w);
        if offset < 0 {
            (offset + w) as usize
        } else {
            (offset + w - 1) as usize
        }
    }
}

fn softplus(x: f32) -> f32 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// One logistic update of output row `row` towards `label`.
///
/// Adds the lr-scaled input gradient to `grad`, updates the output row in
/// place and returns the loss before the update.
fn update_output(
    out: &SharedMatrix,
    row: usize,
    input: &[f32],
    label: bool,
    lr: f32,
    grad: &mut [f32],
    tmp: &mut [f32],
) -> f32 {
    let score = out.dot_row(row, input);
    let target = if label { 1.0 } else { 0.0 };
    let g = lr * (target - sigmoid(score));
    out.read_row(row, tmp);
    for (gr, o) in grad.iter_mut().zip(tmp.iter()) {
        *gr += g * o;
    }
    out.add_to_row(row, input, g);
    if label {
        softplus(-score)
    } else {
        softplus(score)
    }
}

/// Positive update for `samples[0]` and negative updates for the rest;
/// output rows are `base + word`.
pub(crate) fn negative_sampling_step(
    out: &SharedMatrix,
    base: usize,
    input: &[f32],
    samples: &[(usize, bool)],
    lr: f32,
    grad: &mut [f32],
    tmp: &mut [f32],
) -> f32 {
    samples
        .iter()
        .map(|&(word, label)| update_output(out, base + word, input, label, lr, grad, tmp))
        .sum()
}

struct Worker<'a> {
    model: &'a Model,
    negatives: usize,
    noise: &'a NoiseDistribution,
    keep: &'a [f64],
    rng: ChaCha8Rng,
    input: Vec<f32>,
    grad: Vec<f32>,
    tmp: Vec<f32>,
    compose_tmp: Vec<f32>,
    samples: Vec<(usize, bool)>,
    sentence: Vec<u32>,
}

impl<'a> Worker<'a> {
    fn new(model: &'a Model, cfg: &InductionConfig, noise: &'a NoiseDistribution, keep: &'a [f64], seed: u64) -> Self {
        let width = match (model.family, model.mode) {
            (Family::Order, Mode::Cbow) => 2 * model.window * model.dim,
            _ => model.dim,
        };
        Worker {
            model,
            negatives: cfg.negatives,
            noise,
            keep,
            rng: ChaCha8Rng::seed_from_u64(seed),
            input: vec![0.0; width],
            grad: vec![0.0; width],
            tmp: vec![0.0; width],
            compose_tmp: vec![0.0; model.dim],
            samples: Vec::with_capacity(cfg.negatives + 1),
            sentence: Vec::new(),
        }
    }

    fn process_document(&mut self, doc: &[u32], progress: &AtomicU64, schedule: &Schedule) {
        let base = progress.load(Ordering::Relaxed);
        let mut sentence = std::mem::take(&mut self.sentence);
        sentence.clear();
        for &w in doc {
            let p = self.keep[w as usize];
            if p >= 1.0 || self.rng.gen::<f64>() < p {
                sentence.push(w);
            }
        }
        let scale = doc.len() as f64 / sentence.len().max(1) as f64;
        for pos in 0..sentence.len() {
            let lr = schedule.rate(base + (pos as f64 * scale) as u64);
            match (self.model.family, self.model.mode) {
                (Family::Order, Mode::Cbow) => self.cwindow(&sentence, pos, lr),
                (Family::Order, Mode::Skipgram) => self.structured_skipgram(&sentence, pos, lr),
                (_, Mode::Cbow) => self.cbow(&sentence, pos, lr),
                (_, Mode::Skipgram) => self.skipgram(&sentence, pos, lr),
            }
        }
        progress.fetch_add(doc.len() as u64, Ordering::Relaxed);
        self.sentence = sentence;
    }

    fn draw_samples(&mut self, target: u32) {
        self.samples.clear();
        self.samples.push((target as usize, true));
        for _ in 0..self.negatives {
            let n = self.noise.sample(&mut self.rng);
            if n != target as usize {
                self.samples.push((n, false));
            }
        }
    }

    /// Shrunk window radius in 1..=window, as in the original tools.
    fn reduced_radius(&mut self) -> usize {
        self.model.window - self.rng.gen_range(0..self.model.window)
    }

    fn neighbors(len: usize, pos: usize, radius: usize) -> impl Iterator<Item = usize> {
        let lo = pos.saturating_sub(radius);
        let hi = (pos + radius).min(len - 1);
        (lo..=hi).filter(move |&j| j != pos)
    }

    fn skipgram(&mut self, sentence: &[u32], pos: usize, lr: f32) {
        let center = sentence[pos];
        let radius = self.reduced_radius();
        for j in Self::neighbors(sentence.len(), pos, radius) {
            self.input.fill(0.0);
            self.model.compose_into(center, &mut self.input, 1.0, &mut self.compose_tmp);
            self.grad.fill(0.0);
            self.draw_samples(sentence[j]);
            negative_sampling_step(&self.model.output, 0, &self.input, &self.samples, lr, &mut self.grad, &mut self.tmp);
            self.model.apply_input(center, &self.grad, 1.0);
        }
    }

    fn cbow(&mut self, sentence: &[u32], pos: usize, lr: f32) {
        let radius = self.reduced_radius();
        let context: Vec<u32> = Self::neighbors(sentence.len(), pos, radius)
            .map(|j| sentence[j])
            .collect();
        if context.is_empty() {
            return;
        }
        let share = 1.0 / context.len() as f32;
        self.input.fill(0.0);
        for &c in &context {
            self.model.compose_into(c, &mut self.input, share, &mut self.compose_tmp);
        }
        self.grad.fill(0.0);
        self.draw_samples(sentence[pos]);
        negative_sampling_step(&self.model.output, 0, &self.input, &self.samples, lr, &mut self.grad, &mut self.tmp);
        for &c in &context {
            self.model.apply_input(c, &self.grad, share);
        }
    }

    fn cwindow(&mut self, sentence: &[u32], pos: usize, lr: f32) {
        let d = self.model.dim;
        let w = self.model.window as isize;
        self.input.fill(0.0);
        let mut present: Vec<(usize, u32)> = Vec::with_capacity(2 * self.model.window);
        for offset in (-w..=w).filter(|&o| o != 0) {
            let j = pos as isize + offset;
            if j < 0 || j >= sentence.len() as isize {
                continue;
            }
            let slot = self.model.offset_slot(offset);
            let word = sentence[j as usize];
            self.model.input.read_row(word as usize, &mut self.input[slot * d..(slot + 1) * d]);
            present.push((slot, word));
        }
        if present.is_empty() {
            return;
        }
        self.grad.fill(0.0);
        self.draw_samples(sentence[pos]);
        negative_sampling_step(&self.model.output, 0, &self.input, &self.samples, lr, &mut self.grad, &mut self.tmp);
        for (slot, word) in present {
            self.model.input.add_to_row(word as usize, &self.grad[slot * d..(slot + 1) * d], 1.0);
        }
    }

    fn structured_skipgram(&mut self, sentence: &[u32], pos: usize, lr: f32) {
        let center = sentence[pos] as usize;
        let w = self.model.window as isize;
        let m = self.model.vocab_len;
        for offset in (-w..=w).filter(|&o| o != 0) {
            let j = pos as isize + offset;
            if j < 0 || j >= sentence.len() as isize {
                continue;
            }
            self.model.input.read_row(center, &mut self.input);
            self.grad.fill(0.0);
            self.draw_samples(sentence[j as usize]);
            let base = self.model.offset_slot(offset) * m;
            negative_sampling_step(&self.model.output, base, &self.input, &self.samples, lr, &mut self.grad, &mut self.tmp);
            self.model.input.add_to_row(center, &self.grad, 1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::config::MethodTag;

    fn corpus_of(text: &str) -> Vec<Vec<String>> {
        text.lines()
            .map(|l| l.split_whitespace().map(str::to_owned).collect())
            .collect()
    }

    fn small_cfg(family: Family, mode: Mode) -> InductionConfig {
        let mut cfg = InductionConfig::new(family, mode, 8);
        cfg.min_count = 1;
        cfg.subsample = 0.0;
        cfg.epochs = 2;
        cfg.buckets = 64;
        cfg
    }

    fn local_loss(out: &SharedMatrix, base: usize, input: &[f32], samples: &[(usize, bool)]) -> f64 {
        let mut row = vec![0f32; input.len()];
        samples
            .iter()
            .map(|&(w, label)| {
                out.read_row(base + w, &mut row);
                let s: f64 = row.iter().zip(input).map(|(&a, &b)| a as f64 * b as f64).sum();
                let z = if label { -s } else { s };
                (1.0 + z.exp()).ln()
            })
            .sum()
    }

    #[test]
    fn single_step_decreases_local_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let d = 6;
            let out = SharedMatrix::from_vec(d, (0..5 * d).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let mut input: Vec<f32> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let samples = [(0, true), (2, false), (4, false)];
            let before = local_loss(&out, 0, &input, &samples);
            let mut grad = vec![0.0; d];
            let mut tmp = vec![0.0; d];
            negative_sampling_step(&out, 0, &input, &samples, 1e-3, &mut grad, &mut tmp);
            for (x, g) in input.iter_mut().zip(&grad) {
                *x += g;
            }
            let after = local_loss(&out, 0, &input, &samples);
            assert!(after < before, "loss did not decrease: {before} -> {after}");
        }
    }

    #[test]
    fn structured_skipgram_updates_only_its_offset() {
        // Central-difference oracle on the loss of predicting `q` at offset +1
        // from center `p`, as a function of both offset matrices.
        let d = 4;
        let m = 2;
        let (p_row, q) = ([0.3f32, -0.2, 0.5, 0.1], 1usize);
        let window = 1;
        let slot_minus = 0;
        let slot_plus = 1;
        let init: Vec<f32> = vec![0.05, -0.1, 0.2, 0.0, 0.1, 0.3, -0.2, 0.4, -0.3, 0.1, 0.0, 0.2, 0.25, -0.15, 0.05, 0.1];
        assert_eq!(init.len(), 2 * window * m * d);
        let loss = |params: &[f64]| -> f64 {
            let row = &params[(slot_plus * m + q) * d..(slot_plus * m + q + 1) * d];
            let s: f64 = row.iter().zip(&p_row).map(|(a, &b)| a * b as f64).sum();
            (1.0 + (-s).exp()).ln()
        };
        let params: Vec<f64> = init.iter().map(|&x| x as f64).collect();
        let h = 1e-5;
        let mut numeric = vec![0.0; params.len()];
        for i in 0..params.len() {
            let mut plus = params.clone();
            plus[i] += h;
            let mut minus = params.clone();
            minus[i] -= h;
            numeric[i] = (loss(&plus) - loss(&minus)) / (2.0 * h);
        }

        let out = SharedMatrix::from_vec(d, init.clone());
        let lr = 1e-2;
        let mut grad = vec![0.0; d];
        let mut tmp = vec![0.0; d];
        negative_sampling_step(&out, slot_plus * m, &p_row, &[(q, true)], lr, &mut grad, &mut tmp);
        let after = out.into_vec();
        let analytic: Vec<f64> = after
            .iter()
            .zip(&init)
            .map(|(&a, &b)| -((a - b) as f64) / lr as f64)
            .collect();

        let minus_q = (slot_minus * m + q) * d..(slot_minus * m + q + 1) * d;
        let plus_q = (slot_plus * m + q) * d..(slot_plus * m + q + 1) * d;
        for i in minus_q {
            assert_eq!(numeric[i], 0.0);
            assert_eq!(analytic[i], 0.0);
        }
        let mut differs = false;
        for i in plus_q {
            assert!((numeric[i] - analytic[i]).abs() < 1e-4, "{} vs {}", numeric[i], analytic[i]);
            differs |= numeric[i].abs() > 1e-3;
        }
        assert!(differs);
    }

    #[test]
    fn output_layouts() {
        let corpus = corpus_of("a b c d e\nb c d e a");
        let vocab = build_vocab(corpus.iter().flatten(), 1).unwrap();
        let cfg = small_cfg(Family::Order, Mode::Cbow);
        let mut cfg2 = cfg.clone();
        cfg2.window = 2;
        let model = Model::init(&vocab, &cfg2);
        assert_eq!(model.output.rows(), 5);
        assert_eq!(model.output.into_vec().len(), 5 * 4 * 8);

        let mut cfg3 = small_cfg(Family::Order, Mode::Skipgram);
        cfg3.window = 2;
        let model = Model::init(&vocab, &cfg3);
        assert_eq!(model.output.rows(), 4 * 5);
        assert_eq!(model.offset_slot(-2), 0);
        assert_eq!(model.offset_slot(-1), 1);
        assert_eq!(model.offset_slot(1), 2);
        assert_eq!(model.offset_slot(2), 3);
    }

    #[test]
    fn requested_dimension_is_respected() {
        let corpus = corpus_of("x y z x y z w\nz y x w");
        for tag in MethodTag::ALL {
            let mut cfg = small_cfg(tag.family(), tag.mode());
            cfg.dim = 50;
            let table = train(&corpus, &cfg).unwrap();
            assert_eq!(table.dim(), 50);
            assert_eq!(table.method(), tag);
            assert_eq!(table.vectors().len(), table.vocab().len() * 50);
            assert!(table.vectors().iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn fully_subsampled_corpus_leaves_initialization() {
        let corpus = corpus_of("a b a b a b a b\nb a b a");
        let mut cfg = small_cfg(Family::Plain, Mode::Skipgram);
        cfg.epochs = 1;
        cfg.subsample = 1e-12;
        let vocab = build_vocab(corpus.iter().flatten(), 1).unwrap();
        let init = Model::init(&vocab, &cfg).input.into_vec();
        let table = train(&corpus, &cfg).unwrap();
        assert_eq!(table.vectors(), &init[..]);
    }

    #[test]
    fn deterministic_single_worker() {
        let corpus = corpus_of("a b c d e f g\nb c d a e\ng f e d c b a");
        for tag in MethodTag::ALL {
            let cfg = small_cfg(tag.family(), tag.mode());
            let a = train(&corpus, &cfg).unwrap();
            let b = train(&corpus, &cfg).unwrap();
            assert_eq!(a.vectors(), b.vectors());
        }
    }

    #[test]
    fn parallel_workers_produce_finite_tables() {
        let corpus: Vec<Vec<String>> = (0..40)
            .map(|i| (0..20).map(|j| format!("w{}", (i * 7 + j * 3) % 13)).collect())
            .collect();
        let mut cfg = small_cfg(Family::Plain, Mode::Skipgram);
        cfg.workers = 4;
        let t = train(&corpus, &cfg).unwrap();
        assert!(t.vectors().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn data_errors() {
        let cfg = small_cfg(Family::Plain, Mode::Cbow);
        assert!(matches!(train(&corpus_of("solo"), &cfg), Err(Error::Data(_))));
        assert!(matches!(train(&Vec::<Vec<String>>::new(), &cfg), Err(Error::Data(_))));
        assert!(matches!(train_order(&corpus_of("a b"), &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn subword_vectors_are_compositions() {
        let corpus = corpus_of("foi ela foi ele\nfoi nada ela");
        let cfg = small_cfg(Family::Subword, Mode::Skipgram);
        let table = train_subword(&corpus, &cfg).unwrap();
        let sub = table.subword().unwrap();
        for (id, w) in table.vocab().words().enumerate() {
            assert_eq!(table.row(id), &sub.compose(w, Some(id))[..]);
        }
        let oov = table.lookup("folia").unwrap();
        assert_eq!(&oov[..], &sub.compose("folia", None)[..]);
    }

    #[test]
    fn learning_rate_schedule() {
        let s = Schedule { initial: 0.025, expected: 1000 };
        assert_eq!(s.rate(0), 0.025);
        assert!((s.rate(500) - 0.0125).abs() < 1e-7);
        assert!((s.rate(1000) - 0.025 * 1e-4).abs() < 1e-10);
        assert!((s.rate(5000) - 0.025 * 1e-4).abs() < 1e-10);
    }
}
