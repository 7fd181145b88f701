use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sbd_core::embeddings::{Family, InductionConfig, Mode};
use sbd_core::model::ClassWeightMode;
use sbd_core::ModelConfig;

#[derive(Debug, Parser)]
#[command(name = "sbd", version, about = "Embedding induction and sentence boundary detection for transcripts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Induce word embeddings from a corpus with one document per line.
    EmbedTrain(EmbedTrainArgs),
    /// Train a boundary model on a segmented dataset.
    SbdTrain(SbdTrainArgs),
    /// Cross-validate a grid of embedding configurations.
    SbdEval(SbdEvalArgs),
    /// Segment a token stream with a trained model.
    SbdPredict(PredictArgs),
    /// Write a synthetic segmented dataset and induction corpus.
    Synth(SynthArgs),
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: sbd_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: sbd_core::Error| e.to_string())
}

fn parse_weights(s: &str) -> Result<ClassWeightMode, String> {
    s.parse().map_err(|e: sbd_core::Error| e.to_string())
}

/// Embedding hyperparameters shared by `embed-train` and `sbd-eval`.
/// Unset values keep the per-family defaults.
#[derive(Debug, Args)]
pub struct InductionArgs {
    /// Context radius in words on each side.
    #[arg(long, value_parser = positive)]
    pub context: Option<usize>,
    /// Negative samples per positive pair.
    #[arg(long, value_parser = positive)]
    pub negatives: Option<usize>,
    /// Passes over the corpus.
    #[arg(long, value_parser = positive)]
    pub embed_epochs: Option<usize>,
    /// Initial embedding learning rate.
    #[arg(long)]
    pub embed_lr: Option<f32>,
    /// Words rarer than this are dropped from the vocabulary.
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Frequent-word subsampling threshold; 0 disables.
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Exponent of the unigram noise distribution.
    #[arg(long)]
    pub noise_power: Option<f64>,
    /// Shortest character n-gram (subword family).
    #[arg(long, value_parser = positive)]
    pub ngram_min: Option<usize>,
    /// Longest character n-gram (subword family).
    #[arg(long, value_parser = positive)]
    pub ngram_max: Option<usize>,
    /// Hash buckets for n-grams (subword family).
    #[arg(long, value_parser = positive)]
    pub buckets: Option<usize>,
    /// Seed of the n-gram hash.
    #[arg(long)]
    pub hash_seed: Option<u64>,
}

impl InductionArgs {
    pub fn config(&self, family: Family, mode: Mode, dim: usize, seed: u64, workers: usize) -> InductionConfig {
        let mut c = InductionConfig::new(family, mode, dim);
        c.seed = seed;
        c.workers = workers;
        if let Some(v) = self.context {
            c.window = v;
        }
        if let Some(v) = self.negatives {
            c.negatives = v;
        }
        if let Some(v) = self.embed_epochs {
            c.epochs = v;
        }
        if let Some(v) = self.embed_lr {
            c.learning_rate = v;
        }
        if let Some(v) = self.min_count {
            c.min_count = v;
        }
        if let Some(v) = self.subsample {
            c.subsample = v;
        }
        if let Some(v) = self.noise_power {
            c.noise_power = v;
        }
        if let Some(v) = self.ngram_min {
            c.ngram_min = v;
        }
        if let Some(v) = self.ngram_max {
            c.ngram_max = v;
        }
        if let Some(v) = self.buckets {
            c.buckets = v;
        }
        if let Some(v) = self.hash_seed {
            c.hash_seed = v;
        }
        c
    }
}

/// Boundary model hyperparameters. Unset values keep the defaults.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Tokens per training window.
    #[arg(long, value_parser = positive)]
    pub window: Option<usize>,
    /// Convolution filters.
    #[arg(long, value_parser = positive)]
    pub filters: Option<usize>,
    /// Convolution width in tokens (odd).
    #[arg(long, value_parser = positive)]
    pub conv_width: Option<usize>,
    /// Max-pooling width in tokens (odd).
    #[arg(long, value_parser = positive)]
    pub pool_width: Option<usize>,
    /// LSTM units per direction.
    #[arg(long, value_parser = positive)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub epochs: Option<usize>,
    #[arg(long, value_parser = positive)]
    pub batch_size: Option<usize>,
    /// RMSProp learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// `inverse-frequency` or `manual:<boundary>:<no_boundary>`.
    #[arg(long, value_parser = parse_weights)]
    pub class_weights: Option<ClassWeightMode>,
    /// Whether pretrained embedding rows are updated.
    #[arg(long)]
    pub fine_tune: Option<bool>,
    /// Window stride during training; defaults to half a window.
    #[arg(long, value_parser = positive)]
    pub train_stride: Option<usize>,
    /// Share of training transcripts held out for per-epoch validation.
    #[arg(long)]
    pub validation_fraction: Option<f64>,
}

impl ModelArgs {
    pub fn config(&self, dim: usize, seed: u64) -> ModelConfig {
        let mut c = ModelConfig::new(dim);
        c.seed = seed;
        if let Some(v) = self.window {
            c.window = v;
        }
        if let Some(v) = self.filters {
            c.n_filters = v;
        }
        if let Some(v) = self.conv_width {
            c.conv_width = v;
        }
        if let Some(v) = self.pool_width {
            c.pool_width = v;
        }
        if let Some(v) = self.hidden {
            c.hidden = v;
        }
        if let Some(v) = self.dropout {
            c.dropout = v;
        }
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.lr {
            c.learning_rate = v;
        }
        if let Some(v) = self.class_weights {
            c.class_weights = v;
        }
        if let Some(v) = self.fine_tune {
            c.fine_tune = v;
        }
        if self.train_stride.is_some() {
            c.train_stride = self.train_stride;
        }
        if let Some(v) = self.validation_fraction {
            c.validation_fraction = v;
        }
        c
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct EmbedTrainArgs {
    /// Corpus file, one document per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output embedding file.
    #[arg(long)]
    pub out: PathBuf,
    /// Embedding family: w2v, order or subword.
    #[arg(long, value_parser = parse_family)]
    pub method: Family,
    /// Training strategy: cbow or sg.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Mode,
    #[arg(long, value_parser = positive)]
    pub dim: usize,
    #[command(flatten)]
    pub induction: InductionArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Training threads; more than one is faster but not reproducible.
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub workers: usize,
    /// Flat key=value file of flag values; flags on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SbdTrainArgs {
    /// Segmented dataset: a directory of files or one file of
    /// blank-line-separated transcripts, one sentence per line.
    #[arg(long)]
    pub data: PathBuf,
    /// Embedding file.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Family the embeddings were induced with.
    #[arg(long, value_parser = parse_family)]
    pub method: Family,
    /// Strategy the embeddings were induced with.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Mode,
    /// Output checkpoint.
    #[arg(long)]
    pub out: PathBuf,
    /// Model input dimension; must match the embeddings. Defaults to the
    /// embedding file's.
    #[arg(long, value_parser = positive)]
    pub dim: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SbdEvalArgs {
    /// Segmented dataset.
    #[arg(long)]
    pub data: PathBuf,
    /// Cells as `family:strategy[:dim,dim...]` joined by `;`, or `full`
    /// for all six methods at 50, 100, 300 and 600 dimensions.
    #[arg(long, default_value = "full")]
    pub grid: String,
    /// Number of folds.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory of `<family>-<strategy>-d<dim>.vec` files.
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    pub embeddings_dir: Option<PathBuf>,
    /// Induce each cell's embeddings from this corpus instead.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Directory for `report.csv` and `report.json`.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Cache of per-fold results and induced embeddings.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Concurrent jobs.
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub workers: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub induction: InductionArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// One sentence per line.
    Text,
    /// One `token<TAB>probability` line per token.
    Tsv,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct PredictArgs {
    /// Checkpoint written by `sbd-train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Text to segment; standard input when absent or `-`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Minimum boundary probability.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SynthArgs {
    /// Output dataset file.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional unlabeled corpus from the same generator.
    #[arg(long)]
    pub corpus_out: Option<PathBuf>,
    #[arg(long, default_value_t = 500, value_parser = positive)]
    pub transcripts: usize,
    /// Documents written to `--corpus-out`.
    #[arg(long, default_value_t = 2000, value_parser = positive)]
    pub documents: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub config: Option<PathBuf>,
}
