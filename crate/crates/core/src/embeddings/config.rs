use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which word predicts which.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Context predicts the center word.
    Cbow,
    /// Center word predicts each context word.
    Skipgram,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Cbow => "cbow",
            Mode::Skipgram => "sg",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cbow" | "cwindow" => Ok(Mode::Cbow),
            "sg" | "skipgram" | "skip-gram" | "ssg" => Ok(Mode::Skipgram),
            _ => Err(Error::Argument(format!("unknown training strategy {s:?} (expected cbow or sg)"))),
        }
    }
}

/// Embedding family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Order-insensitive log-linear models.
    Plain,
    /// Position-aware variants: concatenated CBOW context, structured
    /// skip-gram.
    Order,
    /// Words composed from hashed character n-grams.
    Subword,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Plain, Family::Order, Family::Subword];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Plain => "w2v",
            Family::Order => "order",
            Family::Subword => "subword",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "w2v" | "plain" | "word2vec" => Ok(Family::Plain),
            "order" | "wang2vec" => Ok(Family::Order),
            "subword" | "fasttext" => Ok(Family::Subword),
            _ => Err(Error::Argument(format!(
                "unknown embedding method {s:?} (expected w2v, order or subword)"
            ))),
        }
    }
}

/// The six family/mode combinations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodTag {
    W2vCbow,
    W2vSg,
    OrderCwindow,
    OrderSsg,
    SubwordCbow,
    SubwordSg,
}

impl MethodTag {
    pub const ALL: [MethodTag; 6] = [
        MethodTag::W2vCbow,
        MethodTag::W2vSg,
        MethodTag::OrderCwindow,
        MethodTag::OrderSsg,
        MethodTag::SubwordCbow,
        MethodTag::SubwordSg,
    ];

    pub fn new(family: Family, mode: Mode) -> Self {
        match (family, mode) {
            (Family::Plain, Mode::Cbow) => MethodTag::W2vCbow,
            (Family::Plain, Mode::Skipgram) => MethodTag::W2vSg,
            (Family::Order, Mode::Cbow) => MethodTag::OrderCwindow,
            (Family::Order, Mode::Skipgram) => MethodTag::OrderSsg,
            (Family::Subword, Mode::Cbow) => MethodTag::SubwordCbow,
            (Family::Subword, Mode::Skipgram) => MethodTag::SubwordSg,
        }
    }

    pub fn family(self) -> Family {
        match self {
            MethodTag::W2vCbow | MethodTag::W2vSg => Family::Plain,
            MethodTag::OrderCwindow | MethodTag::OrderSsg => Family::Order,
            MethodTag::SubwordCbow | MethodTag::SubwordSg => Family::Subword,
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            MethodTag::W2vCbow | MethodTag::OrderCwindow | MethodTag::SubwordCbow => Mode::Cbow,
            _ => Mode::Skipgram,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MethodTag::W2vCbow => "w2v-cbow",
            MethodTag::W2vSg => "w2v-sg",
            MethodTag::OrderCwindow => "order-cwindow",
            MethodTag::OrderSsg => "order-ssg",
            MethodTag::SubwordCbow => "subword-cbow",
            MethodTag::SubwordSg => "subword-sg",
        }
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodTag::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown method tag {s:?}")))
    }
}

/// Hyperparameters of embedding induction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InductionConfig {
    pub family: Family,
    pub mode: Mode,
    pub dim: usize,
    /// Context radius: `window` words on each side.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f32,
    pub min_count: u64,
    /// Subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
    pub noise_power: f64,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub buckets: usize,
    pub hash_seed: u64,
    pub seed: u64,
    /// Parallel workers. With more than one, updates race and the result
    /// is no longer reproducible.
    pub workers: usize,
}

impl InductionConfig {
    /// Defaults for the given family and mode.
    pub fn new(family: Family, mode: Mode, dim: usize) -> Self {
        InductionConfig {
            family,
            mode,
            dim,
            window: if family == Family::Order { 2 } else { 5 },
            negatives: 5,
            epochs: 5,
            learning_rate: match mode {
                Mode::Cbow => 0.05,
                Mode::Skipgram => 0.025,
            },
            min_count: 5,
            subsample: 1e-5,
            noise_power: 0.75,
            ngram_min: 3,
            ngram_max: 6,
            buckets: 2_000_000,
            hash_seed: 0,
            seed: 1,
            workers: 1,
        }
    }

    pub fn method(&self) -> MethodTag {
        MethodTag::new(self.family, self.mode)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.dim == 0 {
            return fail("dim must be positive".into());
        }
        if self.window == 0 {
            return fail("window must be at least 1".into());
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1".into());
        }
        if !(self.subsample >= 0.0) {
            return fail(format!("subsample threshold must be >= 0, got {}", self.subsample));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.noise_power >= 0.0) {
            return fail(format!("noise power must be >= 0, got {}", self.noise_power));
        }
        if self.workers == 0 {
            return fail("workers must be at least 1".into());
        }
        if self.family == Family::Subword {
            if self.ngram_min == 0 || self.ngram_min > self.ngram_max {
                return fail(format!(
                    "invalid n-gram range [{}, {}]",
                    self.ngram_min, self.ngram_max
                ));
            }
            if self.buckets == 0 {
                return fail("bucket count must be positive".into());
            }
        }
        Ok(())
    }
}
