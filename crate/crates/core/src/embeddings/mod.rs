//! Word embedding induction.
//!
//! Three families share one negative-sampling trainer: plain CBOW and
//! skip-gram, their order-sensitive variants (concatenated context window,
//! structured skip-gram) and subword models whose word vectors are built
//! from hashed character n-grams.

mod config;
mod shared;
mod subword;
mod table;
mod train;
mod vocab;

use std::fs;
use std::path::Path;

pub use self::config::{Family, InductionConfig, MethodTag, Mode};
pub use self::subword::{fnv1a, ngrams, SubwordTable};
pub use self::table::{cosine, load_embeddings, nearest_neighbors, save_embeddings, EmbeddingTable};
pub use self::train::{train, train_order, train_plain, train_subword};
pub use self::vocab::{build_vocab, unigram_noise, NoiseDistribution, Vocabulary};

use crate::corpus::{normalize, Token};
use crate::error::{Error, Result};

/// Reads an induction corpus: every non-blank line is one document,
/// normalized like any other text.
pub fn read_corpus(path: &Path) -> Result<Vec<Vec<Token>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(normalize)
        .filter(|doc| !doc.is_empty())
        .collect())
}
