use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{Error, Result};

/// Word list with frequencies, ordered by descending count (ties broken
/// lexicographically), ids dense from 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    entries: Vec<(String, u64)>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from words in their final id order.
    ///
    /// Used when reading embedding files, which carry no counts; every
    /// count is then zero.
    pub fn from_ordered<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entries: Vec<(String, u64)> = words.into_iter().map(|w| (w.into(), 0)).collect();
        Self::from_entries(entries)
    }

    fn from_entries(entries: Vec<(String, u64)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, (w, _)) in entries.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate vocabulary entry {w:?}")));
            }
        }
        Ok(Vocabulary { entries, index })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.entries[id].0
    }

    pub fn count(&self, id: usize) -> u64 {
        self.entries[id].1
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(w, _)| w.as_str())
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    /// Sum of all counts.
    pub fn total_count(&self) -> u64 {
        self.entries.iter().map(|(_, c)| c).sum()
    }
}

/// Counts the corpus and keeps words seen at least `min_count` times.
pub fn build_vocab<I, S>(corpus: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    for w in corpus {
        let w = w.as_ref();
        match counts.get_mut(w) {
            Some(c) => *c += 1,
            None => {
                counts.insert(w.to_owned(), 1);
            }
        }
    }
    let mut entries: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count.max(1))
        .collect();
    if entries.is_empty() {
        return Err(Error::Data(format!(
            "no word occurs at least {min_count} times in the corpus"
        )));
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocabulary::from_entries(entries)
}

/// Noise distribution for negative sampling: P(w) ∝ count(w)^power.
#[derive(Clone, Debug)]
pub struct NoiseDistribution {
    probs: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl NoiseDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }
}

pub fn unigram_noise(v: &Vocabulary, power: f64) -> Result<NoiseDistribution> {
    if !(power >= 0.0 && power.is_finite()) {
        return Err(Error::Argument(format!("noise power must be >= 0, got {power}")));
    }
    if v.is_empty() {
        return Err(Error::Data("empty vocabulary".into()));
    }
    let weights: Vec<f64> = v
        .entries
        .iter()
        // Counts of loaded vocabularies are zero; treat them as uniform.
        .map(|&(_, c)| (c.max(1) as f64).powf(power))
        .collect();
    let total: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / total).collect();
    let sampler = WeightedIndex::new(&weights)
        .map_err(|e| Error::Numeric(format!("noise distribution: {e}")))?;
    Ok(NoiseDistribution { probs, sampler })
}
