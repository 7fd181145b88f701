//! Synthetic corpora with known structure.
//!
//! * [`sanity_corpus`]: two designated words with identical context
//!   distributions and a frequency-matched control word with disjoint
//!   contexts, for checking that embeddings capture distributional
//!   similarity.
//! * [`sbd_dataset`]: labeled "transcripts" whose sentences open with cue
//!   words and sometimes close with a discourse particle, for end-to-end
//!   boundary detection.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, Token, Transcript};
use crate::error::{Error, Result};

const CONSONANTS: &[char] = &['b', 'd', 'f', 'g', 'k', 'l', 'm', 'n', 'p', 'r', 's', 't', 'v'];
const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u'];

/// Sentence-initial cue words, in order of preference.
pub const CUE_WORDS: [&str; 8] = ["então", "aí", "depois", "e", "mas", "quando", "porque", "agora"];
/// Optional sentence-final particles.
pub const PARTICLES: [&str; 2] = ["né", "tá"];

fn token(s: &str) -> Token {
    Token::new(s).expect("generated words are valid tokens")
}

/// `n` distinct consonant-vowel pseudo-words of two or three syllables
/// that avoid `exclude`.
fn pseudo_words<R: Rng>(n: usize, exclude: &HashSet<String>, rng: &mut R) -> Vec<String> {
    let mut seen = exclude.clone();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(2..=3);
        let w: String = (0..syllables)
            .flat_map(|_| [*CONSONANTS.choose(rng).unwrap(), *VOWELS.choose(rng).unwrap()])
            .collect();
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Zipf weights `1 / rank`.
fn zipf(n: usize) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|r| 1.0 / r as f64)).expect("non-empty weights")
}

/// Corpus for the distributional sanity check.
#[derive(Clone, Debug)]
pub struct SanityCorpus {
    pub documents: Vec<Vec<Token>>,
    /// Designated words sharing one context distribution.
    pub pair: (String, String),
    /// Frequency-matched word whose contexts never overlap the pair's.
    pub control: String,
}

impl SanityCorpus {
    pub fn token_count(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }
}

/// Generates roughly `tokens` tokens in documents of one sentence each.
///
/// A third of the sentences are built around a target: the pair words
/// (taking turns) sit between two words drawn from one context
/// pool, the control word between words from a disjoint pool. The
/// remaining sentences are Zipf-distributed background words. Target
/// words are spelled with letters absent from every other word, so they
/// share no character n-grams with the rest of the vocabulary.
pub fn sanity_corpus(tokens: usize, seed: u64) -> SanityCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x, y, z) = ("xyhcw", "qjwzx", "wcqhy");
    let exclude: HashSet<String> = [x, y, z].iter().map(|s| s.to_string()).collect();
    let pool = pseudo_words(360, &exclude, &mut rng);
    let (pair_ctx, rest) = pool.split_at(30);
    let (control_ctx, background) = rest.split_at(30);
    let bg = zipf(background.len());
    let ctx_dist = zipf(pair_ctx.len());

    let mut documents = Vec::new();
    let mut count = 0;
    let mut turn = 0usize;
    while count < tokens {
        let mut doc = Vec::new();
        let kind = rng.gen_range(0..6);
        if kind < 2 {
            // Targets take turns, so x, y and z occur equally often (to
            // within one) and both context pools are used equally.
            let (target, ctx) = match turn % 4 {
                0 => (x, pair_ctx),
                1 => (y, pair_ctx),
                2 => (z, control_ctx),
                _ => ("", control_ctx),
            };
            turn += 1;
            let side = rng.gen_range(2..=3);
            for _ in 0..side {
                doc.push(token(&ctx[ctx_dist.sample(&mut rng)]));
            }
            if !target.is_empty() {
                doc.push(token(target));
            }
            for _ in 0..side {
                doc.push(token(&ctx[ctx_dist.sample(&mut rng)]));
            }
        } else {
            let len = rng.gen_range(5..=12);
            for _ in 0..len {
                doc.push(token(&background[bg.sample(&mut rng)]));
            }
        }
        count += doc.len();
        documents.push(doc);
    }
    SanityCorpus {
        documents,
        pair: (x.to_owned(), y.to_owned()),
        control: z.to_owned(),
    }
}

/// Shape of the synthetic boundary-detection corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct SbdSynthConfig {
    pub transcripts: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// How many of [`CUE_WORDS`] open sentences.
    pub cue_words: usize,
    /// Probability that a sentence ends with one of [`PARTICLES`].
    pub particle_rate: f64,
    /// Probability that a mid-sentence word is replaced by a cue word.
    pub cue_noise: f64,
    pub filler_vocab: usize,
    pub seed: u64,
}

impl Default for SbdSynthConfig {
    fn default() -> Self {
        SbdSynthConfig {
            transcripts: 500,
            min_sentences: 4,
            max_sentences: 10,
            min_len: 4,
            max_len: 14,
            cue_words: 8,
            particle_rate: 0.3,
            cue_noise: 0.005,
            filler_vocab: 300,
            seed: 1,
        }
    }
}

impl SbdSynthConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.transcripts > 0
            && self.min_sentences >= 1
            && self.min_sentences <= self.max_sentences
            && self.min_len >= 2
            && self.min_len <= self.max_len
            && (1..=CUE_WORDS.len()).contains(&self.cue_words)
            && (0.0..=1.0).contains(&self.particle_rate)
            && (0.0..=1.0).contains(&self.cue_noise)
            && self.filler_vocab > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid synthetic corpus settings {self:?}")))
        }
    }
}

/// Generator state shared by the labeled and unlabeled outputs.
struct SbdGenerator {
    cfg: SbdSynthConfig,
    fillers: Vec<String>,
    filler_dist: WeightedIndex<f64>,
}

impl SbdGenerator {
    fn new(cfg: &SbdSynthConfig) -> Result<Self> {
        cfg.validate()?;
        // The filler vocabulary depends only on the seed, so corpora drawn
        // with different stream seeds share it.
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let exclude: HashSet<String> = CUE_WORDS.iter().chain(&PARTICLES).map(|s| s.to_string()).collect();
        let fillers = pseudo_words(cfg.filler_vocab, &exclude, &mut rng);
        Ok(SbdGenerator { cfg: cfg.clone(), filler_dist: zipf(fillers.len()), fillers })
    }

    fn sentence<R: Rng>(&self, rng: &mut R) -> Vec<Token> {
        let c = &self.cfg;
        let len = rng.gen_range(c.min_len..=c.max_len);
        let mut s = vec![token(CUE_WORDS[rng.gen_range(0..c.cue_words)])];
        let particle = rng.gen_bool(c.particle_rate);
        let body = len - 1 - usize::from(particle);
        for _ in 0..body {
            if rng.gen_bool(c.cue_noise) {
                s.push(token(CUE_WORDS[rng.gen_range(0..c.cue_words)]));
            } else {
                s.push(token(&self.fillers[self.filler_dist.sample(rng)]));
            }
        }
        if particle {
            s.push(token(PARTICLES.choose(rng).unwrap()));
        }
        s
    }

    fn transcript<R: Rng>(&self, rng: &mut R) -> Vec<Vec<Token>> {
        let n = rng.gen_range(self.cfg.min_sentences..=self.cfg.max_sentences);
        (0..n).map(|_| self.sentence(rng)).collect()
    }
}

/// Labeled synthetic transcripts with ids `synth-0000`, `synth-0001`, ...
pub fn sbd_dataset(cfg: &SbdSynthConfig) -> Result<Dataset> {
    let generator = SbdGenerator::new(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5bd));
    let transcripts = (0..cfg.transcripts)
        .map(|i| Transcript::from_sentences(format!("synth-{i:04}"), generator.transcript(&mut rng)))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new("synthetic", transcripts)
}

/// Unlabeled token streams from the same generator, one document per
/// transcript, drawn with an independent stream seed.
pub fn induction_documents(cfg: &SbdSynthConfig, documents: usize, stream_seed: u64) -> Result<Vec<Vec<Token>>> {
    let generator = SbdGenerator::new(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed ^ 0x1d0c_5eed);
    Ok((0..documents)
        .map(|_| generator.transcript(&mut rng).into_iter().flatten().collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    #[test]
    fn sanity_corpus_frequencies() {
        let c = sanity_corpus(50_000, 3);
        assert!(c.token_count() >= 50_000);
        let count = |w: &str| c.documents.iter().flatten().filter(|t| t.as_str() == w).count();
        let (nx, ny, nz) = (count(&c.pair.0), count(&c.pair.1), count(&c.control));
        assert!(nx > 500 && ny > 500, "{nx} {ny}");
        assert!(nx.abs_diff(ny) <= 1 && nx.abs_diff(nz) <= 1, "{nx} {ny} {nz}");
        // Target spellings share no letters with other words.
        let target_letters: HashSet<char> = "xyhcwqjz".chars().collect();
        for t in c.documents.iter().flatten() {
            let s = t.as_str();
            if s != c.pair.0 && s != c.pair.1 && s != c.control {
                assert!(s.chars().all(|ch| !target_letters.contains(&ch)), "{s}");
            }
        }
    }

    #[test]
    fn sbd_dataset_structure() {
        let cfg = SbdSynthConfig { transcripts: 40, cue_noise: 0.0, ..Default::default() };
        let d = sbd_dataset(&cfg).unwrap();
        assert_eq!(d.len(), 40);
        for t in d.transcripts() {
            for s in t.sentences() {
                assert!(CUE_WORDS.contains(&s[0].as_str()));
                assert!((cfg.min_len..=cfg.max_len).contains(&s.len()));
            }
            assert_eq!(*t.labels().last().unwrap(), Label::Boundary);
        }
        assert_eq!(sbd_dataset(&cfg).unwrap(), d);
        assert!(sbd_dataset(&SbdSynthConfig { min_len: 1, ..cfg }).is_err());
    }

    #[test]
    fn induction_documents_share_vocabulary() {
        let cfg = SbdSynthConfig { transcripts: 30, ..Default::default() };
        let d = sbd_dataset(&cfg).unwrap();
        let docs = induction_documents(&cfg, 30, 9).unwrap();
        let vocab: HashSet<&str> = docs.iter().flatten().map(|t| t.as_str()).collect();
        let labeled: HashSet<&str> = d.transcripts().iter().flat_map(|t| t.tokens()).map(|t| t.as_str()).collect();
        let shared = labeled.intersection(&vocab).count();
        assert!(shared as f64 > 0.5 * labeled.len() as f64);
    }
}
