use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const BOW: char = '<';
const EOW: char = '>';
const MAGIC: &[u8; 8] = b"SBDSUBW1";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over `bytes`; the seed is folded into the offset basis so
/// seed 0 is plain FNV-1a.
pub fn fnv1a(bytes: &[u8], seed: u64) -> u64 {
    let mut hash = FNV_OFFSET ^ seed;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Character n-grams of `word` wrapped in `<` and `>`, shortest first,
/// left to right. Repeated n-grams are listed once per occurrence.
pub fn ngrams(word: &str, n_min: usize, n_max: usize) -> Vec<String> {
    let chars: Vec<char> = std::iter::once(BOW)
        .chain(word.chars())
        .chain(std::iter::once(EOW))
        .collect();
    let mut out = Vec::new();
    for n in n_min.max(1)..=n_max {
        if n > chars.len() {
            break;
        }
        for start in 0..=chars.len() - n {
            out.push(chars[start..start + n].iter().collect());
        }
    }
    out
}

/// Word rows plus hashed n-gram bucket rows; a word's vector is its word
/// row (if it has one) plus the bucket rows of its n-grams.
#[derive(Clone, Debug, PartialEq)]
pub struct SubwordTable {
    dim: usize,
    ngram_min: usize,
    ngram_max: usize,
    hash_seed: u64,
    word_rows: Vec<f32>,
    buckets: Vec<f32>,
}

impl SubwordTable {
    pub fn new(
        dim: usize,
        ngram_min: usize,
        ngram_max: usize,
        hash_seed: u64,
        word_rows: Vec<f32>,
        buckets: Vec<f32>,
    ) -> Result<Self> {
        if dim == 0 || buckets.is_empty() || buckets.len() % dim != 0 || word_rows.len() % dim != 0 {
            return Err(Error::Shape(format!(
                "subword table: {} word values and {} bucket values do not fit dim {dim}",
                word_rows.len(),
                buckets.len()
            )));
        }
        if ngram_min == 0 || ngram_min > ngram_max {
            return Err(Error::Config(format!("invalid n-gram range [{ngram_min}, {ngram_max}]")));
        }
        Ok(SubwordTable {
            dim,
            ngram_min,
            ngram_max,
            hash_seed,
            word_rows,
            buckets,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ngram_range(&self) -> (usize, usize) {
        (self.ngram_min, self.ngram_max)
    }

    pub fn hash_seed(&self) -> u64 {
        self.hash_seed
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len() / self.dim
    }

    pub fn word_count(&self) -> usize {
        self.word_rows.len() / self.dim
    }

    pub fn word_row(&self, id: usize) -> &[f32] {
        &self.word_rows[id * self.dim..(id + 1) * self.dim]
    }

    pub fn bucket_row(&self, bucket: usize) -> &[f32] {
        &self.buckets[bucket * self.dim..(bucket + 1) * self.dim]
    }

    pub fn buckets(&self) -> &[f32] {
        &self.buckets
    }

    pub fn bucket_of(&self, ngram: &str) -> usize {
        bucket_of(ngram, self.hash_seed, self.bucket_count())
    }

    /// Bucket ids of the word's n-grams, in [`ngrams`] order.
    pub fn ngram_buckets(&self, word: &str) -> Vec<usize> {
        ngram_buckets(word, self.ngram_min, self.ngram_max, self.hash_seed, self.bucket_count())
    }

    /// The word row of `id` (if any) plus every n-gram bucket row of `word`.
    pub fn compose(&self, word: &str, id: Option<usize>) -> Vec<f32> {
        let mut v = match id {
            Some(id) => self.word_row(id).to_vec(),
            None => vec![0.0; self.dim],
        };
        for b in self.ngram_buckets(word) {
            for (x, y) in v.iter_mut().zip(self.bucket_row(b)) {
                *x += y;
            }
        }
        v
    }

    /// Writes the binary sidecar: magic, six little-endian u64 header
    /// fields (dim, n_min, n_max, hash seed, word rows, buckets), then the
    /// word rows and bucket rows as little-endian f32.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut write = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
        write(MAGIC)?;
        for v in [
            self.dim as u64,
            self.ngram_min as u64,
            self.ngram_max as u64,
            self.hash_seed,
            self.word_count() as u64,
            self.bucket_count() as u64,
        ] {
            write(&v.to_le_bytes())?;
        }
        for x in self.word_rows.iter().chain(&self.buckets) {
            write(&x.to_le_bytes())?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let ctx = path.display().to_string();
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
        if &magic != MAGIC {
            return Err(Error::format(ctx, 1, "not a subword table file"));
        }
        let mut header = [0u64; 6];
        for h in header.iter_mut() {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
            *h = u64::from_le_bytes(buf);
        }
        let [dim, n_min, n_max, hash_seed, words, buckets] = header;
        let read_block = |r: &mut BufReader<File>, n: u64| -> Result<Vec<f32>> {
            let mut bytes = vec![0u8; (n * dim * 4) as usize];
            r.read_exact(&mut bytes).map_err(|e| Error::io(path, e))?;
            Ok(bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect())
        };
        let word_rows = read_block(&mut r, words)?;
        let bucket_rows = read_block(&mut r, buckets)?;
        if r.read(&mut [0u8; 1]).map_err(|e| Error::io(path, e))? != 0 {
            return Err(Error::format(ctx, 1, "trailing bytes after bucket rows"));
        }
        if word_rows.iter().chain(&bucket_rows).any(|x| !x.is_finite()) {
            return Err(Error::format(ctx, 1, "non-finite value"));
        }
        SubwordTable::new(dim as usize, n_min as usize, n_max as usize, hash_seed, word_rows, bucket_rows)
    }
}

pub(crate) fn bucket_of(ngram: &str, seed: u64, buckets: usize) -> usize {
    (fnv1a(ngram.as_bytes(), seed) % buckets as u64) as usize
}

pub(crate) fn ngram_buckets(word: &str, n_min: usize, n_max: usize, seed: u64, buckets: usize) -> Vec<usize> {
    ngrams(word, n_min, n_max)
        .iter()
        .map(|g| bucket_of(g, seed, buckets))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trigrams_of_foi() {
        assert_eq!(ngrams("foi", 3, 3), ["<fo", "foi", "oi>"]);
    }

    #[test]
    fn ngram_range_and_unicode() {
        assert_eq!(ngrams("ão", 2, 4), ["<ã", "ão", "o>", "<ão", "ão>", "<ão>"]);
        assert!(ngrams("a", 4, 6).is_empty());
    }

    #[test]
    fn fnv_reference_values() {
        // Published FNV-1a 64-bit test vectors.
        assert_eq!(fnv1a(b"", 0), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a", 0), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar", 0), 0x85944171f73967e8);
        assert_ne!(fnv1a(b"a", 1), fnv1a(b"a", 0));
    }

    fn dyadic_table() -> SubwordTable {
        // Values are small dyadic rationals so every sum below is exact.
        let dim = 3;
        let word_rows = vec![0.5, -1.0, 2.0, 0.25, 4.0, -0.75];
        let buckets: Vec<f32> = (0..7 * dim).map(|i| (i as f32 - 10.0) * 0.125).collect();
        SubwordTable::new(dim, 3, 3, 0, word_rows, buckets).unwrap()
    }

    #[test]
    fn oov_vector_is_exact_ngram_sum() {
        let t = dyadic_table();
        let v = t.compose("foi", None);
        let mut expected = [0f32; 3];
        for g in ngrams("foi", 3, 3) {
            let row = t.bucket_row(t.bucket_of(&g));
            for k in 0..3 {
                expected[k] += row[k];
            }
        }
        assert_eq!(v, expected);
    }

    #[test]
    fn word_ids_differ_by_word_rows() {
        let t = dyadic_table();
        let a = t.compose("foi", Some(0));
        let b = t.compose("foi", Some(1));
        for k in 0..3 {
            assert_eq!(a[k] - b[k], t.word_row(0)[k] - t.word_row(1)[k]);
        }
    }

    #[test]
    fn sidecar_round_trip() {
        let t = dyadic_table();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.subword");
        t.save(&p).unwrap();
        assert_eq!(SubwordTable::load(&p).unwrap(), t);
        std::fs::write(&p, b"garbage!").unwrap();
        assert!(SubwordTable::load(&p).is_err());
    }
}
