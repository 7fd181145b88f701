use std::borrow::Cow;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::MethodTag;
use super::subword::SubwordTable;
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

/// Trained word vectors: row `i` belongs to vocabulary id `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    method: MethodTag,
    vocab: Vocabulary,
    dim: usize,
    vectors: Vec<f32>,
    subword: Option<SubwordTable>,
}

impl EmbeddingTable {
    pub fn new(method: MethodTag, vocab: Vocabulary, dim: usize, vectors: Vec<f32>) -> Result<Self> {
        if dim == 0 || vectors.len() != vocab.len() * dim {
            return Err(Error::Shape(format!(
                "{} values for {} words of dimension {dim}",
                vectors.len(),
                vocab.len()
            )));
        }
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("embedding table has non-finite values".into()));
        }
        Ok(EmbeddingTable {
            method,
            vocab,
            dim,
            vectors,
            subword: None,
        })
    }

    /// Attaches n-gram buckets used to compose out-of-vocabulary words.
    pub fn with_subword(mut self, sub: SubwordTable) -> Result<Self> {
        if sub.dim() != self.dim {
            return Err(Error::Shape(format!(
                "subword dimension {} does not match table dimension {}",
                sub.dim(),
                self.dim
            )));
        }
        self.subword = Some(sub);
        Ok(self)
    }

    pub fn method(&self) -> MethodTag {
        self.method
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }

    pub fn row(&self, id: usize) -> &[f32] {
        &self.vectors[id * self.dim..(id + 1) * self.dim]
    }

    pub fn subword(&self) -> Option<&SubwordTable> {
        self.subword.as_ref()
    }

    /// Vector of `word`: its row when known, otherwise the sum of its
    /// n-gram rows when the table has subword information.
    pub fn lookup(&self, word: &str) -> Option<Cow<'_, [f32]>> {
        match (self.vocab.id(word), &self.subword) {
            (Some(id), _) => Some(Cow::Borrowed(self.row(id))),
            (None, Some(sub)) => Some(Cow::Owned(sub.compose(word, None))),
            (None, None) => None,
        }
    }

    /// Path of the n-gram sidecar written next to an embedding file.
    pub fn subword_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".subword");
        PathBuf::from(s)
    }
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut dot, mut na, mut nb) = (0f64, 0f64, 0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

/// The `n` words closest to `word` by cosine, best first, the word itself
/// excluded. Ties keep vocabulary order.
pub fn nearest_neighbors(table: &EmbeddingTable, word: &str, n: usize) -> Result<Vec<(String, f64)>> {
    if n == 0 {
        return Err(Error::Argument("n must be at least 1".into()));
    }
    let query = table
        .lookup(word)
        .ok_or_else(|| Error::Lookup(word.to_owned()))?;
    let mut scored: Vec<(usize, f64)> = (0..table.len())
        .filter(|&i| table.vocab.word(i) != word)
        .map(|i| (i, cosine(&query, table.row(i))))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(scored
        .into_iter()
        .take(n)
        .map(|(i, c)| (table.vocab.word(i).to_owned(), c))
        .collect())
}

/// Writes the text format: a `m d` header, then one line per word with
/// the surface form followed by `d` values in scientific notation with
/// nine significant digits (exact for `f32`). A subword table, if present,
/// goes to the `.subword` sidecar.
pub fn save_embeddings(table: &EmbeddingTable, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{} {}", table.len(), table.dim).map_err(io)?;
    for (i, word) in table.vocab.words().enumerate() {
        w.write_all(word.as_bytes()).map_err(io)?;
        for x in table.row(i) {
            write!(w, " {x:.8e}").map_err(io)?;
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)?;
    if let Some(sub) = &table.subword {
        sub.save(&EmbeddingTable::subword_path(path))?;
    }
    Ok(())
}

/// Reads the text format. The method tag is not stored in the file, so the
/// caller supplies it; a `.subword` sidecar is attached when present.
pub fn load_embeddings(path: &Path, method: MethodTag) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let ctx = path.display().to_string();
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::format(ctx, 1, "missing header")),
    };
    let dims: Vec<&str> = header.split_whitespace().collect();
    let (m, d) = match dims.as_slice() {
        [m, d] => match (m.parse::<usize>(), d.parse::<usize>()) {
            (Ok(m), Ok(d)) if d > 0 => (m, d),
            _ => return Err(Error::format(ctx, 1, format!("malformed header {header:?}"))),
        },
        _ => return Err(Error::format(ctx, 1, format!("malformed header {header:?}"))),
    };
    let mut words = Vec::with_capacity(m);
    let mut vectors = Vec::with_capacity(m * d);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if words.len() == m {
            return Err(Error::format(ctx, lineno, format!("more than the {m} rows announced in the header")));
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().expect("line is not blank");
        let values: Vec<&str> = fields.collect();
        if values.len() != d {
            return Err(Error::format(ctx, lineno, format!("expected {d} values, found {}", values.len())));
        }
        for v in values {
            let x: f32 = v
                .parse()
                .map_err(|_| Error::format(&ctx, lineno, format!("invalid number {v:?}")))?;
            if !x.is_finite() {
                return Err(Error::format(ctx, lineno, format!("non-finite value {v:?}")));
            }
            vectors.push(x);
        }
        words.push(word.to_owned());
    }
    if words.len() != m {
        return Err(Error::format(ctx, words.len() + 2, format!("expected {m} rows, found {}", words.len())));
    }
    let vocab = Vocabulary::from_ordered(words)?;
    let table = EmbeddingTable::new(method, vocab, d, vectors)?;
    let sidecar = EmbeddingTable::subword_path(path);
    if sidecar.exists() {
        table.with_subword(SubwordTable::load(&sidecar)?)
    } else {
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::vocab::build_vocab;

    fn table(words: &[&str], dim: usize, vectors: Vec<f32>) -> EmbeddingTable {
        let vocab = Vocabulary::from_ordered(words.iter().copied()).unwrap();
        EmbeddingTable::new(MethodTag::W2vSg, vocab, dim, vectors).unwrap()
    }

    #[test]
    fn neighbors_by_cosine() {
        let t = table(&["a", "b", "c"], 2, vec![1.0, 0.0, 0.8, 0.6, 0.0, 1.0]);
        let nn = nearest_neighbors(&t, "a", 5).unwrap();
        assert_eq!(nn.len(), 2);
        assert_eq!(nn[0].0, "b");
        assert!((nn[0].1 - 0.8).abs() < 1e-7);
        assert_eq!(nn[1].0, "c");
        assert_eq!(nn[1].1, 0.0);
        assert!(nn.iter().all(|(w, _)| w != "a"));
    }

    #[test]
    fn neighbor_errors() {
        let t = table(&["a", "b"], 1, vec![1.0, 2.0]);
        assert!(matches!(nearest_neighbors(&t, "zzz", 1), Err(Error::Lookup(_))));
        assert!(nearest_neighbors(&t, "a", 0).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.vec");
        let t = table(&["ela", "foi"], 3, vec![0.1, -2.5e-7, 3.25, 1e6, 0.333333, -0.0]);
        save_embeddings(&t, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().next().unwrap(), "2 3");
        let back = load_embeddings(&p, MethodTag::W2vSg).unwrap();
        let max = t
            .vectors()
            .iter()
            .zip(back.vectors())
            .map(|(a, b)| (a - b).abs())
            .fold(0f32, f32::max);
        assert!(max <= 1e-5);
        assert_eq!(back.vocab().words().collect::<Vec<_>>(), ["ela", "foi"]);
    }

    #[test]
    fn malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.vec");
        let check = |content: &str, want_line: usize| {
            std::fs::write(&p, content).unwrap();
            match load_embeddings(&p, MethodTag::W2vCbow) {
                Err(Error::Format { line, .. }) => assert_eq!(line, want_line, "{content:?}"),
                other => panic!("expected format error for {content:?}, got {other:?}"),
            }
        };
        check("2 3\na 1 2 3\nb 1 2 3\nc 1 2 3\n", 4);
        check("two 3\n", 1);
        check("", 1);
        check("1 3\na 1 2\n", 2);
        check("1 2\na 1 NaN\n", 2);
        check("1 2\na 1 inf\n", 2);
        check("2 2\na 1 2\n", 3);
    }

    #[test]
    fn subword_sidecar_is_attached() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.vec");
        let vocab = build_vocab(["ab", "ab", "cd"], 1).unwrap();
        let sub = SubwordTable::new(2, 3, 3, 0, vec![1.0, 0.0, 0.0, 1.0], vec![0.5; 8]).unwrap();
        let mut vectors = Vec::new();
        for (i, w) in vocab.words().enumerate() {
            vectors.extend(sub.compose(w, Some(i)));
        }
        let t = EmbeddingTable::new(MethodTag::SubwordSg, vocab, 2, vectors)
            .unwrap()
            .with_subword(sub)
            .unwrap();
        save_embeddings(&t, &p).unwrap();
        let back = load_embeddings(&p, MethodTag::SubwordSg).unwrap();
        assert_eq!(back.subword(), t.subword());
        assert_eq!(back.lookup("xyz").unwrap(), t.lookup("xyz").unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn text_format_round_trips(values in prop::collection::vec(-1e3f32..1e3, 1..40)) {
                let dim = values.len();
                let t = table(&["w"], dim, values);
                let dir = tempfile::tempdir().unwrap();
                let p = dir.path().join("r.vec");
                save_embeddings(&t, &p).unwrap();
                let back = load_embeddings(&p, MethodTag::W2vSg).unwrap();
                for (a, b) in t.vectors().iter().zip(back.vectors()) {
                    prop_assert!((a - b).abs() <= 1e-5);
                }
            }
        }
    }
}
