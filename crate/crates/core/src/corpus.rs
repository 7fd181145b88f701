//! Text normalization, gold-label ingestion and fold assignment.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Marks that are split off into tokens of their own.
pub const PUNCTUATION: [char; 10] = ['.', ',', ';', ':', '!', '?', '…', '"', '(', ')'];

fn is_punct(c: char) -> bool {
    PUNCTUATION.contains(&c)
}

/// A normalized token: lowercase, no whitespace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    /// Builds a token from text that is already normalized.
    ///
    /// Returns `None` if `s` is empty, contains whitespace or is not
    /// lowercase.
    pub fn new(s: &str) -> Option<Token> {
        if s.is_empty() || s.chars().any(char::is_whitespace) || s.to_lowercase() != s {
            None
        } else {
            Some(Token(s.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True for tokens made of a single punctuation mark.
    pub fn is_punctuation(&self) -> bool {
        let mut chars = self.0.chars();
        matches!((chars.next(), chars.next()), (Some(c), None) if is_punct(c))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Per-token gold or predicted class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    /// The token is the last one of its sentence.
    Boundary,
    NoBoundary,
}

impl Label {
    pub fn is_boundary(self) -> bool {
        self == Label::Boundary
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Boundary => "B",
            Label::NoBoundary => "NB",
        })
    }
}

/// Lowercases `text`, splits punctuation marks off into their own tokens
/// and tokenizes on whitespace. Stopwords are kept.
pub fn normalize(text: &str) -> Vec<Token> {
    let lower = text.to_lowercase();
    let mut spaced = String::with_capacity(lower.len() + 8);
    for c in lower.chars() {
        if is_punct(c) {
            spaced.push(' ');
            spaced.push(c);
            spaced.push(' ');
        } else {
            spaced.push(c);
        }
    }
    spaced
        .split_whitespace()
        .map(|s| Token(s.to_owned()))
        .collect()
}

/// Joins tokens with single spaces.
pub fn join(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(Token::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}

/// A token sequence with one boundary label per token.
#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    id: String,
    tokens: Vec<Token>,
    labels: Vec<Label>,
}

impl Transcript {
    /// Checks that labels line up with tokens and that a non-empty
    /// transcript ends in a boundary.
    pub fn new(id: impl Into<String>, tokens: Vec<Token>, labels: Vec<Label>) -> Result<Self> {
        let id = id.into();
        if tokens.len() != labels.len() {
            return Err(Error::Data(format!(
                "transcript {id}: {} tokens but {} labels",
                tokens.len(),
                labels.len()
            )));
        }
        if labels.last().is_some_and(|l| !l.is_boundary()) {
            return Err(Error::Data(format!(
                "transcript {id}: final token is not a sentence boundary"
            )));
        }
        Ok(Transcript { id, tokens, labels })
    }

    /// Builds a transcript from already-normalized sentences.
    pub fn from_sentences(id: impl Into<String>, sentences: Vec<Vec<Token>>) -> Result<Self> {
        let id = id.into();
        let mut tokens = Vec::new();
        let mut labels = Vec::new();
        for (i, sentence) in sentences.into_iter().enumerate() {
            if sentence.is_empty() {
                return Err(Error::Data(format!("transcript {id}: sentence {i} is empty")));
            }
            let n = sentence.len();
            tokens.extend(sentence);
            labels.extend((0..n).map(|j| {
                if j + 1 == n {
                    Label::Boundary
                } else {
                    Label::NoBoundary
                }
            }));
        }
        Transcript::new(id, tokens, labels)
    }

    /// Parses one-sentence-per-line text.
    ///
    /// `first_line` is the 1-based line number of `text` in its source,
    /// used for error messages.
    pub fn parse_segmented(id: impl Into<String>, text: &str, context: &str, first_line: usize) -> Result<Self> {
        let mut sentences = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let tokens = normalize(line);
            if tokens.is_empty() {
                return Err(Error::format(
                    context,
                    first_line + i,
                    "sentence normalizes to zero tokens",
                ));
            }
            sentences.push(tokens);
        }
        Transcript::from_sentences(id, sentences)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn sentence_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_boundary()).count()
    }

    /// Sentences as token slices, split after every boundary.
    pub fn sentences(&self) -> Vec<&[Token]> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, label) in self.labels.iter().enumerate() {
            if label.is_boundary() {
                out.push(&self.tokens[start..=i]);
                start = i + 1;
            }
        }
        out
    }

    /// One sentence per line, newline-terminated.
    pub fn to_segmented_text(&self) -> String {
        let mut out = String::new();
        for sentence in self.sentences() {
            out.push_str(&join(sentence));
            out.push('\n');
        }
        out
    }

    /// Drops punctuation tokens. A boundary carried by a dropped token moves
    /// to the closest preceding kept token.
    pub fn without_punctuation(&self) -> Transcript {
        let mut tokens: Vec<Token> = Vec::with_capacity(self.tokens.len());
        let mut labels: Vec<Label> = Vec::with_capacity(self.tokens.len());
        for (token, &label) in self.tokens.iter().zip(&self.labels) {
            if token.is_punctuation() {
                if label.is_boundary() {
                    if let Some(last) = labels.last_mut() {
                        *last = Label::Boundary;
                    }
                }
            } else {
                tokens.push(token.clone());
                labels.push(label);
            }
        }
        if let Some(last) = labels.last_mut() {
            *last = Label::Boundary;
        }
        Transcript {
            id: self.id.clone(),
            tokens,
            labels,
        }
    }
}

/// Reads a one-sentence-per-line file into a single transcript whose id is
/// the file stem.
pub fn load_segmented(path: &Path) -> Result<Transcript> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let context = path.display().to_string();
    Transcript::parse_segmented(file_stem(path), &text, &context, 1)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "transcript".to_owned())
}

/// Which tokens survive [`strip_labels`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PunctMode {
    #[default]
    Strip,
    Keep,
}

/// Discards gold labels, yielding the unsegmented stream inference sees.
pub fn strip_labels(t: &Transcript, mode: PunctMode) -> Vec<Token> {
    match mode {
        PunctMode::Keep => t.tokens.clone(),
        PunctMode::Strip => t
            .tokens
            .iter()
            .filter(|tok| !tok.is_punctuation())
            .cloned()
            .collect(),
    }
}

/// A named collection of transcripts with unique ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    name: String,
    transcripts: Vec<Transcript>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, transcripts: Vec<Transcript>) -> Result<Self> {
        let mut seen = HashSet::new();
        for t in &transcripts {
            if !seen.insert(t.id()) {
                return Err(Error::Data(format!("duplicate transcript id {}", t.id())));
            }
        }
        Ok(Dataset {
            name: name.into(),
            transcripts,
        })
    }

    /// Loads a segmented corpus.
    ///
    /// A directory holds one transcript per file (sorted by file name,
    /// hidden files skipped). A single file holds transcripts separated by
    /// blank lines; their ids are `<stem>:<index>`.
    pub fn load(path: &Path) -> Result<Self> {
        let name = file_stem(path);
        let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
        if meta.is_dir() {
            let mut files = Vec::new();
            for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
                let entry = entry.map_err(|e| Error::io(path, e))?;
                let p = entry.path();
                let hidden = p
                    .file_name()
                    .is_some_and(|n| n.to_string_lossy().starts_with('.'));
                if p.is_file() && !hidden {
                    files.push(p);
                }
            }
            files.sort();
            let transcripts = files
                .iter()
                .map(|p| load_segmented(p))
                .collect::<Result<Vec<_>>>()?;
            Dataset::new(name, transcripts)
        } else {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Dataset::parse_multi(&name, &text, &path.display().to_string())
        }
    }

    /// Parses blank-line-separated transcripts from one string.
    pub fn parse_multi(name: &str, text: &str, context: &str) -> Result<Self> {
        let mut transcripts = Vec::new();
        let mut block = String::new();
        let mut block_start = 1;
        let lines: Vec<&str> = text.lines().collect();
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                if !block.is_empty() {
                    let id = format!("{name}:{}", transcripts.len());
                    transcripts.push(Transcript::parse_segmented(id, &block, context, block_start)?);
                    block.clear();
                }
                block_start = i + 2;
            } else {
                block.push_str(line);
                block.push('\n');
            }
        }
        if !block.is_empty() {
            let id = format!("{name}:{}", transcripts.len());
            transcripts.push(Transcript::parse_segmented(id, &block, context, block_start)?);
        }
        Dataset::new(name, transcripts)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn transcripts(&self) -> &[Transcript] {
        &self.transcripts
    }

    pub fn len(&self) -> usize {
        self.transcripts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transcripts.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.transcripts.iter().map(Transcript::len).sum()
    }

    /// Dataset with punctuation tokens removed from every transcript.
    pub fn without_punctuation(&self) -> Dataset {
        Dataset {
            name: self.name.clone(),
            transcripts: self.transcripts.iter().map(Transcript::without_punctuation).collect(),
        }
    }

    /// A dataset made of the given transcripts, by position.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            transcripts: indices.iter().map(|&i| self.transcripts[i].clone()).collect(),
        }
    }
}

/// Assignment of every transcript to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldSplit {
    k: usize,
    assignments: BTreeMap<String, usize>,
}

impl FoldSplit {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &BTreeMap<String, usize> {
        &self.assignments
    }

    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignments.get(id).copied()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignments.values() {
            sizes[f] += 1;
        }
        sizes
    }

    /// Positions in `d` of the training and test transcripts for `fold`.
    pub fn split(&self, d: &Dataset, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, t) in d.transcripts().iter().enumerate() {
            if self.fold_of(t.id()) == Some(fold) {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }
}

/// Shuffled round-robin assignment of transcripts to `k` folds.
pub fn kfold(d: &Dataset, k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 {
        return Err(Error::Argument(format!("k must be at least 2, got {k}")));
    }
    if k > d.len() {
        return Err(Error::Argument(format!(
            "k = {k} exceeds the number of transcripts ({})",
            d.len()
        )));
    }
    let mut order: Vec<usize> = (0..d.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let assignments = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| (d.transcripts[i].id.clone(), pos % k))
        .collect();
    Ok(FoldSplit { k, assignments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn toks(words: &[&str]) -> Vec<Token> {
        words.iter().map(|w| Token::new(w).unwrap()).collect()
    }

    fn dataset(n: usize) -> Dataset {
        let transcripts = (0..n)
            .map(|i| Transcript::from_sentences(format!("t{i}"), vec![toks(&["a", "b"])]).unwrap())
            .collect();
        Dataset::new("d", transcripts).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("Olá, Mundo."), toks(&["olá", ",", "mundo", "."]));
        assert!(normalize("").is_empty());
        assert_eq!(normalize("a  b"), toks(&["a", "b"]));
        assert_eq!(normalize("Ela (não) foi… certo?"), toks(&["ela", "(", "não", ")", "foi", "…", "certo", "?"]));
    }

    #[test]
    fn stopwords_are_kept() {
        assert_eq!(normalize("o a de que"), toks(&["o", "a", "de", "que"]));
    }

    #[test]
    fn token_rejects_unnormalized() {
        assert!(Token::new("Ab").is_none());
        assert!(Token::new("a b").is_none());
        assert!(Token::new("").is_none());
        assert!(Token::new(".").unwrap().is_punctuation());
        assert!(!Token::new("..").unwrap().is_punctuation());
    }

    #[test]
    fn load_segmented_labels_line_ends() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "ela foi\nele não foi").unwrap();
        let t = load_segmented(f.path()).unwrap();
        assert_eq!(t.tokens(), toks(&["ela", "foi", "ele", "não", "foi"]).as_slice());
        use Label::*;
        assert_eq!(t.labels(), &[NoBoundary, Boundary, NoBoundary, NoBoundary, Boundary]);
        assert_eq!(t.sentence_count(), 2);
    }

    #[test]
    fn load_segmented_minimal_and_counts() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "sim\n").unwrap();
        let t = load_segmented(f.path()).unwrap();
        assert_eq!(t.labels(), &[Label::Boundary]);

        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "a b c\nd\ne f\n").unwrap();
        assert_eq!(load_segmented(f.path()).unwrap().sentence_count(), 3);
    }

    #[test]
    fn load_segmented_errors() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "a b\n   \nc\n").unwrap();
        match load_segmented(f.path()) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
        let missing = Path::new("/nonexistent/definitely/not/here.txt");
        assert!(matches!(load_segmented(missing), Err(Error::Io { .. })));
    }

    #[test]
    fn strip_labels_modes() {
        let t = Transcript::from_sentences("x", vec![toks(&["ela", "foi", "."])]).unwrap();
        assert_eq!(strip_labels(&t, PunctMode::Strip), toks(&["ela", "foi"]));
        assert_eq!(strip_labels(&t, PunctMode::Keep), toks(&["ela", "foi", "."]));
        let empty = Transcript::new("e", vec![], vec![]).unwrap();
        assert!(strip_labels(&empty, PunctMode::Strip).is_empty());
    }

    #[test]
    fn without_punctuation_moves_boundary() {
        let t = Transcript::from_sentences("x", vec![toks(&["ela", "foi", "."]), toks(&["sim", "!"])]).unwrap();
        let s = t.without_punctuation();
        assert_eq!(s.tokens(), toks(&["ela", "foi", "sim"]).as_slice());
        assert_eq!(s.labels(), &[Label::NoBoundary, Label::Boundary, Label::Boundary]);
    }

    #[test]
    fn transcript_invariants_enforced() {
        assert!(Transcript::new("x", toks(&["a"]), vec![]).is_err());
        assert!(Transcript::new("x", toks(&["a"]), vec![Label::NoBoundary]).is_err());
        assert!(Dataset::new("d", vec![dataset(1).transcripts[0].clone(), dataset(1).transcripts[0].clone()]).is_err());
    }

    #[test]
    fn multi_transcript_file() {
        let d = Dataset::parse_multi("c", "a b\nc\n\n\nd e\n", "c").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.transcripts()[0].id(), "c:0");
        assert_eq!(d.transcripts()[1].sentence_count(), 1);
        assert_eq!(d.token_count(), 5);
    }

    #[test]
    fn kfold_sizes() {
        let split = kfold(&dataset(60), 5, 1).unwrap();
        assert_eq!(split.fold_sizes(), vec![12; 5]);

        // Round robin over 7 shuffled items: positions 0..7 mod 5.
        let split = kfold(&dataset(7), 5, 3).unwrap();
        assert_eq!(split.fold_sizes(), vec![2, 2, 1, 1, 1]);
    }

    #[test]
    fn kfold_is_deterministic() {
        let d = dataset(10);
        assert_eq!(kfold(&d, 5, 42).unwrap(), kfold(&d, 5, 42).unwrap());
    }

    #[test]
    fn kfold_argument_errors() {
        assert!(matches!(kfold(&dataset(3), 5, 0), Err(Error::Argument(_))));
        assert!(matches!(kfold(&dataset(3), 1, 0), Err(Error::Argument(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalize_is_idempotent(s in "\\PC{0,40}") {
                let once = normalize(&s);
                prop_assert_eq!(normalize(&join(&once)), once.clone());
                for t in &once {
                    prop_assert!(!t.as_str().chars().any(char::is_whitespace));
                    prop_assert_eq!(t.as_str().to_lowercase(), t.as_str());
                }
            }

            #[test]
            fn segmented_round_trip(lines in prop::collection::vec("[a-zà-ú]{1,6}( [a-z]{1,5}){0,4}", 1..8)) {
                let text = lines.join("\n");
                let t = Transcript::parse_segmented("x", &text, "x", 1).unwrap();
                prop_assert_eq!(t.sentence_count(), lines.len());
                let normalized: String = lines.iter().map(|l| join(&normalize(l)) + "\n").collect();
                prop_assert_eq!(t.to_segmented_text(), normalized);
            }

            #[test]
            fn folds_partition_dataset(n in 2usize..40, k in 2usize..10, seed in any::<u64>()) {
                prop_assume!(k <= n);
                let d = dataset(n);
                let split = kfold(&d, k, seed).unwrap();
                prop_assert_eq!(split.assignments().len(), n);
                let sizes = split.fold_sizes();
                prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
                let mut seen = 0;
                for f in 0..k {
                    let (train, test) = split.split(&d, f);
                    prop_assert_eq!(train.len() + test.len(), n);
                    seen += test.len();
                }
                prop_assert_eq!(seen, n);
            }
        }
    }
}
