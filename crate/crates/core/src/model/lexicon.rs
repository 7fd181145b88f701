use std::collections::HashMap;

use crate::corpus::{Label, Transcript};
use crate::error::{Error, Result};

/// Embedding row of the padding position: zero and never trained.
pub const PAD_ID: usize = 0;
/// Embedding row shared by out-of-vocabulary tokens.
pub const UNK_ID: usize = 1;
/// Rows before the first word row.
pub const RESERVED_ROWS: usize = 2;

/// Maps surface forms to embedding rows. Word `i` lives in row
/// `i + RESERVED_ROWS`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Lexicon {
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i + RESERVED_ROWS).is_some() {
                return Err(Error::Data(format!("duplicate lexicon entry {w:?}")));
            }
        }
        Ok(Lexicon { words, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Total embedding rows, reserved rows included.
    pub fn rows(&self) -> usize {
        self.words.len() + RESERVED_ROWS
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Row of a known word.
    pub fn row(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Row of `word`, or [`UNK_ID`].
    pub fn row_or_unknown(&self, word: &str) -> usize {
        self.row(word).unwrap_or(UNK_ID)
    }

    pub(crate) fn push(&mut self, word: String) -> usize {
        let row = self.words.len() + RESERVED_ROWS;
        self.index.insert(word.clone(), row);
        self.words.push(word);
        row
    }
}

/// One fixed-length training or inference window.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowInstance {
    /// Position of the first token in the source stream.
    pub start: usize,
    pub ids: Vec<usize>,
    pub labels: Vec<Label>,
    /// `true` for real tokens, `false` for padding.
    pub mask: Vec<bool>,
}

impl WindowInstance {
    /// Number of real tokens.
    pub fn real_len(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}

/// Start offsets of the windows covering `len` tokens: `0, stride, ...`
/// up to the first window that reaches the last token.
pub fn window_starts(len: usize, window: usize, stride: usize) -> Result<Vec<usize>> {
    if window == 0 || stride == 0 || stride > window {
        return Err(Error::Argument(format!("need 1 <= stride <= window, got stride {stride}, window {window}")));
    }
    let mut starts = Vec::new();
    if len == 0 {
        return Ok(starts);
    }
    let mut s = 0;
    loop {
        starts.push(s);
        if s + window >= len {
            return Ok(starts);
        }
        s += stride;
    }
}

/// Cuts a labeled transcript into windows of `window` tokens. The last
/// window is right-padded with [`PAD_ID`] and masked; unknown tokens map
/// to [`UNK_ID`].
pub fn windowize(t: &Transcript, lexicon: &Lexicon, window: usize, stride: usize) -> Result<Vec<WindowInstance>> {
    let ids: Vec<usize> = t.tokens().iter().map(|tok| lexicon.row_or_unknown(tok.as_str())).collect();
    Ok(window_starts(ids.len(), window, stride)?
        .into_iter()
        .map(|start| {
            let end = (start + window).min(ids.len());
            let real = end - start;
            let mut w = WindowInstance {
                start,
                ids: ids[start..end].to_vec(),
                labels: t.labels()[start..end].to_vec(),
                mask: vec![true; real],
            };
            w.ids.resize(window, PAD_ID);
            w.labels.resize(window, Label::NoBoundary);
            w.mask.resize(window, false);
            w
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::normalize;
    use proptest::prelude::*;

    fn transcript(n: usize) -> Transcript {
        let tokens = normalize(&(0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" "));
        let mut labels = vec![Label::NoBoundary; n];
        if n > 0 {
            labels[n - 1] = Label::Boundary;
        }
        Transcript::new("t", tokens, labels).unwrap()
    }

    #[test]
    fn five_tokens_window_three_stride_two() {
        let lex = Lexicon::from_words(vec!["w0".into(), "w3".into()]).unwrap();
        let ws = windowize(&transcript(5), &lex, 3, 2).unwrap();
        assert_eq!(ws.len(), 2);
        assert_eq!(ws[0].start, 0);
        assert_eq!(ws[1].start, 2);
        assert_eq!(ws[0].ids, vec![2, UNK_ID, UNK_ID]);
        assert_eq!(ws[1].ids, vec![UNK_ID, 3, UNK_ID]);
        assert!(ws.iter().all(|w| w.mask.iter().all(|m| *m)));
    }

    #[test]
    fn short_transcript_is_padded() {
        let ws = windowize(&transcript(2), &Lexicon::default(), 4, 2).unwrap();
        assert_eq!(ws.len(), 1);
        assert_eq!(ws[0].mask, vec![true, true, false, false]);
        assert_eq!(&ws[0].ids[2..], &[PAD_ID, PAD_ID]);
        assert_eq!(ws[0].labels[1], Label::Boundary);
    }

    #[test]
    fn invalid_stride() {
        assert!(window_starts(5, 3, 0).is_err());
        assert!(window_starts(5, 3, 4).is_err());
        assert!(window_starts(0, 3, 3).unwrap().is_empty());
    }

    #[test]
    fn duplicate_words_rejected() {
        assert!(Lexicon::from_words(vec!["a".into(), "a".into()]).is_err());
    }

    proptest! {
        #[test]
        fn windows_cover_every_token(n in 1usize..120, window in 1usize..20, stride_frac in 0.0f64..1.0) {
            let stride = 1 + ((window - 1) as f64 * stride_frac) as usize;
            let ws = windowize(&transcript(n), &Lexicon::default(), window, stride).unwrap();
            let mut cover = vec![0usize; n];
            for w in &ws {
                prop_assert_eq!(w.ids.len(), window);
                for (k, m) in w.mask.iter().enumerate() {
                    if *m {
                        cover[w.start + k] += 1;
                    } else {
                        prop_assert_eq!(w.ids[k], PAD_ID);
                    }
                }
            }
            prop_assert!(cover.iter().all(|c| *c >= 1));
            if stride == window {
                prop_assert!(cover.iter().all(|c| *c == 1));
            }
        }
    }
}
