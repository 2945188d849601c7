//! Cleaning, tokenisation, stemming and fixed-length encoding.

mod porter;
mod stopwords;
mod vocab;

use std::fs;
use std::io::Write;
use std::path::Path;

pub use porter::stem;
pub use stopwords::{StopList, DEFAULT_STOPWORDS, DEFAULT_STOPWORDS_SHA256};
pub use vocab::{Vocabulary, OOV_ID, OOV_TOKEN, PAD_ID, PAD_TOKEN};

use crate::corpus::Record;
use crate::error::{Error, Result};

/// Lowercases, maps every character outside `[a-z0-9]` to a space,
/// collapses runs of spaces and trims.
pub fn clean(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_lowercase() || c.is_ascii_digit() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

/// Splits cleaned text on whitespace, drops stop words and stems the rest.
pub fn tokenize_stem(cleaned: &str, stoplist: &StopList) -> Vec<String> {
    cleaned
        .split_whitespace()
        .filter(|t| !stoplist.contains(t))
        .map(stem)
        .collect()
}

/// Maps tokens to ids (unknown → OOV), keeps the first `max_len` and
/// post-pads with PAD.
pub fn encode_pad<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary, max_len: usize) -> Vec<u32> {
    let mut ids: Vec<u32> = tokens
        .iter()
        .take(max_len)
        .map(|t| vocab.id(t.as_ref()))
        .collect();
    ids.resize(max_len, PAD_ID);
    ids
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedExample {
    pub ids: Vec<u32>,
    pub label: u8,
}

impl EncodedExample {
    /// Positions that hold a real (non-PAD) token.
    pub fn content_positions(&self) -> Vec<usize> {
        self.ids
            .iter()
            .enumerate()
            .filter(|(_, &id)| id != PAD_ID)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EncodedSplit {
    pub train: Vec<EncodedExample>,
    pub validation: Vec<EncodedExample>,
    pub test: Vec<EncodedExample>,
}

/// Everything needed to turn raw text into model input.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub stoplist: StopList,
    pub vocab: Vocabulary,
    pub max_len: usize,
}

impl Preprocessor {
    /// Fits the vocabulary on `train` only.
    pub fn fit(train: &[Record], stoplist: StopList, vocab_size: usize, max_len: usize) -> Result<Self> {
        let docs: Vec<Vec<String>> = train
            .iter()
            .map(|r| tokenize_stem(&clean(&r.text), &stoplist))
            .collect();
        let vocab = Vocabulary::build(&docs, vocab_size)?;
        Ok(Preprocessor {
            stoplist,
            vocab,
            max_len,
        })
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        tokenize_stem(&clean(text), &self.stoplist)
    }

    pub fn encode_text(&self, text: &str) -> Vec<u32> {
        encode_pad(&self.tokens(text), &self.vocab, self.max_len)
    }

    pub fn encode(&self, records: &[Record]) -> Vec<EncodedExample> {
        records
            .iter()
            .map(|r| EncodedExample {
                ids: self.encode_text(&r.text),
                label: r.label,
            })
            .collect()
    }
}

/// Writes one example per line: `label<TAB>id id id ...`.
pub fn write_encoded(path: &Path, examples: &[EncodedExample]) -> Result<()> {
    let mut buf = Vec::new();
    for ex in examples {
        write!(buf, "{}\t", ex.label).expect("write to Vec");
        for (i, id) in ex.ids.iter().enumerate() {
            if i > 0 {
                buf.push(b' ');
            }
            write!(buf, "{id}").expect("write to Vec");
        }
        buf.push(b'\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_encoded(path: &Path) -> Result<Vec<EncodedExample>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(n, line)| {
            let bad = |what: &str| Error::Parse(format!("{}:{}: {what}", path.display(), n + 1));
            let (label, ids) = line.split_once('\t').ok_or_else(|| bad("missing tab"))?;
            let label: u8 = label.parse().map_err(|_| bad("bad label"))?;
            if label > 1 {
                return Err(bad("label must be 0 or 1"));
            }
            let ids = ids
                .split(' ')
                .map(|s| s.parse::<u32>().map_err(|_| bad("bad token id")))
                .collect::<Result<Vec<_>>>()?;
            Ok(EncodedExample { ids, label })
        })
        .collect()
}
