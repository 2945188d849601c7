use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

pub const PAD_ID: u32 = 0;
pub const OOV_ID: u32 = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const OOV_TOKEN: &str = "<oov>";
const FIRST_ID: u32 = 2;

/// Token-to-id map with `0 = PAD`, `1 = OOV` and real tokens from 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    /// `tokens[i]` has id `i + 2`.
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    max_size: usize,
}

impl Vocabulary {
    /// Ranks tokens by descending frequency, ties broken lexicographically,
    /// and keeps the top `max_size - 2`.
    pub fn build<S: AsRef<str>>(corpus: &[Vec<S>], max_size: usize) -> Result<Self> {
        if max_size < 2 {
            return Err(Error::InvalidArgument(format!(
                "vocabulary size {max_size} leaves no room for PAD and OOV"
            )));
        }
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for doc in corpus {
            for tok in doc {
                *counts.entry(tok.as_ref()).or_default() += 1;
            }
        }
        if counts.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot build a vocabulary from an empty corpus".into(),
            ));
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        // BTreeMap order is already lexicographic; a stable sort keeps it
        // within equal counts.
        ranked.sort_by_key(|&(_, count)| std::cmp::Reverse(count));
        ranked.truncate(max_size - 2);
        Self::from_tokens(ranked.into_iter().map(|(t, _)| t.to_string()).collect(), max_size)
    }

    /// Rebuilds a vocabulary from its id-ordered token list.
    pub fn from_tokens(tokens: Vec<String>, max_size: usize) -> Result<Self> {
        if tokens.len() + 2 > max_size {
            return Err(Error::InvalidArgument(format!(
                "{} tokens exceed vocabulary size {max_size}",
                tokens.len()
            )));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32 + FIRST_ID).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate vocabulary token `{t}`")));
            }
        }
        Ok(Vocabulary {
            tokens,
            index,
            max_size,
        })
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(OOV_ID)
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        match id {
            PAD_ID => PAD_TOKEN,
            OOV_ID => OOV_TOKEN,
            _ => self
                .tokens
                .get((id - FIRST_ID) as usize)
                .map(String::as_str)
                .unwrap_or(OOV_TOKEN),
        }
    }

    /// Real tokens in id order (id of `tokens()[i]` is `i + 2`).
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Number of real tokens (excluding PAD and OOV).
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Lines of `id<TAB>token`, PAD and OOV included.
    pub fn to_text(&self) -> String {
        let mut out = format!("{PAD_ID}\t{PAD_TOKEN}\n{OOV_ID}\t{OOV_TOKEN}\n");
        for (i, t) in self.tokens.iter().enumerate() {
            out.push_str(&format!("{}\t{t}\n", i as u32 + FIRST_ID));
        }
        out
    }

    /// Parses the output of [`Vocabulary::to_text`].
    pub fn from_text(text: &str, max_size: usize) -> Result<Self> {
        let mut tokens = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let (id, token) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("vocabulary line {}: missing tab", n + 1)))?;
            if id.parse::<usize>().ok() != Some(n) {
                return Err(Error::Parse(format!("vocabulary line {}: expected id {n}", n + 1)));
            }
            let expected = match n {
                0 => Some(PAD_TOKEN),
                1 => Some(OOV_TOKEN),
                _ => None,
            };
            match expected {
                Some(reserved) if token != reserved => {
                    return Err(Error::Parse(format!("vocabulary line {}: expected `{reserved}`", n + 1)))
                }
                Some(_) => {}
                None => tokens.push(token.to_string()),
            }
        }
        Self::from_tokens(tokens, max_size)
    }
}
