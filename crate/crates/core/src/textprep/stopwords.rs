use std::collections::HashSet;

/// The embedded 127-word English stop list, one token per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// SHA-256 of [`DEFAULT_STOPWORDS`]. Changing the list changes every
/// vocabulary built from it, so the digest is pinned.
pub const DEFAULT_STOPWORDS_SHA256: &str =
    "b3f772a000465cb76e23adb03b47073c591c156fad8f7af09c8b8e80d6bd8eac";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopList(HashSet<String>);

impl StopList {
    pub fn parse(text: &str) -> Self {
        StopList(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect(),
        )
    }

    pub fn empty() -> Self {
        StopList(HashSet::new())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for StopList {
    fn default() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }
}

impl<S: Into<String>> FromIterator<S> for StopList {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopList(iter.into_iter().map(Into::into).collect())
    }
}
