use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::FeedError;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");
const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.tsv");

/// Lowercased alphanumeric runs of `text`, in order.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        Self(data_lines(text).map(str::to_lowercase).collect())
    }

    pub fn load(path: &Path) -> Result<Self, FeedError> {
        let text = std::fs::read_to_string(path).map_err(|e| FeedError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Ok(Self::parse(&text))
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

impl Default for Stopwords {
    fn default() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }
}

/// Token polarities for lexicon sentiment scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon(HashMap<String, f64>);

impl Lexicon {
    /// `token<TAB>polarity` per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, FeedError> {
        let mut map = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || FeedError::Lexicon {
                line: n + 1,
                content: line.to_owned(),
            };
            let (token, polarity) = line.split_once('\t').ok_or_else(bad)?;
            let polarity: f64 = polarity.trim().parse().map_err(|_| bad())?;
            if !polarity.is_finite() {
                return Err(bad());
            }
            map.insert(token.trim().to_lowercase(), polarity);
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self, FeedError> {
        let text = std::fs::read_to_string(path).map_err(|e| FeedError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self(pairs.into_iter().map(|(t, p)| (t.to_lowercase(), p)).collect())
    }

    pub fn polarity(&self, token: &str) -> Option<f64> {
        self.0.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("bundled lexicon parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_lowercases_and_splits() {
        assert_eq!(tokenize("Supply-Chain  risk, Q3!"), vec!["supply", "chain", "risk", "q3"]);
        assert!(tokenize("  ").is_empty());
    }

    #[test]
    fn bundled_data_loads() {
        assert!(Stopwords::default().contains("the"));
        assert_eq!(Lexicon::default().polarity("loss"), Some(-1.0));
    }

    #[test]
    fn lexicon_rejects_malformed_line() {
        assert!(matches!(Lexicon::parse("good 1"), Err(FeedError::Lexicon { line: 1, .. })));
        assert!(matches!(Lexicon::parse("# c\ngood\tx"), Err(FeedError::Lexicon { line: 2, .. })));
    }
}
