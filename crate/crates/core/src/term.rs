use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("term is empty after normalization: {raw:?}")]
pub struct InvalidTerm {
    pub raw: String,
}

/// A normalized keyword or synonym: lowercase, words separated by exactly one
/// space, no surrounding whitespace. May span several words ("data mining").
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term(String);

impl Term {
    pub fn new(raw: &str) -> Result<Self, InvalidTerm> {
        normalize_term(raw)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Words of the term as produced by the index tokenizer. This is what gets
    /// matched against postings, so "red-black" yields two words.
    pub fn words(&self) -> Vec<String> {
        crate::text_index::tokenize(&self.0)
            .into_iter()
            .map(|(w, _)| w)
            .collect()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Term {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub fn normalize_term(raw: &str) -> Result<Term, InvalidTerm> {
    let mut out = String::with_capacity(raw.len());
    for word in raw.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    if out.is_empty() {
        return Err(InvalidTerm { raw: raw.to_owned() });
    }
    Ok(Term(out))
}
