//! Character lookup tables and the padded index / one-hot encodings fed to the
//! sequence model.
//!
//! Index layout: `PAD` is always 0. Target alphabets reserve 1 for `START` and
//! 2 for `END`. Content characters follow in code-point order.

use std::collections::HashMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PAD: usize = 0;
pub const START: usize = 1;
pub const END: usize = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("cannot build an alphabet from an empty corpus")]
    EmptyCorpus,
    #[error("character {ch:?} in {word:?} is not in the {side} alphabet")]
    UnknownChar { ch: char, word: String, side: Side },
    #[error("{word:?} has {len} characters, longer than the maximum of {max_len}")]
    TooLong {
        word: String,
        len: usize,
        max_len: usize,
    },
    #[error("index {index} out of range for alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("duplicate or unsorted symbol {0:?} in alphabet")]
    BadSymbols(char),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Source => "source",
            Side::Target => "target",
        })
    }
}

/// What to do with a character missing from the alphabet.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UnknownPolicy {
    #[default]
    Error,
    /// Drop the character and carry on.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    side: Side,
    symbols: Vec<char>,
    index: HashMap<char, usize>,
}

impl Alphabet {
    /// Rebuild from a stored symbol list, which must be strictly increasing.
    pub fn from_symbols(side: Side, symbols: Vec<char>) -> Result<Self, CodecError> {
        for w in symbols.windows(2) {
            if w[0] >= w[1] {
                return Err(CodecError::BadSymbols(w[1]));
            }
        }
        let offset = Self::reserved_for(side);
        let index = symbols
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i + offset))
            .collect();
        Ok(Self {
            side,
            symbols,
            index,
        })
    }

    fn reserved_for(side: Side) -> usize {
        match side {
            Side::Source => 1,
            Side::Target => 3,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Number of reserved symbols preceding the content characters.
    pub fn reserved(&self) -> usize {
        Self::reserved_for(self.side)
    }

    /// Content characters in index order.
    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    /// Total size including reserved symbols.
    pub fn len(&self) -> usize {
        self.symbols.len() + self.reserved()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    /// Content character at `index`; `None` for reserved indices.
    pub fn char_at(&self, index: usize) -> Option<char> {
        index
            .checked_sub(self.reserved())
            .and_then(|i| self.symbols.get(i).copied())
    }

    pub fn contains(&self, c: char) -> bool {
        self.index.contains_key(&c)
    }

    /// Sequence length for words of at most `max_len` characters.
    pub fn seq_len(&self, max_len: usize) -> usize {
        match self.side {
            Side::Source => max_len,
            Side::Target => max_len + 2,
        }
    }
}

/// Every observed character plus the reserved symbols, sorted by code point.
/// A source corpus over `a`..=`z` alone yields the full 26-letter alphabet.
pub fn build_alphabet<S: AsRef<str>>(corpus: &[S], side: Side) -> Result<Alphabet, CodecError> {
    if corpus.is_empty() {
        return Err(CodecError::EmptyCorpus);
    }
    let mut chars: Vec<char> = corpus.iter().flat_map(|w| w.as_ref().chars()).collect();
    if side == Side::Source && chars.iter().all(|c| c.is_ascii_lowercase()) {
        chars.extend('a'..='z');
    }
    chars.sort_unstable();
    chars.dedup();
    Alphabet::from_symbols(side, chars)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSequence {
    pub indices: Vec<usize>,
    /// `true` where the position holds a real character (START/END included).
    pub mask: Vec<bool>,
}

impl EncodedSequence {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Encode `w` into exactly `alphabet.seq_len(max_len)` indices.
pub fn encode(w: &str, alphabet: &Alphabet, max_len: usize) -> Result<EncodedSequence, CodecError> {
    encode_with(w, alphabet, max_len, UnknownPolicy::Error)
}

pub fn encode_with(
    w: &str,
    alphabet: &Alphabet,
    max_len: usize,
    policy: UnknownPolicy,
) -> Result<EncodedSequence, CodecError> {
    let mut content = Vec::with_capacity(max_len);
    for ch in w.chars() {
        match (alphabet.index_of(ch), policy) {
            (Some(i), _) => content.push(i),
            (None, UnknownPolicy::Skip) => {}
            (None, UnknownPolicy::Error) => {
                return Err(CodecError::UnknownChar {
                    ch,
                    word: w.to_owned(),
                    side: alphabet.side(),
                })
            }
        }
    }
    if content.len() > max_len {
        return Err(CodecError::TooLong {
            word: w.to_owned(),
            len: content.len(),
            max_len,
        });
    }
    let total = alphabet.seq_len(max_len);
    let mut indices = Vec::with_capacity(total);
    if alphabet.side() == Side::Target {
        indices.push(START);
    }
    indices.extend(content);
    if alphabet.side() == Side::Target {
        indices.push(END);
    }
    let real = indices.len();
    indices.resize(total, PAD);
    let mask = (0..total).map(|i| i < real).collect();
    Ok(EncodedSequence { indices, mask })
}

/// `len × alphabet.len()` matrix with a single 1.0 per row.
pub fn to_one_hot(e: &EncodedSequence, alphabet: &Alphabet) -> Array2<f64> {
    let mut m = Array2::zeros((e.indices.len(), alphabet.len()));
    for (row, &i) in e.indices.iter().enumerate() {
        m[[row, i]] = 1.0;
    }
    m
}

/// Concatenate content characters, skipping `PAD` and `START`, stopping at
/// the first `END`.
pub fn decode(indices: &[usize], alphabet: &Alphabet) -> Result<String, CodecError> {
    let mut out = String::new();
    for &i in indices {
        if i >= alphabet.len() {
            return Err(CodecError::IndexOutOfRange {
                index: i,
                size: alphabet.len(),
            });
        }
        if alphabet.side() == Side::Target && i == END {
            break;
        }
        if let Some(c) = alphabet.char_at(i) {
            out.push(c);
        }
    }
    Ok(out)
}
