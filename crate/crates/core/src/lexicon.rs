//! Two-column lexicons: the parallel training lexicon, the transliteration
//! dictionary and word-level test sets.
//!
//! All three share one on-disk format: UTF-8, one pair per line, the two
//! fields separated by a single tab. Blank lines, comments and carriage
//! returns are rejected. Every line, including the last, is written back with
//! a trailing `\n`; a file whose final line lacks the newline still loads, so
//! re-serializing it adds exactly that one byte.

use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected 2 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: column {column} is empty")]
    EmptyField { line: usize, column: usize },
    #[error("line {line}: carriage return not permitted")]
    CarriageReturn { line: usize },
    #[error("lexicon is empty")]
    Empty,
}

/// Parse TSV pairs; line numbers in errors are 1-based.
fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, LexiconError> {
    if text.is_empty() {
        return Err(LexiconError::Empty);
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut pairs = Vec::new();
    for (i, raw) in body.split('\n').enumerate() {
        let line = i + 1;
        if raw.contains('\r') {
            return Err(LexiconError::CarriageReturn { line });
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 2 {
            let found = if raw.is_empty() { 0 } else { fields.len() };
            return Err(LexiconError::ColumnCount { line, found });
        }
        for (column, field) in fields.iter().enumerate() {
            if field.is_empty() {
                return Err(LexiconError::EmptyField {
                    line,
                    column: column + 1,
                });
            }
        }
        pairs.push((fields[0].to_owned(), fields[1].to_owned()));
    }
    Ok(pairs)
}

fn read(path: &Path) -> Result<String, LexiconError> {
    fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_pairs<'a>(
    f: &mut fmt::Formatter<'_>,
    pairs: impl Iterator<Item = (&'a str, &'a str)>,
) -> fmt::Result {
    for (a, b) in pairs {
        writeln!(f, "{a}\t{b}")?;
    }
    Ok(())
}

/// One (user transliteration, standard transliteration) training pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub source: String,
    pub target: String,
}

/// Variation data mapping user spellings to canonical transliterations.
/// Duplicate sources, and duplicate pairs, are kept as they appear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelLexicon {
    entries: Vec<LexiconEntry>,
}

impl ParallelLexicon {
    pub fn new(entries: Vec<LexiconEntry>) -> Result<Self, LexiconError> {
        if entries.is_empty() {
            return Err(LexiconError::Empty);
        }
        for (i, e) in entries.iter().enumerate() {
            if e.source.is_empty() {
                return Err(LexiconError::EmptyField {
                    line: i + 1,
                    column: 1,
                });
            }
            if e.target.is_empty() {
                return Err(LexiconError::EmptyField {
                    line: i + 1,
                    column: 2,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let entries = parse_pairs(text)?
            .into_iter()
            .map(|(source, target)| LexiconEntry { source, target })
            .collect();
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for ParallelLexicon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pairs(
            f,
            self.entries
                .iter()
                .map(|e| (e.source.as_str(), e.target.as_str())),
        )
    }
}

pub fn load_parallel_lexicon(path: impl AsRef<Path>) -> Result<ParallelLexicon, LexiconError> {
    ParallelLexicon::parse(&read(path.as_ref())?)
}

/// A native-script word and its canonical transliteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictionaryEntry {
    pub native: String,
    pub standard: String,
}

/// The matching target set. Entry order is file order; the matcher's final
/// tie-break depends on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransliterationDictionary {
    entries: Vec<DictionaryEntry>,
}

impl TransliterationDictionary {
    pub fn new(entries: Vec<DictionaryEntry>) -> Result<Self, LexiconError> {
        if entries.is_empty() {
            return Err(LexiconError::Empty);
        }
        for (i, e) in entries.iter().enumerate() {
            if e.native.is_empty() {
                return Err(LexiconError::EmptyField {
                    line: i + 1,
                    column: 1,
                });
            }
            if e.standard.is_empty() {
                return Err(LexiconError::EmptyField {
                    line: i + 1,
                    column: 2,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let entries = parse_pairs(text)?
            .into_iter()
            .map(|(native, standard)| DictionaryEntry { native, standard })
            .collect();
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[DictionaryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn standards(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.standard.as_str())
    }

    /// Whether `standard` occurs as a canonical form (case-sensitive).
    pub fn contains_standard(&self, standard: &str) -> bool {
        self.standards().any(|s| s == standard)
    }

    /// All native words whose standard form equals `standard` exactly, in
    /// entry order.
    pub fn reverse_lookup(&self, standard: &str) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| e.standard == standard)
            .map(|e| e.native.clone())
            .collect()
    }
}

impl fmt::Display for TransliterationDictionary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pairs(
            f,
            self.entries
                .iter()
                .map(|e| (e.native.as_str(), e.standard.as_str())),
        )
    }
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<TransliterationDictionary, LexiconError> {
    TransliterationDictionary::parse(&read(path.as_ref())?)
}

/// Free-function form of [`TransliterationDictionary::reverse_lookup`].
pub fn reverse_lookup(dict: &TransliterationDictionary, standard: &str) -> Vec<String> {
    dict.reverse_lookup(standard)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestEntry {
    pub input: String,
    pub gold: String,
}

/// Word-level evaluation data: noisy input and its gold standard form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSet {
    entries: Vec<TestEntry>,
}

impl TestSet {
    pub fn new(entries: Vec<TestEntry>) -> Result<Self, LexiconError> {
        if entries.is_empty() {
            return Err(LexiconError::Empty);
        }
        for (i, e) in entries.iter().enumerate() {
            if e.input.is_empty() {
                return Err(LexiconError::EmptyField {
                    line: i + 1,
                    column: 1,
                });
            }
            if e.gold.is_empty() {
                return Err(LexiconError::EmptyField {
                    line: i + 1,
                    column: 2,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let entries = parse_pairs(text)?
            .into_iter()
            .map(|(input, gold)| TestEntry { input, gold })
            .collect();
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[TestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for TestSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pairs(
            f,
            self.entries
                .iter()
                .map(|e| (e.input.as_str(), e.gold.as_str())),
        )
    }
}

pub fn load_test_set(path: impl AsRef<Path>) -> Result<TestSet, LexiconError> {
    TestSet::parse(&read(path.as_ref())?)
}
