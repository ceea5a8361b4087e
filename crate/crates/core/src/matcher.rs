//! Second-degree normalization: dictionary matching by edit distance.
//!
//! Distances are computed over code points. In [`MatchMode::Modified`] both
//! strings are first rewritten so that every member of an equivalence class
//! becomes the class representative, which makes substitutions inside a class
//! free.
//!
//! Selection among dictionary entries: least distance, then the most
//! positional character agreements with the query (raw strings), then the
//! lowest dictionary index.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::TransliterationDictionary;
use crate::par::Execution;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("dictionary is empty")]
    EmptyDictionary,
}

#[derive(Debug, Error)]
pub enum EquivalenceError {
    #[error("failed to read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("class {class:?} needs at least two distinct characters")]
    TooSmall { class: String },
    #[error("character {0:?} appears in more than one class")]
    Overlap(char),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Standard,
    Modified,
}

impl std::fmt::Display for MatchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MatchMode::Standard => "standard",
            MatchMode::Modified => "modified",
        })
    }
}

/// Disjoint character classes whose members count as identical.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EquivalenceClasses {
    classes: Vec<Vec<char>>,
    representative: HashMap<char, char>,
}

impl EquivalenceClasses {
    pub fn new<I, S>(classes: I) -> Result<Self, EquivalenceError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = Self::default();
        for class in classes {
            let mut chars: Vec<char> = class.as_ref().chars().collect();
            chars.sort_unstable();
            chars.dedup();
            if chars.len() < 2 {
                return Err(EquivalenceError::TooSmall {
                    class: class.as_ref().to_owned(),
                });
            }
            let rep = chars[0];
            for &c in &chars {
                if out.representative.insert(c, rep).is_some() {
                    return Err(EquivalenceError::Overlap(c));
                }
            }
            out.classes.push(chars);
        }
        Ok(out)
    }

    /// `{a,o}` and `{b,v}`.
    pub fn default_pairs() -> Self {
        Self::new(["ao", "bv"]).expect("default classes are valid")
    }

    /// One class per non-empty line.
    pub fn parse(text: &str) -> Result<Self, EquivalenceError> {
        Self::new(text.lines().filter(|l| !l.is_empty()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EquivalenceError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| EquivalenceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn classes(&self) -> &[Vec<char>] {
        &self.classes
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Lowest code point of the class containing `c`, or `c` itself.
    pub fn representative(&self, c: char) -> char {
        self.representative.get(&c).copied().unwrap_or(c)
    }
}

pub fn canonicalize(s: &str, eq: &EquivalenceClasses) -> String {
    s.chars().map(|c| eq.representative(c)).collect()
}

fn chars_for(s: &str, mode: MatchMode, eq: &EquivalenceClasses) -> Vec<char> {
    match mode {
        MatchMode::Standard => s.chars().collect(),
        MatchMode::Modified => s.chars().map(|c| eq.representative(c)).collect(),
    }
}

/// Unit-cost edit distance over character slices.
pub fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if ca == cb {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

/// Edit distance if it is at most `limit`, otherwise `None`.
pub fn levenshtein_bounded(a: &[char], b: &[char], limit: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > limit {
        return None;
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        let mut row_min = row[0];
        for (j, &cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if ca == cb {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
            row_min = row_min.min(row[j + 1]);
        }
        // Row minima never decrease, so the final distance is at least this.
        if row_min > limit {
            return None;
        }
    }
    Some(row[b.len()]).filter(|&d| d <= limit)
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub fn modified_levenshtein(a: &str, b: &str, eq: &EquivalenceClasses) -> usize {
    levenshtein_chars(
        &chars_for(a, MatchMode::Modified, eq),
        &chars_for(b, MatchMode::Modified, eq),
    )
}

/// Distance under `mode`; `eq` is ignored in standard mode.
pub fn distance(a: &str, b: &str, mode: MatchMode, eq: &EquivalenceClasses) -> usize {
    match mode {
        MatchMode::Standard => levenshtein(a, b),
        MatchMode::Modified => modified_levenshtein(a, b, eq),
    }
}

/// Number of positions where the raw strings agree, over the shorter length.
pub fn tie_break_score(query: &str, candidate: &str) -> usize {
    query
        .chars()
        .zip(candidate.chars())
        .filter(|(a, b)| a == b)
        .count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub matched_standard: String,
    pub distance: usize,
    pub tie_break_score: usize,
    pub dictionary_index: usize,
    pub mode: MatchMode,
}

impl MatchResult {
    /// Whether `self` should replace `best` during a scan in index order.
    fn beats(distance: usize, score: usize, best: &MatchResult) -> bool {
        distance < best.distance || (distance == best.distance && score > best.tie_break_score)
    }
}

/// Reference scan: every entry is scored in full.
pub fn best_match(
    query: &str,
    dict: &TransliterationDictionary,
    mode: MatchMode,
    eq: &EquivalenceClasses,
) -> Result<MatchResult, MatchError> {
    let q = chars_for(query, mode, eq);
    let mut best: Option<MatchResult> = None;
    for (index, entry) in dict.entries().iter().enumerate() {
        let d = levenshtein_chars(&q, &chars_for(&entry.standard, mode, eq));
        let score = tie_break_score(query, &entry.standard);
        if best
            .as_ref()
            .is_none_or(|b| MatchResult::beats(d, score, b))
        {
            best = Some(MatchResult {
                matched_standard: entry.standard.clone(),
                distance: d,
                tie_break_score: score,
                dictionary_index: index,
                mode,
            });
        }
    }
    best.ok_or(MatchError::EmptyDictionary)
}

/// Same result as [`best_match`], skipping entries whose length gap or
/// partial distance already exceeds the current best.
pub fn best_match_pruned(
    query: &str,
    dict: &TransliterationDictionary,
    mode: MatchMode,
    eq: &EquivalenceClasses,
) -> Result<MatchResult, MatchError> {
    Matcher::new(dict, eq.clone(), mode).best_match_pruned(query)
}

struct Candidate<'d> {
    standard: &'d str,
    raw: Vec<char>,
    keyed: Vec<char>,
}

/// A dictionary prepared for repeated queries under one mode.
pub struct Matcher<'d> {
    candidates: Vec<Candidate<'d>>,
    eq: EquivalenceClasses,
    mode: MatchMode,
}

impl<'d> Matcher<'d> {
    pub fn new(
        dict: &'d TransliterationDictionary,
        eq: EquivalenceClasses,
        mode: MatchMode,
    ) -> Self {
        let candidates = dict
            .entries()
            .iter()
            .map(|e| Candidate {
                standard: &e.standard,
                raw: e.standard.chars().collect(),
                keyed: chars_for(&e.standard, mode, &eq),
            })
            .collect();
        Self {
            candidates,
            eq,
            mode,
        }
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    pub fn equivalence(&self) -> &EquivalenceClasses {
        &self.eq
    }

    pub fn best_match_pruned(&self, query: &str) -> Result<MatchResult, MatchError> {
        let raw: Vec<char> = query.chars().collect();
        let keyed = chars_for(query, self.mode, &self.eq);
        let mut best: Option<(usize, usize, usize)> = None;
        for (index, cand) in self.candidates.iter().enumerate() {
            let score = || raw.iter().zip(&cand.raw).filter(|(a, b)| a == b).count();
            match best {
                None => {
                    let d = levenshtein_chars(&keyed, &cand.keyed);
                    best = Some((d, score(), index));
                }
                Some((best_d, best_score, _)) => {
                    // An equal distance can still win on score, so the bound is inclusive.
                    let Some(d) = levenshtein_bounded(&keyed, &cand.keyed, best_d) else {
                        continue;
                    };
                    let s = score();
                    if d < best_d || s > best_score {
                        best = Some((d, s, index));
                    }
                }
            }
            // Nothing later can beat a zero-distance candidate agreeing at every query position.
            if let Some((0, s, _)) = best {
                if s == raw.len() {
                    break;
                }
            }
        }
        let (distance, tie_break_score, dictionary_index) =
            best.ok_or(MatchError::EmptyDictionary)?;
        Ok(MatchResult {
            matched_standard: self.candidates[dictionary_index].standard.to_owned(),
            distance,
            tie_break_score,
            dictionary_index,
            mode: self.mode,
        })
    }

    /// Pruned matching of many queries, results in query order.
    pub fn best_match_many<S: AsRef<str> + Sync>(
        &self,
        queries: &[S],
        exec: Execution,
    ) -> Vec<Result<MatchResult, MatchError>> {
        exec.map(queries, |q| self.best_match_pruned(q.as_ref()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::DictionaryEntry;

    fn dict(standards: &[&str]) -> TransliterationDictionary {
        TransliterationDictionary::new(
            standards
                .iter()
                .enumerate()
                .map(|(i, s)| DictionaryEntry {
                    native: format!("n{i}"),
                    standard: s.to_string(),
                })
                .collect(),
        )
        .unwrap()
    }

    /// Direct transcription of the recursive definition.
    fn naive(a: &[char], b: &[char]) -> usize {
        match (a.split_last(), b.split_last()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((x, ar)), Some((y, br))) => {
                let sub = naive(ar, br) + usize::from(x != y);
                sub.min(naive(ar, b) + 1).min(naive(a, br) + 1)
            }
        }
    }

    #[test]
    fn basic_distances() {
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        let k: Vec<char> = "kitten".chars().collect();
        let s: Vec<char> = "sitting".chars().collect();
        assert_eq!(naive(&k, &s), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("ভালো", "ভাল"), 1);
    }

    #[test]
    fn bounded_agrees_within_limit() {
        let pairs = [
            ("kitten", "sitting"),
            ("", "abc"),
            ("chalo", "chala"),
            ("abcd", "dcba"),
        ];
        for (a, b) in pairs {
            let a: Vec<char> = a.chars().collect();
            let b: Vec<char> = b.chars().collect();
            let d = levenshtein_chars(&a, &b);
            for limit in 0..6 {
                let expect = (d <= limit).then_some(d);
                assert_eq!(levenshtein_bounded(&a, &b, limit), expect);
            }
        }
    }

    #[test]
    fn classes() {
        let eq = EquivalenceClasses::default_pairs();
        assert_eq!(canonicalize("chalo", &eq), "chala");
        assert_eq!(canonicalize("bhalo", &eq), "bhala");
        assert_eq!(canonicalize("vhalo", &eq), "bhala");
        assert_eq!(canonicalize("kitten", &eq), "kitten");
        assert_eq!(eq.representative('o'), 'a');
        assert_eq!(eq.representative('v'), 'b');
    }

    #[test]
    fn class_validation() {
        assert!(matches!(
            EquivalenceClasses::new(["ao", "oe"]),
            Err(EquivalenceError::Overlap('o'))
        ));
        assert!(matches!(
            EquivalenceClasses::new(["aa"]),
            Err(EquivalenceError::TooSmall { .. })
        ));
        let eq = EquivalenceClasses::parse("ao\n\nbv\n").unwrap();
        assert_eq!(eq, EquivalenceClasses::default_pairs());
        let eq = EquivalenceClasses::parse("zyx\n").unwrap();
        assert_eq!(eq.representative('z'), 'x');
    }

    #[test]
    fn modified_examples() {
        let eq = EquivalenceClasses::default_pairs();
        assert_eq!(modified_levenshtein("chalo", "chala", &eq), 0);
        assert_eq!(modified_levenshtein("bhalo", "vhala", &eq), 0);
        assert_eq!(modified_levenshtein("chalo", "chali", &eq), 1);
        let none = EquivalenceClasses::default();
        assert_eq!(modified_levenshtein("chalo", "chala", &none), 1);
    }

    #[test]
    fn tie_break() {
        assert_eq!(tie_break_score("kal", "kal"), 3);
        assert_eq!(tie_break_score("kal", "kol"), 2);
        assert_eq!(tie_break_score("kal", "lak"), 1);
        assert_eq!(tie_break_score("", "lak"), 0);
    }

    #[test]
    fn selection() {
        let eq = EquivalenceClasses::default_pairs();
        let d = dict(&["chala", "chula"]);
        let m = best_match("chalo", &d, MatchMode::Modified, &eq).unwrap();
        assert_eq!(m.matched_standard, "chala");
        assert_eq!(m.distance, 0);

        let d = dict(&["kol", "kal"]);
        let m = best_match("kal", &d, MatchMode::Modified, &eq).unwrap();
        assert_eq!((m.matched_standard.as_str(), m.distance), ("kal", 0));
        assert_eq!((m.tie_break_score, m.dictionary_index), (3, 1));

        let d = dict(&["bAd", "bad", "bid"]);
        let m = best_match("bad", &d, MatchMode::Standard, &eq).unwrap();
        assert_eq!((m.dictionary_index, m.distance), (1, 0));
    }

    #[test]
    fn index_breaks_remaining_ties() {
        let eq = EquivalenceClasses::default();
        let d = dict(&["xbc", "axc", "abx"]);
        let m = best_match("abc", &d, MatchMode::Standard, &eq).unwrap();
        assert_eq!((m.dictionary_index, m.tie_break_score), (0, 2));
        assert_eq!(
            best_match_pruned("abc", &d, MatchMode::Standard, &eq).unwrap(),
            m
        );
    }

    #[test]
    fn empty_dictionary() {
        let matcher = Matcher {
            candidates: Vec::new(),
            eq: EquivalenceClasses::default(),
            mode: MatchMode::Standard,
        };
        assert!(matches!(
            matcher.best_match_pruned("abc"),
            Err(MatchError::EmptyDictionary)
        ));
    }

    #[test]
    fn single_entry() {
        let d = dict(&["y"]);
        let eq = EquivalenceClasses::default();
        let m = best_match_pruned("query", &d, MatchMode::Standard, &eq).unwrap();
        assert_eq!(
            m,
            best_match("query", &d, MatchMode::Standard, &eq).unwrap()
        );
        assert_eq!(m.matched_standard, "y");
    }

    #[test]
    fn exhaustive_small_alphabet() {
        let mut words = vec![Vec::new()];
        let mut frontier = vec![Vec::new()];
        for _ in 0..3 {
            let mut next = Vec::new();
            for w in &frontier {
                for c in ['a', 'b'] {
                    let mut w2: Vec<char> = w.clone();
                    w2.push(c);
                    next.push(w2);
                }
            }
            words.extend(next.iter().cloned());
            frontier = next;
        }
        for a in &words {
            for b in &words {
                assert_eq!(levenshtein_chars(a, b), naive(a, b));
            }
        }
    }
}
