//! The full normalization pipeline: pre-normalization, the optional sequence
//! model, dictionary matching and back-transliteration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charcodec::{CodecError, UnknownPolicy};
use crate::eval::SetupId;
use crate::lexicon::{LexiconEntry, ParallelLexicon, TransliterationDictionary};
use crate::matcher::{self, EquivalenceClasses, MatchError, MatchMode, Matcher};
use crate::par::Execution;
use crate::prenorm::{prenormalize, DigitPhoneTable};
use crate::seq2seq::{self, ModelParams};

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// Every intermediate stage for one word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationResult {
    pub input: String,
    pub prenormalized: String,
    /// Model output, or the pre-normalized form when no model is used.
    pub first_degree: String,
    /// The string actually matched against the dictionary. Differs from
    /// `first_degree` only when the model decoded an empty word.
    pub query: String,
    #[serde(rename = "final")]
    pub final_form: String,
    pub distance: usize,
    pub tie_break_score: usize,
    pub dictionary_index: usize,
    pub back_transliterations: Vec<String>,
    pub mode: MatchMode,
    pub setup: SetupId,
}

/// Pre-normalize every source side of a lexicon; targets are left as is.
pub fn prenormalize_lexicon(pl: &ParallelLexicon, table: &DigitPhoneTable) -> ParallelLexicon {
    let entries = pl
        .entries()
        .iter()
        .map(|e| LexiconEntry {
            source: prenormalize(&e.source, table),
            target: e.target.clone(),
        })
        .collect();
    ParallelLexicon::new(entries).expect("pre-normalization keeps fields non-empty")
}

/// A configured pipeline, prepared for many words.
pub struct Normalizer<'a> {
    model: Option<&'a ModelParams>,
    dict: &'a TransliterationDictionary,
    matcher: Matcher<'a>,
    digits: DigitPhoneTable,
    unknown: UnknownPolicy,
}

impl<'a> Normalizer<'a> {
    pub fn new(
        model: Option<&'a ModelParams>,
        dict: &'a TransliterationDictionary,
        eq: &EquivalenceClasses,
        mode: MatchMode,
    ) -> Self {
        Self {
            model,
            dict,
            matcher: Matcher::new(dict, eq.clone(), mode),
            digits: DigitPhoneTable::default(),
            unknown: UnknownPolicy::Error,
        }
    }

    pub fn with_digits(mut self, digits: DigitPhoneTable) -> Self {
        self.digits = digits;
        self
    }

    pub fn with_unknown_policy(mut self, policy: UnknownPolicy) -> Self {
        self.unknown = policy;
        self
    }

    pub fn setup(&self) -> SetupId {
        SetupId::from_parts(self.model.is_some(), self.matcher.mode())
    }

    pub fn normalize(&self, w: &str) -> Result<NormalizationResult, NormalizeError> {
        let prenormalized = prenormalize(w, &self.digits);
        let first_degree = match self.model {
            Some(model) => seq2seq::infer_with(model, &prenormalized, self.unknown)?,
            None => prenormalized.clone(),
        };
        let query = if first_degree.is_empty() {
            prenormalized.clone()
        } else {
            first_degree.clone()
        };
        let m = self.matcher.best_match_pruned(&query)?;
        Ok(NormalizationResult {
            input: w.to_owned(),
            prenormalized,
            first_degree,
            query,
            back_transliterations: self.dict.reverse_lookup(&m.matched_standard),
            final_form: m.matched_standard,
            distance: m.distance,
            tie_break_score: m.tie_break_score,
            dictionary_index: m.dictionary_index,
            mode: m.mode,
            setup: self.setup(),
        })
    }

    /// Element-wise [`Normalizer::normalize`]; a failing word does not stop
    /// the batch, its error sits at its own index.
    pub fn normalize_batch<S: AsRef<str> + Sync>(
        &self,
        words: &[S],
        exec: Execution,
    ) -> Vec<Result<NormalizationResult, NormalizeError>> {
        exec.map(words, |w| self.normalize(w.as_ref()))
    }
}

/// One-off normalization with the default digit table.
pub fn normalize(
    w: &str,
    model: Option<&ModelParams>,
    dict: &TransliterationDictionary,
    eq: &EquivalenceClasses,
    mode: MatchMode,
) -> Result<NormalizationResult, NormalizeError> {
    Normalizer::new(model, dict, eq, mode).normalize(w)
}

pub fn normalize_batch<S: AsRef<str> + Sync>(
    words: &[S],
    model: Option<&ModelParams>,
    dict: &TransliterationDictionary,
    eq: &EquivalenceClasses,
    mode: MatchMode,
    exec: Execution,
) -> Vec<Result<NormalizationResult, NormalizeError>> {
    Normalizer::new(model, dict, eq, mode).normalize_batch(words, exec)
}

/// Recompute the match for a result with the reference (unpruned) scan.
pub fn recheck(
    result: &NormalizationResult,
    dict: &TransliterationDictionary,
    eq: &EquivalenceClasses,
) -> Result<matcher::MatchResult, MatchError> {
    matcher::best_match(&result.query, dict, result.mode, eq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict(text: &str) -> TransliterationDictionary {
        TransliterationDictionary::parse(text).unwrap()
    }

    #[test]
    fn no_model_elongated() {
        let d = dict("বাদ\tbAd\nবদ\tbad\nবিদ\tbid\n");
        let eq = EquivalenceClasses::default_pairs();
        let r = normalize("baaaad", None, &d, &eq, MatchMode::Standard).unwrap();
        assert_eq!(r.prenormalized, "baad");
        assert_eq!(r.first_degree, "baad");
        assert_eq!(r.final_form, "bad");
        assert_eq!(r.distance, 1);
        assert_eq!(r.back_transliterations, vec!["বদ"]);
        assert_eq!(r.setup, SetupId::Setup1);
    }

    #[test]
    fn no_model_digits_modified() {
        let d = dict("চলাদুই\tchaladui\n");
        let eq = EquivalenceClasses::default_pairs();
        let r = normalize("chalo2", None, &d, &eq, MatchMode::Modified).unwrap();
        assert_eq!(r.prenormalized, "chalodui");
        assert_eq!((r.final_form.as_str(), r.distance), ("chaladui", 0));
        assert_eq!(r.setup, SetupId::Setup2);
    }

    #[test]
    fn batch_matches_singles() {
        let d = dict("কাল\tkal\nচলা\tchala\nভালো\tbhAlo\n");
        let eq = EquivalenceClasses::default_pairs();
        let words = ["kaaal", "cholo", "bhalo", "", "x"];
        let batch = normalize_batch(
            &words,
            None,
            &d,
            &eq,
            MatchMode::Modified,
            Execution::Parallel,
        );
        assert_eq!(batch.len(), words.len());
        for (w, r) in words.iter().zip(&batch) {
            let single = normalize(w, None, &d, &eq, MatchMode::Modified).unwrap();
            assert_eq!(r.as_ref().unwrap(), &single);
            assert_eq!(recheck(&single, &d, &eq).unwrap().distance, single.distance);
        }
        let empty: [&str; 0] = [];
        assert!(normalize_batch(
            &empty,
            None,
            &d,
            &eq,
            MatchMode::Modified,
            Execution::Sequential
        )
        .is_empty());
    }
}
