//! Normalization of phonetically transliterated code-mixed words.
//!
//! A raw word goes through three stages:
//!
//! 1. [`prenorm`]: lowercasing, digit expansion and elongation trimming;
//! 2. [`seq2seq`]: a character-level encoder–decoder that rewrites the word
//!    toward its canonical transliteration;
//! 3. [`matcher`]: the closest entry of a transliteration dictionary by
//!    (optionally equivalence-class modified) edit distance.
//!
//! The matched canonical form is then mapped back to native script through
//! [`lexicon::TransliterationDictionary::reverse_lookup`]. [`pipeline`] ties
//! the stages together and [`eval`] measures them.

pub mod charcodec;
pub mod eval;
pub mod lexicon;
pub mod matcher;
pub mod par;
pub mod pipeline;
pub mod prenorm;
pub mod seq2seq;

pub use charcodec::{Alphabet, EncodedSequence, Side, UnknownPolicy};
pub use eval::{EvalReport, SetupId};
pub use lexicon::{ParallelLexicon, TestSet, TransliterationDictionary};
pub use matcher::{EquivalenceClasses, MatchMode, MatchResult};
pub use par::Execution;
pub use pipeline::{NormalizationResult, Normalizer};
pub use prenorm::DigitPhoneTable;
pub use seq2seq::{ModelParams, TrainingConfig, TrainingTrace};
