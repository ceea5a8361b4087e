//! Word-level evaluation over the four pipeline setups, with out-of-vocabulary
//! error analysis.

pub mod synth;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charcodec::UnknownPolicy;
use crate::lexicon::{TestSet, TransliterationDictionary};
use crate::matcher::{levenshtein, EquivalenceClasses, MatchMode};
use crate::par::Execution;
use crate::pipeline::Normalizer;
use crate::prenorm::DigitPhoneTable;
use crate::seq2seq::ModelParams;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0} runs the sequence model but no model was given")]
    ModelRequired(SetupId),
    #[error("unknown setup {0:?}; expected 1, 2, 3 or 4")]
    UnknownSetup(String),
}

/// Which stages run: with or without the sequence model, and standard or
/// modified edit distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SetupId {
    #[serde(rename = "setup_1")]
    Setup1,
    #[serde(rename = "setup_2")]
    Setup2,
    #[serde(rename = "setup_3")]
    Setup3,
    #[serde(rename = "setup_4")]
    Setup4,
}

impl SetupId {
    pub const ALL: [SetupId; 4] = [Self::Setup1, Self::Setup2, Self::Setup3, Self::Setup4];

    pub fn from_parts(uses_model: bool, mode: MatchMode) -> Self {
        match (uses_model, mode) {
            (false, MatchMode::Standard) => Self::Setup1,
            (false, MatchMode::Modified) => Self::Setup2,
            (true, MatchMode::Standard) => Self::Setup3,
            (true, MatchMode::Modified) => Self::Setup4,
        }
    }

    pub fn uses_model(self) -> bool {
        matches!(self, Self::Setup3 | Self::Setup4)
    }

    pub fn mode(self) -> MatchMode {
        match self {
            Self::Setup1 | Self::Setup3 => MatchMode::Standard,
            Self::Setup2 | Self::Setup4 => MatchMode::Modified,
        }
    }

    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

impl std::fmt::Display for SetupId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "setup_{}", self.number())
    }
}

impl std::str::FromStr for SetupId {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim_start_matches("setup_") {
            "1" => Ok(Self::Setup1),
            "2" => Ok(Self::Setup2),
            "3" => Ok(Self::Setup3),
            "4" => Ok(Self::Setup4),
            _ => Err(EvalError::UnknownSetup(s.to_owned())),
        }
    }
}

/// One incorrectly normalized test entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalErrorRecord {
    pub index: usize,
    pub input: String,
    pub gold: String,
    /// `None` when the pipeline failed on this word.
    pub first_degree: Option<String>,
    pub predicted: Option<String>,
    /// Pipeline failure message, if any.
    pub failure: Option<String>,
    /// Gold standard absent from the dictionary.
    pub oov: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub setup: SetupId,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub failures: usize,
    pub oov_errors: usize,
    pub oov_fraction: f64,
    pub mean_oov_distance: f64,
    pub errors: Vec<EvalErrorRecord>,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub digits: DigitPhoneTable,
    pub unknown: UnknownPolicy,
    pub exec: Execution,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            digits: DigitPhoneTable::default(),
            unknown: UnknownPolicy::Error,
            exec: Execution::Parallel,
        }
    }
}

pub fn evaluate(
    testset: &TestSet,
    model: Option<&ModelParams>,
    dict: &TransliterationDictionary,
    eq: &EquivalenceClasses,
    setup: SetupId,
) -> Result<EvalReport, EvalError> {
    evaluate_with(testset, model, dict, eq, setup, &EvalOptions::default())
}

/// Run the pipeline under `setup` for every entry and compare with the gold
/// form by exact, case-sensitive equality. Pipeline failures count as errors.
pub fn evaluate_with(
    testset: &TestSet,
    model: Option<&ModelParams>,
    dict: &TransliterationDictionary,
    eq: &EquivalenceClasses,
    setup: SetupId,
    opts: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    let model = match (setup.uses_model(), model) {
        (true, None) => return Err(EvalError::ModelRequired(setup)),
        (true, m) => m,
        (false, _) => None,
    };
    let normalizer = Normalizer::new(model, dict, eq, setup.mode())
        .with_digits(opts.digits.clone())
        .with_unknown_policy(opts.unknown);
    let inputs: Vec<&str> = testset.entries().iter().map(|e| e.input.as_str()).collect();
    let results = normalizer.normalize_batch(&inputs, opts.exec);

    let mut errors = Vec::new();
    for (index, (entry, result)) in testset.entries().iter().zip(results).enumerate() {
        let record = match result {
            Ok(r) if r.final_form == entry.gold => continue,
            Ok(r) => EvalErrorRecord {
                index,
                input: entry.input.clone(),
                gold: entry.gold.clone(),
                first_degree: Some(r.first_degree),
                predicted: Some(r.final_form),
                failure: None,
                oov: false,
            },
            Err(e) => EvalErrorRecord {
                index,
                input: entry.input.clone(),
                gold: entry.gold.clone(),
                first_degree: None,
                predicted: None,
                failure: Some(e.to_string()),
                oov: false,
            },
        };
        errors.push(record);
    }
    let total = testset.len();
    let correct = total - errors.len();
    let mut report = EvalReport {
        setup,
        total,
        correct,
        accuracy: correct as f64 / total as f64,
        failures: errors.iter().filter(|e| e.failure.is_some()).count(),
        oov_errors: 0,
        oov_fraction: 0.0,
        mean_oov_distance: 0.0,
        errors,
    };
    for e in &mut report.errors {
        e.oov = !dict.contains_standard(&e.gold);
    }
    let (oov_fraction, mean_oov_distance) = error_analysis(&report, dict);
    report.oov_errors = report.errors.iter().filter(|e| e.oov).count();
    report.oov_fraction = oov_fraction;
    report.mean_oov_distance = mean_oov_distance;
    Ok(report)
}

/// Fraction of errors whose gold is out of vocabulary, and the mean edit
/// distance between first-degree output and gold over those errors. Failed
/// words have no first-degree output and are left out of the mean. No errors
/// gives `(0, 0)`.
pub fn error_analysis(report: &EvalReport, dict: &TransliterationDictionary) -> (f64, f64) {
    if report.errors.is_empty() {
        return (0.0, 0.0);
    }
    let oov: Vec<&EvalErrorRecord> = report
        .errors
        .iter()
        .filter(|e| !dict.contains_standard(&e.gold))
        .collect();
    let fraction = oov.len() as f64 / report.errors.len() as f64;
    let distances: Vec<usize> = oov
        .iter()
        .filter_map(|e| e.first_degree.as_deref().map(|f| levenshtein(f, &e.gold)))
        .collect();
    let mean = if distances.is_empty() {
        0.0
    } else {
        distances.iter().sum::<usize>() as f64 / distances.len() as f64
    };
    (fraction, mean)
}

/// Accuracy table in the layout `Model | 1° Norm | LD | Acc`, followed by the
/// error breakdown of each setup.
pub fn render_table(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<9} | {:<7} | {:<8} | {:>6}",
        "Model", "1° Norm", "LD", "Acc"
    );
    let _ = writeln!(out, "{}", "-".repeat(40));
    for r in reports {
        let _ = writeln!(
            out,
            "{:<9} | {:<7} | {:<8} | {:>6.2}",
            r.setup.to_string(),
            if r.setup.uses_model() { "yes" } else { "no" },
            r.setup.mode().to_string(),
            100.0 * r.accuracy
        );
    }
    for r in reports {
        let _ = writeln!(
            out,
            "\n{}: {}/{} correct, {} errors ({} pipeline failures)",
            r.setup,
            r.correct,
            r.total,
            r.errors.len(),
            r.failures
        );
        let _ = writeln!(
            out,
            "  out-of-vocabulary errors: {} ({:.2}%), mean LD(1° output, gold): {:.2}",
            r.oov_errors,
            100.0 * r.oov_fraction,
            r.mean_oov_distance
        );
        for e in r.errors.iter().filter(|e| e.failure.is_some()) {
            let _ = writeln!(
                out,
                "  failed #{} {:?}: {}",
                e.index,
                e.input,
                e.failure.as_deref().unwrap_or_default()
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::TestEntry;

    fn dict() -> TransliterationDictionary {
        TransliterationDictionary::parse("কাল\tkal\nচলা\tchala\nভালো\tbhAlo\n").unwrap()
    }

    fn testset(pairs: &[(&str, &str)]) -> TestSet {
        TestSet::new(
            pairs
                .iter()
                .map(|(i, g)| TestEntry {
                    input: i.to_string(),
                    gold: g.to_string(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn setup_ids() {
        for s in SetupId::ALL {
            assert_eq!(SetupId::from_parts(s.uses_model(), s.mode()), s);
            assert_eq!(s.to_string().parse::<SetupId>().unwrap(), s);
            assert_eq!(s.number().to_string().parse::<SetupId>().unwrap(), s);
        }
        assert!("5".parse::<SetupId>().is_err());
        assert_eq!(
            serde_json::to_string(&SetupId::Setup2).unwrap(),
            "\"setup_2\""
        );
    }

    #[test]
    fn model_required() {
        let t = testset(&[("kal", "kal")]);
        let eq = EquivalenceClasses::default_pairs();
        assert!(matches!(
            evaluate(&t, None, &dict(), &eq, SetupId::Setup3),
            Err(EvalError::ModelRequired(SetupId::Setup3))
        ));
    }

    #[test]
    fn accuracy_counts_exact_matches() {
        let t = testset(&[
            ("kaaal", "kal"),
            ("cholo", "chala"),
            ("bhalo", "bhAlo"),
            ("kal", "kol"),
        ]);
        let eq = EquivalenceClasses::default_pairs();
        let r1 = evaluate(&t, None, &dict(), &eq, SetupId::Setup1).unwrap();
        let r2 = evaluate(&t, None, &dict(), &eq, SetupId::Setup2).unwrap();
        assert_eq!(r1.total, 4);
        assert_eq!(r1.accuracy, r1.correct as f64 / 4.0);
        assert!(r2.accuracy >= r1.accuracy);
        // "kol" is the only out-of-vocabulary gold
        let last = r2.errors.iter().find(|e| e.gold == "kol").unwrap();
        assert!(last.oov);
        assert_eq!(r2.oov_errors, 1);
    }

    #[test]
    fn all_oov() {
        let t = testset(&[("abc", "xyz"), ("def", "uvw")]);
        let eq = EquivalenceClasses::default_pairs();
        let r = evaluate(&t, None, &dict(), &eq, SetupId::Setup1).unwrap();
        assert_eq!(r.accuracy, 0.0);
        assert_eq!(r.oov_fraction, 1.0);
        assert_eq!(error_analysis(&r, &dict()).0, 1.0);
    }

    #[test]
    fn single_substitution_distance() {
        let t = testset(&[("kel", "kil")]);
        let eq = EquivalenceClasses::default_pairs();
        let r = evaluate(&t, None, &dict(), &eq, SetupId::Setup1).unwrap();
        assert_eq!(r.errors.len(), 1);
        assert_eq!(error_analysis(&r, &dict()), (1.0, 1.0));
    }

    #[test]
    fn no_errors() {
        let t = testset(&[("kal", "kal")]);
        let eq = EquivalenceClasses::default_pairs();
        let r = evaluate(&t, None, &dict(), &eq, SetupId::Setup1).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(error_analysis(&r, &dict()), (0.0, 0.0));
    }

    #[test]
    fn table_lists_every_setup() {
        let t = testset(&[("kal", "kal")]);
        let eq = EquivalenceClasses::default_pairs();
        let reports: Vec<_> = [SetupId::Setup1, SetupId::Setup2]
            .iter()
            .map(|&s| evaluate(&t, None, &dict(), &eq, s).unwrap())
            .collect();
        let table = render_table(&reports);
        assert!(table.contains("setup_1") && table.contains("setup_2"));
        assert!(table.contains("100.00"));
    }
}
