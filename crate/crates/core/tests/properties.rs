use proptest::prelude::*;

use translit_norm::charcodec::{build_alphabet, decode, encode};
use translit_norm::lexicon::{DictionaryEntry, LexiconEntry};
use translit_norm::matcher::{
    best_match, canonicalize, levenshtein, levenshtein_bounded, modified_levenshtein, Matcher,
};
use translit_norm::prenorm::prenormalize;
use translit_norm::{
    DigitPhoneTable, EquivalenceClasses, MatchMode, ParallelLexicon, Side,
    TransliterationDictionary,
};

fn short_word() -> impl Strategy<Value = String> {
    "[abcovAB]{0,8}"
}

fn field() -> impl Strategy<Value = String> {
    "[a-zA-Zঅ-হ]{1,10}"
}

proptest! {
    #[test]
    fn prenormalize_is_idempotent(s in "\\PC{0,24}") {
        let t = DigitPhoneTable::default();
        let once = prenormalize(&s, &t);
        prop_assert_eq!(prenormalize(&once, &t), once);
    }

    #[test]
    fn prenormalized_has_no_digits_or_long_runs(s in "[a-dA-D0-9]{0,24}") {
        let out = prenormalize(&s, &DigitPhoneTable::default());
        prop_assert!(!out.chars().any(|c| c.is_ascii_digit()));
        let chars: Vec<char> = out.chars().collect();
        prop_assert!(chars.windows(3).all(|w| !(w[0] == w[1] && w[1] == w[2])));
    }

    #[test]
    fn levenshtein_is_a_metric(a in short_word(), b in short_word(), c in short_word()) {
        let ab = levenshtein(&a, &b);
        prop_assert_eq!(ab, levenshtein(&b, &a));
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
    }

    #[test]
    fn levenshtein_bounds(a in short_word(), b in short_word()) {
        let (la, lb) = (a.chars().count(), b.chars().count());
        let d = levenshtein(&a, &b);
        prop_assert!(d >= la.abs_diff(lb));
        prop_assert!(d <= la.max(lb));
    }

    #[test]
    fn bounded_agrees_within_limit(a in short_word(), b in short_word(), limit in 0usize..10) {
        let (ac, bc): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let d = levenshtein(&a, &b);
        let expected = (d <= limit).then_some(d);
        prop_assert_eq!(levenshtein_bounded(&ac, &bc, limit), expected);
    }

    #[test]
    fn modified_never_exceeds_standard(a in short_word(), b in short_word()) {
        let eq = EquivalenceClasses::default_pairs();
        let m = modified_levenshtein(&a, &b, &eq);
        prop_assert!(m <= levenshtein(&a, &b));
        prop_assert_eq!(m, levenshtein(&canonicalize(&a, &eq), &canonicalize(&b, &eq)));
        prop_assert_eq!(modified_levenshtein(&a, &b, &EquivalenceClasses::default()), levenshtein(&a, &b));
    }

    #[test]
    fn pruned_matches_reference(
        query in short_word(),
        standards in prop::collection::vec(short_word(), 1..40),
        modified in any::<bool>(),
    ) {
        let dict = TransliterationDictionary::new(
            standards
                .into_iter()
                .enumerate()
                .map(|(i, standard)| DictionaryEntry { native: format!("n{i}"), standard })
                .collect(),
        );
        // empty standards are rejected by the dictionary
        prop_assume!(dict.is_ok());
        let dict = dict.unwrap();
        let eq = EquivalenceClasses::default_pairs();
        let mode = if modified { MatchMode::Modified } else { MatchMode::Standard };
        let matcher = Matcher::new(&dict, eq.clone(), mode);
        prop_assert_eq!(
            matcher.best_match_pruned(&query).unwrap(),
            best_match(&query, &dict, mode, &eq).unwrap()
        );
    }

    #[test]
    fn encode_decode_round_trip(words in prop::collection::vec("[a-zA-Zঅ-হ]{0,12}", 1..10)) {
        for side in [Side::Source, Side::Target] {
            let alphabet = build_alphabet(&words, side).unwrap();
            for w in &words {
                let e = encode(w, &alphabet, 12).unwrap();
                prop_assert_eq!(e.len(), alphabet.seq_len(12));
                prop_assert_eq!(&decode(&e.indices, &alphabet).unwrap(), w);
            }
        }
    }

    #[test]
    fn lexicon_text_round_trip(pairs in prop::collection::vec((field(), field()), 1..20)) {
        let pl = ParallelLexicon::new(
            pairs
                .iter()
                .map(|(s, t)| LexiconEntry { source: s.clone(), target: t.clone() })
                .collect(),
        )
        .unwrap();
        let text = pl.to_string();
        prop_assert!(text.ends_with('\n'));
        prop_assert_eq!(ParallelLexicon::parse(&text).unwrap(), pl.clone());
        // a missing final newline still parses to the same entries
        prop_assert_eq!(ParallelLexicon::parse(text.trim_end_matches('\n')).unwrap(), pl);
    }

    #[test]
    fn dictionary_text_round_trip(pairs in prop::collection::vec((field(), field()), 1..20)) {
        let dict = TransliterationDictionary::new(
            pairs
                .iter()
                .map(|(n, s)| DictionaryEntry { native: n.clone(), standard: s.clone() })
                .collect(),
        )
        .unwrap();
        prop_assert_eq!(TransliterationDictionary::parse(&dict.to_string()).unwrap(), dict);
    }
}
