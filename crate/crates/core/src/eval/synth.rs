//! Seeded synthetic corpus: a dictionary of pseudo-Bengali words in an
//! ITRANS-like scheme with native-script forms, noisy user spellings for
//! training, and held-out noisy test words whose golds are all in vocabulary.
//!
//! Noise model, each step applied with probability `noise_rate`:
//!
//! * per unit (consonant or vowel): replace the canonical spelling with a
//!   random lowercase phonetic variant (`A` → `a`/`aa`, `I` → `i`/`ee`,
//!   `a` → `a`/`o`, `Ch` → `chh`/`ch`, ...);
//! * per word: swap one `a`↔`o`; swap one `b`↔`v`; elongate one character to
//!   three or four copies; delete one non-initial vowel.
//!
//! With `noise_rate = 0` every user spelling equals its gold form.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lexicon::{
    DictionaryEntry, LexiconEntry, ParallelLexicon, TestEntry, TestSet, TransliterationDictionary,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub dictionary_size: usize,
    pub train_pairs: usize,
    pub test_size: usize,
    pub noise_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            dictionary_size: 200,
            train_pairs: 1000,
            test_size: 200,
            noise_rate: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub dictionary: TransliterationDictionary,
    pub lexicon: ParallelLexicon,
    pub testset: TestSet,
}

struct Consonant {
    canon: &'static str,
    native: char,
    variants: &'static [&'static str],
}

struct Vowel {
    canon: &'static str,
    independent: char,
    sign: Option<char>,
    variants: &'static [&'static str],
}

const CONSONANTS: &[Consonant] = &[
    Consonant {
        canon: "k",
        native: 'ক',
        variants: &["k"],
    },
    Consonant {
        canon: "kh",
        native: 'খ',
        variants: &["kh"],
    },
    Consonant {
        canon: "g",
        native: 'গ',
        variants: &["g"],
    },
    Consonant {
        canon: "gh",
        native: 'ঘ',
        variants: &["gh", "g"],
    },
    Consonant {
        canon: "ch",
        native: 'চ',
        variants: &["ch", "c"],
    },
    Consonant {
        canon: "Ch",
        native: 'ছ',
        variants: &["chh", "ch"],
    },
    Consonant {
        canon: "j",
        native: 'জ',
        variants: &["j", "z"],
    },
    Consonant {
        canon: "T",
        native: 'ট',
        variants: &["t"],
    },
    Consonant {
        canon: "Th",
        native: 'ঠ',
        variants: &["th"],
    },
    Consonant {
        canon: "D",
        native: 'ড',
        variants: &["d"],
    },
    Consonant {
        canon: "t",
        native: 'ত',
        variants: &["t"],
    },
    Consonant {
        canon: "th",
        native: 'থ',
        variants: &["th"],
    },
    Consonant {
        canon: "d",
        native: 'দ',
        variants: &["d"],
    },
    Consonant {
        canon: "dh",
        native: 'ধ',
        variants: &["dh", "d"],
    },
    Consonant {
        canon: "n",
        native: 'ন',
        variants: &["n"],
    },
    Consonant {
        canon: "p",
        native: 'প',
        variants: &["p"],
    },
    Consonant {
        canon: "ph",
        native: 'ফ',
        variants: &["ph", "f"],
    },
    Consonant {
        canon: "b",
        native: 'ব',
        variants: &["b"],
    },
    Consonant {
        canon: "bh",
        native: 'ভ',
        variants: &["bh", "v"],
    },
    Consonant {
        canon: "m",
        native: 'ম',
        variants: &["m"],
    },
    Consonant {
        canon: "r",
        native: 'র',
        variants: &["r"],
    },
    Consonant {
        canon: "l",
        native: 'ল',
        variants: &["l"],
    },
    Consonant {
        canon: "sh",
        native: 'শ',
        variants: &["sh", "s"],
    },
    Consonant {
        canon: "S",
        native: 'ষ',
        variants: &["sh", "s"],
    },
    Consonant {
        canon: "s",
        native: 'স',
        variants: &["s", "sh"],
    },
    Consonant {
        canon: "h",
        native: 'হ',
        variants: &["h"],
    },
    Consonant {
        canon: "y",
        native: 'য',
        variants: &["y", "j"],
    },
];

const VOWELS: &[Vowel] = &[
    Vowel {
        canon: "a",
        independent: 'অ',
        sign: None,
        variants: &["a", "o"],
    },
    Vowel {
        canon: "A",
        independent: 'আ',
        sign: Some('া'),
        variants: &["a", "aa"],
    },
    Vowel {
        canon: "i",
        independent: 'ই',
        sign: Some('ি'),
        variants: &["i"],
    },
    Vowel {
        canon: "I",
        independent: 'ঈ',
        sign: Some('ী'),
        variants: &["i", "ee"],
    },
    Vowel {
        canon: "u",
        independent: 'উ',
        sign: Some('ু'),
        variants: &["u"],
    },
    Vowel {
        canon: "U",
        independent: 'ঊ',
        sign: Some('ূ'),
        variants: &["u", "oo"],
    },
    Vowel {
        canon: "e",
        independent: 'এ',
        sign: Some('ে'),
        variants: &["e"],
    },
    Vowel {
        canon: "o",
        independent: 'ও',
        sign: Some('ো'),
        variants: &["o"],
    },
    Vowel {
        canon: "ai",
        independent: 'ঐ',
        sign: Some('ৈ'),
        variants: &["ai", "oi"],
    },
    Vowel {
        canon: "au",
        independent: 'ঔ',
        sign: Some('ৌ'),
        variants: &["au", "ou"],
    },
];

const MAX_CANON_LEN: usize = 12;

#[derive(Clone, Copy)]
enum Unit {
    C(usize),
    V(usize),
}

impl Unit {
    fn canon(self) -> &'static str {
        match self {
            Unit::C(i) => CONSONANTS[i].canon,
            Unit::V(i) => VOWELS[i].canon,
        }
    }

    fn variants(self) -> &'static [&'static str] {
        match self {
            Unit::C(i) => CONSONANTS[i].variants,
            Unit::V(i) => VOWELS[i].variants,
        }
    }
}

fn canonical(units: &[Unit]) -> String {
    units.iter().map(|u| u.canon()).collect()
}

fn native(units: &[Unit]) -> String {
    let mut out = String::new();
    let mut after_consonant = false;
    for &u in units {
        match u {
            Unit::C(i) => {
                out.push(CONSONANTS[i].native);
                after_consonant = true;
            }
            Unit::V(i) => {
                let v = &VOWELS[i];
                match (after_consonant, v.sign) {
                    (true, Some(sign)) => out.push(sign),
                    (true, None) => {}
                    (false, _) => out.push(v.independent),
                }
                after_consonant = false;
            }
        }
    }
    out
}

/// Weighted towards `a`, `A`, `o` and `b`/`bh`/`v`-prone consonants so the
/// equivalence classes matter.
fn random_vowel(rng: &mut ChaCha8Rng) -> usize {
    const WEIGHTS: [u32; 10] = [6, 5, 3, 1, 2, 1, 2, 4, 1, 1];
    let total: u32 = WEIGHTS.iter().sum();
    let mut pick = rng.gen_range(0..total);
    for (i, w) in WEIGHTS.iter().enumerate() {
        if pick < *w {
            return i;
        }
        pick -= w;
    }
    unreachable!()
}

fn random_word(rng: &mut ChaCha8Rng) -> Vec<Unit> {
    let syllables = rng.gen_range(2..=3);
    let mut units = Vec::new();
    for s in 0..syllables {
        if s > 0 || rng.gen_bool(0.85) {
            units.push(Unit::C(rng.gen_range(0..CONSONANTS.len())));
        }
        units.push(Unit::V(random_vowel(rng)));
    }
    if rng.gen_bool(0.3) {
        units.push(Unit::C(rng.gen_range(0..CONSONANTS.len())));
    }
    units
}

fn swap_one(chars: &mut [char], a: char, b: char, rng: &mut ChaCha8Rng) {
    let positions: Vec<usize> = (0..chars.len())
        .filter(|&i| chars[i] == a || chars[i] == b)
        .collect();
    if let Some(&i) = positions.choose(rng) {
        chars[i] = if chars[i] == a { b } else { a };
    }
}

/// A user spelling of `units` under the noise model.
fn noisy_spelling(units: &[Unit], rate: f64, rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    for &u in units {
        if rate > 0.0 && rng.gen_bool(rate) {
            s.push_str(u.variants().choose(rng).expect("non-empty variants"));
        } else {
            s.push_str(u.canon());
        }
    }
    let mut chars: Vec<char> = s.chars().collect();
    if rate > 0.0 && rng.gen_bool(rate) {
        swap_one(&mut chars, 'a', 'o', rng);
    }
    if rate > 0.0 && rng.gen_bool(rate) {
        swap_one(&mut chars, 'b', 'v', rng);
    }
    if rate > 0.0 && rng.gen_bool(rate / 2.0) {
        let i = rng.gen_range(0..chars.len());
        let extra = rng.gen_range(2..=3);
        for _ in 0..extra {
            chars.insert(i, chars[i]);
        }
    }
    if rate > 0.0 && chars.len() > 3 && rng.gen_bool(rate / 2.0) {
        let vowels: Vec<usize> = (1..chars.len())
            .filter(|&i| "aeiou".contains(chars[i]))
            .collect();
        if let Some(&i) = vowels.choose(rng) {
            chars.remove(i);
        }
    }
    chars.into_iter().collect()
}

pub fn generate(cfg: &SynthConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut seen = HashSet::new();
    let mut words: Vec<Vec<Unit>> = Vec::with_capacity(cfg.dictionary_size);
    while words.len() < cfg.dictionary_size {
        let w = random_word(&mut rng);
        let canon = canonical(&w);
        if canon.chars().count() <= MAX_CANON_LEN && seen.insert(canon) {
            words.push(w);
        }
    }
    let dictionary = TransliterationDictionary::new(
        words
            .iter()
            .map(|w| DictionaryEntry {
                native: native(w),
                standard: canonical(w),
            })
            .collect(),
    )
    .expect("non-empty dictionary");

    let mut train_sources = HashSet::new();
    let lexicon_entries: Vec<LexiconEntry> = (0..cfg.train_pairs)
        .map(|i| {
            let w = &words[i % words.len()];
            let source = noisy_spelling(w, cfg.noise_rate, &mut rng);
            train_sources.insert(source.clone());
            LexiconEntry {
                source,
                target: canonical(w),
            }
        })
        .collect();

    let test_entries: Vec<TestEntry> = (0..cfg.test_size)
        .map(|_| {
            let w = words.choose(&mut rng).expect("non-empty dictionary");
            // Prefer spellings not seen in training; give up after a few tries.
            let mut input = noisy_spelling(w, cfg.noise_rate, &mut rng);
            for _ in 0..8 {
                if !train_sources.contains(&input) {
                    break;
                }
                input = noisy_spelling(w, cfg.noise_rate, &mut rng);
            }
            TestEntry {
                input,
                gold: canonical(w),
            }
        })
        .collect();

    SyntheticCorpus {
        dictionary,
        lexicon: ParallelLexicon::new(lexicon_entries).expect("positive train_pairs"),
        testset: TestSet::new(test_entries).expect("positive test_size"),
    }
}
