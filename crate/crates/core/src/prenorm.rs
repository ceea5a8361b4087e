//! Rule-based pre-normalization of raw user input.
//!
//! Applied to every source-side word before the sequence model: lowercase,
//! replace each digit by its spoken form, then cut every run of three or more
//! identical characters down to two.

use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DigitTableError {
    #[error("failed to read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `<digit>\\t<phone>`")]
    Malformed { line: usize },
    #[error("digit {0} mapped more than once")]
    Duplicate(char),
    #[error("digit {0} has no phone word")]
    Missing(char),
    #[error("phone word {phone:?} for digit {digit} is invalid: {reason}")]
    InvalidPhone {
        digit: char,
        phone: String,
        reason: &'static str,
    },
}

/// Spoken form of each digit `0`..=`9`.
///
/// Phone words must be non-empty, lowercase, digit-free and free of runs of
/// three identical characters, which keeps [`prenormalize`] idempotent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitPhoneTable {
    phones: [String; 10],
}

impl Default for DigitPhoneTable {
    fn default() -> Self {
        let phones = [
            "shunno", "ek", "dui", "tin", "char", "pach", "chhoy", "shat", "at", "noy",
        ]
        .map(String::from);
        Self { phones }
    }
}

impl DigitPhoneTable {
    pub fn new(phones: [String; 10]) -> Result<Self, DigitTableError> {
        for (d, phone) in phones.iter().enumerate() {
            let digit = char::from(b'0' + d as u8);
            let invalid = |reason| DigitTableError::InvalidPhone {
                digit,
                phone: phone.clone(),
                reason,
            };
            if phone.is_empty() {
                return Err(invalid("empty"));
            }
            if phone.chars().any(|c| c.is_ascii_digit()) {
                return Err(invalid("contains a digit"));
            }
            if phone.to_lowercase() != *phone {
                return Err(invalid("not lowercase"));
            }
            if trim_elongation(phone) != *phone {
                return Err(invalid("contains a run of 3+ identical characters"));
            }
        }
        Ok(Self { phones })
    }

    /// Parse ten `<digit>\t<phone>` lines, in any order.
    pub fn parse(text: &str) -> Result<Self, DigitTableError> {
        let mut slots: [Option<String>; 10] = Default::default();
        for (i, line) in text.lines().enumerate() {
            let (d, phone) = line
                .split_once('\t')
                .ok_or(DigitTableError::Malformed { line: i + 1 })?;
            let mut chars = d.chars();
            let digit = match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_digit() => c,
                _ => return Err(DigitTableError::Malformed { line: i + 1 }),
            };
            let slot = &mut slots[digit as usize - '0' as usize];
            if slot.is_some() {
                return Err(DigitTableError::Duplicate(digit));
            }
            *slot = Some(phone.to_owned());
        }
        let mut phones: [String; 10] = Default::default();
        for (d, slot) in slots.into_iter().enumerate() {
            phones[d] = slot.ok_or(DigitTableError::Missing(char::from(b'0' + d as u8)))?;
        }
        Self::new(phones)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DigitTableError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| DigitTableError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Phone word for an ASCII digit, `None` for anything else.
    pub fn phone(&self, c: char) -> Option<&str> {
        c.to_digit(10).map(|d| self.phones[d as usize].as_str())
    }
}

/// Replace every ASCII digit by its phone word, one digit at a time.
pub fn expand_digits(s: &str, table: &DigitPhoneTable) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match table.phone(c) {
            Some(phone) => out.push_str(phone),
            None => out.push(c),
        }
    }
    out
}

/// Shorten every run of more than two identical characters to exactly two.
pub fn trim_elongation(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut prev = None;
    let mut run = 0;
    for c in s.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= 2 {
            out.push(c);
        }
    }
    out
}

/// Full source-side pre-normalization: lowercase, expand digits, trim runs.
pub fn prenormalize(s: &str, table: &DigitPhoneTable) -> String {
    trim_elongation(&expand_digits(&s.to_lowercase(), table))
}
