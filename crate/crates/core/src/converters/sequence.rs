//! Run-length descriptions of digit sequences, e.g. `[1,1,1,0,0]` becomes
//! `three 1s, followed by two 0s`.

use crate::error::{Error, Result};

pub(crate) const COUNT_WORDS: [&str; 20] = [
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
    "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
];

pub const RUN_SEPARATOR: &str = ", followed by ";

/// A maximal block of one repeated value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub value: u8,
    pub count: usize,
}

pub fn runs(seq: &[u8]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::new();
    for &v in seq {
        match out.last_mut() {
            Some(run) if run.value == v => run.count += 1,
            _ => out.push(Run { value: v, count: 1 }),
        }
    }
    out
}

fn count_word(count: usize) -> String {
    match count {
        1..=20 => COUNT_WORDS[count - 1].to_string(),
        n => n.to_string(),
    }
}

fn check_values(seq: &[u8]) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::arg("cannot describe an empty sequence"));
    }
    if let Some((i, v)) = seq.iter().enumerate().find(|(_, &v)| v > 9) {
        return Err(Error::arg(format!("value {v} at index {i} is outside 0..=9")));
    }
    Ok(())
}

pub fn describe_sequence(seq: &[u8]) -> Result<String> {
    check_values(seq)?;
    let parts: Vec<String> = runs(seq)
        .into_iter()
        .map(|r| {
            let plural = if r.count == 1 { "" } else { "s" };
            format!("{} {}{}", count_word(r.count), r.value, plural)
        })
        .collect();
    Ok(parts.join(RUN_SEPARATOR))
}

fn parse_count(word: &str) -> Option<usize> {
    if let Some(i) = COUNT_WORDS.iter().position(|w| *w == word) {
        return Some(i + 1);
    }
    // digits only for counts the word list does not cover
    if !word.is_empty() && word.bytes().all(|b| b.is_ascii_digit()) && !word.starts_with('0') {
        return word.parse().ok().filter(|&n: &usize| n > 20);
    }
    None
}

fn parse_run(text: &str, offset: usize) -> Result<Run> {
    let err = |position: usize, message: String| Error::Parse { position, message };
    let space = text
        .find(' ')
        .ok_or_else(|| err(offset, format!("expected `<count> <digit>`, found {text:?}")))?;
    let (word, rest) = (&text[..space], &text[space + 1..]);
    let count = parse_count(word).ok_or_else(|| err(offset, format!("unknown count {word:?}")))?;
    let mut chars = rest.chars();
    let digit = chars
        .next()
        .and_then(|c| c.to_digit(10))
        .ok_or_else(|| err(offset + space + 1, format!("expected a digit, found {rest:?}")))?;
    let suffix = chars.as_str();
    let expected = if count == 1 { "" } else { "s" };
    if suffix != expected {
        return Err(err(
            offset + space + 2,
            format!("expected {expected:?} after the digit for count {count}, found {suffix:?}"),
        ));
    }
    Ok(Run {
        value: digit as u8,
        count,
    })
}

/// Inverse of [`describe_sequence`]; accepts exactly the strings it produces.
pub fn parse_sequence_description(text: &str) -> Result<Vec<u8>> {
    if text.is_empty() {
        return Err(Error::Parse {
            position: 0,
            message: "empty description".into(),
        });
    }
    let mut seq = Vec::new();
    let mut offset = 0;
    let mut prev: Option<u8> = None;
    for part in text.split(RUN_SEPARATOR) {
        let run = parse_run(part, offset)?;
        if prev == Some(run.value) {
            return Err(Error::Parse {
                position: offset,
                message: format!("adjacent runs repeat the value {}", run.value),
            });
        }
        prev = Some(run.value);
        seq.extend(std::iter::repeat_n(run.value, run.count));
        offset += part.len() + RUN_SEPARATOR.len();
    }
    Ok(seq)
}

/// `1,0,0` style rendering used in prompts.
pub fn format_sequence(seq: &[u8]) -> String {
    seq.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses `1,0,0` (whitespace around commas tolerated).
pub fn parse_sequence(text: &str) -> Result<Vec<u8>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::arg("empty sequence"));
    }
    text.split(',')
        .map(|cell| {
            let cell = cell.trim();
            match cell.parse::<u8>() {
                Ok(v) if v <= 9 && cell.len() == 1 => Ok(v),
                _ => Err(Error::arg(format!("{cell:?} is not a digit in 0..=9"))),
            }
        })
        .collect()
}
