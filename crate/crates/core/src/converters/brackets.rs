//! Bracket characters and their English names.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const BRACKETS: &str = "()[]{}<>";

const CANONICAL: [(char, &str); 8] = [
    ('(', "open parenthesis"),
    (')', "close parenthesis"),
    ('[', "open square bracket"),
    (']', "close square bracket"),
    ('{', "open curly brace"),
    ('}', "close curly brace"),
    ('<', "open angle bracket"),
    ('>', "close angle bracket"),
];

const ALIASES: [(char, &str); 4] = [
    ('<', "less than sign"),
    ('>', "greater than sign"),
    ('<', "less than"),
    ('>', "greater than"),
];

/// Which naming to emit for angle brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BracketTable {
    #[default]
    Canonical,
    /// `<` and `>` read as comparison signs.
    Alias,
}

pub fn is_bracket(c: char) -> bool {
    BRACKETS.contains(c)
}

pub fn is_opener(c: char) -> bool {
    matches!(c, '(' | '[' | '{' | '<')
}

pub fn closer_for(open: char) -> Option<char> {
    match open {
        '(' => Some(')'),
        '[' => Some(']'),
        '{' => Some('}'),
        '<' => Some('>'),
        _ => None,
    }
}

pub fn bracket_name(c: char, table: BracketTable) -> Option<&'static str> {
    if table == BracketTable::Alias {
        match c {
            '<' => return Some("less than sign"),
            '>' => return Some("greater than sign"),
            _ => {}
        }
    }
    CANONICAL.iter().find(|(b, _)| *b == c).map(|(_, n)| *n)
}

pub fn name_brackets(s: &str) -> Result<Vec<String>> {
    name_brackets_with(s, BracketTable::Canonical)
}

pub fn name_brackets_with(s: &str, table: BracketTable) -> Result<Vec<String>> {
    s.chars()
        .enumerate()
        .map(|(i, c)| {
            bracket_name(c, table)
                .map(str::to_string)
                .ok_or_else(|| Error::arg(format!("{c:?} at index {i} is not a bracket")))
        })
        .collect()
}

/// Names joined by single spaces, the form used as a rendering.
pub fn render_brackets(s: &str, table: BracketTable) -> Result<String> {
    Ok(name_brackets_with(s, table)?.join(" "))
}

pub(crate) fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Name to character lookup; starts from the canonical and alias tables and
/// can learn extra names (for instance ones a model produced).
#[derive(Debug, Clone)]
pub struct BracketNames {
    by_name: HashMap<String, char>,
    longest: usize,
}

impl Default for BracketNames {
    fn default() -> Self {
        let mut names = BracketNames {
            by_name: HashMap::new(),
            longest: 0,
        };
        for (c, n) in CANONICAL.iter().chain(ALIASES.iter()) {
            names.insert(n, *c);
        }
        names
    }
}

impl BracketNames {
    /// Adds a name; the first mapping for a name wins.
    pub fn insert(&mut self, name: &str, c: char) {
        let key = normalize_name(name);
        if key.is_empty() {
            return;
        }
        self.longest = self.longest.max(key.split(' ').count());
        self.by_name.entry(key).or_insert(c);
    }

    pub fn get(&self, name: &str) -> Option<char> {
        self.by_name.get(&normalize_name(name)).copied()
    }

    pub fn to_brackets<S: AsRef<str>>(&self, names: &[S]) -> Result<String> {
        let mut out = String::new();
        let mut unknown = Vec::new();
        for name in names {
            match self.get(name.as_ref()) {
                Some(c) => out.push(c),
                None => unknown.push(name.as_ref().to_string()),
            }
        }
        if unknown.is_empty() {
            Ok(out)
        } else {
            Err(Error::UnknownName(unknown))
        }
    }

    /// Finds the last maximal run of known names in free text, ignoring
    /// punctuation and the word "and" between names.
    pub fn last_run(&self, text: &str) -> Option<String> {
        let words: Vec<String> = text
            .split(|c: char| !(c.is_alphanumeric() || c == '-'))
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        let mut end = words.len();
        let mut found: Vec<char> = Vec::new();
        while end > 0 {
            match self.match_ending_at(&words, end) {
                Some((start, c)) => {
                    found.push(c);
                    end = start;
                    if end > 0 && words[end - 1] == "and" && self.match_ending_at(&words, end - 1).is_some() {
                        end -= 1;
                    }
                }
                None if found.is_empty() => end -= 1,
                None => break,
            }
        }
        if found.is_empty() {
            None
        } else {
            Some(found.into_iter().rev().collect())
        }
    }

    fn match_ending_at(&self, words: &[String], end: usize) -> Option<(usize, char)> {
        (1..=self.longest.min(end)).rev().find_map(|len| {
            let start = end - len;
            self.by_name.get(&words[start..end].join(" ")).map(|&c| (start, c))
        })
    }
}

/// Inverse of [`name_brackets`]; alias names map to the same characters.
pub fn brackets_from_names<S: AsRef<str>>(names: &[S]) -> Result<String> {
    BracketNames::default().to_brackets(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_each_character() {
        assert_eq!(name_brackets("[").unwrap(), vec!["open square bracket"]);
        assert!(name_brackets("").unwrap().is_empty());
        assert_eq!(
            name_brackets("([]").unwrap(),
            vec!["open parenthesis", "open square bracket", "close square bracket"]
        );
        assert_eq!(
            name_brackets_with("<>", BracketTable::Alias).unwrap(),
            vec!["less than sign", "greater than sign"]
        );
    }

    #[test]
    fn non_bracket_reports_index() {
        let err = name_brackets("(a").unwrap_err().to_string();
        assert!(err.contains("'a'") && err.contains("index 1"), "{err}");
    }

    #[test]
    fn inverse_mapping() {
        assert_eq!(brackets_from_names(&["close parenthesis"]).unwrap(), ")");
        assert_eq!(brackets_from_names::<&str>(&[]).unwrap(), "");
        assert_eq!(brackets_from_names(&["greater than sign"]).unwrap(), ">");
        assert_eq!(brackets_from_names(&["  Open   Curly Brace "]).unwrap(), "{");
        match brackets_from_names(&["open parenthesis", "left wing"]) {
            Err(Error::UnknownName(names)) => assert_eq!(names, vec!["left wing"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn finds_trailing_name_run() {
        let names = BracketNames::default();
        assert_eq!(
            names.last_run("The answer is close square bracket close parenthesis.").as_deref(),
            Some("])")
        );
        assert_eq!(
            names.last_run("open parenthesis ... so: close curly brace, close angle bracket and greater than sign").as_deref(),
            Some("}>>")
        );
        assert_eq!(names.last_run("no names here"), None);
    }

    #[test]
    fn learned_names_extend_lookup() {
        let mut names = BracketNames::default();
        names.insert("right chevron", '>');
        assert_eq!(names.to_brackets(&["Right Chevron"]).unwrap(), ">");
        assert_eq!(names.last_run("then a right chevron").as_deref(), Some(">"));
    }
}
