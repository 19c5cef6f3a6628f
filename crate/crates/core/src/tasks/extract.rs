//! Answer extraction from free-form responses. Every rule takes the last
//! match so chain-of-thought preambles do not win over the final answer.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Answer, Gold, Label, TaskId, EMOTIONS};
use crate::converters::sequence::COUNT_WORDS;
use crate::converters::{parse_sequence, parse_sequence_description, BracketNames};
use crate::error::{Error, Result};

/// Whether the expected answer is in symbol form or in its language rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerSpace {
    #[default]
    Symbol,
    Language,
}

static DIGIT_RUN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b\d(?:\s*,\s*\d)*\b").unwrap());

static RUN_PHRASE: LazyLock<Regex> = LazyLock::new(|| {
    let counts = COUNT_WORDS.iter().rev().copied().collect::<Vec<_>>().join("|");
    let run = format!(r"(?:{counts}|[1-9]\d+) \ds?");
    Regex::new(&format!(r"(?i)\b{run}(?:, followed by {run})*\b")).unwrap()
});

static BRACKET_RUN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[()\[\]{}<>](?:\s*[()\[\]{}<>])*").unwrap());

static EMOTION_SCORE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(anger|anticipat|disgust|fear|joy|sad|surpris|trust)\w*[\s:=*\-]*(\d+(?:\.\d+)?|\.\d+)").unwrap()
});

static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+(?:\.\d+)?|\.\d+").unwrap());

static ANSWER_MARKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\banswer(?:\s*:|\s+is\b\s*:?)").unwrap());

fn miss(task: TaskId, what: &str) -> Error {
    Error::ExtractionMiss(format!("{task}: {what}"))
}

fn last_digit_run(raw: &str) -> Option<Vec<u8>> {
    DIGIT_RUN
        .find_iter(raw)
        .last()
        .and_then(|m| parse_sequence(&m.as_str().split_whitespace().collect::<String>()).ok())
}

fn last_run_phrase(raw: &str) -> Option<Vec<u8>> {
    let matches: Vec<_> = RUN_PHRASE.find_iter(raw).collect();
    matches
        .iter()
        .rev()
        .find_map(|m| parse_sequence_description(&m.as_str().to_lowercase()).ok())
}

fn last_bracket_run(raw: &str) -> Option<String> {
    BRACKET_RUN
        .find_iter(raw)
        .last()
        .map(|m| m.as_str().chars().filter(|c| !c.is_whitespace()).collect())
}

fn last_label(raw: &str, labels: [Label; 2]) -> Option<Label> {
    let lower = raw.to_lowercase();
    let mut best: Option<(usize, Label)> = None;
    for label in labels {
        let mut words = vec![label.word()];
        if label == Label::Favor {
            words.push("favour");
        }
        for w in words {
            let re = Regex::new(&format!(r"\b{w}\b")).expect("label pattern");
            if let Some(m) = re.find_iter(&lower).last() {
                if best.is_none_or(|(pos, _)| m.start() > pos) {
                    best = Some((m.start(), label));
                }
            }
        }
    }
    best.map(|(_, l)| l)
}

fn emotion_slot(stem: &str) -> usize {
    let stem = stem.to_lowercase();
    EMOTIONS
        .iter()
        .position(|e| e.starts_with(&stem))
        .expect("pattern only matches emotion stems")
}

fn ratings(raw: &str) -> Option<[Option<f64>; 8]> {
    let mut out = [None; 8];
    let labeled: Vec<_> = EMOTION_SCORE.captures_iter(raw).collect();
    if !labeled.is_empty() {
        for cap in labeled {
            let slot = emotion_slot(&cap[1]);
            out[slot] = cap[2].parse::<f64>().ok().map(|v| v.clamp(0.0, 1.0));
        }
        return Some(out);
    }
    let numbers: Vec<f64> = NUMBER
        .find_iter(raw)
        .filter_map(|m| m.as_str().parse().ok())
        .collect();
    if numbers.is_empty() {
        return None;
    }
    let tail = &numbers[numbers.len().saturating_sub(8)..];
    for (slot, v) in out.iter_mut().zip(tail) {
        *slot = Some(v.clamp(0.0, 1.0));
    }
    Some(out)
}

fn table_answer(raw: &str) -> Option<String> {
    let text = match ANSWER_MARKER.find_iter(raw).last() {
        Some(m) => {
            let rest = &raw[m.end()..];
            rest.lines().map(str::trim).find(|l| !l.is_empty())?.to_string()
        }
        None => raw.lines().map(str::trim).rfind(|l| !l.is_empty())?.to_string(),
    };
    let text = text.strip_suffix('.').unwrap_or(&text).trim().to_string();
    (!text.is_empty()).then_some(text)
}

/// Pull the task-native answer out of a raw response.
///
/// In the language space, sequence and bracket answers are first read as
/// run descriptions or bracket names and normalized back to symbols.
pub fn extract_answer(task: TaskId, raw: &str, space: AnswerSpace, names: Option<&BracketNames>) -> Result<Answer> {
    match task {
        TaskId::Arc => {
            let found = match space {
                AnswerSpace::Symbol => last_digit_run(raw).or_else(|| last_run_phrase(raw)),
                AnswerSpace::Language => last_run_phrase(raw).or_else(|| last_digit_run(raw)),
            };
            found.map(Answer::Sequence).ok_or_else(|| miss(task, "no digit sequence"))
        }
        TaskId::Dyck => {
            let default_names;
            let names = match names {
                Some(n) => n,
                None => {
                    default_names = BracketNames::default();
                    &default_names
                }
            };
            let found = match space {
                AnswerSpace::Symbol => last_bracket_run(raw).or_else(|| names.last_run(raw)),
                AnswerSpace::Language => names.last_run(raw).or_else(|| last_bracket_run(raw)),
            };
            found.map(Answer::Brackets).ok_or_else(|| miss(task, "no brackets"))
        }
        TaskId::Emoji => ratings(raw).map(Answer::Ratings).ok_or_else(|| miss(task, "no scores")),
        TaskId::TableQa => table_answer(raw).map(Answer::Text).ok_or_else(|| miss(task, "empty response")),
        TaskId::Property | TaskId::TabFact | TaskId::Stance | TaskId::Sentiment => {
            let labels = task.labels().expect("binary task");
            last_label(raw, labels)
                .map(Answer::Label)
                .ok_or_else(|| miss(task, &format!("neither {} nor {}", labels[0].word(), labels[1].word())))
        }
    }
}

/// `The answer is X.` for a gold answer.
pub fn canonical_response(gold: &Gold) -> String {
    format!("The answer is {}.", gold.canonical_text())
}
