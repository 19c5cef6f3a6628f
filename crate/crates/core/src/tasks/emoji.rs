use serde::{Deserialize, Serialize};

use crate::converters::names::{emoji_chars, emoji_key};
use crate::error::{Error, Result};
use crate::problem::{Problem, SymbolKind, SymbolSpan};

/// Emotion order shared by ratings, prompts and extraction.
pub const EMOTIONS: [&str; 8] = [
    "anger",
    "anticipation",
    "disgust",
    "fear",
    "joy",
    "sadness",
    "surprise",
    "trust",
];

const QUESTION: &str = "Rate how strongly the emoji expresses each of the eight basic emotions \
(anger, anticipation, disgust, fear, joy, sadness, surprise, trust) with a score between 0 and 1. \
Answer with one line per emotion in the form \"emotion: score\".";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmojiInstance {
    /// Normalized codepoint key, e.g. `U+1F62D`.
    pub emoji: String,
    pub human_ratings: [f64; 8],
}

impl EmojiInstance {
    pub fn new(emoji: &str, human_ratings: [f64; 8]) -> Result<Self> {
        let instance = EmojiInstance {
            emoji: emoji_key(emoji)?,
            human_ratings,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn validate(&self) -> Result<()> {
        emoji_chars(&self.emoji)?;
        for (name, r) in EMOTIONS.iter().zip(self.human_ratings) {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::arg(format!("{name} rating {r} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        let span = SymbolSpan::at("s1", emoji_chars(&self.emoji)?, SymbolKind::Emoji)?;
        Ok(
            Problem::new("emoji", format!("Emoji: {{s1}}\n{QUESTION}"), vec![span], Some(ratings_text(&self.human_ratings)))?
                .with_meta("codepoints", self.emoji.as_str()),
        )
    }
}

/// `anger: 0.1, anticipation: 0.5, ...` in emotion order.
pub fn ratings_text(ratings: &[f64; 8]) -> String {
    EMOTIONS
        .iter()
        .zip(ratings)
        .map(|(e, r)| format!("{e}: {r}"))
        .collect::<Vec<_>>()
        .join(", ")
}
