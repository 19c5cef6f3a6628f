use serde::{Deserialize, Serialize};

use super::{Label, PromptContext};
use crate::error::{Error, Result};
use crate::problem::{escape_template, Problem, SymbolKind, SymbolSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TweetSubtask {
    Sentiment,
    Stance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetInstance {
    pub text: String,
    pub label: Label,
    pub subtask: TweetSubtask,
}

impl TweetInstance {
    pub fn validate(&self) -> Result<()> {
        if self.text.trim().is_empty() {
            return Err(Error::arg("empty tweet"));
        }
        let ok = match self.subtask {
            TweetSubtask::Sentiment => matches!(self.label, Label::Positive | Label::Negative),
            TweetSubtask::Stance => matches!(self.label, Label::Favor | Label::Against),
        };
        if !ok {
            return Err(Error::arg(format!("label {} does not fit the subtask", self.label.word())));
        }
        Ok(())
    }

    pub fn problem(&self, ctx: &PromptContext) -> Result<Problem> {
        let (task, question) = match self.subtask {
            TweetSubtask::Sentiment => ("sentiment", "Text: Positive or Negative?".to_string()),
            TweetSubtask::Stance => (
                "stance",
                format!(
                    "What is the attitude of the tweet towards {}? Favor or Against?",
                    ctx.stance_target
                ),
            ),
        };
        let template = format!("Tweet: {{s1}}\n{}", escape_template(&question));
        let span = SymbolSpan::at("s1", self.text.trim(), SymbolKind::Tweet)?;
        Problem::new(task, template, vec![span], Some(self.label.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stance_prompt_names_target() {
        let inst = TweetInstance {
            text: "#MAGA all the way".into(),
            label: Label::Favor,
            subtask: TweetSubtask::Stance,
        };
        let p = inst.problem(&PromptContext::default()).unwrap();
        assert!(p.template.ends_with("towards Donald Trump? Favor or Against?"));
        let bad = TweetInstance {
            label: Label::Positive,
            ..inst
        };
        assert!(bad.validate().is_err());
    }
}
