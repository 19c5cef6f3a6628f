//! Adapters for the eight task families: instances, gold oracles,
//! generators, prompt construction, answer extraction and dataset loading.

pub mod arc;
mod convert;
pub mod dyck;
pub mod emoji;
mod extract;
mod load;
pub mod property;
pub mod table;
pub mod tweet;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use arc::{gen_arc, shift_oracle, synthetic_arc, ArcInstance};
pub use convert::ToolSet;
pub use dyck::{dyck_oracle, gen_dyck, synthetic_dyck, DyckInstance};
pub use emoji::{ratings_text, EmojiInstance, EMOTIONS};
pub use extract::{canonical_response, extract_answer, AnswerSpace};
pub use load::load_dataset;
pub use property::{MoleculeDataset, PropertyInstance};
pub use table::{TableInstance, TableSubtask};
pub use tweet::{TweetInstance, TweetSubtask};

use crate::error::{Error, Result};
use crate::problem::{build_query, MethodConfig, Problem, Query, Rendering, SymbolSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    Arc,
    Dyck,
    Property,
    Emoji,
    TableQa,
    #[serde(rename = "tabfact")]
    TabFact,
    Stance,
    Sentiment,
}

impl TaskId {
    pub const ALL: [TaskId; 8] = [
        TaskId::Arc,
        TaskId::Dyck,
        TaskId::Property,
        TaskId::Emoji,
        TaskId::TableQa,
        TaskId::TabFact,
        TaskId::Stance,
        TaskId::Sentiment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskId::Arc => "arc",
            TaskId::Dyck => "dyck",
            TaskId::Property => "property",
            TaskId::Emoji => "emoji",
            TaskId::TableQa => "table_qa",
            TaskId::TabFact => "tabfact",
            TaskId::Stance => "stance",
            TaskId::Sentiment => "sentiment",
        }
    }

    /// The two admissible labels of a binary task.
    pub fn labels(self) -> Option<[Label; 2]> {
        match self {
            TaskId::Property => Some([Label::Yes, Label::No]),
            TaskId::TabFact => Some([Label::True, Label::False]),
            TaskId::Stance => Some([Label::Favor, Label::Against]),
            TaskId::Sentiment => Some([Label::Positive, Label::Negative]),
            _ => None,
        }
    }

    /// Default dataset file name inside a data directory.
    pub fn dataset_file(self) -> &'static str {
        match self {
            TaskId::Arc => "arc.jsonl",
            TaskId::Dyck => "dyck.jsonl",
            TaskId::Property => "property.csv",
            TaskId::Emoji => "emoji.tsv",
            TaskId::TableQa => "table_qa.jsonl",
            TaskId::TabFact => "tabfact.jsonl",
            TaskId::Stance => "stance.csv",
            TaskId::Sentiment => "sentiment.csv",
        }
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown task {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Yes,
    No,
    True,
    False,
    Favor,
    Against,
    Positive,
    Negative,
}

impl Label {
    pub fn word(self) -> &'static str {
        match self {
            Label::Yes => "yes",
            Label::No => "no",
            Label::True => "true",
            Label::False => "false",
            Label::Favor => "favor",
            Label::Against => "against",
            Label::Positive => "positive",
            Label::Negative => "negative",
        }
    }

    /// Capitalized form used in prompts and canonical answers.
    pub fn display(self) -> String {
        let w = self.word();
        let mut c = w.chars();
        match c.next() {
            Some(first) => first.to_uppercase().chain(c).collect(),
            None => String::new(),
        }
    }

    /// Parses a label for a task, accepting common encodings (1/0, true/false).
    pub fn parse_for(task: TaskId, text: &str) -> Result<Label> {
        let [pos, neg] = task
            .labels()
            .ok_or_else(|| Error::arg(format!("task {task} has no labels")))?;
        let t = text.trim().to_lowercase();
        if t == pos.word() || t == "1" || (task != TaskId::TabFact && t == "true") {
            return Ok(pos);
        }
        if t == neg.word() || t == "0" || (task != TaskId::TabFact && t == "false") {
            return Ok(neg);
        }
        if task == TaskId::TabFact {
            match t.as_str() {
                "entailed" => return Ok(Label::True),
                "refuted" => return Ok(Label::False),
                _ => {}
            }
        }
        Err(Error::arg(format!(
            "label {text:?} is not one of {}/{} for task {task}",
            pos.word(),
            neg.word()
        )))
    }
}

/// Gold answer in task-native form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gold {
    Sequence(Vec<u8>),
    Brackets(String),
    Label(Label),
    Ratings([f64; 8]),
    Answers(Vec<String>),
}

impl Gold {
    /// Canonical textual answer, as a perfect responder would give it.
    pub fn canonical_text(&self) -> String {
        match self {
            Gold::Sequence(s) => crate::converters::format_sequence(s),
            Gold::Brackets(b) => b.clone(),
            Gold::Label(l) => l.display(),
            Gold::Ratings(r) => ratings_text(r),
            Gold::Answers(a) => a.first().cloned().unwrap_or_default(),
        }
    }
}

/// An answer pulled out of a model response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Answer {
    Sequence(Vec<u8>),
    Brackets(String),
    Label(Label),
    /// One slot per emotion; `None` where no score was found.
    Ratings([Option<f64>; 8]),
    Text(String),
}

impl Answer {
    /// True when part of the answer could not be extracted.
    pub fn is_partial(&self) -> bool {
        matches!(self, Answer::Ratings(r) if r.iter().any(Option::is_none))
    }

    /// Exact correctness for tasks scored by accuracy or exact match.
    pub fn matches(&self, gold: &Gold) -> bool {
        match (self, gold) {
            (Answer::Sequence(a), Gold::Sequence(g)) => a == g,
            (Answer::Brackets(a), Gold::Brackets(g)) => a == g,
            (Answer::Label(a), Gold::Label(g)) => a == g,
            (Answer::Text(a), Gold::Answers(g)) => crate::metrics::exact_match(a, g) == 1,
            (Answer::Ratings(a), Gold::Ratings(g)) => a.iter().zip(g).all(|(a, g)| *a == Some(*g)),
            _ => false,
        }
    }
}

/// Task-specific prompt settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptContext {
    pub stance_target: String,
}

impl Default for PromptContext {
    fn default() -> Self {
        PromptContext {
            stance_target: "Donald Trump".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Instance {
    Arc(ArcInstance),
    Dyck(DyckInstance),
    Property(PropertyInstance),
    Emoji(EmojiInstance),
    Table(TableInstance),
    Tweet(TweetInstance),
}

impl Instance {
    pub fn task_id(&self) -> TaskId {
        match self {
            Instance::Arc(_) => TaskId::Arc,
            Instance::Dyck(_) => TaskId::Dyck,
            Instance::Property(_) => TaskId::Property,
            Instance::Emoji(_) => TaskId::Emoji,
            Instance::Table(t) => match t.subtask {
                TableSubtask::Qa => TaskId::TableQa,
                TableSubtask::Fact => TaskId::TabFact,
            },
            Instance::Tweet(t) => match t.subtask {
                TweetSubtask::Stance => TaskId::Stance,
                TweetSubtask::Sentiment => TaskId::Sentiment,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Instance::Arc(i) => i.validate(),
            Instance::Dyck(i) => i.validate(),
            Instance::Property(_) => Ok(()),
            Instance::Emoji(i) => i.validate(),
            Instance::Table(i) => i.validate(),
            Instance::Tweet(i) => i.validate(),
        }
    }

    pub fn problem(&self, ctx: &PromptContext) -> Result<Problem> {
        match self {
            Instance::Arc(i) => i.problem(),
            Instance::Dyck(i) => i.problem(),
            Instance::Property(i) => i.problem(),
            Instance::Emoji(i) => i.problem(),
            Instance::Table(i) => i.problem(),
            Instance::Tweet(i) => i.problem(ctx),
        }
    }

    pub fn gold(&self) -> Gold {
        match self {
            Instance::Arc(i) => Gold::Sequence(i.gold_output.clone()),
            Instance::Dyck(i) => Gold::Brackets(i.gold_closing.clone()),
            Instance::Property(i) => Gold::Label(i.label),
            Instance::Emoji(i) => Gold::Ratings(i.human_ratings),
            Instance::Table(i) => i.gold.clone(),
            Instance::Tweet(i) => Gold::Label(i.label),
        }
    }

    /// The gold as a span, for tasks whose answer is itself symbolic and is
    /// converted alongside the question under substitution.
    pub fn gold_span(&self) -> Option<SymbolSpan> {
        use crate::problem::SymbolKind;
        match self {
            Instance::Arc(i) => SymbolSpan::at(
                "gold",
                crate::converters::format_sequence(&i.gold_output),
                SymbolKind::Sequence,
            )
            .ok(),
            // an empty closing has nothing to convert
            Instance::Dyck(i) => SymbolSpan::at("gold", i.gold_closing.clone(), SymbolKind::Brackets).ok(),
            _ => None,
        }
    }
}

/// Build the final query for one instance under a method.
pub fn build_task_prompt(
    instance: &Instance,
    method: &MethodConfig,
    renderings: &[Rendering],
    ctx: &PromptContext,
) -> Result<Query> {
    build_query(&instance.problem(ctx)?, method, renderings)
}

/// `Input: {a} Output: {b}` lines for demonstrations, then the open target.
pub(crate) fn pair_template(instruction: &str, n_pairs: usize) -> String {
    let mut t = String::from(instruction);
    for i in 0..n_pairs {
        t.push_str(&format!("\nInput: {{s{}}} Output: {{s{}}}", 2 * i + 1, 2 * i + 2));
    }
    t.push_str(&format!("\nInput: {{s{}}} Output:", 2 * n_pairs + 1));
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_ids_round_trip() {
        for t in TaskId::ALL {
            assert_eq!(t.as_str().parse::<TaskId>().unwrap(), t);
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{}\"", t.as_str()));
        }
        assert!("move".parse::<TaskId>().is_err());
    }

    #[test]
    fn label_parsing() {
        assert_eq!(Label::parse_for(TaskId::Property, "1").unwrap(), Label::Yes);
        assert_eq!(Label::parse_for(TaskId::Property, "No").unwrap(), Label::No);
        assert_eq!(Label::parse_for(TaskId::TabFact, "true").unwrap(), Label::True);
        assert_eq!(Label::parse_for(TaskId::TabFact, "refuted").unwrap(), Label::False);
        assert_eq!(Label::parse_for(TaskId::Stance, "AGAINST").unwrap(), Label::Against);
        assert!(Label::parse_for(TaskId::Sentiment, "neutral").is_err());
        assert!(Label::parse_for(TaskId::Arc, "yes").is_err());
        assert_eq!(Label::Favor.display(), "Favor");
    }

    #[test]
    fn pair_template_layout() {
        assert_eq!(
            pair_template("Rule?", 2),
            "Rule?\nInput: {s1} Output: {s2}\nInput: {s3} Output: {s4}\nInput: {s5} Output:"
        );
    }
}
