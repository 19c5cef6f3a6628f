use std::path::Path;

use super::{Backend, ChatMessage, CompletionRequest};
use crate::error::{Error, Result};
use crate::problem::{ConversionMethod, Rendering, SymbolKind, SymbolSpan};

const PLACEHOLDER: &str = "{symbol}";

const DEFAULT_PROMPTS: [(&str, &str); 6] = [
    ("arc", include_str!("../../data/prompts/arc.txt")),
    ("dyck", include_str!("../../data/prompts/dyck.txt")),
    ("property", include_str!("../../data/prompts/property.txt")),
    ("emoji", include_str!("../../data/prompts/emoji.txt")),
    ("table", include_str!("../../data/prompts/table.txt")),
    ("tweet", include_str!("../../data/prompts/tweet.txt")),
];

/// Symbol kind a task's conversion prompt is written for.
pub fn kind_for_task(task_id: &str) -> Option<SymbolKind> {
    match task_id {
        "arc" => Some(SymbolKind::Sequence),
        "dyck" => Some(SymbolKind::Brackets),
        "property" => Some(SymbolKind::Smiles),
        "emoji" => Some(SymbolKind::Emoji),
        "table_qa" | "tabfact" => Some(SymbolKind::Table),
        "stance" | "sentiment" => Some(SymbolKind::Tweet),
        _ => None,
    }
}

fn prompt_file(task_id: &str) -> &str {
    match task_id {
        "table_qa" | "tabfact" => "table",
        "stance" | "sentiment" => "tweet",
        other => other,
    }
}

/// Task-specific instruction asking a model to describe one symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionPrompt {
    pub task_id: String,
    pub template: String,
}

impl ConversionPrompt {
    pub fn new(task_id: impl Into<String>, template: impl Into<String>) -> Result<Self> {
        let prompt = ConversionPrompt {
            task_id: task_id.into(),
            template: template.into().trim_end().to_string(),
        };
        let count = prompt.template.matches(PLACEHOLDER).count();
        if count != 1 {
            return Err(Error::arg(format!(
                "conversion prompt for {} must contain exactly one {PLACEHOLDER}, found {count}",
                prompt.task_id
            )));
        }
        Ok(prompt)
    }

    /// The shipped prompt for a task.
    pub fn default_for(task_id: &str) -> Result<Self> {
        let file = prompt_file(task_id);
        let template = DEFAULT_PROMPTS
            .iter()
            .find(|(name, _)| *name == file)
            .map(|(_, t)| *t)
            .ok_or_else(|| Error::arg(format!("no default conversion prompt for task {task_id:?}")))?;
        Self::new(task_id, template)
    }

    /// `<dir>/<task file>.txt` if present, else the shipped prompt.
    pub fn from_dir_or_default(dir: Option<&Path>, task_id: &str) -> Result<Self> {
        if let Some(dir) = dir {
            let path = dir.join(format!("{}.txt", prompt_file(task_id)));
            if path.exists() {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                return Self::new(task_id, text);
            }
        }
        Self::default_for(task_id)
    }

    pub fn render(&self, symbol: &str) -> String {
        self.template.replacen(PLACEHOLDER, symbol, 1)
    }

    pub fn request(&self, symbol: &str, model: &str) -> Result<CompletionRequest> {
        Ok(CompletionRequest::new(model, vec![ChatMessage::user(self.render(symbol))?]))
    }
}

/// Ask the model for a language rendering of one span.
pub fn convert_with_model(
    span: &SymbolSpan,
    prompt: &ConversionPrompt,
    backend: &Backend,
    model: &str,
) -> Result<Rendering> {
    if let Some(kind) = kind_for_task(&prompt.task_id) {
        if span.kind != kind && span.kind != SymbolKind::Generic {
            return Err(Error::arg(format!(
                "{} prompt cannot convert a {} span",
                prompt.task_id,
                span.kind.as_str()
            )));
        }
    }
    let request = prompt.request(&span.raw_text, model)?;
    let reply = backend.complete(&request)?;
    let text = reply.trim();
    if text.is_empty() {
        return Err(Error::EmptyResponse);
    }
    Rendering::new(
        span.id.clone(),
        text,
        ConversionMethod::Llm,
        format!("{model}: {} conversion prompt", prompt.task_id),
    )
}
