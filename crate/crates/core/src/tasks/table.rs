use serde::{Deserialize, Serialize};

use super::{Gold, Label};
use crate::converters::split_table;
use crate::error::{Error, Result};
use crate::problem::{escape_template, Problem, SymbolKind, SymbolSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableSubtask {
    Qa,
    Fact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableInstance {
    /// `|` separates cells and newline separates rows; the first row is the header.
    pub table_raw: String,
    pub question_or_claim: String,
    /// `Gold::Answers` for QA, `Gold::Label` for fact verification.
    pub gold: Gold,
    pub subtask: TableSubtask,
}

impl TableInstance {
    pub fn validate(&self) -> Result<()> {
        let rows = split_table(&self.table_raw, "|", "\n")?;
        if rows.len() < 2 {
            return Err(Error::arg("table has no data rows"));
        }
        if self.question_or_claim.trim().is_empty() {
            return Err(Error::arg("empty question or claim"));
        }
        match (self.subtask, &self.gold) {
            (TableSubtask::Qa, Gold::Answers(a)) if a.iter().any(|s| !s.trim().is_empty()) => Ok(()),
            (TableSubtask::Qa, Gold::Answers(_)) => Err(Error::arg("empty answer set")),
            (TableSubtask::Fact, Gold::Label(Label::True | Label::False)) => Ok(()),
            _ => Err(Error::arg("gold does not fit the subtask")),
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        let text = escape_template(self.question_or_claim.trim());
        let (task, template) = match self.subtask {
            TableSubtask::Qa => (
                "table_qa",
                format!("Table:\n{{s1}}\nQuestion: {text}\nGive the final answer after \"Answer:\"."),
            ),
            TableSubtask::Fact => ("tabfact", format!("Table:\n{{s1}}\nClaim: {text}\nStatement: True or False?")),
        };
        let span = SymbolSpan::at("s1", self.table_raw.trim_end(), SymbolKind::Table)?;
        Problem::new(task, template, vec![span], Some(self.gold.canonical_text()))
    }
}
