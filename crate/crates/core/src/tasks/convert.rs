use crate::converters::{
    describe_sequence, emoji_name, linearize, lookup_translate, parse_sequence, render_brackets, BracketTable,
    NameTable,
};
use crate::error::Result;
use crate::problem::{ConversionMethod, Rendering, SymbolKind, SymbolSpan};

/// Deterministic converters used for "S2L w/ tool" runs.
#[derive(Debug, Clone)]
pub struct ToolSet {
    pub smiles: NameTable,
    pub emoji: NameTable,
    pub brackets: BracketTable,
}

impl Default for ToolSet {
    fn default() -> Self {
        ToolSet {
            smiles: NameTable::bundled_smiles(),
            emoji: NameTable::bundled_emoji(),
            brackets: BracketTable::Canonical,
        }
    }
}

impl ToolSet {
    /// Whether some tool exists for this kind of span.
    pub fn covers(kind: SymbolKind) -> bool {
        !matches!(kind, SymbolKind::Tweet | SymbolKind::Generic)
    }

    /// Tool rendering of a span; `Ok(None)` when no tool covers its kind.
    /// Lookup misses surface as errors so the caller can fall back.
    pub fn render(&self, span: &SymbolSpan) -> Result<Option<Rendering>> {
        let (text, method, label) = match span.kind {
            SymbolKind::Sequence => (
                describe_sequence(&parse_sequence(&span.raw_text)?)?,
                ConversionMethod::Rule,
                "run-length describer",
            ),
            SymbolKind::Brackets => (
                render_brackets(&span.raw_text, self.brackets)?,
                ConversionMethod::Rule,
                "bracket names",
            ),
            SymbolKind::Smiles => (
                lookup_translate(span.raw_text.trim(), &self.smiles)?,
                ConversionMethod::Lookup,
                "SMILES to IUPAC table",
            ),
            SymbolKind::Emoji => (
                emoji_name(&span.raw_text, &self.emoji)?,
                ConversionMethod::Lookup,
                "Unicode emoji names",
            ),
            SymbolKind::Table => (linearize(&span.raw_text)?, ConversionMethod::Rule, "table linearizer"),
            SymbolKind::Tweet | SymbolKind::Generic => return Ok(None),
        };
        Rendering::new(span.id.clone(), text, method, label).map(Some)
    }
}
