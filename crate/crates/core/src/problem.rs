//! Problems with symbol spans, their language renderings, and the integration
//! strategies that turn both into a single-turn query.
//!
//! Templates carry named placeholders such as `{s1}`; a literal brace is
//! written `{{` or `}}`. Substituted text is never re-scanned, so symbols
//! containing braces (Dyck strings) are safe.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_COT_SUFFIX: &str = "Let's think step by step.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Sequence,
    Brackets,
    Smiles,
    Emoji,
    Table,
    Tweet,
    Generic,
}

impl SymbolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolKind::Sequence => "sequence",
            SymbolKind::Brackets => "brackets",
            SymbolKind::Smiles => "smiles",
            SymbolKind::Emoji => "emoji",
            SymbolKind::Table => "table",
            SymbolKind::Tweet => "tweet",
            SymbolKind::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSpan {
    pub id: String,
    pub raw_text: String,
    pub kind: SymbolKind,
    /// Placeholder key in the owning problem's template.
    pub location: String,
}

impl SymbolSpan {
    pub fn new(
        id: impl Into<String>,
        raw_text: impl Into<String>,
        kind: SymbolKind,
        location: impl Into<String>,
    ) -> Result<Self> {
        let span = SymbolSpan {
            id: id.into(),
            raw_text: raw_text.into(),
            kind,
            location: location.into(),
        };
        if span.raw_text.is_empty() {
            return Err(Error::arg(format!("span {:?} has empty raw text", span.id)));
        }
        Ok(span)
    }

    /// Span whose id doubles as its placeholder key.
    pub fn at(location: impl Into<String>, raw_text: impl Into<String>, kind: SymbolKind) -> Result<Self> {
        let location = location.into();
        Self::new(location.clone(), raw_text, kind, location)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConversionMethod {
    Llm,
    Rule,
    Lookup,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rendering {
    pub span_id: String,
    pub text: String,
    pub method: ConversionMethod,
    pub source_label: String,
}

impl Rendering {
    pub fn new(
        span_id: impl Into<String>,
        text: impl Into<String>,
        method: ConversionMethod,
        source_label: impl Into<String>,
    ) -> Result<Self> {
        let rendering = Rendering {
            span_id: span_id.into(),
            text: text.into(),
            method,
            source_label: source_label.into(),
        };
        if rendering.text.is_empty() {
            return Err(Error::arg(format!(
                "rendering for span {:?} has empty text",
                rendering.span_id
            )));
        }
        Ok(rendering)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Placeholder(String),
}

fn parse_template(template: &str) -> Result<Vec<Segment>> {
    let mut out = Vec::new();
    let mut text = String::new();
    let mut chars = template.char_indices().peekable();
    while let Some((pos, c)) = chars.next() {
        match c {
            '{' if matches!(chars.peek(), Some((_, '{'))) => {
                chars.next();
                text.push('{');
            }
            '}' if matches!(chars.peek(), Some((_, '}'))) => {
                chars.next();
                text.push('}');
            }
            '{' => {
                let mut name = String::new();
                let mut closed = false;
                for (_, c) in chars.by_ref() {
                    if c == '}' {
                        closed = true;
                        break;
                    }
                    name.push(c);
                }
                let valid = !name.is_empty()
                    && name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                    && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !closed || !valid {
                    return Err(Error::Parse {
                        position: pos,
                        message: format!("malformed placeholder {{{name}"),
                    });
                }
                if !text.is_empty() {
                    out.push(Segment::Text(std::mem::take(&mut text)));
                }
                out.push(Segment::Placeholder(name));
            }
            '}' => {
                return Err(Error::Parse {
                    position: pos,
                    message: "unescaped '}' in template".into(),
                })
            }
            c => text.push(c),
        }
    }
    if !text.is_empty() {
        out.push(Segment::Text(text));
    }
    Ok(out)
}

/// Escape literal text so it can be embedded in a template.
pub fn escape_template(text: &str) -> String {
    text.replace('{', "{{").replace('}', "}}")
}

/// Placeholder keys of a template, in order of appearance.
pub fn placeholders(template: &str) -> Result<Vec<String>> {
    Ok(parse_template(template)?
        .into_iter()
        .filter_map(|s| match s {
            Segment::Placeholder(p) => Some(p),
            Segment::Text(_) => None,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub task_id: String,
    pub template: String,
    pub spans: Vec<SymbolSpan>,
    /// Gold answer in its canonical textual form.
    pub gold: Option<String>,
    pub meta: BTreeMap<String, String>,
}

impl Problem {
    /// Builds a problem, checking that placeholders and spans pair up one to one.
    pub fn new(
        task_id: impl Into<String>,
        template: impl Into<String>,
        spans: Vec<SymbolSpan>,
        gold: Option<String>,
    ) -> Result<Self> {
        let problem = Problem {
            task_id: task_id.into(),
            template: template.into(),
            spans,
            gold,
            meta: BTreeMap::new(),
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.meta.insert(key.into(), value.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let keys = placeholders(&self.template)?;
        let mut seen = BTreeSet::new();
        for key in &keys {
            if !seen.insert(key.as_str()) {
                return Err(Error::Structure(format!("placeholder {{{key}}} appears more than once")));
            }
        }
        let mut ids = BTreeSet::new();
        let mut locations = BTreeSet::new();
        for span in &self.spans {
            if span.raw_text.is_empty() {
                return Err(Error::Structure(format!("span {:?} has empty raw text", span.id)));
            }
            if !ids.insert(span.id.as_str()) {
                return Err(Error::Structure(format!("duplicate span id {:?}", span.id)));
            }
            if !locations.insert(span.location.as_str()) {
                return Err(Error::Structure(format!(
                    "two spans share placeholder {{{}}}",
                    span.location
                )));
            }
        }
        if let Some(span) = self.spans.iter().find(|s| !seen.contains(s.location.as_str())) {
            return Err(Error::Structure(format!(
                "span {:?} has no placeholder {{{}}} in the template",
                span.id, span.location
            )));
        }
        if let Some(key) = keys.iter().find(|k| !locations.contains(k.as_str())) {
            return Err(Error::Structure(format!("unmatched placeholder {{{key}}}")));
        }
        Ok(())
    }

    pub fn span(&self, id: &str) -> Option<&SymbolSpan> {
        self.spans.iter().find(|s| s.id == id)
    }

    /// Fill every placeholder with the text chosen for its span.
    fn fill(&self, mut text_for: impl FnMut(&SymbolSpan) -> String) -> Result<String> {
        let by_location: BTreeMap<&str, &SymbolSpan> =
            self.spans.iter().map(|s| (s.location.as_str(), s)).collect();
        let mut out = String::with_capacity(self.template.len());
        for segment in parse_template(&self.template)? {
            match segment {
                Segment::Text(t) => out.push_str(&t),
                Segment::Placeholder(key) => {
                    let span = by_location
                        .get(key.as_str())
                        .ok_or_else(|| Error::Structure(format!("unmatched placeholder {{{key}}}")))?;
                    out.push_str(&text_for(span));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ZeroShot,
    ZeroShotCot,
    S2lSubstitute,
    S2lConcatenate,
}

impl Mode {
    pub fn is_s2l(self) -> bool {
        matches!(self, Mode::S2lSubstitute | Mode::S2lConcatenate)
    }

    pub fn short(self) -> &'static str {
        match self {
            Mode::ZeroShot => "zs",
            Mode::ZeroShotCot => "zsc",
            Mode::S2lSubstitute => "s2l-sub",
            Mode::S2lConcatenate => "s2l-cat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conversion {
    WithModel,
    WithTool,
}

impl Conversion {
    pub fn short(self) -> &'static str {
        match self {
            Conversion::WithModel => "model",
            Conversion::WithTool => "tool",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MethodConfig {
    pub mode: Mode,
    pub conversion: Option<Conversion>,
    pub cot_suffix: String,
}

impl MethodConfig {
    pub fn zero_shot() -> Self {
        MethodConfig {
            mode: Mode::ZeroShot,
            conversion: None,
            cot_suffix: DEFAULT_COT_SUFFIX.to_string(),
        }
    }

    pub fn zero_shot_cot() -> Self {
        MethodConfig {
            mode: Mode::ZeroShotCot,
            ..Self::zero_shot()
        }
    }

    pub fn s2l(mode: Mode, conversion: Conversion) -> Self {
        MethodConfig {
            mode,
            conversion: Some(conversion),
            ..Self::zero_shot()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode.is_s2l() && self.conversion.is_none() {
            return Err(Error::Config(format!(
                "{} requires a conversion (model or tool)",
                self.mode.short()
            )));
        }
        Ok(())
    }

    /// Conversion choice, dropped for modes that do not convert.
    pub fn effective_conversion(&self) -> Option<Conversion> {
        if self.mode.is_s2l() {
            self.conversion
        } else {
            None
        }
    }

    /// Short label used in reports, e.g. `s2l-cat (tool)`.
    pub fn label(&self) -> String {
        match self.effective_conversion() {
            Some(c) => format!("{} ({})", self.mode.short(), c.short()),
            None => self.mode.short().to_string(),
        }
    }
}

impl fmt::Display for MethodConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Result<Self> {
        let content = content.into();
        if content.is_empty() {
            return Err(Error::arg(format!("{} message has empty content", role.as_str())));
        }
        Ok(ChatMessage { role, content })
    }

    pub fn user(content: impl Into<String>) -> Result<Self> {
        Self::new(Role::User, content)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub mode: Mode,
    pub conversion: Option<Conversion>,
    pub rendering_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub messages: Vec<ChatMessage>,
    pub provenance: Provenance,
}

impl Query {
    fn single(content: String, provenance: Provenance) -> Result<Self> {
        Ok(Query {
            messages: vec![ChatMessage::user(content)?],
            provenance,
        })
    }

    /// Content of the last user message.
    pub fn user_text(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or_default()
    }

    pub fn with_conversion(mut self, conversion: Option<Conversion>) -> Self {
        self.provenance.conversion = conversion;
        self
    }
}

/// Plain question, optionally followed by the chain-of-thought trigger.
pub fn build_zero_shot(problem: &Problem, config: &MethodConfig) -> Result<Query> {
    if config.mode.is_s2l() {
        return Err(Error::arg(format!(
            "build_zero_shot called with mode {}",
            config.mode.short()
        )));
    }
    problem.validate()?;
    let mut text = problem.fill(|s| s.raw_text.clone())?;
    if config.mode == Mode::ZeroShotCot {
        text.push_str("\n\n");
        text.push_str(&config.cot_suffix);
    }
    Query::single(
        text,
        Provenance {
            mode: config.mode,
            conversion: None,
            rendering_ids: Vec::new(),
        },
    )
}

fn index_renderings<'a>(
    problem: &Problem,
    renderings: &'a [Rendering],
) -> Result<BTreeMap<&'a str, &'a Rendering>> {
    let mut by_span: BTreeMap<&str, &Rendering> = BTreeMap::new();
    let mut duplicate = BTreeSet::new();
    let mut unknown = BTreeSet::new();
    for r in renderings {
        if problem.span(&r.span_id).is_none() {
            unknown.insert(r.span_id.as_str());
        } else if by_span.insert(r.span_id.as_str(), r).is_some() {
            duplicate.insert(r.span_id.as_str());
        }
    }
    let missing: Vec<&str> = problem
        .spans
        .iter()
        .map(|s| s.id.as_str())
        .filter(|id| !by_span.contains_key(id))
        .collect();
    if missing.is_empty() && duplicate.is_empty() && unknown.is_empty() {
        return Ok(by_span);
    }
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("missing rendering for span(s) {}", missing.join(", ")));
    }
    if !duplicate.is_empty() {
        parts.push(format!(
            "duplicate rendering for span(s) {}",
            duplicate.into_iter().collect::<Vec<_>>().join(", ")
        ));
    }
    if !unknown.is_empty() {
        parts.push(format!(
            "rendering for unknown span(s) {}",
            unknown.into_iter().collect::<Vec<_>>().join(", ")
        ));
    }
    Err(Error::Structure(parts.join("; ")))
}

fn integrate(
    problem: &Problem,
    renderings: &[Rendering],
    mode: Mode,
    text_for: impl Fn(&SymbolSpan, &Rendering) -> String,
) -> Result<Query> {
    problem.validate()?;
    let by_span = index_renderings(problem, renderings)?;
    let text = problem.fill(|span| text_for(span, by_span[span.id.as_str()]))?;
    Query::single(
        text,
        Provenance {
            mode,
            conversion: None,
            rendering_ids: problem.spans.iter().map(|s| s.id.clone()).collect(),
        },
    )
}

/// Replace every symbol with its language rendering.
pub fn integrate_substitute(problem: &Problem, renderings: &[Rendering]) -> Result<Query> {
    integrate(problem, renderings, Mode::S2lSubstitute, |_, r| r.text.clone())
}

/// `raw (that is, rendering)` for each symbol.
pub fn concatenated(raw: &str, rendering: &str) -> String {
    format!("{raw} (that is, {rendering})")
}

/// Keep every symbol and attach its rendering right after it.
pub fn integrate_concatenate(problem: &Problem, renderings: &[Rendering]) -> Result<Query> {
    integrate(problem, renderings, Mode::S2lConcatenate, |s, r| {
        concatenated(&s.raw_text, &r.text)
    })
}

/// Dispatch on the configured mode.
pub fn build_query(problem: &Problem, config: &MethodConfig, renderings: &[Rendering]) -> Result<Query> {
    config.validate()?;
    let query = match config.mode {
        Mode::ZeroShot | Mode::ZeroShotCot => build_zero_shot(problem, config)?,
        Mode::S2lSubstitute => integrate_substitute(problem, renderings)?,
        Mode::S2lConcatenate => integrate_concatenate(problem, renderings)?,
    };
    Ok(query.with_conversion(config.effective_conversion()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_span(template: &str, raw: &str) -> Problem {
        Problem::new(
            "t",
            template,
            vec![SymbolSpan::at("s1", raw, SymbolKind::Brackets).unwrap()],
            None,
        )
        .unwrap()
    }

    fn rule(span: &str, text: &str) -> Rendering {
        Rendering::new(span, text, ConversionMethod::Rule, "test").unwrap()
    }

    #[test]
    fn zero_shot_fills_raw_text() {
        let p = one_span("Complete: {s1}", "{}[");
        let q = build_zero_shot(&p, &MethodConfig::zero_shot()).unwrap();
        assert_eq!(q.user_text(), "Complete: {}[");
        assert_eq!(q.messages.len(), 1);
    }

    #[test]
    fn zero_shot_cot_appends_suffix_after_blank_line() {
        let p = one_span("Complete: {s1}", "{}[");
        let q = build_zero_shot(&p, &MethodConfig::zero_shot_cot()).unwrap();
        assert_eq!(q.user_text(), "Complete: {}[\n\nLet's think step by step.");
    }

    #[test]
    fn no_placeholders_leaves_template() {
        let p = Problem::new("t", "Nothing to fill.", vec![], None).unwrap();
        let q = build_zero_shot(&p, &MethodConfig::zero_shot()).unwrap();
        assert_eq!(q.user_text(), "Nothing to fill.");
        let q = integrate_concatenate(&p, &[]).unwrap();
        assert_eq!(q.user_text(), "Nothing to fill.");
    }

    #[test]
    fn escaped_braces_are_literal() {
        let p = one_span("{{literal}} {s1}", "x");
        let q = build_zero_shot(&p, &MethodConfig::zero_shot()).unwrap();
        assert_eq!(q.user_text(), "{literal} x");
        assert_eq!(escape_template("a{b}"), "a{{b}}");
    }

    #[test]
    fn unmatched_placeholder_is_named() {
        let err = Problem::new("t", "{s1} {s2}", vec![SymbolSpan::at("s1", "x", SymbolKind::Generic).unwrap()], None)
            .unwrap_err();
        assert!(err.to_string().contains("{s2}"), "{err}");
        let err = Problem::new("t", "{s1}", vec![SymbolSpan::at("s9", "x", SymbolKind::Generic).unwrap()], None)
            .unwrap_err();
        assert!(err.to_string().contains("s9"), "{err}");
    }

    #[test]
    fn empty_raw_text_rejected() {
        assert!(SymbolSpan::at("s1", "", SymbolKind::Generic).is_err());
        assert!(Rendering::new("s1", "", ConversionMethod::Llm, "x").is_err());
    }

    #[test]
    fn substitute_hides_raw_symbol() {
        let p = one_span("Input: {s1}", "([]");
        let r = rule("s1", "open parenthesis open square bracket close square bracket");
        let q = integrate_substitute(&p, &[r]).unwrap();
        assert!(q.user_text().contains("open parenthesis open square bracket"));
        assert!(!q.user_text().contains("([]"));
    }

    #[test]
    fn identity_rendering_matches_zero_shot() {
        let p = one_span("Complete: {s1}", "{}[");
        let sub = integrate_substitute(&p, &[rule("s1", "{}[")]).unwrap();
        let zs = build_zero_shot(&p, &MethodConfig::zero_shot()).unwrap();
        assert_eq!(sub.user_text(), zs.user_text());
    }

    #[test]
    fn two_spans_substituted_in_order() {
        let p = Problem::new(
            "t",
            "A={s1}; B={s2}.",
            vec![
                SymbolSpan::at("s1", "1,1", SymbolKind::Sequence).unwrap(),
                SymbolSpan::at("s2", "0", SymbolKind::Sequence).unwrap(),
            ],
            None,
        )
        .unwrap();
        // renderings supplied out of order on purpose
        let q = integrate_substitute(&p, &[rule("s2", "one 0"), rule("s1", "two 1s")]).unwrap();
        assert_eq!(q.user_text(), "A=two 1s; B=one 0.");
        assert_eq!(q.provenance.rendering_ids, vec!["s1", "s2"]);
    }

    #[test]
    fn concatenate_format() {
        let p = one_span("Input: {s1}", "0,5,5,0");
        let q = integrate_concatenate(&p, &[rule("s1", "one 0, followed by two 5s, followed by one 0")]).unwrap();
        assert_eq!(
            q.user_text(),
            "Input: 0,5,5,0 (that is, one 0, followed by two 5s, followed by one 0)"
        );
    }

    #[test]
    fn concatenate_smiles_fixture() {
        let p = Problem::new(
            "property",
            "SMILES: {s1}\nToxicity: Yes or No?",
            vec![SymbolSpan::at("s1", "CCCO", SymbolKind::Smiles).unwrap()],
            Some("No".into()),
        )
        .unwrap();
        let r = Rendering::new("s1", "Propionylo", ConversionMethod::Lookup, "smiles table").unwrap();
        let q = integrate_concatenate(&p, &[r]).unwrap();
        assert_eq!(q.user_text(), "SMILES: CCCO (that is, Propionylo)\nToxicity: Yes or No?");
    }

    #[test]
    fn rendering_mismatch_lists_span_ids() {
        let p = Problem::new(
            "t",
            "{s1} {s2}",
            vec![
                SymbolSpan::at("s1", "a", SymbolKind::Generic).unwrap(),
                SymbolSpan::at("s2", "b", SymbolKind::Generic).unwrap(),
            ],
            None,
        )
        .unwrap();
        let err = integrate_substitute(&p, &[rule("s1", "x")]).unwrap_err().to_string();
        assert!(err.contains("missing") && err.contains("s2"), "{err}");
        let err = integrate_concatenate(&p, &[rule("s1", "x"), rule("s1", "y"), rule("s2", "z")])
            .unwrap_err()
            .to_string();
        assert!(err.contains("duplicate") && err.contains("s1"), "{err}");
    }

    #[test]
    fn s2l_mode_requires_conversion() {
        let cfg = MethodConfig {
            mode: Mode::S2lSubstitute,
            conversion: None,
            cot_suffix: DEFAULT_COT_SUFFIX.into(),
        };
        assert!(cfg.validate().is_err());
        assert!(MethodConfig::zero_shot().validate().is_ok());
        let p = one_span("{s1}", "x");
        assert!(build_zero_shot(&p, &MethodConfig::s2l(Mode::S2lConcatenate, Conversion::WithTool)).is_err());
    }
}
