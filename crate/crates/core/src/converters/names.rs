//! Key/value name tables loaded from two-column TSV files, and the lookups
//! built on them (emoji names, SMILES to IUPAC names).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const BUNDLED_EMOJI_TSV: &str = include_str!("../../data/emoji_names.tsv");
pub const BUNDLED_BRACKET_TSV: &str = include_str!("../../data/bracket_names.tsv");
pub const BUNDLED_SMILES_TSV: &str = include_str!("../../data/smiles_iupac.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameTable {
    entries: BTreeMap<String, String>,
    pub source_path: Option<PathBuf>,
    pub case_sensitive: bool,
}

impl NameTable {
    pub fn from_entries<I, K, V>(entries: I, case_sensitive: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut table = NameTable {
            entries: BTreeMap::new(),
            source_path: None,
            case_sensitive,
        };
        for (i, (k, v)) in entries.into_iter().enumerate() {
            table.insert(k.into(), v.into(), i)?;
        }
        Ok(table)
    }

    fn fold(&self, key: &str) -> String {
        if self.case_sensitive {
            key.to_string()
        } else {
            key.to_lowercase()
        }
    }

    fn insert(&mut self, key: String, value: String, index: usize) -> Result<()> {
        if key.is_empty() {
            return Err(Error::Load {
                index,
                message: "empty key".into(),
            });
        }
        if value.is_empty() {
            return Err(Error::Load {
                index,
                message: format!("empty value for key {key:?}"),
            });
        }
        let folded = self.fold(&key);
        if self.entries.insert(folded, value).is_some() {
            return Err(Error::Load {
                index,
                message: format!("duplicate key {key:?}"),
            });
        }
        Ok(())
    }

    /// Parses `key<TAB>value` lines; `#` lines and blank lines are skipped.
    /// Record indices in errors are 1-based line numbers.
    pub fn parse_tsv(text: &str, case_sensitive: bool) -> Result<Self> {
        let mut table = NameTable {
            entries: BTreeMap::new(),
            source_path: None,
            case_sensitive,
        };
        for (i, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('\t').ok_or_else(|| Error::Load {
                index: i + 1,
                message: "expected key<TAB>value".into(),
            })?;
            table.insert(key.trim().to_string(), value.trim().to_string(), i + 1)?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>, case_sensitive: bool) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut table = Self::parse_tsv(&text, case_sensitive)?;
        table.source_path = Some(path.to_path_buf());
        Ok(table)
    }

    pub fn bundled_emoji() -> Self {
        Self::parse_tsv(BUNDLED_EMOJI_TSV, false).expect("bundled emoji table is well formed")
    }

    pub fn bundled_smiles() -> Self {
        Self::parse_tsv(BUNDLED_SMILES_TSV, true).expect("bundled SMILES table is well formed")
    }

    pub fn bundled_brackets() -> Self {
        Self::parse_tsv(BUNDLED_BRACKET_TSV, true).expect("bundled bracket table is well formed")
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&self.fold(key)).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

pub fn lookup_translate(symbol: &str, table: &NameTable) -> Result<String> {
    table
        .get(symbol)
        .map(str::to_string)
        .ok_or_else(|| Error::LookupMiss { key: symbol.to_string() })
}

fn codepoint_key(chars: impl IntoIterator<Item = char>) -> String {
    chars
        .into_iter()
        .map(|c| format!("U+{:04X}", c as u32))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_codepoint_literal(text: &str) -> Result<Vec<char>> {
    let bad = || Error::arg(format!("malformed codepoint literal {text:?}"));
    text.split_whitespace()
        .map(|tok| {
            let hex = tok
                .strip_prefix("U+")
                .or_else(|| tok.strip_prefix("u+"))
                .ok_or_else(bad)?;
            if hex.is_empty() || hex.len() > 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(bad());
            }
            let cp = u32::from_str_radix(hex, 16).map_err(|_| bad())?;
            char::from_u32(cp).ok_or_else(bad)
        })
        .collect()
}

/// Normalizes an emoji grapheme or `U+XXXX` literal (several literals may be
/// space-separated) to the uppercase key form, e.g. `U+1F62D`.
pub fn emoji_key(input: &str) -> Result<String> {
    let trimmed = input.trim();
    if trimmed.is_empty() {
        return Err(Error::arg("empty emoji input"));
    }
    if trimmed.starts_with("U+") || trimmed.starts_with("u+") {
        Ok(codepoint_key(parse_codepoint_literal(trimmed)?))
    } else {
        Ok(codepoint_key(trimmed.chars()))
    }
}

/// The emoji characters denoted by a grapheme or codepoint literal.
pub fn emoji_chars(input: &str) -> Result<String> {
    let trimmed = input.trim();
    if trimmed.starts_with("U+") || trimmed.starts_with("u+") {
        Ok(parse_codepoint_literal(trimmed)?.into_iter().collect())
    } else if trimmed.is_empty() {
        Err(Error::arg("empty emoji input"))
    } else {
        Ok(trimmed.to_string())
    }
}

pub fn emoji_name(grapheme_or_codepoint: &str, table: &NameTable) -> Result<String> {
    let key = emoji_key(grapheme_or_codepoint)?;
    if let Some(v) = table.get(&key) {
        return Ok(v.to_string());
    }
    // tables are usually keyed without the emoji presentation selector
    let bare = key
        .split(' ')
        .filter(|cp| *cp != "U+FE0F")
        .collect::<Vec<_>>()
        .join(" ");
    if !bare.is_empty() {
        if let Some(v) = table.get(&bare) {
            return Ok(v.to_string());
        }
    }
    Err(Error::LookupMiss { key })
}
