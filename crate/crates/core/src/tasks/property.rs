use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Label;
use crate::error::{Error, Result};
use crate::problem::{escape_template, Problem, SymbolKind, SymbolSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoleculeDataset {
    #[serde(rename = "BACE")]
    Bace,
    #[serde(rename = "BBBP")]
    Bbbp,
    #[serde(rename = "Tox21")]
    Tox21,
}

impl MoleculeDataset {
    pub fn as_str(self) -> &'static str {
        match self {
            MoleculeDataset::Bace => "BACE",
            MoleculeDataset::Bbbp => "BBBP",
            MoleculeDataset::Tox21 => "Tox21",
        }
    }

    pub fn question(self) -> &'static str {
        match self {
            MoleculeDataset::Bace => "Inhibitor of human beta-secretase 1: Yes or No?",
            MoleculeDataset::Bbbp => "Blood-brain barrier penetration: Yes or No?",
            MoleculeDataset::Tox21 => "Toxicity: Yes or No?",
        }
    }

    /// Dataset named somewhere in a file stem, e.g. `tox21_sample`.
    pub fn from_stem(stem: &str) -> Option<Self> {
        let s = stem.to_lowercase();
        [MoleculeDataset::Bace, MoleculeDataset::Bbbp, MoleculeDataset::Tox21]
            .into_iter()
            .find(|d| s.contains(&d.as_str().to_lowercase()))
    }
}

impl fmt::Display for MoleculeDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MoleculeDataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "bace" => Ok(MoleculeDataset::Bace),
            "bbbp" => Ok(MoleculeDataset::Bbbp),
            "tox21" => Ok(MoleculeDataset::Tox21),
            other => Err(Error::arg(format!("unknown molecule dataset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyInstance {
    pub smiles: String,
    pub label: Label,
    pub dataset: MoleculeDataset,
}

impl PropertyInstance {
    pub fn validate(&self) -> Result<()> {
        if self.smiles.trim().is_empty() {
            return Err(Error::arg("empty SMILES"));
        }
        if !matches!(self.label, Label::Yes | Label::No) {
            return Err(Error::arg(format!("label {} is not yes/no", self.label.word())));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        let template = format!("SMILES: {{s1}}\n{}", escape_template(self.dataset.question()));
        let span = SymbolSpan::at("s1", self.smiles.as_str(), SymbolKind::Smiles)?;
        Ok(Problem::new("property", template, vec![span], Some(self.label.display()))?
            .with_meta("dataset", self.dataset.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_query, ConversionMethod, Conversion, MethodConfig, Mode, Rendering};

    #[test]
    fn concatenated_prompt() {
        let inst = PropertyInstance {
            smiles: "CCCO".into(),
            label: Label::No,
            dataset: MoleculeDataset::Tox21,
        };
        let r = Rendering::new("s1", "propan-1-ol", ConversionMethod::Lookup, "table").unwrap();
        let q = build_query(
            &inst.problem().unwrap(),
            &MethodConfig::s2l(Mode::S2lConcatenate, Conversion::WithTool),
            &[r],
        )
        .unwrap();
        assert_eq!(q.user_text(), "SMILES: CCCO (that is, propan-1-ol)\nToxicity: Yes or No?");
    }

    #[test]
    fn dataset_names() {
        assert_eq!(MoleculeDataset::from_stem("Tox21_test"), Some(MoleculeDataset::Tox21));
        assert_eq!(MoleculeDataset::from_stem("molecules"), None);
        assert_eq!("bbbp".parse::<MoleculeDataset>().unwrap(), MoleculeDataset::Bbbp);
    }
}
