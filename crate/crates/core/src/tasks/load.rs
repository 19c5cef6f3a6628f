//! Dataset readers. Indices in errors are 1-based line numbers for line
//! formats, data-record numbers for CSV and file positions for directories.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use super::{
    ArcInstance, DyckInstance, EmojiInstance, Gold, Instance, Label, MoleculeDataset, PropertyInstance, TableInstance,
    TableSubtask, TaskId, TweetInstance, TweetSubtask,
};
use crate::converters::parse_sequence;
use crate::error::{Error, Result};

fn load_err(index: usize, message: impl ToString) -> Error {
    Error::Load {
        index,
        message: message.to_string(),
    }
}

/// Invariant violations become rejections; anything else is passed through.
fn rejected(index: usize, e: Error) -> Error {
    match e {
        Error::Argument(message) | Error::Structure(message) => Error::Rejected { index, message },
        other => Error::Rejected {
            index,
            message: other.to_string(),
        },
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with their 1-based line numbers.
fn json_lines<T: DeserializeOwned>(text: &str) -> Result<Vec<(usize, T)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map(|v| (i + 1, v))
                .map_err(|e| load_err(i + 1, e))
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Seq {
    Cells(Vec<u8>),
    Text(String),
}

impl Seq {
    fn cells(self, index: usize) -> Result<Vec<u8>> {
        match self {
            Seq::Cells(c) => Ok(c),
            Seq::Text(t) => parse_sequence(&t).map_err(|e| load_err(index, e)),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcRecord {
    pairs: Vec<(Seq, Seq)>,
    target: Seq,
    gold: Seq,
    #[serde(default)]
    k: Option<usize>,
}

fn arc_record(index: usize, r: ArcRecord) -> Result<Instance> {
    let pairs = r
        .pairs
        .into_iter()
        .map(|(i, o)| Ok((i.cells(index)?, o.cells(index)?)))
        .collect::<Result<Vec<_>>>()?;
    let target = r.target.cells(index)?;
    let gold = r.gold.cells(index)?;
    ArcInstance::new(pairs, target, gold, r.k)
        .map(Instance::Arc)
        .map_err(|e| rejected(index, e))
}

#[derive(Deserialize)]
struct Grid {
    input: Vec<Vec<u8>>,
    output: Vec<Vec<u8>>,
}

#[derive(Deserialize)]
struct ReleasedArc {
    train: Vec<Grid>,
    test: Vec<Grid>,
}

fn single_row(rows: Vec<Vec<u8>>, index: usize) -> Result<Vec<u8>> {
    match <[Vec<u8>; 1]>::try_from(rows) {
        Ok([row]) => Ok(row),
        Err(rows) => Err(load_err(index, format!("expected a 1-row grid, found {} rows", rows.len()))),
    }
}

/// One released 1D-ARC task file: train pairs as demonstrations, the first
/// test pair as target.
fn released_arc(index: usize, text: &str) -> Result<Instance> {
    let task: ReleasedArc = serde_json::from_str(text).map_err(|e| load_err(index, e))?;
    let mut pairs = Vec::with_capacity(task.train.len());
    for g in task.train {
        pairs.push((single_row(g.input, index)?, single_row(g.output, index)?));
    }
    let test = task
        .test
        .into_iter()
        .next()
        .ok_or_else(|| load_err(index, "task file has no test pair"))?;
    let target = single_row(test.input, index)?;
    let gold = single_row(test.output, index)?;
    ArcInstance::new(pairs, target, gold, None)
        .map(Instance::Arc)
        .map_err(|e| rejected(index, e))
}

fn released_arc_dir(dir: &Path) -> Result<Vec<Instance>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
        .iter()
        .enumerate()
        .map(|(i, p)| released_arc(i + 1, &read(p)?))
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DyckRecord {
    pairs: Vec<(String, String)>,
    target: String,
    gold: String,
}

fn dyck_record(index: usize, r: DyckRecord) -> Result<Instance> {
    let inst = DyckInstance::new(r.pairs, r.target).map_err(|e| rejected(index, e))?;
    if inst.gold_closing != r.gold {
        return Err(Error::Rejected {
            index,
            message: format!("gold {:?} does not close {:?}", r.gold, inst.target_prefix),
        });
    }
    Ok(Instance::Dyck(inst))
}

#[derive(Deserialize)]
struct TableRecord {
    table: String,
    #[serde(default)]
    question: Option<String>,
    #[serde(default)]
    claim: Option<String>,
    #[serde(default)]
    answers: Option<Vec<String>>,
    #[serde(default)]
    label: Option<Value>,
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn table_record(index: usize, r: TableRecord, task: TaskId) -> Result<Instance> {
    let (subtask, text, gold) = if task == TaskId::TableQa {
        let q = r.question.ok_or_else(|| load_err(index, "missing field `question`"))?;
        let a = r.answers.ok_or_else(|| load_err(index, "missing field `answers`"))?;
        (TableSubtask::Qa, q, Gold::Answers(a))
    } else {
        let c = r.claim.ok_or_else(|| load_err(index, "missing field `claim`"))?;
        let l = r.label.ok_or_else(|| load_err(index, "missing field `label`"))?;
        let label = Label::parse_for(TaskId::TabFact, &value_text(&l)).map_err(|e| load_err(index, e))?;
        (TableSubtask::Fact, c, Gold::Label(label))
    };
    let inst = TableInstance {
        table_raw: r.table,
        question_or_claim: text,
        gold,
        subtask,
    };
    inst.validate().map_err(|e| rejected(index, e))?;
    Ok(Instance::Table(inst))
}

fn csv_records<T: DeserializeOwned>(text: &str) -> Result<Vec<(usize, T)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map(|v| (i + 1, v)).map_err(|e| load_err(i + 1, e)))
        .collect()
}

#[derive(Deserialize)]
struct PropertyRecord {
    smiles: String,
    label: String,
    #[serde(default)]
    dataset: Option<String>,
}

#[derive(Deserialize)]
struct TweetRecord {
    text: String,
    label: String,
}

fn emoji_rows(text: &str) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let index = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if out.is_empty() && fields[0].eq_ignore_ascii_case("codepoints") {
            continue;
        }
        if fields.len() != 9 {
            return Err(load_err(index, format!("expected 9 tab-separated fields, found {}", fields.len())));
        }
        let mut ratings = [0.0; 8];
        for (slot, f) in ratings.iter_mut().zip(&fields[1..]) {
            *slot = f.parse().map_err(|_| load_err(index, format!("rating {f:?} is not a number")))?;
        }
        let inst = EmojiInstance::new(fields[0], ratings).map_err(|e| rejected(index, e))?;
        out.push(Instance::Emoji(inst));
    }
    Ok(out)
}

/// Loads every record of a task's dataset file, or for ARC a directory of
/// released task files.
pub fn load_dataset(path: impl AsRef<Path>, task: TaskId) -> Result<Vec<Instance>> {
    let path = path.as_ref();
    if task == TaskId::Arc && path.is_dir() {
        return released_arc_dir(path);
    }
    let text = read(path)?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    match task {
        TaskId::Arc if path.extension().is_some_and(|x| x == "json") => Ok(vec![released_arc(1, &text)?]),
        TaskId::Arc => json_lines::<ArcRecord>(&text)?
            .into_iter()
            .map(|(i, r)| arc_record(i, r))
            .collect(),
        TaskId::Dyck => json_lines::<DyckRecord>(&text)?
            .into_iter()
            .map(|(i, r)| dyck_record(i, r))
            .collect(),
        TaskId::Property => {
            let from_stem = path.file_stem().and_then(|s| s.to_str()).and_then(MoleculeDataset::from_stem);
            csv_records::<PropertyRecord>(&text)?
                .into_iter()
                .map(|(i, r)| {
                    let dataset = match r.dataset.as_deref().filter(|d| !d.is_empty()) {
                        Some(d) => d.parse().map_err(|e| load_err(i, e))?,
                        None => from_stem.ok_or_else(|| {
                            load_err(i, "no `dataset` column and the file name names no dataset")
                        })?,
                    };
                    let label = Label::parse_for(TaskId::Property, &r.label).map_err(|e| load_err(i, e))?;
                    let inst = PropertyInstance {
                        smiles: r.smiles,
                        label,
                        dataset,
                    };
                    inst.validate().map_err(|e| rejected(i, e))?;
                    Ok(Instance::Property(inst))
                })
                .collect()
        }
        TaskId::Emoji => emoji_rows(&text),
        TaskId::TableQa | TaskId::TabFact => json_lines::<TableRecord>(&text)?
            .into_iter()
            .map(|(i, r)| table_record(i, r, task))
            .collect(),
        TaskId::Stance | TaskId::Sentiment => {
            let subtask = if task == TaskId::Stance {
                TweetSubtask::Stance
            } else {
                TweetSubtask::Sentiment
            };
            csv_records::<TweetRecord>(&text)?
                .into_iter()
                .map(|(i, r)| {
                    let label = Label::parse_for(task, &r.label).map_err(|e| load_err(i, e))?;
                    let inst = TweetInstance {
                        text: r.text,
                        label,
                        subtask,
                    };
                    inst.validate().map_err(|e| rejected(i, e))?;
                    Ok(Instance::Tweet(inst))
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(name: &str, body: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        std::fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn empty_file_is_empty_list() {
        let (_d, p) = file("arc.jsonl", "");
        assert!(load_dataset(&p, TaskId::Arc).unwrap().is_empty());
    }

    #[test]
    fn arc_lines_accept_both_encodings() {
        let body = r#"{"pairs": [["1,0,0","0,1,0"],[[2,0,0],[0,2,0]],[[0,3,0],[0,0,3]]], "target": "4,0,0", "gold": [0,4,0]}"#;
        let (_d, p) = file("arc.jsonl", body);
        let got = load_dataset(&p, TaskId::Arc).unwrap();
        let Instance::Arc(a) = &got[0] else { panic!() };
        assert_eq!(a.k, 1);
    }

    #[test]
    fn malformed_and_rejected_carry_index() {
        let (_d, p) = file("dyck.jsonl", "\n{\"pairs\": [[\"(\", \")\"]], \"target\": \"[\", \"gold\": \"]\"}\n{oops\n");
        assert!(matches!(load_dataset(&p, TaskId::Dyck), Err(Error::Load { index: 3, .. })));
        let (_d, p) = file("dyck.jsonl", "{\"pairs\": [[\"(\", \")\"]], \"target\": \"[\", \"gold\": \")\"}\n");
        assert!(matches!(load_dataset(&p, TaskId::Dyck), Err(Error::Rejected { index: 1, .. })));
    }

    #[test]
    fn released_arc_file() {
        let body = r#"{"train": [{"input": [[1,0,0]], "output": [[0,1,0]]}, {"input": [[2,0,0]], "output": [[0,2,0]]}, {"input": [[0,3,0]], "output": [[0,0,3]]}], "test": [{"input": [[5,0,0]], "output": [[0,5,0]]}]}"#;
        let (_d, p) = file("move_1p_0.json", body);
        let got = load_dataset(&p, TaskId::Arc).unwrap();
        assert_eq!(got.len(), 1);
        let dir = p.parent().unwrap();
        assert_eq!(load_dataset(dir, TaskId::Arc).unwrap(), got);
    }

    #[test]
    fn property_dataset_from_stem() {
        let (_d, p) = file("bbbp.csv", "smiles,label\nCCO,1\n");
        let Instance::Property(i) = &load_dataset(&p, TaskId::Property).unwrap()[0] else { panic!() };
        assert_eq!(i.dataset, MoleculeDataset::Bbbp);
        assert_eq!(i.label, Label::Yes);
        let (_d, p) = file("molecules.csv", "smiles,label\nCCO,1\n");
        assert!(matches!(load_dataset(&p, TaskId::Property), Err(Error::Load { index: 1, .. })));
    }

    #[test]
    fn emoji_rows_with_header() {
        let (_d, p) = file(
            "emoji.tsv",
            "codepoints\tanger\tanticipation\tdisgust\tfear\tjoy\tsadness\tsurprise\ttrust\nU+1F62D\t0.1\t0\t0.1\t0.2\t0\t0.9\t0.1\t0\n",
        );
        assert_eq!(load_dataset(&p, TaskId::Emoji).unwrap().len(), 1);
        let (_d, p) = file("emoji.tsv", "U+1F62D\t0.1\t0\t0.1\t0.2\t0\t1.9\t0.1\t0\n");
        assert!(matches!(load_dataset(&p, TaskId::Emoji), Err(Error::Rejected { index: 1, .. })));
    }

    #[test]
    fn ragged_table_rejected_with_index() {
        let body = "{\"table\": \"a|b\\n1|2\", \"question\": \"q\", \"answers\": [\"1\"]}\n{\"table\": \"a|b\\n1\", \"question\": \"q\", \"answers\": [\"1\"]}\n";
        let (_d, p) = file("table_qa.jsonl", body);
        match load_dataset(&p, TaskId::TableQa) {
            Err(Error::Rejected { index, message }) => {
                assert_eq!(index, 2);
                assert!(message.contains("row 1"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }
}
