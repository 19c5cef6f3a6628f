//! Python bindings: converters, oracles, metrics, prompt integration and the runner.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use s2l::converters::{self, BracketTable, NameTable};
use s2l::error::Error;
use s2l::metrics;
use s2l::problem::{self, ConversionMethod, MethodConfig, Problem, Rendering, SymbolKind, SymbolSpan};
use s2l::runner::{self, Overrides, RunConfig};
use s2l::tasks::{self, Answer, AnswerSpace, TaskId};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::LookupMiss { key } => PyKeyError::new_err(key),
        e @ (Error::Argument(_)
        | Error::Structure(_)
        | Error::Parse { .. }
        | Error::UnknownName(_)
        | Error::Config(_)
        | Error::Degenerate(_)
        | Error::ExtractionMiss(_)) => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn bracket_table(name: &str) -> PyResult<BracketTable> {
    match name {
        "canonical" => Ok(BracketTable::Canonical),
        "alias" => Ok(BracketTable::Alias),
        other => Err(PyValueError::new_err(format!("unknown bracket table {other:?}"))),
    }
}

/// Grid cells as Python ints; `Vec<u8>` would come back as `bytes`.
fn cells(seq: Vec<u8>) -> Vec<u32> {
    seq.into_iter().map(u32::from).collect()
}

#[pyfunction]
pub fn describe_sequence(seq: Vec<u8>) -> PyResult<String> {
    converters::describe_sequence(&seq).map_err(py_err)
}

#[pyfunction]
pub fn parse_sequence_description(text: &str) -> PyResult<Vec<u32>> {
    converters::parse_sequence_description(text).map(cells).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (brackets, table = "canonical"))]
pub fn name_brackets(brackets: &str, table: &str) -> PyResult<Vec<String>> {
    converters::name_brackets_with(brackets, bracket_table(table)?).map_err(py_err)
}

#[pyfunction]
pub fn brackets_from_names(names: Vec<String>) -> PyResult<String> {
    converters::brackets_from_names(&names).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (raw, cell_delim = "|", row_delim = "\n"))]
pub fn linearize_table(raw: &str, cell_delim: &str, row_delim: &str) -> PyResult<String> {
    converters::linearize_table(raw, cell_delim, row_delim).map_err(py_err)
}

/// SMILES to name through the bundled table, or a TSV table when given.
#[pyfunction]
#[pyo3(signature = (smiles, table = None))]
pub fn lookup_smiles(smiles: &str, table: Option<PathBuf>) -> PyResult<String> {
    let names = match table {
        Some(p) => NameTable::load(p, true).map_err(py_err)?,
        None => NameTable::bundled_smiles(),
    };
    converters::lookup_translate(smiles, &names).map_err(py_err)
}

#[pyfunction]
pub fn emoji_name(emoji: &str) -> PyResult<String> {
    converters::emoji_name(emoji, &NameTable::bundled_emoji()).map_err(py_err)
}

#[pyfunction]
pub fn dyck_oracle(prefix: &str) -> PyResult<String> {
    tasks::dyck_oracle(prefix).map_err(py_err)
}

#[pyfunction]
pub fn shift_oracle(seq: Vec<u8>, k: usize) -> PyResult<Vec<u32>> {
    tasks::shift_oracle(&seq, k).map(cells).map_err(py_err)
}

type ArcTuple = (Vec<(Vec<u32>, Vec<u32>)>, Vec<u32>, Vec<u32>, usize);

/// `(pairs, target, gold, k)`.
#[pyfunction]
pub fn gen_arc(seed: u64, k: usize, n: usize, length: usize) -> PyResult<ArcTuple> {
    let a = tasks::gen_arc(seed, k, n, length).map_err(py_err)?;
    let pairs = a.pairs.into_iter().map(|(i, o)| (cells(i), cells(o))).collect();
    Ok((pairs, cells(a.target_input), cells(a.gold_output), a.k))
}

/// `(pairs, target, gold)`.
#[pyfunction]
pub fn gen_dyck(seed: u64, n: usize, max_len: usize) -> PyResult<(Vec<(String, String)>, String, String)> {
    let d = tasks::gen_dyck(seed, n, max_len).map_err(py_err)?;
    Ok((d.pairs, d.target_prefix, d.gold_closing))
}

#[pyfunction]
pub fn normalize_answer(text: &str) -> String {
    metrics::normalize_answer(text)
}

#[pyfunction]
pub fn exact_match(pred: &str, golds: Vec<String>) -> u8 {
    metrics::exact_match(pred, &golds)
}

#[pyfunction]
pub fn token_f1(pred: &str, gold: &str) -> f64 {
    metrics::token_f1(pred, gold)
}

#[pyfunction]
pub fn max_token_f1(pred: &str, golds: Vec<String>) -> f64 {
    metrics::max_token_f1(pred, &golds)
}

#[pyfunction]
pub fn pearson(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    metrics::pearson(&xs, &ys).map_err(py_err)
}

#[pyfunction]
pub fn accuracy(preds: Vec<String>, golds: Vec<String>) -> PyResult<f64> {
    metrics::accuracy(&preds, &golds).map_err(py_err)
}

/// Fill `template` under a method (`zs`, `zsc`, `s2l-sub`, `s2l-cat`).
///
/// `spans` maps placeholder ids to raw symbols, `renderings` maps the same
/// ids to language text and is required for the s2l methods.
#[pyfunction]
#[pyo3(signature = (template, spans, method = "zs", renderings = None))]
pub fn build_query(
    template: &str,
    spans: Vec<(String, String)>,
    method: &str,
    renderings: Option<HashMap<String, String>>,
) -> PyResult<String> {
    let spans = spans
        .into_iter()
        .map(|(id, raw)| SymbolSpan::at(id, raw, SymbolKind::Generic))
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    let problem = Problem::new("python", template, spans, None).map_err(py_err)?;
    let method: MethodConfig = runner::parse_method(method, problem::Conversion::WithTool).map_err(py_err)?;
    let renderings = renderings
        .unwrap_or_default()
        .into_iter()
        .map(|(id, text)| Rendering::new(id, text, ConversionMethod::Rule, "python"))
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    let query = problem::build_query(&problem, &method, &renderings).map_err(py_err)?;
    Ok(query.user_text().to_string())
}

/// Task answer from a raw reply: a list for ARC and emoji, a string otherwise.
#[pyfunction]
#[pyo3(signature = (task, text, language = false))]
pub fn extract_answer(py: Python<'_>, task: &str, text: &str, language: bool) -> PyResult<Py<PyAny>> {
    let task: TaskId = task.parse().map_err(py_err)?;
    let space = if language { AnswerSpace::Language } else { AnswerSpace::Symbol };
    let answer = tasks::extract_answer(task, text, space, None).map_err(py_err)?;
    let obj = match answer {
        Answer::Sequence(v) => cells(v).into_pyobject(py)?.into_any().unbind(),
        Answer::Ratings(r) => r.to_vec().into_pyobject(py)?.into_any().unbind(),
        Answer::Brackets(s) | Answer::Text(s) => s.into_pyobject(py)?.into_any().unbind(),
        Answer::Label(l) => l.word().into_pyobject(py)?.into_any().unbind(),
    };
    Ok(obj)
}

/// Run an evaluation and return `(report_json, exit_code)`; reports are
/// written to the configured output directory.
#[pyfunction]
#[pyo3(signature = (config = None, tasks = Vec::new(), methods = Vec::new(), n = None, seed = None, data_dir = None, out_dir = None))]
pub fn run(
    py: Python<'_>,
    config: Option<PathBuf>,
    tasks: Vec<String>,
    methods: Vec<String>,
    n: Option<usize>,
    seed: Option<u64>,
    data_dir: Option<PathBuf>,
    out_dir: Option<PathBuf>,
) -> PyResult<(String, i32)> {
    let overrides = Overrides {
        tasks,
        methods,
        sample_size: n,
        seed,
        data_dir,
        out_dir,
        ..Overrides::default()
    };
    py.detach(|| {
        let config = RunConfig::load(config.as_deref(), &overrides)?;
        let outcome = runner::run(&config)?;
        runner::write_outputs(&config, &outcome)?;
        Ok((outcome.report.to_json()?, outcome.exit_code()))
    })
    .map_err(py_err)
}

/// Adds every binding to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(describe_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(parse_sequence_description, m)?)?;
    m.add_function(wrap_pyfunction!(name_brackets, m)?)?;
    m.add_function(wrap_pyfunction!(brackets_from_names, m)?)?;
    m.add_function(wrap_pyfunction!(linearize_table, m)?)?;
    m.add_function(wrap_pyfunction!(lookup_smiles, m)?)?;
    m.add_function(wrap_pyfunction!(emoji_name, m)?)?;
    m.add_function(wrap_pyfunction!(dyck_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(shift_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(gen_arc, m)?)?;
    m.add_function(wrap_pyfunction!(gen_dyck, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_answer, m)?)?;
    m.add_function(wrap_pyfunction!(exact_match, m)?)?;
    m.add_function(wrap_pyfunction!(token_f1, m)?)?;
    m.add_function(wrap_pyfunction!(max_token_f1, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(build_query, m)?)?;
    m.add_function(wrap_pyfunction!(extract_answer, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("EMOTIONS", tasks::EMOTIONS.to_vec())?;
    Ok(())
}

#[pymodule]
#[pyo3(name = "s2l")]
fn s2l_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
