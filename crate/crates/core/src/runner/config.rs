use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::problem::{Conversion, MethodConfig, Mode};
use crate::tasks::TaskId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    /// Without fixtures the mock answers every query with its gold answer.
    Mock { fixtures: Option<PathBuf> },
    Live { endpoint: String, token_env: String },
    Replay { strict: bool },
}

impl BackendSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            BackendSpec::Mock { .. } => "mock",
            BackendSpec::Live { .. } => "live",
            BackendSpec::Replay { .. } => "replay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    File(PathBuf),
    /// Seeded generator corpus; ARC and Dyck only.
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

/// Parses `zs`, `zsc`, `s2l-sub`, `s2l-cat`, the last two optionally with
/// `:model` or `:tool`. Without a suffix `default_conversion` applies.
pub fn parse_method(text: &str, default_conversion: Conversion) -> Result<MethodConfig> {
    let (mode, conv) = match text.split_once(':') {
        Some((m, c)) => (m, Some(c)),
        None => (text, None),
    };
    let conversion = match conv {
        None => default_conversion,
        Some("model") => Conversion::WithModel,
        Some("tool") => Conversion::WithTool,
        Some(other) => return Err(Error::Config(format!("unknown conversion {other:?} in method {text:?}"))),
    };
    match mode {
        "zs" | "zsc" if conv.is_some() => Err(Error::Config(format!("method {mode} takes no conversion"))),
        "zs" => Ok(MethodConfig::zero_shot()),
        "zsc" => Ok(MethodConfig::zero_shot_cot()),
        "s2l-sub" => Ok(MethodConfig::s2l(Mode::S2lSubstitute, conversion)),
        "s2l-cat" => Ok(MethodConfig::s2l(Mode::S2lConcatenate, conversion)),
        other => Err(Error::Config(format!("unknown method {other:?}"))),
    }
}

pub fn parse_conversion(text: &str) -> Result<Conversion> {
    match text {
        "model" => Ok(Conversion::WithModel),
        "tool" => Ok(Conversion::WithTool),
        other => Err(Error::Config(format!("unknown conversion {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tasks: Vec<TaskId>,
    pub methods: Vec<MethodConfig>,
    pub model: String,
    /// Model used for S2L conversion; the solver model when unset.
    pub conversion_model: Option<String>,
    pub sample_size: usize,
    pub repeats: usize,
    pub seed: u64,
    pub concurrency: usize,
    pub backend: BackendSpec,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub formats: Vec<ReportFormat>,
    pub data_dir: PathBuf,
    pub datasets: BTreeMap<TaskId, DatasetSource>,
    /// Draw a fresh sample per repeat instead of re-querying one sample.
    pub resample_repeats: bool,
    pub stance_target: String,
    pub prompt_dir: Option<PathBuf>,
    pub max_tokens: Option<u32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tasks: TaskId::ALL.to_vec(),
            methods: vec![
                MethodConfig::zero_shot(),
                MethodConfig::zero_shot_cot(),
                MethodConfig::s2l(Mode::S2lSubstitute, Conversion::WithTool),
                MethodConfig::s2l(Mode::S2lConcatenate, Conversion::WithTool),
            ],
            model: "mock-model".into(),
            conversion_model: None,
            sample_size: 10,
            repeats: 1,
            seed: 0,
            concurrency: 4,
            backend: BackendSpec::Mock { fixtures: None },
            cache_dir: None,
            out_dir: PathBuf::from("out"),
            formats: vec![ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown],
            data_dir: PathBuf::from("fixtures"),
            datasets: BTreeMap::new(),
            resample_repeats: true,
            stance_target: crate::tasks::PromptContext::default().stance_target,
            prompt_dir: None,
            max_tokens: None,
        }
    }
}

/// Flat key/value file layout.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    tasks: Option<Vec<String>>,
    methods: Option<Vec<String>>,
    conversion: Option<String>,
    model: Option<String>,
    conversion_model: Option<String>,
    sample_size: Option<usize>,
    repeats: Option<usize>,
    seed: Option<u64>,
    concurrency: Option<usize>,
    backend: Option<String>,
    mock_fixtures: Option<PathBuf>,
    endpoint: Option<String>,
    token_env: Option<String>,
    replay_strict: Option<bool>,
    cache_dir: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    formats: Option<Vec<String>>,
    data_dir: Option<PathBuf>,
    resample_repeats: Option<bool>,
    stance_target: Option<String>,
    prompt_dir: Option<PathBuf>,
    max_tokens: Option<u32>,
    dataset_arc: Option<String>,
    dataset_dyck: Option<String>,
    dataset_property: Option<String>,
    dataset_emoji: Option<String>,
    dataset_table_qa: Option<String>,
    dataset_tabfact: Option<String>,
    dataset_stance: Option<String>,
    dataset_sentiment: Option<String>,
}

/// Command-line values; every `Some` beats the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tasks: Vec<String>,
    pub methods: Vec<String>,
    pub conversion: Option<String>,
    pub model: Option<String>,
    pub backend: Option<String>,
    pub seed: Option<u64>,
    pub sample_size: Option<usize>,
    pub repeats: Option<usize>,
    pub concurrency: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub replay_strict: Option<bool>,
}

fn dataset_source(text: &str, base: &Path) -> DatasetSource {
    if text == "synthetic" {
        DatasetSource::Synthetic
    } else {
        DatasetSource::File(base.join(text))
    }
}

impl RunConfig {
    /// Reads an optional config file, then applies overrides. Relative paths
    /// in the file resolve against the file's directory.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let (file, base) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                let file: ConfigFile =
                    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                (file, p.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (ConfigFile::default(), PathBuf::new()),
        };
        let mut c = RunConfig::default();
        let rel = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

        let conversion = match overrides.conversion.as_deref().or(file.conversion.as_deref()) {
            Some(s) => parse_conversion(s)?,
            None => Conversion::WithTool,
        };
        let tasks = if overrides.tasks.is_empty() { file.tasks.clone() } else { Some(overrides.tasks.clone()) };
        if let Some(t) = tasks {
            c.tasks = t.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        let methods = if overrides.methods.is_empty() { file.methods.clone() } else { Some(overrides.methods.clone()) };
        if let Some(m) = methods {
            c.methods = m.iter().map(|s| parse_method(s, conversion)).collect::<Result<_>>()?;
        } else if overrides.conversion.is_some() || file.conversion.is_some() {
            for m in &mut c.methods {
                if m.mode.is_s2l() {
                    m.conversion = Some(conversion);
                }
            }
        }
        if let Some(m) = overrides.model.clone().or(file.model) {
            c.model = m;
        }
        c.conversion_model = file.conversion_model;
        if let Some(n) = overrides.sample_size.or(file.sample_size) {
            c.sample_size = n;
        }
        if let Some(r) = overrides.repeats.or(file.repeats) {
            c.repeats = r;
        }
        if let Some(s) = overrides.seed.or(file.seed) {
            c.seed = s;
        }
        if let Some(n) = overrides.concurrency.or(file.concurrency) {
            c.concurrency = n;
        }
        let backend = overrides.backend.clone().or(file.backend).unwrap_or_else(|| "mock".into());
        c.backend = match backend.as_str() {
            "mock" => BackendSpec::Mock {
                fixtures: file.mock_fixtures.map(rel),
            },
            "live" => BackendSpec::Live {
                endpoint: file
                    .endpoint
                    .ok_or_else(|| Error::Config("live backend needs `endpoint`".into()))?,
                token_env: file.token_env.unwrap_or_else(|| "S2L_API_KEY".into()),
            },
            "replay" => BackendSpec::Replay {
                strict: overrides.replay_strict.or(file.replay_strict).unwrap_or(true),
            },
            other => return Err(Error::Config(format!("unknown backend {other:?}"))),
        };
        c.cache_dir = overrides.cache_dir.clone().or(file.cache_dir.map(rel));
        if let Some(o) = overrides.out_dir.clone().or(file.out_dir.map(rel)) {
            c.out_dir = o;
        }
        if let Some(f) = file.formats {
            c.formats = f.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(d) = overrides.data_dir.clone().or(file.data_dir.map(rel)) {
            c.data_dir = d;
        }
        if let Some(r) = file.resample_repeats {
            c.resample_repeats = r;
        }
        if let Some(t) = file.stance_target {
            c.stance_target = t;
        }
        c.prompt_dir = file.prompt_dir.map(rel);
        c.max_tokens = file.max_tokens;
        let named = [
            (TaskId::Arc, file.dataset_arc),
            (TaskId::Dyck, file.dataset_dyck),
            (TaskId::Property, file.dataset_property),
            (TaskId::Emoji, file.dataset_emoji),
            (TaskId::TableQa, file.dataset_table_qa),
            (TaskId::TabFact, file.dataset_tabfact),
            (TaskId::Stance, file.dataset_stance),
            (TaskId::Sentiment, file.dataset_sentiment),
        ];
        for (task, value) in named {
            if let Some(v) = value {
                c.datasets.insert(task, dataset_source(&v, &base));
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.tasks.is_empty() {
            return bad("no tasks selected");
        }
        if self.methods.is_empty() {
            return bad("no methods selected");
        }
        if self.sample_size == 0 {
            return bad("sample_size must be at least 1");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.concurrency == 0 {
            return bad("concurrency must be at least 1");
        }
        if self.model.is_empty() {
            return bad("model id is empty");
        }
        if self.formats.is_empty() {
            return bad("no report formats");
        }
        for m in &self.methods {
            m.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::Config(format!("method {} listed twice", m.label())));
            }
        }
        for (i, t) in self.tasks.iter().enumerate() {
            if self.tasks[..i].contains(t) {
                return Err(Error::Config(format!("task {t} listed twice")));
            }
        }
        for (task, source) in &self.datasets {
            if *source == DatasetSource::Synthetic && !matches!(task, TaskId::Arc | TaskId::Dyck) {
                return Err(Error::Config(format!("task {task} has no synthetic generator")));
            }
        }
        if matches!(self.backend, BackendSpec::Replay { .. }) && self.cache_dir.is_none() {
            return bad("replay backend needs `cache_dir`");
        }
        Ok(())
    }

    pub fn conversion_model(&self) -> &str {
        self.conversion_model.as_deref().unwrap_or(&self.model)
    }

    pub fn dataset(&self, task: TaskId) -> DatasetSource {
        self.datasets
            .get(&task)
            .cloned()
            .unwrap_or_else(|| DatasetSource::File(self.data_dir.join(task.dataset_file())))
    }
}

impl fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSource::File(p) => write!(f, "{}", p.display()),
            DatasetSource::Synthetic => f.write_str("synthetic"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_strings() {
        let tool = Conversion::WithTool;
        assert_eq!(parse_method("zs", tool).unwrap(), MethodConfig::zero_shot());
        assert_eq!(
            parse_method("s2l-cat:model", tool).unwrap(),
            MethodConfig::s2l(Mode::S2lConcatenate, Conversion::WithModel)
        );
        assert_eq!(
            parse_method("s2l-sub", Conversion::WithModel).unwrap().conversion,
            Some(Conversion::WithModel)
        );
        assert!(parse_method("zs:tool", tool).is_err());
        assert!(parse_method("s2l", tool).is_err());
        assert!(parse_method("s2l-sub:dict", tool).is_err());
    }

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "tasks = [\"arc\", \"dyck\"]\nmethods = [\"zs\", \"s2l-sub\"]\nconversion = \"model\"\nseed = 3\nsample_size = 5\ndataset_arc = \"synthetic\"\n",
        )
        .unwrap();
        let c = RunConfig::load(
            Some(&path),
            &Overrides {
                seed: Some(9),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(c.tasks, vec![TaskId::Arc, TaskId::Dyck]);
        assert_eq!(c.seed, 9);
        assert_eq!(c.sample_size, 5);
        assert_eq!(c.methods[1].conversion, Some(Conversion::WithModel));
        assert_eq!(c.dataset(TaskId::Arc), DatasetSource::Synthetic);
    }

    #[test]
    fn invalid_configs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        for body in [
            "repeats = 0\n",
            "tasks = []\n",
            "tasks = [\"chess\"]\n",
            "unknown_key = 1\n",
            "dataset_emoji = \"synthetic\"\n",
            "backend = \"replay\"\n",
            "methods = [\"zs\", \"zs\"]\n",
        ] {
            std::fs::write(&path, body).unwrap();
            assert!(
                matches!(RunConfig::load(Some(&path), &Overrides::default()), Err(Error::Config(_))),
                "{body}"
            );
        }
    }
}
