use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use super::config::{BackendSpec, DatasetSource, RunConfig};
use super::report::{CellStatus, CellSummary, Report, ReportMeta};
use super::sample::sample_indices;
use crate::converters::brackets::{bracket_name, BracketNames, BracketTable};
use crate::error::{Error, Result};
use crate::llm::{convert_with_model, Backend, CacheStats, CompletionRequest, ConversionPrompt, LiveBackend, MockBackend, ResponseCache};
use crate::metrics::{self, ScoreRow};
use crate::problem::{Conversion, ConversionMethod, MethodConfig, Mode, Rendering, SymbolKind, SymbolSpan};
use crate::tasks::{
    build_task_prompt, extract_answer, load_dataset, synthetic_arc, synthetic_dyck, Answer, AnswerSpace, Gold,
    Instance, PromptContext, TaskId, ToolSet, EMOTIONS,
};

/// Size of a generated corpus when a task reads from a generator.
pub const SYNTHETIC_COUNT: usize = 60;

/// Runs `f` over `items` on at most `limit` threads; results keep input order.
pub fn parallel_map<T, R, F>(items: &[T], limit: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let next = AtomicUsize::new(0);
    let workers = limit.max(1).min(items.len().max(1));
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let f = &f;
    let next = &next;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(move || {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= items.len() {
                            break;
                        }
                        done.push((i, f(&items[i])));
                    }
                    done
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker thread panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every slot filled")).collect()
}

/// Result of a finished run plus the bits that vary between otherwise equal runs.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub backend: &'static str,
    pub cache: Option<CacheStats>,
    pub started_unix: u64,
    pub elapsed_ms: u128,
}

impl RunOutcome {
    /// 0 for a clean run, 2 when some cells failed.
    pub fn exit_code(&self) -> i32 {
        if self.report.has_failures() {
            2
        } else {
            0
        }
    }

    pub fn run_meta_json(&self) -> String {
        let meta = serde_json::json!({
            "backend": self.backend,
            "started_unix": self.started_unix,
            "elapsed_ms": self.elapsed_ms as u64,
            "cache_hits": self.cache.map(|c| c.hits),
            "cache_misses": self.cache.map(|c| c.misses),
            "cache_hit_rate": self.cache.and_then(|c| c.hit_rate()),
        });
        let mut text = serde_json::to_string_pretty(&meta).expect("json value serializes");
        text.push('\n');
        text
    }
}

/// Writes `report.<ext>` per configured format and `run_meta.json`.
pub fn write_outputs(config: &RunConfig, outcome: &RunOutcome) -> Result<Vec<PathBuf>> {
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for &format in &config.formats {
        let path = dir.join(format!("report.{}", format.extension()));
        super::report::emit_report(&outcome.report, format, &path)?;
        written.push(path);
    }
    let path = dir.join("run_meta.json");
    std::fs::write(&path, outcome.run_meta_json()).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Backend described by the config; the flag is true for the gold-echo mock.
pub fn build_backend(config: &RunConfig) -> Result<(Backend, bool)> {
    let cache = config.cache_dir.as_ref().map(ResponseCache::open).transpose()?;
    Ok(match &config.backend {
        BackendSpec::Mock { fixtures } => {
            let mock = match fixtures {
                Some(p) => MockBackend::from_json_file(p)?,
                None => MockBackend::new(),
            };
            let mock = match cache {
                Some(c) => mock.with_cache(c),
                None => mock,
            };
            (Backend::Mock(mock), fixtures.is_none())
        }
        BackendSpec::Live { endpoint, token_env } => {
            let live = LiveBackend::from_env(endpoint.clone(), token_env).map_err(|e| Error::Config(e.to_string()))?;
            let live = match cache {
                Some(c) => live.with_cache(c),
                None => live,
            };
            (Backend::Live(live), false)
        }
        BackendSpec::Replay { strict } => {
            let cache = cache.ok_or_else(|| Error::Config("replay backend needs `cache_dir`".into()))?;
            (Backend::replay(cache, *strict), false)
        }
    })
}

/// Validates the config, builds its backend and runs the whole matrix.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let (backend, echo) = build_backend(config)?;
    run_with_backend(config, &backend, echo)
}

fn load_task(config: &RunConfig, task: TaskId) -> Result<Vec<Instance>> {
    let count = SYNTHETIC_COUNT.max(config.sample_size);
    match config.dataset(task) {
        DatasetSource::File(path) => {
            load_dataset(&path, task).map_err(|e| Error::Config(format!("dataset for {task}: {e}")))
        }
        DatasetSource::Synthetic => match task {
            TaskId::Arc => Ok(synthetic_arc(config.seed, count, 3, 10)?.into_iter().map(Instance::Arc).collect()),
            TaskId::Dyck => Ok(synthetic_dyck(config.seed, count, 5, 20)?.into_iter().map(Instance::Dyck).collect()),
            _ => Err(Error::Config(format!("task {task} has no synthetic generator"))),
        },
    }
}

fn answer_space(task: TaskId, method: &MethodConfig) -> AnswerSpace {
    if method.mode == Mode::S2lSubstitute && matches!(task, TaskId::Arc | TaskId::Dyck) {
        AnswerSpace::Language
    } else {
        AnswerSpace::Symbol
    }
}

type ConvKey = (TaskId, Conversion, String);

#[derive(Clone)]
struct ModelNeed {
    task: TaskId,
    symbol: String,
    kind: SymbolKind,
}

/// Renderings for every distinct span the run needs, keyed by task,
/// conversion and raw text. Failures are kept as errors per span.
struct Conversions {
    done: HashMap<ConvKey, Result<Rendering>>,
    names: BracketNames,
}

impl Conversions {
    fn get(&self, task: TaskId, conversion: Conversion, raw: &str) -> std::result::Result<&Rendering, Error> {
        let key = (task, conversion, raw.to_string());
        match self.done.get(&key) {
            Some(Ok(r)) => Ok(r),
            Some(Err(e)) => Err(clone_error(e)),
            None => Err(Error::Structure(format!("no rendering for {raw:?}"))),
        }
    }
}

/// Errors are not Clone; keep the variants the classifier looks at.
fn clone_error(e: &Error) -> Error {
    match e {
        Error::CacheMiss(k) => Error::CacheMiss(k.clone()),
        Error::EmptyResponse => Error::EmptyResponse,
        Error::MockMiss(k) => Error::MockMiss(k.clone()),
        Error::Backend { status, message } => Error::Backend {
            status: *status,
            message: message.clone(),
        },
        other => Error::Structure(other.to_string()),
    }
}

fn echo_conversion(tools: &ToolSet, need: &ModelNeed) -> String {
    if need.task == TaskId::Dyck {
        let c = need.symbol.chars().next().expect("one char");
        return bracket_name(c, BracketTable::Canonical).unwrap_or(&need.symbol).to_string();
    }
    SymbolSpan::at("s1", need.symbol.clone(), need.kind)
        .ok()
        .and_then(|s| tools.render(&s).ok().flatten())
        .map(|r| r.text)
        .unwrap_or_else(|| need.symbol.clone())
}

fn convert_all(
    config: &RunConfig,
    backend: &Backend,
    echo: bool,
    spans: &[(TaskId, Conversion, SymbolSpan)],
) -> Result<Conversions> {
    let tools = ToolSet::default();
    let mut done = HashMap::new();
    let mut to_model: Vec<(ConvKey, SymbolKind)> = Vec::new();
    for (task, conversion, span) in spans {
        let key = (*task, *conversion, span.raw_text.clone());
        if *conversion == Conversion::WithTool {
            match tools.render(span) {
                Ok(Some(r)) => {
                    done.insert(key, Ok(r));
                    continue;
                }
                Ok(None) | Err(Error::LookupMiss { .. }) => {}
                Err(e) => {
                    done.insert(key, Err(e));
                    continue;
                }
            }
        }
        to_model.push((key, span.kind));
    }

    // Dyck spans go to the model one bracket at a time.
    let mut needs: Vec<ModelNeed> = Vec::new();
    let mut seen = HashSet::new();
    for ((task, _, raw), kind) in &to_model {
        let symbols: Vec<String> = if *task == TaskId::Dyck {
            raw.chars().map(String::from).collect()
        } else {
            vec![raw.clone()]
        };
        for symbol in symbols {
            if seen.insert((*task, symbol.clone())) {
                needs.push(ModelNeed {
                    task: *task,
                    symbol,
                    kind: *kind,
                });
            }
        }
    }

    let mut prompts: BTreeMap<TaskId, ConversionPrompt> = BTreeMap::new();
    for need in &needs {
        if !prompts.contains_key(&need.task) {
            let p = ConversionPrompt::from_dir_or_default(config.prompt_dir.as_deref(), need.task.as_str())?;
            prompts.insert(need.task, p);
        }
    }
    if echo {
        if let Backend::Mock(mock) = backend {
            for need in &needs {
                mock.insert(prompts[&need.task].render(&need.symbol), echo_conversion(&tools, need));
            }
        }
    }

    let model = config.conversion_model();
    let results = parallel_map(&needs, config.concurrency, |need| {
        let span = SymbolSpan::at("s1", need.symbol.clone(), need.kind)?;
        convert_with_model(&span, &prompts[&need.task], backend, model)
    });
    let mut by_symbol: HashMap<(TaskId, String), Result<Rendering>> = HashMap::new();
    for (need, r) in needs.into_iter().zip(results) {
        by_symbol.insert((need.task, need.symbol), r);
    }

    let mut names = BracketNames::default();
    for ((task, symbol), r) in &by_symbol {
        if *task == TaskId::Dyck {
            if let (Ok(r), Some(c)) = (r, symbol.chars().next()) {
                names.insert(&r.text, c);
            }
        }
    }

    for (key, _) in to_model {
        let (task, _, raw) = &key;
        let (task, raw) = (*task, raw.clone());
        let outcome: Result<Rendering> = if task == TaskId::Dyck {
            let mut parts = Vec::new();
            let mut failure = None;
            for c in raw.chars() {
                match &by_symbol[&(task, c.to_string())] {
                    Ok(r) => parts.push(r.text.clone()),
                    Err(e) => {
                        failure = Some(clone_error(e));
                        break;
                    }
                }
            }
            match failure {
                Some(e) => Err(e),
                None => Rendering::new(
                    "s1",
                    parts.join(" "),
                    ConversionMethod::Llm,
                    format!("{model}: dyck conversion prompt"),
                ),
            }
        } else {
            match &by_symbol[&(task, raw.clone())] {
                Ok(r) => Ok(r.clone()),
                Err(e) => Err(clone_error(e)),
            }
        };
        done.insert(key, outcome);
    }
    Ok(Conversions { done, names })
}

struct Job {
    task: TaskId,
    space: AnswerSpace,
    gold: Gold,
    request: std::result::Result<CompletionRequest, Error>,
}

struct CellPlan {
    task: TaskId,
    method: MethodConfig,
    repeat: usize,
    jobs: Vec<usize>,
}

enum Outcome {
    Answered(Answer),
    Missed,
    Errored(String),
}

fn classify(err: Error, strict: bool) -> Outcome {
    match err {
        Error::CacheMiss(_) if !strict => Outcome::Missed,
        Error::EmptyResponse => Outcome::Missed,
        e => Outcome::Errored(e.to_string()),
    }
}

/// Runs the matrix against a caller-supplied backend. With `echo` set and a
/// mock backend, every query is registered with its gold reply first.
pub fn run_with_backend(config: &RunConfig, backend: &Backend, echo: bool) -> Result<RunOutcome> {
    config.validate()?;
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let ctx = PromptContext {
        stance_target: config.stance_target.clone(),
    };

    // plan: datasets and samples, all checked before any request is sent
    let mut samples: Vec<(TaskId, Vec<Vec<Instance>>)> = Vec::new();
    for &task in &config.tasks {
        let data = load_task(config, task)?;
        if data.len() < config.sample_size {
            return Err(Error::Config(format!(
                "task {task}: sample_size {} exceeds {} available instances",
                config.sample_size,
                data.len()
            )));
        }
        let mut per_repeat = Vec::with_capacity(config.repeats);
        for r in 0..config.repeats {
            let stream = if config.resample_repeats { r } else { 0 };
            let idx = sample_indices(data.len(), config.sample_size, config.seed, stream)?;
            per_repeat.push(idx.into_iter().map(|i| data[i].clone()).collect());
        }
        samples.push((task, per_repeat));
    }

    // conversions: each distinct span once per (task, conversion)
    let mut spans: Vec<(TaskId, Conversion, SymbolSpan)> = Vec::new();
    let mut seen: HashSet<ConvKey> = HashSet::new();
    for (task, per_repeat) in &samples {
        let mut wanted: Vec<(Conversion, bool)> = Vec::new();
        for m in &config.methods {
            if let Some(c) = m.effective_conversion() {
                let gold = m.mode == Mode::S2lSubstitute;
                match wanted.iter_mut().find(|w| w.0 == c) {
                    Some(w) => w.1 |= gold,
                    None => wanted.push((c, gold)),
                }
            }
        }
        for (conversion, with_gold) in wanted {
            for inst in per_repeat.iter().flatten() {
                let problem = inst.problem(&ctx)?;
                let gold_span = if with_gold { inst.gold_span() } else { None };
                for span in problem.spans.into_iter().chain(gold_span) {
                    if seen.insert((*task, conversion, span.raw_text.clone())) {
                        spans.push((*task, conversion, span));
                    }
                }
            }
        }
    }
    let conversions = convert_all(config, backend, echo, &spans)?;

    // queries
    let mut jobs: Vec<Job> = Vec::new();
    let mut cells: Vec<CellPlan> = Vec::new();
    for (task, per_repeat) in &samples {
        for method in &config.methods {
            for (repeat, instances) in per_repeat.iter().enumerate() {
                let mut plan = CellPlan {
                    task: *task,
                    method: method.clone(),
                    repeat,
                    jobs: Vec::new(),
                };
                for inst in instances {
                    let request = build_request(config, &conversions, inst, method, &ctx);
                    let gold = inst.gold();
                    if echo {
                        if let (Backend::Mock(mock), Ok(req)) = (backend, &request) {
                            let reply = echo_reply(&conversions, inst, method, &gold);
                            mock.insert(req.last_user_text(), reply);
                        }
                    }
                    plan.jobs.push(jobs.len());
                    jobs.push(Job {
                        task: *task,
                        space: answer_space(*task, method),
                        gold,
                        request,
                    });
                }
                cells.push(plan);
            }
        }
    }

    // execution
    let strict = !matches!(backend, Backend::Replay { strict: false, .. });
    let replies = parallel_map(&jobs, config.concurrency, |job| match &job.request {
        Ok(req) => backend.complete(req),
        Err(e) => Err(clone_error(e)),
    });
    let outcomes: Vec<Outcome> = jobs
        .iter()
        .zip(replies)
        .map(|(job, reply)| match reply {
            Ok(text) => match extract_answer(job.task, &text, job.space, Some(&conversions.names)) {
                Ok(a) => Outcome::Answered(a),
                Err(_) => Outcome::Missed,
            },
            Err(e) => classify(e, strict),
        })
        .collect();

    // scoring
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for plan in &cells {
        let label = plan.method.label();
        let cell_jobs: Vec<&Job> = plan.jobs.iter().map(|&j| &jobs[j]).collect();
        let cell_outcomes: Vec<&Outcome> = plan.jobs.iter().map(|&j| &outcomes[j]).collect();
        let errors: Vec<&String> = cell_outcomes
            .iter()
            .filter_map(|o| match o {
                Outcome::Errored(m) => Some(m),
                _ => None,
            })
            .collect();
        let partial = cell_outcomes
            .iter()
            .filter(|o| matches!(o, Outcome::Answered(a) if a.is_partial()))
            .count();
        let answered = cell_outcomes.iter().filter(|o| matches!(o, Outcome::Answered(_))).count();
        let mut summary = CellSummary {
            task_id: plan.task.as_str().to_string(),
            method: label.clone(),
            repeat_index: plan.repeat,
            n: cell_jobs.len(),
            scored: answered - partial,
            missed: cell_jobs.len() - answered - errors.len() + partial,
            errored: errors.len(),
            status: CellStatus::Ok,
            error: None,
            undefined: Vec::new(),
        };
        if let Some(first) = errors.first() {
            summary.status = CellStatus::Error;
            summary.error = Some((*first).clone());
            summaries.push(summary);
            continue;
        }
        let answers: Vec<Option<&Answer>> = cell_outcomes
            .iter()
            .map(|o| match o {
                Outcome::Answered(a) => Some(a),
                _ => None,
            })
            .collect();
        let golds: Vec<&Gold> = cell_jobs.iter().map(|j| &j.gold).collect();
        let mut push = |metric: &str, value: f64| {
            rows.push(ScoreRow {
                task_id: plan.task.as_str().to_string(),
                method: label.clone(),
                metric: metric.to_string(),
                value,
                n: cell_jobs.len(),
                repeat_index: plan.repeat,
            })
        };
        score_cell(plan.task, &answers, &golds, &mut push, &mut summary.undefined)?;
        summaries.push(summary);
    }

    let meta = ReportMeta {
        seed: config.seed,
        model: config.model.clone(),
        conversion_model: config.conversion_model().to_string(),
        sample_size: config.sample_size,
        repeats: config.repeats,
        resample_repeats: config.resample_repeats,
        tasks: config.tasks.iter().map(|t| t.as_str().to_string()).collect(),
        methods: config.methods.iter().map(MethodConfig::label).collect(),
    };
    Ok(RunOutcome {
        report: Report::assemble(meta, rows, summaries),
        backend: backend.kind(),
        cache: backend.cache().map(ResponseCache::stats),
        started_unix,
        elapsed_ms: started.elapsed().as_millis(),
    })
}

fn build_request(
    config: &RunConfig,
    conversions: &Conversions,
    inst: &Instance,
    method: &MethodConfig,
    ctx: &PromptContext,
) -> std::result::Result<CompletionRequest, Error> {
    let problem = inst.problem(ctx)?;
    let mut renderings = Vec::new();
    if let Some(conversion) = method.effective_conversion() {
        for span in &problem.spans {
            let mut r = conversions.get(inst.task_id(), conversion, &span.raw_text)?.clone();
            r.span_id = span.id.clone();
            renderings.push(r);
        }
    }
    let query = build_task_prompt(inst, method, &renderings, ctx)?;
    let mut request = CompletionRequest::new(config.model.clone(), query.messages);
    request.max_tokens = config.max_tokens;
    Ok(request)
}

fn echo_reply(conversions: &Conversions, inst: &Instance, method: &MethodConfig, gold: &Gold) -> String {
    if answer_space(inst.task_id(), method) == AnswerSpace::Language {
        if let (Some(span), Some(c)) = (inst.gold_span(), method.effective_conversion()) {
            if let Ok(r) = conversions.get(inst.task_id(), c, &span.raw_text) {
                return r.text.clone();
            }
        }
    }
    gold.canonical_text()
}

fn score_cell(
    task: TaskId,
    answers: &[Option<&Answer>],
    golds: &[&Gold],
    push: &mut impl FnMut(&str, f64),
    undefined: &mut Vec<String>,
) -> Result<()> {
    match task {
        TaskId::Emoji => {
            let mut all = Vec::with_capacity(EMOTIONS.len());
            for (e, emotion) in EMOTIONS.iter().enumerate() {
                let preds: Vec<f64> = answers
                    .iter()
                    .map(|a| match a {
                        Some(Answer::Ratings(r)) => r[e].unwrap_or(0.0),
                        _ => 0.0,
                    })
                    .collect();
                let truth: Vec<f64> = golds
                    .iter()
                    .map(|g| match g {
                        Gold::Ratings(r) => r[e],
                        _ => 0.0,
                    })
                    .collect();
                let metric = format!("pearson_{emotion}");
                match metrics::pearson(&preds, &truth) {
                    Ok(v) => {
                        push(&metric, v);
                        all.push(v);
                    }
                    Err(_) => undefined.push(metric),
                }
            }
            if all.len() == EMOTIONS.len() {
                push("pearson_avg", all.iter().sum::<f64>() / all.len() as f64);
            } else {
                undefined.push("pearson_avg".to_string());
            }
        }
        TaskId::TableQa => {
            let mut em = Vec::with_capacity(golds.len());
            let mut f1 = Vec::with_capacity(golds.len());
            for (a, g) in answers.iter().zip(golds) {
                let answers = match g {
                    Gold::Answers(v) => v.as_slice(),
                    _ => &[],
                };
                let pred = match a {
                    Some(Answer::Text(t)) => Some(t.as_str()),
                    _ => None,
                };
                em.push(pred.map_or(0.0, |p| metrics::exact_match(p, answers) as f64));
                f1.push(pred.map_or(0.0, |p| metrics::max_token_f1(p, answers)));
            }
            push("em", mean(&em));
            push("f1", mean(&f1));
        }
        _ => {
            let correct: Vec<bool> = answers
                .iter()
                .zip(golds)
                .map(|(a, g)| a.is_some_and(|a| a.matches(g)))
                .collect();
            push("accuracy", metrics::accuracy(&correct, &vec![true; correct.len()])?);
            if task == TaskId::Stance {
                let labels = task.labels().expect("binary task");
                let preds: Vec<_> = answers
                    .iter()
                    .map(|a| match a {
                        Some(Answer::Label(l)) => Some(*l),
                        _ => None,
                    })
                    .collect();
                let truth: Vec<_> = golds
                    .iter()
                    .filter_map(|g| match g {
                        Gold::Label(l) => Some(*l),
                        _ => None,
                    })
                    .collect();
                match metrics::macro_f1(&preds, &truth, &labels) {
                    Ok(v) => push("macro_f1", v),
                    Err(_) => undefined.push("macro_f1".to_string()),
                }
            }
        }
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}
