//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use common::{completion, fixtures_dir, Stub};
use s2l::converters::{
    brackets_from_names, describe_sequence, linearize, name_brackets_with, parse_sequence_description, BracketTable,
};
use s2l::error::Error;
use s2l::llm::{Backend, LiveBackend, ResponseCache};
use s2l::metrics::{pearson, token_f1, ScoreRow};
use s2l::runner::{
    run, run_with_backend, write_outputs, BackendSpec, CellStatus, CellSummary, Overrides, Report, ReportFormat,
    ReportMeta, RunConfig,
};
use s2l::tasks::{dyck_oracle, load_dataset, shift_oracle, TaskId};

type Check = Result<(), String>;

const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(1);
const ECHO_RUN_BUDGET: Duration = Duration::from_secs(10);
const PEARSON_EXACT_TOL: f64 = 1e-12;
const PEARSON_HAND_TOL: f64 = 1e-5;
const F1_TOL: f64 = 1e-12;
const SCORE_TOL: f64 = 1e-12;

const ALL_TASKS: [&str; 8] = ["arc", "dyck", "property", "emoji", "table_qa", "tabfact", "stance", "sentiment"];
const ALL_METHODS: [&str; 4] = ["zs", "zsc", "s2l-sub", "s2l-cat"];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn converter_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    for _ in 0..1000 {
        let len = rng.random_range(1..=64);
        let seq: Vec<u8> = (0..len).map(|_| rng.random_range(0..=9)).collect();
        let text = describe_sequence(&seq).map_err(|e| format!("{seq:?}: {e}"))?;
        let back = parse_sequence_description(&text).map_err(|e| format!("{text:?}: {e}"))?;
        ensure(back == seq, || format!("{seq:?} -> {text:?} -> {back:?}"))?;
    }
    let took = start.elapsed();
    ensure(took < ROUND_TRIP_BUDGET, || format!("took {took:?}"))
}

fn bracket_bijection() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alphabet: Vec<char> = "()[]{}<>".chars().collect();
    for table in [BracketTable::Canonical, BracketTable::Alias] {
        for _ in 0..1000 {
            let len = rng.random_range(0..=32);
            let b: String = (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
            let names = name_brackets_with(&b, table).map_err(|e| e.to_string())?;
            let back = brackets_from_names(&names).map_err(|e| e.to_string())?;
            ensure(back == b, || format!("{table:?}: {b:?} -> {names:?} -> {back:?}"))?;
        }
    }
    Ok(())
}

/// Reduces adjacent matched pairs until nothing changes.
fn balanced(s: &str) -> bool {
    let mut s = s.to_string();
    loop {
        let before = s.len();
        for pair in ["()", "[]", "{}", "<>"] {
            s = s.replace(pair, "");
        }
        if s.is_empty() {
            return true;
        }
        if s.len() == before {
            return false;
        }
    }
}

fn random_prefix(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    let pairs = [('(', ')'), ('[', ']'), ('{', '}'), ('<', '>')];
    let len = rng.random_range(0..=max_len);
    let mut open = Vec::new();
    let mut out = String::new();
    for _ in 0..len {
        if !open.is_empty() && rng.random_bool(0.5) {
            out.push(open.pop().unwrap());
        } else {
            let (o, c) = pairs[rng.random_range(0..4)];
            open.push(c);
            out.push(o);
        }
    }
    out
}

fn dyck_oracle_soundness() -> Check {
    for (prefix, want) in [("([]", ")"), ("{(<>)", "}")] {
        let got = dyck_oracle(prefix).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{prefix:?} -> {got:?}, expected {want:?}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let prefix = random_prefix(&mut rng, 20);
        let closing = dyck_oracle(&prefix).map_err(|e| format!("{prefix:?}: {e}"))?;
        ensure(balanced(&format!("{prefix}{closing}")), || format!("{prefix:?} + {closing:?} unbalanced"))?;
    }
    Ok(())
}

fn shift_oracle_check() -> Check {
    let got = shift_oracle(&[1, 0, 0], 2).map_err(|e| e.to_string())?;
    ensure(got == [0, 0, 1], || format!("[1,0,0] k=2 -> {got:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let k = rng.random_range(1..=3);
        let len = rng.random_range(k + 1..=32);
        let mut seq: Vec<u8> = (0..len).map(|_| rng.random_range(0..=9)).collect();
        for v in &mut seq[len - k..] {
            *v = 0;
        }
        let out = shift_oracle(&seq, k).map_err(|e| format!("{seq:?} k={k}: {e}"))?;
        let (mut a, mut b) = (seq.clone(), out.clone());
        a.sort_unstable();
        b.sort_unstable();
        ensure(a == b, || format!("{seq:?} k={k}: multiset changed"))?;
        for (i, &v) in seq.iter().enumerate() {
            ensure(v == 0 || out[i + k] == v, || format!("{seq:?} k={k}: cell {i} not moved by {k}"))?;
        }
    }
    Ok(())
}

fn table_linearizer() -> Check {
    let got = linearize("rank|nation\n1|SWE").map_err(|e| e.to_string())?;
    ensure(got == "rank: 1; nation: SWE", || format!("got {got:?}"))?;
    match load_dataset(fixtures_dir().join("ragged_table.jsonl"), TaskId::TableQa) {
        Err(Error::Rejected { index: 2, message }) if message.contains("row 2") => Ok(()),
        other => Err(format!("ragged fixture: {other:?}")),
    }
}

fn metrics_tolerances() -> Check {
    let x = [0.3, 1.5, -2.0, 4.25, 0.0, 7.5];
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let same = pearson(&x, &x).map_err(|e| e.to_string())?;
    ensure((same - 1.0).abs() <= PEARSON_EXACT_TOL, || format!("pearson(x,x) = {same}"))?;
    let opposite = pearson(&x, &neg).map_err(|e| e.to_string())?;
    ensure((opposite + 1.0).abs() <= PEARSON_EXACT_TOL, || format!("pearson(x,-x) = {opposite}"))?;
    let hand = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).map_err(|e| e.to_string())?;
    ensure((hand - 0.98198).abs() <= PEARSON_HAND_TOL, || format!("hand case = {hand}"))?;
    let f1 = token_f1("jack smith", "jack");
    ensure((f1 - 2.0 / 3.0).abs() <= F1_TOL, || format!("token_f1 = {f1}"))
}

fn config(out: &Path, concurrency: usize, tasks: &[&str]) -> RunConfig {
    let overrides = Overrides {
        tasks: tasks.iter().map(|s| s.to_string()).collect(),
        methods: ALL_METHODS.iter().map(|s| s.to_string()).collect(),
        sample_size: Some(10),
        seed: Some(0),
        concurrency: Some(concurrency),
        data_dir: Some(fixtures_dir()),
        out_dir: Some(out.to_path_buf()),
        ..Overrides::default()
    };
    RunConfig::load(None, &overrides).expect("valid config")
}

fn report_digest(dir: &Path) -> Result<String, String> {
    let mut hasher = Sha256::new();
    for format in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown] {
        let path = dir.join(format!("report.{}", format.extension()));
        hasher.update(std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn run_to(out: &Path, concurrency: usize) -> Result<(Report, Duration), String> {
    let c = config(out, concurrency, &ALL_TASKS);
    let start = Instant::now();
    let outcome = run(&c).map_err(|e| e.to_string())?;
    write_outputs(&c, &outcome).map_err(|e| e.to_string())?;
    Ok((outcome.report, start.elapsed()))
}

fn echo_gold_end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (report, took) = run_to(&dir.path().join("a"), 4)?;
    ensure(took < ECHO_RUN_BUDGET, || format!("took {took:?}"))?;
    ensure(report.cells.len() == ALL_TASKS.len() * ALL_METHODS.len(), || {
        format!("{} cells", report.cells.len())
    })?;
    for cell in &report.cells {
        ensure(cell.status == CellStatus::Ok && cell.missed == 0 && cell.scored == 10, || {
            format!("cell {}/{}: {cell:?}", cell.task_id, cell.method)
        })?;
    }
    for row in &report.rows {
        let want = matches!(row.metric.as_str(), "accuracy" | "em" | "f1" | "macro_f1") || row.metric.starts_with("pearson");
        ensure(want && (row.value - 1.0).abs() <= SCORE_TOL, || {
            format!("{}/{} {} = {}", row.task_id, row.method, row.metric, row.value)
        })?;
    }
    for task in ALL_TASKS {
        ensure(report.rows.iter().any(|r| r.task_id == task), || format!("no rows for {task}"))?;
    }
    let first = report_digest(&dir.path().join("a"))?;
    run_to(&dir.path().join("b"), 4)?;
    let second = report_digest(&dir.path().join("b"))?;
    ensure(first == second, || format!("digests differ: {first} vs {second}"))
}

fn concurrency_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_to(&dir.path().join("c1"), 1)?;
    run_to(&dir.path().join("c8"), 8)?;
    let (a, b) = (report_digest(&dir.path().join("c1"))?, report_digest(&dir.path().join("c8"))?);
    ensure(a == b, || format!("concurrency 1 {a} vs 8 {b}"))
}

fn delta_formatting() -> Check {
    let meta = ReportMeta {
        seed: 0,
        model: "m".into(),
        conversion_model: "m".into(),
        sample_size: 10,
        repeats: 1,
        resample_repeats: true,
        tasks: vec!["arc".into()],
        methods: vec!["zs".into(), "s2l-sub (tool)".into()],
    };
    let row = |method: &str, value: f64| ScoreRow {
        task_id: "arc".into(),
        method: method.into(),
        metric: "accuracy".into(),
        value,
        n: 10,
        repeat_index: 0,
    };
    let cell = |method: &str| CellSummary {
        task_id: "arc".into(),
        method: method.into(),
        repeat_index: 0,
        n: 10,
        scored: 10,
        missed: 0,
        errored: 0,
        status: CellStatus::Ok,
        error: None,
        undefined: Vec::new(),
    };
    let report = Report::assemble(
        meta,
        vec![row("zs", 0.597), row("s2l-sub (tool)", 0.816)],
        vec![cell("zs"), cell("s2l-sub (tool)")],
    );
    let md = report.to_markdown();
    ensure(md.contains("| s2l-sub (tool) | 81.6 (+21.9) |"), || md.clone())?;
    ensure(md.contains("| zs | 59.7 |"), || md)
}

fn live_smoke() -> Check {
    let stub = Stub::start(|_, _| (200, completion("The answer is )")));
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cache_dir = dir.path().join("cache");
    let mut c = config(&dir.path().join("live"), 4, &["dyck"]);
    c.cache_dir = Some(cache_dir.clone());
    c.backend = BackendSpec::Live {
        endpoint: stub.url.clone(),
        token_env: "UNUSED".into(),
    };
    let cache = ResponseCache::open(&cache_dir).map_err(|e| e.to_string())?;
    let live = LiveBackend::new(stub.url.clone(), "stub-token")
        .map_err(|e| e.to_string())?
        .with_backoff(Duration::from_millis(1))
        .with_cache(cache);
    let outcome = run_with_backend(&c, &Backend::Live(live), false).map_err(|e| e.to_string())?;
    write_outputs(&c, &outcome).map_err(|e| e.to_string())?;
    ensure(outcome.report.cells.iter().all(|cell| cell.status == CellStatus::Ok), || {
        format!("{:?}", outcome.report.cells)
    })?;
    let stored = ResponseCache::open(&cache_dir).and_then(|c| c.len()).map_err(|e| e.to_string())?;
    ensure(stored > 0 && stub.calls() == stored, || format!("{stored} cached, {} calls", stub.calls()))?;

    c.out_dir = dir.path().join("replay");
    c.backend = BackendSpec::Replay { strict: true };
    let replayed = run(&c).map_err(|e| e.to_string())?;
    write_outputs(&c, &replayed).map_err(|e| e.to_string())?;
    for format in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown] {
        let name = format!("report.{}", format.extension());
        let a = std::fs::read(dir.path().join("live").join(&name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.path().join("replay").join(&name)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{name} differs after replay"))?;
    }
    Ok(())
}

fn main() {
    let checks: [(&str, fn() -> Check); 10] = [
        ("converter round trip", converter_round_trip),
        ("bracket bijection", bracket_bijection),
        ("dyck oracle soundness", dyck_oracle_soundness),
        ("shift oracle", shift_oracle_check),
        ("table linearizer", table_linearizer),
        ("metrics", metrics_tolerances),
        ("echo-gold end-to-end", echo_gold_end_to_end),
        ("concurrency determinism", concurrency_determinism),
        ("delta formatting", delta_formatting),
        ("live smoke (loopback endpoint)", live_smoke),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(()) => println!("PASS  {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
