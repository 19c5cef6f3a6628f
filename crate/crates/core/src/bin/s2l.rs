use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use s2l::converters::{
    describe_sequence, emoji_name, format_sequence, linearize, lookup_translate, parse_sequence, render_brackets,
    BracketTable, NameTable,
};
use s2l::error::{Error, Result};
use s2l::runner::{run, write_outputs, Overrides, RunConfig};
use s2l::tasks::{dyck_oracle, shift_oracle};

#[derive(Parser)]
#[command(name = "s2l", version, about = "Symbol-to-language conversion and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an evaluation matrix and write reports.
    Run(RunArgs),
    /// Convert symbols read from a file (one item per line; tables whole).
    Convert {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Input file, `-` for stdin.
        #[arg(long = "in")]
        input: PathBuf,
        /// Lookup table (TSV) for `lookup`; defaults to the bundled SMILES table.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Compute gold answers: Dyck lines hold a prefix, ARC lines `<sequence> <k>`.
    Oracle {
        #[arg(long, value_enum)]
        task: OracleTask,
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Parser)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "task")]
    tasks: Vec<String>,
    /// zs, zsc, s2l-sub, s2l-cat, optionally with `:model` or `:tool`.
    #[arg(long = "method")]
    methods: Vec<String>,
    #[arg(long)]
    conversion: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// mock, live or replay.
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "n")]
    sample_size: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    concurrency: Option<usize>,
    #[arg(long = "out")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Replay misses count as missed answers instead of failing the cell.
    #[arg(long)]
    lenient_replay: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sequence,
    Brackets,
    Table,
    Emoji,
    Lookup,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleTask {
    Arc,
    Dyck,
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Io { path: path.into(), source: e })?;
        return Ok(text);
    }
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty())
}

fn convert(kind: Kind, input: &Path, table: Option<&Path>) -> Result<()> {
    let text = read_input(input)?;
    if let Kind::Table = kind {
        println!("{}", linearize(&text)?);
        return Ok(());
    }
    let names = match (kind, table) {
        (Kind::Lookup, Some(p)) => NameTable::load(p, true)?,
        (Kind::Lookup, None) => NameTable::bundled_smiles(),
        _ => NameTable::bundled_emoji(),
    };
    for line in lines(&text) {
        let out = match kind {
            Kind::Sequence => describe_sequence(&parse_sequence(line)?)?,
            Kind::Brackets => render_brackets(line, BracketTable::Canonical)?,
            Kind::Emoji => emoji_name(line, &names)?,
            Kind::Lookup => lookup_translate(line, &names)?,
            Kind::Table => unreachable!(),
        };
        println!("{out}");
    }
    Ok(())
}

fn oracle(task: OracleTask, input: &Path) -> Result<()> {
    let text = read_input(input)?;
    for line in lines(&text) {
        match task {
            OracleTask::Dyck => println!("{}", dyck_oracle(line)?),
            OracleTask::Arc => {
                let (seq, k) = line
                    .rsplit_once(char::is_whitespace)
                    .ok_or_else(|| Error::Argument(format!("expected `<sequence> <k>`, got {line:?}")))?;
                let k: usize = k
                    .parse()
                    .map_err(|_| Error::Argument(format!("bad shift {k:?}")))?;
                println!("{}", format_sequence(&shift_oracle(&parse_sequence(seq.trim())?, k)?));
            }
        }
    }
    Ok(())
}

fn run_command(args: RunArgs) -> std::result::Result<i32, Error> {
    let overrides = Overrides {
        tasks: args.tasks,
        methods: args.methods,
        conversion: args.conversion,
        model: args.model,
        backend: args.backend,
        seed: args.seed,
        sample_size: args.sample_size,
        repeats: args.repeats,
        concurrency: args.concurrency,
        out_dir: args.out_dir,
        cache_dir: args.cache_dir,
        data_dir: args.data_dir,
        replay_strict: args.lenient_replay.then_some(false),
    };
    let config = RunConfig::load(args.config.as_deref(), &overrides)?;
    let outcome = run(&config)?;
    for path in write_outputs(&config, &outcome)? {
        eprintln!("wrote {}", path.display());
    }
    for cell in outcome.report.cells.iter().filter(|c| c.error.is_some()) {
        eprintln!(
            "failed: {} / {} / repeat {}: {}",
            cell.task_id,
            cell.method,
            cell.repeat_index,
            cell.error.as_deref().unwrap_or_default()
        );
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run_command(args),
        Command::Convert { kind, input, table } => convert(kind, &input, table.as_deref()).map(|_| 0),
        Command::Oracle { task, input } => oracle(task, &input).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
