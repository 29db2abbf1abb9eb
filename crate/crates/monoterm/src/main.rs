use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monoterm::bench::{bench_dir, render_table};
use monoterm::gen::{write_corpus, GenConfig, GenShape};
use monoterm::parse;
use monoterm::report::{analyze_program, render_text, RunOptions};
use monoterm_core::Verdict;

/// Exit codes: 0 terminating, 1 nonterminating (or bench oracle
/// disagreement), 2 unsupported, 3 input error.
#[derive(Parser)]
#[command(name = "monoterm", version, about = "Termination analysis of monotone linear integer loops")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide termination of one loop file.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Analyze every `.loop` file in a directory.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write a seeded random corpus of loop files.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
        #[arg(long, value_enum, default_value = "mix")]
        shape: GenShape,
        /// Largest magnitude of generated constants.
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(i64).range(1..))]
        bound: i64,
        /// Emit one multipath loop per table row first.
        #[arg(long)]
        cover_rows: bool,
        outdir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Cross-check each verdict against the concrete interpreter.
    #[arg(long)]
    oracle_check: bool,
    /// Interpreter step budget.
    #[arg(long, env = "MONOTERM_MAX_STEPS", default_value_t = 1_000_000)]
    max_steps: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions { oracle_check: self.oracle_check, max_steps: self.max_steps }
    }
}

const INPUT_ERROR: u8 = 3;

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT_ERROR } else { 0 });
        }
    };
    match cli.command {
        Command::Analyze { file, run } => analyze(file, &run),
        Command::Bench { dir, run } => bench(dir, &run),
        Command::Gen { seed, count, shape, bound, cover_rows, outdir } => {
            let cfg = GenConfig { seed, count: count as usize, shape, bound, cover_rows };
            match write_corpus(&cfg, &outdir) {
                Ok(paths) => {
                    emit(&format!("wrote {} files to {}\n", paths.len(), outdir.display()));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", outdir.display());
                    ExitCode::from(INPUT_ERROR)
                }
            }
        }
    }
}

fn analyze(file: PathBuf, run: &RunArgs) -> ExitCode {
    let program = match fs::read_to_string(&file) {
        Ok(text) => parse(&text),
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return ExitCode::from(INPUT_ERROR);
        }
    };
    let program = match program {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return ExitCode::from(INPUT_ERROR);
        }
    };
    let name = file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let (verdict, report) = analyze_program(&name, &program, &run.options());
    match run.format {
        Format::Text => emit(&render_text(&report, &verdict)),
        Format::Json => emit(&json_line(&report)),
    }
    ExitCode::from(match verdict {
        Verdict::Terminating { .. } => 0,
        Verdict::NonTerminating { .. } => 1,
        Verdict::Unsupported { .. } => 2,
    })
}

fn bench(dir: PathBuf, run: &RunArgs) -> ExitCode {
    let report = match bench_dir(&dir, &run.options()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", dir.display());
            return ExitCode::from(INPUT_ERROR);
        }
    };
    match run.format {
        Format::Text => emit(&render_table(&report)),
        Format::Json => emit(&json_line(&report.rows)),
    }
    if report.summary.oracle_failures > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
