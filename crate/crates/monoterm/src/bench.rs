//! Corpus runs: one row per `.loop` file plus a T/NT/TO/M summary.

use std::fmt::Write;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::parse::parse;
use crate::report::{analyze_program, Report, RunOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Row {
    Analyzed(Report),
    Error { file: String, error: String },
}

impl Row {
    pub fn file(&self) -> &str {
        match self {
            Row::Analyzed(r) => &r.file,
            Row::Error { file, .. } => file,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub analyzed: usize,
    pub terminating: usize,
    pub nonterminating: usize,
    pub timeout: usize,
    pub unsupported: usize,
    pub errors: usize,
    pub oracle_failures: usize,
    pub decision_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

/// Analyzes every `.loop` file in `dir`, in file-name order.
pub fn bench_dir(dir: &Path, opts: &RunOptions) -> io::Result<BenchReport> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "loop"))
        .collect();
    paths.sort();

    let mut rows = Vec::with_capacity(paths.len());
    let mut summary = Summary::default();
    for path in paths {
        let file = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let program = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| parse(&text).map_err(|e| e.to_string()));
        match program {
            Ok(p) => {
                let (_, report) = analyze_program(&file, &p, opts);
                summary.analyzed += 1;
                summary.decision_ms += report.decision_ms;
                match report.category {
                    "T" => summary.terminating += 1,
                    "NT" => summary.nonterminating += 1,
                    "TO" => summary.timeout += 1,
                    _ => summary.unsupported += 1,
                }
                if report.oracle.as_ref().is_some_and(|o| o.failed()) {
                    summary.oracle_failures += 1;
                }
                rows.push(Row::Analyzed(report));
            }
            Err(error) => {
                summary.errors += 1;
                rows.push(Row::Error { file, error });
            }
        }
    }
    Ok(BenchReport { rows, summary })
}

pub fn render_table(report: &BenchReport) -> String {
    let width = report.rows.iter().map(|r| r.file().len()).max().unwrap_or(4).max(4);
    let mut out = String::new();
    writeln!(out, "{:<width$}  {:<7}  {:<16}  {:>10}  oracle", "file", "verdict", "rule", "ms").unwrap();
    for row in &report.rows {
        match row {
            Row::Analyzed(r) => {
                let oracle = r.oracle.as_ref().map_or("-", |o| o.agreement);
                let rule = r.rule.as_deref().unwrap_or("-");
                writeln!(
                    out,
                    "{:<width$}  {:<7}  {:<16}  {:>10.3}  {}",
                    r.file, r.category, rule, r.decision_ms, oracle
                )
                .unwrap();
            }
            Row::Error { file, error } => writeln!(out, "{file:<width$}  ERROR    {error}").unwrap(),
        }
    }
    let s = &report.summary;
    writeln!(out).unwrap();
    writeln!(
        out,
        "Total: {} analyzed, {} terminating, {} nonterminating, {} timeout, {} unsupported",
        s.analyzed, s.terminating, s.nonterminating, s.timeout, s.unsupported
    )
    .unwrap();
    writeln!(out, "{:>8}  {:>6}  {:>6}  {:>6}  {:>6}  {:>12}", "Total", "T", "NT", "TO", "M", "time (ms)")
        .unwrap();
    writeln!(
        out,
        "{:>8}  {:>6}  {:>6}  {:>6}  {:>6}  {:>12.3}",
        s.analyzed, s.terminating, s.nonterminating, s.timeout, s.unsupported, s.decision_ms
    )
    .unwrap();
    if s.errors > 0 {
        writeln!(out, "unreadable files: {}", s.errors).unwrap();
    }
    if s.oracle_failures > 0 {
        writeln!(out, "oracle disagreements: {}", s.oracle_failures).unwrap();
    }
    out
}
