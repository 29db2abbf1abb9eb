//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use monoterm::bench::{bench_dir, render_table, Row};
use monoterm::gen::{write_corpus, GenConfig, GenShape, Sampler};
use monoterm::parse;
use monoterm::report::{analyze_program, millis, RunOptions};
use monoterm_core::multipath::psi::{psi_a, psi_prime_a};
use monoterm_core::multipath::{case_row, MultiPathLoop};
use monoterm_core::{
    agreement, analyze, classify, run, run_with, Agreement, AnalysisError, Analyzer, IntVal, LoopProgram,
    OracleConfig, OracleResult, RelOp, RuleId, Shape, TraceState, VarName, Verdict, Witness,
    DEFAULT_SEARCH_BUDGET,
};
use tempfile::TempDir;

const ESCAPE_TOWARD: &str =
    "init x = 15; while (x >= 5) { if (x >= 10) { x := x + 1; } else { x := x - 1; } }";
const SWITCH_CYCLE: &str = "init x = 3; while (x <= 10) { if (x <= 5) { x := x + 2; } else { x := x - 3; } }";

const PER_GROUP: usize = 200;
const ORACLE_STEPS: u64 = 1_000_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn ints(vs: &[i64]) -> Vec<IntVal> {
    vs.iter().map(|&v| IntVal::from(v)).collect()
}

fn escape_toward_bound() -> Outcome {
    let p = parse(ESCAPE_TOWARD).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let v = analyze(&p);
    let ms = millis(start.elapsed());
    ensure!(v.rule() == Some(&RuleId::CaseRow { row: 17 }), "verdict {v:?}");
    let Some(Witness::Formula(ds)) = v.witness() else { return Err(format!("witness {v:?}")) };
    ensure!(ds.iter().any(|d| d.holds() && d.conjuncts.len() == 2), "formula {ds:?}");
    ensure!(ms < 10.0, "took {ms} ms");
    Ok(format!("NONTERMINATING rule=T3-row17 in {ms:.3} ms"))
}

fn switch_cycle() -> Outcome {
    let p = parse(SWITCH_CYCLE).map_err(|e| e.to_string())?;
    let v = analyze(&p);
    ensure!(v.rule().is_some_and(|r| r.to_string() == "T3-row21-alg3"), "verdict {v:?}");
    ensure!(v.witness() == Some(&Witness::Cycle(ints(&[3, 5, 7, 4, 6]))), "witness {v:?}");
    let oracle = run(&p, ORACLE_STEPS);
    let expected = OracleResult::CycleDetected { entry: TraceState(ints(&[3])), period: 5 };
    ensure!(oracle == expected, "oracle {oracle:?}");
    Ok("cycle [3, 5, 7, 4, 6] back to 3, oracle period 5".into())
}

fn first_falsifier(d: i64, c1: i64, step: i64, op: RelOp) -> i64 {
    let mut x = d;
    while op.holds(&IntVal::from(x), &IntVal::from(c1)) {
        x += step;
    }
    x
}

fn psi_exhaustive() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for d in -60i64..=60 {
        for c1 in -20i64..=20 {
            for v in 1i64..=12 {
                for op in RelOp::ALL {
                    if !op.holds(&IntVal::from(d), &IntVal::from(c1)) {
                        continue;
                    }
                    let (got, step) = if op.bounds_above() {
                        (psi_a(&d.into(), &c1.into(), &v.into(), op), v)
                    } else {
                        (psi_prime_a(&d.into(), &c1.into(), &v.into(), op), -v)
                    };
                    let want = first_falsifier(d, c1, step, op);
                    ensure!(
                        got == Ok(IntVal::from(want)),
                        "d={d} c1={c1} v={v} op={op:?}: {got:?} != {want}"
                    );
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} cases exact in {:.0} ms", millis(start.elapsed())))
}

/// Oracle agreement at the full step budget; a finite orbit must show as a cycle.
fn confirm(p: &LoopProgram, v: &Verdict, label: &str) -> Result<(), String> {
    let cfg = OracleConfig { max_steps: ORACLE_STEPS, ..OracleConfig::default() };
    let oracle = run_with(p, &cfg);
    match agreement(p, v, &oracle) {
        Agreement::Pass => {}
        Agreement::PassUnconfirmed { divergence_consistent: true } => {}
        other => return Err(format!("{label}: {other:?} for {p:?}")),
    }
    if let Some(Witness::Cycle(values)) = v.witness() {
        ensure!(
            matches!(oracle, OracleResult::CycleDetected { period, .. } if period as usize == values.len()),
            "{label}: witness {values:?}, oracle {oracle:?}"
        );
    }
    Ok(())
}

fn class_name(upd: &monoterm_core::Update, x0: &IntVal) -> Option<String> {
    let c = classify(upd, x0).ok()?;
    Some(format!("{}{:?}", c.kind.short_name(), c.direction))
}

fn table_agreement() -> Outcome {
    let start = Instant::now();
    let mut s = Sampler::new(7, 20);
    for row in 1..=36u8 {
        for _ in 0..PER_GROUP {
            let p = s.multipath_row(row);
            let m = MultiPathLoop::from_program(&p).map_err(|e| e.to_string())?.expect("multipath");
            ensure!(case_row(&m) == Ok(Some(row)), "row {row} sample lands elsewhere");
            let v = analyze(&p);
            ensure!(!matches!(v, Verdict::Unsupported { .. }), "row {row}: {v:?}");
            confirm(&p, &v, &format!("row {row}"))?;
        }
    }

    let mut pairs: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut singles: BTreeMap<String, usize> = BTreeMap::new();
    let mut attempts = 0u64;
    while pairs.len() < 49 || pairs.values().any(|&n| n < PER_GROUP) {
        attempts += 1;
        ensure!(attempts < 5_000_000, "class pairs short of samples: {pairs:?}");
        let p = s.diagonal();
        let Shape::Diagonal { lhs_update, rhs_update, .. } = &p.shape else { unreachable!() };
        let (x0, y0) = (&p.init[&VarName::from("x")], &p.init[&VarName::from("y")]);
        let (Some(cx), Some(cy)) = (class_name(lhs_update, x0), class_name(rhs_update, y0)) else { continue };
        let n = pairs.entry((cx.clone(), cy)).or_default();
        if *n >= PER_GROUP {
            continue;
        }
        *n += 1;
        let v = analyze(&p);
        ensure!(!matches!(v, Verdict::Unsupported { .. }), "diagonal: {v:?} for {p:?}");
        confirm(&p, &v, "diagonal")?;

        let q = s.single();
        let Shape::SinglePath { update, .. } = &q.shape else { unreachable!() };
        if let Some(c) = class_name(update, &q.init[&VarName::from("x")]) {
            let n = singles.entry(c).or_default();
            if *n < PER_GROUP {
                *n += 1;
                let v = analyze(&q);
                ensure!(!matches!(v, Verdict::Unsupported { .. }), "single: {v:?} for {q:?}");
                confirm(&q, &v, "single")?;
            }
        }
    }
    Ok(format!(
        "36 rows and {} diagonal class pairs x {PER_GROUP}, {} single-path, all agree in {:.1} s",
        pairs.len(),
        singles.values().sum::<usize>(),
        start.elapsed().as_secs_f64()
    ))
}

fn is_search(v: &Verdict) -> bool {
    matches!(v.rule(), Some(RuleId::FixedPoint { .. } | RuleId::DiagonalSearch(_)))
}

fn timing_envelope() -> Outcome {
    let cfg = GenConfig { seed: 7, count: 1000, shape: GenShape::Mix, bound: 1_000_000, cover_rows: false };
    let corpus = monoterm::gen::generate(&cfg);
    let analyzer = Analyzer { search_budget: DEFAULT_SEARCH_BUDGET };
    let mut times = Vec::new();
    let mut searches = 0;
    for g in &corpus {
        let start = Instant::now();
        let result = analyzer.try_analyze(&g.program);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match result {
            Ok(v) if is_search(&v) => searches += 1,
            Ok(_) => times.push(ms),
            Err(e @ AnalysisError::SearchBudgetExceeded { .. }) => return Err(format!("{}: {e}", g.name)),
            Err(_) => times.push(ms),
        }
    }
    times.sort_by(f64::total_cmp);
    let median = times[times.len() / 2];
    ensure!(median < 10.0, "median {median} ms");
    Ok(format!("median {median:.4} ms over {} loops, {searches} search instances within budget", times.len()))
}

fn corpus(seed: u64, count: usize) -> Result<TempDir, String> {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let cfg = GenConfig { seed, count, shape: GenShape::Mix, bound: 20, cover_rows: true };
    write_corpus(&cfg, dir.path()).map_err(|e| e.to_string())?;
    Ok(dir)
}

fn bench_format() -> Outcome {
    let dir = corpus(11, 120)?;
    std::fs::write(dir.path().join("broken.loop"), "init x = 1; while (x >").map_err(|e| e.to_string())?;
    let opts = RunOptions { oracle_check: false, max_steps: ORACLE_STEPS };
    let report = bench_dir(dir.path(), &opts).map_err(|e| e.to_string())?;
    let s = &report.summary;
    ensure!(s.analyzed + s.errors == report.rows.len(), "{s:?}");
    ensure!(s.terminating + s.nonterminating + s.timeout + s.unsupported == s.analyzed, "{s:?}");
    ensure!(s.errors == 1, "{s:?}");
    let total: f64 =
        report.rows.iter().map(|r| if let Row::Analyzed(r) = r { r.decision_ms } else { 0.0 }).sum();
    ensure!((total - s.decision_ms).abs() < 1e-6, "time {total} vs {}", s.decision_ms);
    let table = render_table(&report);
    let header = table.lines().find(|l| l.trim_start().starts_with("Total ")).unwrap_or("");
    let cols: Vec<&str> = header.split_whitespace().collect();
    ensure!(cols.starts_with(&["Total", "T", "NT", "TO", "M"]), "header {header:?}");
    Ok(format!(
        "Total {} = T {} + NT {} + TO {} + M {}, 1 unreadable",
        s.analyzed, s.terminating, s.nonterminating, s.timeout, s.unsupported
    ))
}

fn determinism() -> Outcome {
    let dir = corpus(5, 300)?;
    let opts = RunOptions { oracle_check: true, max_steps: ORACLE_STEPS };
    let strip = |rows: Vec<Row>| -> Vec<Row> {
        rows.into_iter()
            .map(|r| match r {
                Row::Analyzed(mut r) => {
                    r.decision_ms = 0.0;
                    Row::Analyzed(r)
                }
                e => e,
            })
            .collect()
    };
    let first = strip(bench_dir(dir.path(), &opts).map_err(|e| e.to_string())?.rows);
    let second = strip(bench_dir(dir.path(), &opts).map_err(|e| e.to_string())?.rows);
    ensure!(first == second, "runs differ");
    let failed = first
        .iter()
        .filter(|r| matches!(r, Row::Analyzed(r) if r.oracle.as_ref().is_some_and(|o| o.failed())))
        .count();
    ensure!(failed == 0, "{failed} oracle disagreements");
    // sanity: timing is measured but excluded
    let (_, r) = analyze_program("x", &parse(SWITCH_CYCLE).unwrap(), &opts);
    ensure!(r.decision_ms >= 0.0, "negative time");
    Ok(format!("{} rows identical across two oracle-checked runs", first.len()))
}

fn panic_message(e: &(dyn std::any::Any + Send)) -> String {
    let msg = e.downcast_ref::<String>().map(String::as_str).or_else(|| e.downcast_ref::<&str>().copied());
    format!("panicked: {}", msg.unwrap_or("?"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("escape toward the bound, row-17 formula under 10 ms", escape_toward_bound),
        ("switch cycle 3, 5, 7, 4, 6", switch_cycle),
        ("switch-point closed forms vs brute force", psi_exhaustive),
        ("rule table and class pairs vs oracle", table_agreement),
        ("median decision time on 1000 loops", timing_envelope),
        ("bench summary columns T/NT/TO/M", bench_format),
        ("bench determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome =
            panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| Err(panic_message(e.as_ref())));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
