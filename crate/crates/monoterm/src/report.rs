use std::time::{Duration, Instant};

use monoterm_core::{
    agreement, run_with, Agreement, AnalysisError, Analyzer, IntVal, LoopProgram, OracleConfig, OracleResult,
    Verdict, Witness,
};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

/// Integers that fit `i64` become JSON numbers, larger ones decimal strings.
pub fn int_json(v: &IntVal) -> Value {
    match v.to_i64() {
        Some(n) => Value::from(n),
        None => Value::String(v.to_string()),
    }
}

pub fn witness_json(w: &Witness) -> Value {
    let ints = |vs: &[IntVal]| Value::Array(vs.iter().map(int_json).collect());
    match w {
        Witness::Cycle(vs) => json!({ "cycle": ints(vs) }),
        Witness::SwitchCycle(vs) => json!({ "switch_cycle": ints(vs) }),
        Witness::Formula(ds) => {
            let ds: Vec<Value> = ds
                .iter()
                .map(|d| {
                    let cs: Vec<Value> =
                        d.conjuncts.iter().map(|c| json!({ "label": c.label, "holds": c.holds })).collect();
                    json!({ "holds": d.holds(), "conjuncts": cs })
                })
                .collect();
            json!({ "formula": ds })
        }
        Witness::Divergence { iteration, condition } => json!({
            "divergence": { "iteration": iteration, "condition": format!("rows {}", condition.rows()) }
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub outcome: &'static str,
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<u64>,
    pub agreement: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<String>,
}

impl OracleReport {
    fn new(result: &OracleResult, agreed: &Agreement) -> Self {
        let (steps, period) = match result {
            OracleResult::TerminatedIn { steps } | OracleResult::BoundExhausted { steps, .. } => {
                (Some(*steps), None)
            }
            OracleResult::CycleDetected { period, .. } => (None, Some(*period)),
        };
        let (agreement, details) = match agreed {
            Agreement::Pass => ("pass", None),
            Agreement::PassUnconfirmed { divergence_consistent: true } => {
                ("pass_divergence_consistent", None)
            }
            Agreement::PassUnconfirmed { divergence_consistent: false } => ("pass_unconfirmed", None),
            Agreement::Fail { details } => ("fail", Some(details.clone())),
            Agreement::Inconclusive { .. } => ("inconclusive", None),
            Agreement::Skipped => ("skipped", None),
        };
        OracleReport { outcome: result.tag(), steps, period, agreement, details }
    }

    pub fn failed(&self) -> bool {
        self.agreement == "fail"
    }
}

/// One analyzed loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub file: String,
    pub verdict: &'static str,
    pub rule: Option<String>,
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub decision_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    /// `T`, `NT`, `TO` (search budget exhausted) or `M` (outside the analyzable forms).
    #[serde(skip)]
    pub category: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub oracle_check: bool,
    pub max_steps: u64,
}

pub fn millis(d: Duration) -> f64 {
    // microsecond precision
    (d.as_micros() as f64) / 1000.0
}

/// Analyzes `p`, timing the decision alone, and optionally cross-checks it.
pub fn analyze_program(file: &str, p: &LoopProgram, opts: &RunOptions) -> (Verdict, Report) {
    let start = Instant::now();
    let result = Analyzer::default().try_analyze(p);
    let elapsed = start.elapsed();
    let category = match &result {
        Ok(v) => v.tag(),
        Err(AnalysisError::SearchBudgetExceeded { .. }) => "TO",
        Err(_) => "M",
    };
    let verdict = result.unwrap_or_else(|e| Verdict::unsupported(e.to_string()));
    let oracle = opts.oracle_check.then(|| {
        let cfg = OracleConfig { max_steps: opts.max_steps, ..OracleConfig::default() };
        let r = run_with(p, &cfg);
        OracleReport::new(&r, &agreement(p, &verdict, &r))
    });
    let (name, rule, witness, iterations, reason) = match &verdict {
        Verdict::Terminating { iterations } => ("terminating", None, None, *iterations, None),
        Verdict::NonTerminating { rule, witness } => {
            ("nonterminating", Some(rule.to_string()), Some(witness_json(witness)), None, None)
        }
        Verdict::Unsupported { reason } => ("unsupported", None, None, None, Some(reason.clone())),
    };
    let report = Report {
        file: file.to_string(),
        verdict: name,
        rule,
        witness,
        iterations,
        reason,
        decision_ms: millis(elapsed),
        oracle,
        category,
    };
    (verdict, report)
}

/// Human-readable report.
pub fn render_text(r: &Report, verdict: &Verdict) -> String {
    let mut out = match verdict {
        Verdict::Terminating { iterations: Some(n) } => format!("TERMINATING iterations={n}\n"),
        Verdict::Terminating { iterations: None } => "TERMINATING\n".to_string(),
        Verdict::NonTerminating { rule, witness } => {
            format!("NONTERMINATING rule={rule}\nwitness: {witness}\n")
        }
        Verdict::Unsupported { reason } => format!("UNSUPPORTED {reason}\n"),
    };
    out.push_str(&format!("decision time: {:.3} ms\n", r.decision_ms));
    if let Some(o) = &r.oracle {
        let count = match (o.steps, o.period) {
            (Some(s), _) => format!(" steps={s}"),
            (_, Some(p)) => format!(" period={p}"),
            _ => String::new(),
        };
        out.push_str(&format!("oracle: {}{count} agreement={}\n", o.outcome, o.agreement));
        if let Some(d) = &o.details {
            out.push_str(&format!("  {d}\n"));
        }
    }
    out
}
