//! Termination analysis for monotone linear integer loops.
//!
//! Given a loop in one of three shapes (single-path, diagonal guard, or a
//! two-branch multipath body) and concrete initial values, the deciders
//! return [`Verdict::Terminating`] or [`Verdict::NonTerminating`] together
//! with a rule id and a checkable witness. The [`oracle`] module runs loops
//! concretely with cycle detection and is used to cross-check verdicts.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

use alloc::string::String;
use core::fmt;

pub mod analyze;
pub mod classify;
pub mod diagonal;
pub mod model;
pub mod multipath;
pub mod oracle;
pub mod single;
pub mod verdict;

pub use analyze::{analyze, Analyzer, DEFAULT_SEARCH_BUDGET};
pub use classify::{classify, closed_form, ClassKind, Direction, MonotoneClass};
pub use model::{
    apply_update, eval_guard, Bound, Env, Gap, GuardAtom, IntVal, LoopProgram, RelOp, Shape, Update, VarName,
};
pub use oracle::{
    agreement, agreement_check, run, run_with, Agreement, OracleConfig, OracleResult, TraceState,
};
pub use verdict::{Conjunct, Disjunct, RuleId, SearchVariant, StoppingCondition, Verdict, Witness};

/// Errors raised while analysing a loop. These are reported as
/// [`Verdict::Unsupported`] by the top-level analyzer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnalysisError {
    UnboundVariable(VarName),
    /// The update's value sequence is neither strictly monotone nor constant.
    NonMonotone(String),
    /// Program shape outside the three supported forms.
    Shape(&'static str),
    /// A helper was called outside its documented domain.
    Precondition(&'static str),
    /// A search procedure ran out of iterations.
    SearchBudgetExceeded {
        iterations: u64,
    },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::UnboundVariable(v) => write!(f, "unbound variable `{v}`"),
            AnalysisError::NonMonotone(why) => write!(f, "non-monotone update: {why}"),
            AnalysisError::Shape(why) => write!(f, "unsupported loop shape: {why}"),
            AnalysisError::Precondition(why) => write!(f, "precondition violated: {why}"),
            AnalysisError::SearchBudgetExceeded { iterations } => {
                write!(f, "search budget exceeded after {iterations} iterations")
            }
        }
    }
}
