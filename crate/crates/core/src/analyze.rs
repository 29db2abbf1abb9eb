use alloc::string::ToString;

use crate::classify::classify;
use crate::diagonal::{decide_diagonal, DiagonalLoop};
use crate::model::{eval_guard, LoopProgram, Shape};
use crate::multipath::{decide_multipath, MultiPathLoop};
use crate::single::decide_single;
use crate::verdict::Verdict;
use crate::AnalysisError;

/// Iteration cap for the search procedures.
pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Analyzer {
    pub search_budget: u64,
}

impl Default for Analyzer {
    fn default() -> Self {
        Analyzer { search_budget: DEFAULT_SEARCH_BUDGET }
    }
}

impl Analyzer {
    /// Analyzes `p`, reporting every error as [`Verdict::Unsupported`].
    pub fn analyze(&self, p: &LoopProgram) -> Verdict {
        self.try_analyze(p).unwrap_or_else(|e| Verdict::unsupported(e.to_string()))
    }

    pub fn try_analyze(&self, p: &LoopProgram) -> Result<Verdict, AnalysisError> {
        p.validate()?;
        if !eval_guard(&p.guard(), &p.init)? {
            return Ok(Verdict::terminating(0));
        }
        match &p.shape {
            Shape::SinglePath { guard, update } => {
                let x0 = p.initial(&guard.var)?;
                Ok(decide_single(guard, &classify(update, x0)?, x0))
            }
            Shape::Diagonal { lhs_update, rhs_update, .. } => {
                let d = DiagonalLoop::from_program(p)?.expect("diagonal shape");
                let cx = classify(lhs_update, &d.x0)?;
                let cy = classify(rhs_update, &d.y0)?;
                decide_diagonal(&d, &cx, &cy, self.search_budget)
            }
            Shape::MultiPath { .. } => {
                let m = MultiPathLoop::from_program(p)?.expect("multipath shape");
                decide_multipath(&m, self.search_budget)
            }
        }
    }
}

/// Analyzes `p` with the default search budget.
pub fn analyze(p: &LoopProgram) -> Verdict {
    Analyzer::default().analyze(p)
}
