//! Fixed-point search over branch-switch values for the rows where both
//! branches leave their regions.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::model::IntVal;
use crate::AnalysisError;

use super::{psi::escape, Branch, MultiPathLoop};

/// Longest concrete orbit spelled out in a cycle witness.
pub const MAX_CYCLE_LISTING: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    /// The exit branch jumped to a value violating the loop guard.
    Exits,
    /// `jumps[0]` recurred; `jumps` are the switch values of the cycle in order.
    Cycle { jumps: Vec<IntVal> },
}

/// Walks branch-switch values from `p.x0`. Only `exit` can leave the loop
/// guard, so the guard is checked after its jumps alone.
pub fn fixed_point_search(
    p: &MultiPathLoop,
    exit: Branch,
    budget: u64,
) -> Result<SearchOutcome, AnalysisError> {
    let mut passed: BTreeSet<IntVal> = BTreeSet::new();
    let mut order: Vec<IntVal> = Vec::new();
    let mut val = p.x0.clone();
    for _ in 0..budget {
        let branch = p.branch_at(&val);
        let next = escape(&val, p.update(branch), &p.region(branch))?;
        passed.insert(val.clone());
        order.push(val);
        if passed.contains(&next) {
            let start = order.iter().position(|v| *v == next).unwrap_or(0);
            return Ok(SearchOutcome::Cycle { jumps: order.split_off(start) });
        }
        if branch == exit {
            if !p.guard.holds_at(&next) {
                return Ok(SearchOutcome::Exits);
            }
        } else {
            debug_assert!(p.guard.holds_at(&next), "non-exit branch left the guard");
        }
        val = next;
    }
    Err(AnalysisError::SearchBudgetExceeded { iterations: budget })
}

/// Concrete values of the cycle through `start`, or `None` if the orbit is
/// longer than [`MAX_CYCLE_LISTING`].
pub fn expand_cycle(p: &MultiPathLoop, start: &IntVal) -> Option<Vec<IntVal>> {
    let mut values = Vec::new();
    let mut x = start.clone();
    loop {
        values.push(x.clone());
        x = p.step(&x);
        if x == *start {
            return Some(values);
        }
        if values.len() >= MAX_CYCLE_LISTING {
            return None;
        }
    }
}
