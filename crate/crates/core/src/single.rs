//! Single-path loops `while (x ~ c) { x := f(x); }`.

use alloc::format;
use alloc::string::String;
use alloc::vec;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use crate::classify::{ClassKind, Direction, MonotoneClass};
use crate::model::{Bound, IntVal, RelOp};
use crate::verdict::{Conjunct, Disjunct, RuleId, Verdict, Witness};

pub(crate) fn conjunct(label: impl Into<String>, holds: bool) -> Conjunct {
    Conjunct { label: label.into(), holds: Some(holds) }
}

/// Smallest `n >= 1` with `x0 + n*v` outside `guard`, for a step pointing at
/// the guard's bound. `x0` must satisfy the guard.
pub(crate) fn linear_exit_iterations(guard: &Bound, x0: &IntVal, v: &IntVal) -> Option<u64> {
    // first value that violates the guard, approached from inside
    let target = match guard.op {
        RelOp::Lt => guard.bound.clone(),
        RelOp::Le => &guard.bound + 1,
        RelOp::Gt => guard.bound.clone(),
        RelOp::Ge => &guard.bound - 1,
    };
    let distance = (target - x0).abs();
    distance.div_ceil(&v.abs()).to_u64()
}

/// Decides a single-path loop for the initial value `x0` of the guarded variable.
pub fn decide_single(guard: &Bound, cls: &MonotoneClass, x0: &IntVal) -> Verdict {
    if !guard.holds_at(x0) {
        return Verdict::terminating(0);
    }
    match (&cls.kind, cls.direction) {
        (ClassKind::Constant { b }, _) => {
            if guard.holds_at(b) {
                Verdict::NonTerminating {
                    rule: RuleId::ConstantFixpoint,
                    witness: Witness::Formula(vec![Disjunct {
                        conjuncts: vec![conjunct("x0 |= phi", true), conjunct(format!("b={b} |= phi"), true)],
                    }]),
                }
            } else {
                Verdict::terminating(1)
            }
        }
        (kind, dir) => {
            let toward_bound = match dir {
                Direction::Up => guard.op.bounds_above(),
                Direction::Down => guard.op.bounds_below(),
                Direction::Flat => false,
            };
            if toward_bound {
                let iterations = match kind {
                    ClassKind::Ra { v } => linear_exit_iterations(guard, x0, v),
                    _ => exponential_exit_iterations(guard, &cls.update(), x0),
                };
                Verdict::Terminating { iterations }
            } else {
                let movement = match dir {
                    Direction::Up => "s increasing && phi bounded below",
                    _ => "s decreasing && phi bounded above",
                };
                Verdict::NonTerminating {
                    rule: RuleId::MovesAway,
                    witness: Witness::Formula(vec![Disjunct {
                        conjuncts: vec![conjunct("x0 |= phi", true), conjunct(movement, true)],
                    }]),
                }
            }
        }
    }
}

/// Exponential sequences leave any bound after logarithmically many steps,
/// so the count is found by stepping.
fn exponential_exit_iterations(guard: &Bound, upd: &crate::model::Update, x0: &IntVal) -> Option<u64> {
    let mut x = x0.clone();
    for n in 1..=4096u64 {
        x = upd.apply(&x);
        if !guard.holds_at(&x) {
            return Some(n);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::model::Update;
    use proptest::prelude::*;

    fn int(v: i64) -> IntVal {
        IntVal::from(v)
    }

    fn ra(v: i64) -> MonotoneClass {
        classify(&Update::additive(v), &int(0)).unwrap()
    }

    #[test]
    fn moves_away_examples() {
        let v = decide_single(&Bound::new("x", RelOp::Ge, 5), &ra(-1), &int(7));
        assert_eq!(v, Verdict::terminating(3));

        let v = decide_single(&Bound::new("x", RelOp::Ge, 0), &ra(1), &int(0));
        assert_eq!(v.rule(), Some(&RuleId::MovesAway));

        let v = decide_single(&Bound::new("x", RelOp::Gt, 0), &ra(1), &int(0));
        assert_eq!(v, Verdict::terminating(0));
    }

    #[test]
    fn constant_class() {
        // value pinned at -3 < 100 after the first step
        let cls = classify(&Update::constant(-3), &int(5)).unwrap();
        let v = decide_single(&Bound::new("x", RelOp::Lt, 100), &cls, &int(5));
        assert_eq!(v.rule(), Some(&RuleId::ConstantFixpoint));

        let cls = classify(&Update::constant(200), &int(5)).unwrap();
        let v = decide_single(&Bound::new("x", RelOp::Lt, 100), &cls, &int(5));
        assert_eq!(v, Verdict::terminating(1));
    }

    #[test]
    fn exponential_counts() {
        // 3, 6, 12, 24, 48, 96, 192
        let cls = classify(&Update::new(2, 0), &int(3)).unwrap();
        let v = decide_single(&Bound::new("x", RelOp::Le, 100), &cls, &int(3));
        assert_eq!(v, Verdict::terminating(6));
    }

    proptest! {
        #[test]
        fn ra_shift_invariance(x0 in -50i64..=50, c in -50i64..=50, v in -50i64..=50, k in -100i64..=100, op in 0usize..4) {
            prop_assume!(v != 0);
            let op = RelOp::ALL[op];
            let cls = ra(v);
            let a = decide_single(&Bound::new("x", op, c), &cls, &int(x0));
            let b = decide_single(&Bound::new("x", op, c + k), &cls, &int(x0 + k));
            prop_assert_eq!(a, b);
        }
    }
}
