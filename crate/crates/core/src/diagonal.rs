//! Single-path loops with a diagonal guard:
//! `while (x - y ~ c) { x := f1(x); y := f2(y); }`.
//!
//! Loops are first rewritten so the guard operator is `>` or `>=`. The rules
//! then work on the gap `x_n - y_n`: once it stops shrinking it never shrinks
//! again for the class pairs handled by the search, which is what makes a
//! stopping condition a proof of non-termination.

use alloc::format;
use alloc::vec;

use num_traits::Signed;

use crate::classify::{ClassKind, Direction, MonotoneClass};
use crate::model::{Bound, Gap, IntVal, LoopProgram, RelOp, Shape, Update, VarName};
use crate::single::{conjunct, linear_exit_iterations};
use crate::verdict::{Disjunct, RuleId, StoppingCondition, Verdict, Witness};
use crate::AnalysisError;

/// A diagonal loop together with the initial values of both variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalLoop {
    pub guard: Gap,
    pub lhs_update: Update,
    pub rhs_update: Update,
    pub x0: IntVal,
    pub y0: IntVal,
}

impl DiagonalLoop {
    /// The diagonal view of `p`, if it has that shape.
    pub fn from_program(p: &LoopProgram) -> Result<Option<Self>, AnalysisError> {
        let Shape::Diagonal { guard, lhs_update, rhs_update } = &p.shape else {
            return Ok(None);
        };
        Ok(Some(DiagonalLoop {
            guard: guard.clone(),
            lhs_update: lhs_update.clone(),
            rhs_update: rhs_update.clone(),
            x0: p.initial(&guard.lhs)?.clone(),
            y0: p.initial(&guard.rhs)?.clone(),
        }))
    }

    fn holds(&self, x: &IntVal, y: &IntVal) -> bool {
        self.guard.holds_at(x, y)
    }
}

/// Rewrites `x - y < c` as `y - x > -c` (and `<=` as `>=`), swapping the
/// roles of the two variables. Loops already using `>`/`>=` are unchanged.
pub fn normalize_direction(p: &DiagonalLoop) -> DiagonalLoop {
    if p.guard.op.bounds_below() {
        return p.clone();
    }
    DiagonalLoop {
        guard: Gap {
            lhs: p.guard.rhs.clone(),
            rhs: p.guard.lhs.clone(),
            op: p.guard.op.converse(),
            bound: -&p.guard.bound,
        },
        lhs_update: p.rhs_update.clone(),
        rhs_update: p.lhs_update.clone(),
        x0: p.y0.clone(),
        y0: p.x0.clone(),
    }
}

fn formula(conjuncts: alloc::vec::Vec<crate::verdict::Conjunct>) -> Witness {
    Witness::Formula(vec![Disjunct { conjuncts }])
}

/// Decides a diagonal loop. `cls_x`/`cls_y` classify the updates of
/// `guard.lhs`/`guard.rhs` from their initial values.
pub fn decide_diagonal(
    p: &DiagonalLoop,
    cls_x: &MonotoneClass,
    cls_y: &MonotoneClass,
    budget: u64,
) -> Result<Verdict, AnalysisError> {
    let swapped = p.guard.op.bounds_above();
    let p = normalize_direction(p);
    let (cx, cy) = if swapped { (cls_y, cls_x) } else { (cls_x, cls_y) };

    if !p.holds(&p.x0, &p.y0) {
        return Ok(Verdict::terminating(0));
    }

    if matches!(cx.kind, ClassKind::Constant { .. }) || matches!(cy.kind, ClassKind::Constant { .. }) {
        return Ok(constant_rule(&p, cx, cy));
    }

    match (cx.direction, cy.direction) {
        (Direction::Up, Direction::Down) => {
            return Ok(Verdict::NonTerminating {
                rule: RuleId::DiagonalOpposite,
                witness: formula(vec![
                    conjunct("(x0, y0) |= phi", true),
                    conjunct("s1 increasing && s2 decreasing", true),
                ]),
            })
        }
        (Direction::Down, Direction::Up) => return Ok(Verdict::terminating(None)),
        _ => {}
    }
    let dir = cx.direction;

    match (&cx.kind, &cy.kind) {
        (ClassKind::Ra { v: v1 }, ClassKind::Ra { v: v2 }) => Ok(ra_ra_rule(v1, v2, dir, &p)),
        (ClassKind::Rg { u: u1 }, ClassKind::Rg { u: u2 }) => {
            rg_rg_rule(u1, u2, &p.x0, &p.y0, dir, &p, cx, cy, budget)
        }
        (ClassKind::Ra { .. }, _) => match dir {
            // the exponential side outruns the linear one
            Direction::Up => Ok(Verdict::terminating(None)),
            _ => search_decide(&p, cx, cy, StoppingCondition::LinearDownExpDown, budget),
        },
        (_, ClassKind::Ra { .. }) => match dir {
            Direction::Down => Ok(Verdict::terminating(None)),
            _ => search_decide(&p, cx, cy, StoppingCondition::ExpUpLinearUp, budget),
        },
        _ => {
            let stop = match dir {
                Direction::Up => StoppingCondition::BothExpUp,
                _ => StoppingCondition::BothExpDown,
            };
            search_decide(&p, cx, cy, stop, budget)
        }
    }
}

/// At least one side is constant: after one iteration that side never
/// changes again, so the gap moves with the other variable alone.
fn constant_rule(p: &DiagonalLoop, cx: &MonotoneClass, cy: &MonotoneClass) -> Verdict {
    let x1 = p.lhs_update.apply(&p.x0);
    let y1 = p.rhs_update.apply(&p.y0);
    if !p.holds(&x1, &y1) {
        return Verdict::terminating(1);
    }
    // direction of the gap from iteration 1 on
    let gap_dir = match (cx.direction, cy.direction) {
        (Direction::Flat, Direction::Flat) => Direction::Flat,
        (Direction::Flat, d) => d.reversed(),
        (d, _) => d,
    };
    match gap_dir {
        Direction::Down => Verdict::terminating(None),
        _ => Verdict::NonTerminating {
            rule: RuleId::DiagonalConstant,
            witness: formula(vec![
                conjunct("(x0, y0) |= phi", true),
                conjunct(format!("(x1, y1) = ({x1}, {y1}) |= phi"), true),
                conjunct("gap non-decreasing after iteration 1", true),
            ]),
        },
    }
}

/// Both updates additive and moving the same way: the gap is itself an
/// arithmetic progression with step `v1 - v2`.
pub fn ra_ra_rule(v1: &IntVal, v2: &IntVal, dir: Direction, p: &DiagonalLoop) -> Verdict {
    let nonterminating = match dir {
        Direction::Up => v1 >= v2,
        _ => v1.abs() <= v2.abs(),
    };
    if nonterminating {
        let rel = match dir {
            Direction::Up => "s1 up && s2 up && v1 >= v2",
            _ => "s1 down && s2 down && |v1| <= |v2|",
        };
        Verdict::NonTerminating {
            rule: RuleId::DiagonalRaRa,
            witness: formula(vec![conjunct("(x0, y0) |= phi", true), conjunct(rel, true)]),
        }
    } else {
        let gap = Bound::new(VarName::from("gap"), p.guard.op, p.guard.bound.clone());
        Verdict::Terminating { iterations: linear_exit_iterations(&gap, &(&p.x0 - &p.y0), &(v1 - v2)) }
    }
}

/// Both updates geometric and moving the same way.
///
/// With equal multipliers the gap is `(x0 - y0) * u^n`, so its sign decides.
/// When the faster side will eventually win but the gap can shrink first
/// (`u1 > u2` going up, `u1 < u2` going down), the search procedure decides.
#[allow(clippy::too_many_arguments)]
pub fn rg_rg_rule(
    u1: &IntVal,
    u2: &IntVal,
    x0: &IntVal,
    y0: &IntVal,
    dir: Direction,
    p: &DiagonalLoop,
    cx: &MonotoneClass,
    cy: &MonotoneClass,
    budget: u64,
) -> Result<Verdict, AnalysisError> {
    if u1 == u2 {
        return Ok(if x0 >= y0 {
            Verdict::NonTerminating {
                rule: RuleId::DiagonalRgRg,
                witness: formula(vec![
                    conjunct("(x0, y0) |= phi", true),
                    conjunct("u1 = u2 && x0 >= y0", true),
                ]),
            }
        } else {
            Verdict::terminating(None)
        });
    }
    match (dir, u1 > u2) {
        (Direction::Up, false) | (Direction::Down, true) => Ok(Verdict::terminating(None)),
        (Direction::Up, true) => search_decide(p, cx, cy, StoppingCondition::BothExpUp, budget),
        _ => search_decide(p, cx, cy, StoppingCondition::BothExpDown, budget),
    }
}

/// Steps both variables until the guard fails (terminating) or the stopping
/// condition certifies that the gap can no longer shrink (non-terminating).
///
/// The certificate is the printed stopping condition strengthened with
/// `x_{n+1} - x_n >= y_{n+1} - y_n`; the printed condition alone admits runs
/// whose gap keeps shrinking past the bound afterwards.
pub fn search_decide(
    p: &DiagonalLoop,
    cls_x: &MonotoneClass,
    cls_y: &MonotoneClass,
    stop: StoppingCondition,
    budget: u64,
) -> Result<Verdict, AnalysisError> {
    let p = normalize_direction(p);
    if !p.holds(&p.x0, &p.y0) {
        return Ok(Verdict::terminating(0));
    }
    let u1 = cls_x.kind.multiplier();
    let u2 = cls_y.kind.multiplier();
    let multipliers_ok = match stop {
        StoppingCondition::BothExpUp => u1 >= u2,
        StoppingCondition::BothExpDown => u1 <= u2,
        _ => true,
    };
    let (mut x, mut y) = (p.x0.clone(), p.y0.clone());
    for n in 1..=budget {
        x = p.lhs_update.apply(&x);
        y = p.rhs_update.apply(&y);
        if !p.holds(&x, &y) {
            return Ok(Verdict::terminating(n));
        }
        if !multipliers_ok {
            continue;
        }
        let dx = p.lhs_update.step_at(&x);
        let dy = p.rhs_update.step_at(&y);
        if dx >= dy {
            let iteration = match stop {
                StoppingCondition::LinearDownExpDown | StoppingCondition::BothExpDown => {
                    let nx = first_negative(&p.lhs_update, &x, n);
                    let ny = first_negative(&p.rhs_update, &y, n);
                    nx.max(ny)
                }
                _ => n,
            };
            return Ok(Verdict::NonTerminating {
                rule: RuleId::DiagonalSearch(stop),
                witness: Witness::Divergence { iteration, condition: stop },
            });
        }
    }
    Err(AnalysisError::SearchBudgetExceeded { iterations: budget })
}

/// First index `m >= n` at which a strictly decreasing sequence currently at
/// `value` (index `n`) is negative.
fn first_negative(upd: &Update, value: &IntVal, n: u64) -> u64 {
    if value.is_negative() {
        return n;
    }
    if upd.coeff == IntVal::from(1) {
        let step = upd.offset.abs();
        let k = value / &step + 1;
        return n + num_traits::ToPrimitive::to_u64(&k).unwrap_or(u64::MAX - n);
    }
    let mut x = value.clone();
    let mut m = n;
    while !x.is_negative() {
        x = upd.apply(&x);
        m += 1;
    }
    m
}

/// `x - y op c` as a guard; convenience for callers and tests.
pub fn diagonal(x: &str, y: &str, op: RelOp, c: i64) -> Gap {
    Gap::new(x, y, op, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::single::decide_single;
    use proptest::prelude::*;

    const BUDGET: u64 = 1_000_000;

    fn int(v: i64) -> IntVal {
        IntVal::from(v)
    }

    fn lp(op: RelOp, c: i64, f1: Update, f2: Update, x0: i64, y0: i64) -> DiagonalLoop {
        DiagonalLoop {
            guard: diagonal("x", "y", op, c),
            lhs_update: f1,
            rhs_update: f2,
            x0: int(x0),
            y0: int(y0),
        }
    }

    fn decide(p: &DiagonalLoop) -> Verdict {
        let cx = classify(&p.lhs_update, &p.x0).unwrap();
        let cy = classify(&p.rhs_update, &p.y0).unwrap();
        decide_diagonal(p, &cx, &cy, BUDGET).unwrap()
    }

    /// Plain execution, used as ground truth in this module's tests.
    fn simulate(p: &DiagonalLoop, steps: u64) -> Option<u64> {
        let (mut x, mut y) = (p.x0.clone(), p.y0.clone());
        for n in 0..steps {
            if !p.holds(&x, &y) {
                return Some(n);
            }
            x = p.lhs_update.apply(&x);
            y = p.rhs_update.apply(&y);
        }
        None
    }

    #[test]
    fn normalize_examples() {
        let p = lp(RelOp::Lt, 5, Update::additive(1), Update::additive(2), 0, 0);
        let n = normalize_direction(&p);
        assert_eq!(n.guard, diagonal("y", "x", RelOp::Gt, -5));
        assert_eq!(n.lhs_update, Update::additive(2));
        assert_eq!(n.x0, int(0));

        let p = lp(RelOp::Ge, 2, Update::additive(1), Update::additive(2), 0, 0);
        assert_eq!(normalize_direction(&p), p);
    }

    #[test]
    fn decide_examples() {
        let p = lp(RelOp::Gt, 0, Update::additive(2), Update::additive(1), 5, 1);
        assert_eq!(decide(&p).rule(), Some(&RuleId::DiagonalRaRa));

        let p = lp(RelOp::Gt, 0, Update::additive(1), Update::additive(2), 5, 1);
        assert_eq!(decide(&p), Verdict::terminating(4));
        assert_eq!(simulate(&p, 100), Some(4));

        let p = lp(RelOp::Ge, 0, Update::additive(-1), Update::new(2, 0), 10, -8);
        let v = decide(&p);
        assert_eq!(
            v,
            Verdict::NonTerminating {
                rule: RuleId::DiagonalSearch(StoppingCondition::LinearDownExpDown),
                witness: Witness::Divergence {
                    iteration: 11,
                    condition: StoppingCondition::LinearDownExpDown
                },
            }
        );
    }

    #[test]
    fn ra_ra_rule_examples() {
        let p = lp(RelOp::Gt, 0, Update::additive(3), Update::additive(3), 5, 1);
        assert!(ra_ra_rule(&int(3), &int(3), Direction::Up, &p).is_nonterminating());
        assert!(ra_ra_rule(&int(-2), &int(-5), Direction::Down, &p).is_nonterminating());
        assert!(ra_ra_rule(&int(-5), &int(-2), Direction::Down, &p).is_terminating());
    }

    fn rg(u: i64, x0: i64) -> MonotoneClass {
        classify(&Update::new(u, 0), &int(x0)).unwrap()
    }

    #[test]
    fn rg_rg_rule_examples() {
        let p = lp(RelOp::Gt, 0, Update::new(3, 0), Update::new(2, 0), 4, 2);
        let v =
            rg_rg_rule(&int(3), &int(2), &int(4), &int(2), Direction::Up, &p, &rg(3, 4), &rg(2, 2), BUDGET)
                .unwrap();
        assert!(v.is_nonterminating());

        let p = lp(RelOp::Gt, 0, Update::new(2, 0), Update::new(3, 0), 100, 1);
        let v = rg_rg_rule(
            &int(2),
            &int(3),
            &int(100),
            &int(1),
            Direction::Up,
            &p,
            &rg(2, 100),
            &rg(3, 1),
            BUDGET,
        )
        .unwrap();
        assert!(v.is_terminating());
        assert!(simulate(&p, 100).is_some());

        // gap = -2^n crosses -10 at n = 4
        let p = lp(RelOp::Gt, -10, Update::new(2, 0), Update::new(2, 0), 1, 2);
        assert!(decide(&p).is_terminating());
        assert_eq!(simulate(&p, 100), Some(4));
    }

    #[test]
    fn search_examples() {
        // x = 10 - 5n, y = -2^n; the gap bottoms out at 3 and grows again
        let p = lp(RelOp::Gt, 0, Update::additive(-5), Update::new(2, 0), 10, -1);
        let v = decide(&p);
        assert!(v.is_nonterminating(), "{v:?}");
        assert_eq!(simulate(&p, 10_000), None);

        // printed condition holds at n = 1 but the gap sinks below -560 at n = 7
        let p = lp(RelOp::Gt, -560, Update::additive(-100), Update::new(2, 0), 1, -1);
        assert_eq!(decide(&p), Verdict::terminating(7));
        assert_eq!(simulate(&p, 100), Some(7));

        // guard false initially
        let p = lp(RelOp::Gt, 0, Update::new(2, 0), Update::additive(3), 1, 5);
        assert_eq!(decide(&p), Verdict::terminating(0));
    }

    #[test]
    fn constant_operands() {
        // x pinned at 4, y decreasing: gap grows
        let p = lp(RelOp::Gt, 0, Update::constant(4), Update::additive(-1), 9, 2);
        assert_eq!(decide(&p).rule(), Some(&RuleId::DiagonalConstant));
        // x pinned at 4, y increasing: gap shrinks
        let p = lp(RelOp::Gt, 0, Update::constant(4), Update::new(2, 0), 9, 1);
        assert!(decide(&p).is_terminating());
        assert_eq!(simulate(&p, 100), Some(2));
    }

    fn update_strategy() -> impl Strategy<Value = Update> {
        prop_oneof![
            (-5i64..=5).prop_map(Update::additive),
            (2i64..=3).prop_map(|u| Update::new(u, 0)),
            (2i64..=3, -5i64..=5).prop_map(|(u, v)| Update::new(u, v)),
            (-30i64..=30).prop_map(Update::constant),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn agrees_with_simulation(
            op in 0usize..4, c in -30i64..=30, f1 in update_strategy(), f2 in update_strategy(),
            x0 in -30i64..=30, y0 in -30i64..=30,
        ) {
            let p = lp(RelOp::ALL[op], c, f1, f2, x0, y0);
            let v = decide(&p);
            let sim = simulate(&p, 2_000);
            match v {
                Verdict::Terminating { iterations } => {
                    prop_assert!(sim.is_some(), "terminating verdict, loop still running");
                    if let Some(n) = iterations {
                        prop_assert_eq!(Some(n), sim);
                    }
                }
                Verdict::NonTerminating { .. } => prop_assert_eq!(sim, None),
                Verdict::Unsupported { reason } => prop_assert!(false, "unsupported: {}", reason),
            }
        }

        #[test]
        fn normalization_preserves_verdict(
            op in 0usize..4, c in -30i64..=30, f1 in update_strategy(), f2 in update_strategy(),
            x0 in -30i64..=30, y0 in -30i64..=30,
        ) {
            let p = lp(RelOp::ALL[op], c, f1, f2, x0, y0);
            let a = decide(&p);
            let b = decide(&normalize_direction(&p));
            prop_assert_eq!(a.tag(), b.tag());
        }

        #[test]
        fn ra_ra_matches_gap_reduction(
            op in 0usize..4, c in -30i64..=30, a in 1i64..=5, b in 1i64..=5, down in any::<bool>(),
            x0 in -30i64..=30, y0 in -30i64..=30,
        ) {
            let sign = if down { -1 } else { 1 };
            let (v1, v2) = (sign * a, sign * b);
            let op = RelOp::ALL[op];
            let p = lp(op, c, Update::additive(v1), Update::additive(v2), x0, y0);
            let gap_update = Update::additive(v1 - v2);
            let g0 = int(x0 - y0);
            let cls = classify(&gap_update, &g0).unwrap();
            let single = decide_single(&Bound::new("g", op, c), &cls, &g0);
            prop_assert_eq!(decide(&p).tag(), single.tag());
        }
    }
}
