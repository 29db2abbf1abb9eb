//! Two-branch loops `while (x ~ c) { if (x ~' c1) x := f1(x); else x := f2(x); }`.
//!
//! Each branch is classified on its own region (`phi && B` for the if-branch,
//! `phi && !B` for the else-branch). The pair of directions together with the
//! sides of the two bounds selects one of 36 table rows, and every row falls
//! in a group fixed by the geometry: whether each monotone branch moves
//! toward the guard's bound, and whether it can leave its own region.

pub mod psi;
pub mod search;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::classify::{classify, ClassKind, Direction, MonotoneClass};
use crate::model::{Bound, IntVal, Interval, LoopProgram, RelOp, Shape, Update};
use crate::single::decide_single;
use crate::verdict::{Conjunct, Disjunct, RuleId, SearchVariant, Verdict, Witness};
use crate::AnalysisError;

use psi::escape;
use search::{expand_cycle, fixed_point_search, SearchOutcome};

/// A two-branch loop together with the initial value of its variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPathLoop {
    pub guard: Bound,
    pub cond: Bound,
    pub then_update: Update,
    pub else_update: Update,
    pub x0: IntVal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Then,
    Else,
}

impl Branch {
    pub fn other(self) -> Branch {
        match self {
            Branch::Then => Branch::Else,
            Branch::Else => Branch::Then,
        }
    }
}

impl MultiPathLoop {
    /// The two-branch view of `p`, if it has that shape.
    pub fn from_program(p: &LoopProgram) -> Result<Option<Self>, AnalysisError> {
        let Shape::MultiPath { guard, cond, then_update, else_update } = &p.shape else {
            return Ok(None);
        };
        Ok(Some(MultiPathLoop {
            guard: guard.clone(),
            cond: cond.clone(),
            then_update: then_update.clone(),
            else_update: else_update.clone(),
            x0: p.initial(&guard.var)?.clone(),
        }))
    }

    pub fn branch_at(&self, x: &IntVal) -> Branch {
        if self.cond.holds_at(x) {
            Branch::Then
        } else {
            Branch::Else
        }
    }

    pub fn update(&self, b: Branch) -> &Update {
        match b {
            Branch::Then => &self.then_update,
            Branch::Else => &self.else_update,
        }
    }

    /// `B` for the if-branch, `!B` for the else-branch.
    pub fn region(&self, b: Branch) -> Bound {
        match b {
            Branch::Then => self.cond.clone(),
            Branch::Else => self.cond.negate(),
        }
    }

    /// One loop iteration from `x`, ignoring the guard.
    pub fn step(&self, x: &IntVal) -> IntVal {
        self.update(self.branch_at(x)).apply(x)
    }

    fn domain(&self, b: Branch) -> Interval {
        self.guard.interval().intersect(&self.region(b).interval())
    }
}

/// Which side of the variable a bound sits on: `x < c`/`x <= c` bound it from
/// above, `x > c`/`x >= c` from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Above,
    Below,
}

impl Side {
    pub fn of(op: RelOp) -> Side {
        if op.bounds_above() {
            Side::Above
        } else {
            Side::Below
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Above => Side::Below,
            Side::Below => Side::Above,
        }
    }

    /// Moving in `dir` approaches a bound on this side.
    fn approached_by(self, dir: Direction) -> bool {
        matches!((self, dir), (Side::Above, Direction::Up) | (Side::Below, Direction::Down))
    }
}

/// Selects a table row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CaseKey {
    pub phi: Side,
    pub cond: Side,
    pub then_dir: Direction,
    pub else_dir: Direction,
}

impl CaseKey {
    fn dir(&self, b: Branch) -> Direction {
        match b {
            Branch::Then => self.then_dir,
            Branch::Else => self.else_dir,
        }
    }

    fn region_side(&self, b: Branch) -> Side {
        match b {
            Branch::Then => self.cond,
            Branch::Else => self.cond.flip(),
        }
    }

    fn toward_guard(&self, b: Branch) -> bool {
        self.phi.approached_by(self.dir(b))
    }

    fn escapes(&self, b: Branch) -> bool {
        self.region_side(b).approached_by(self.dir(b))
    }

    /// All 36 keys.
    pub fn all() -> Vec<CaseKey> {
        let dirs = [Direction::Up, Direction::Down, Direction::Flat];
        let sides = [Side::Above, Side::Below];
        let mut keys = Vec::new();
        for phi in sides {
            for cond in sides {
                for then_dir in dirs {
                    for else_dir in dirs {
                        keys.push(CaseKey { phi, cond, then_dir, else_dir });
                    }
                }
            }
        }
        keys
    }
}

/// Row groups, each with one decision procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowGroup {
    /// One constant branch; the other leaves its region moving away from the guard bound.
    EscapeAway,
    /// One constant branch; the other stays in its region moving toward the guard bound.
    StayToward,
    /// One constant branch; the other stays in its region moving away from the guard bound.
    StayAway,
    /// One constant branch; the other leaves its region moving toward the guard bound.
    EscapeToward,
    /// Opposite directions, each branch keeps `x` in its own region.
    BothStay,
    /// Opposite directions, each branch pushes `x` into the other region.
    BothEscape,
    BothConstant,
    SameDirection,
}

impl RowGroup {
    /// Group of a row number as laid out in the table.
    pub fn of_row(row: u8) -> RowGroup {
        match row {
            1..=4 => RowGroup::EscapeAway,
            5..=8 => RowGroup::StayToward,
            9..=12 => RowGroup::StayAway,
            13..=16 => RowGroup::EscapeToward,
            17..=20 => RowGroup::BothStay,
            21..=24 => RowGroup::BothEscape,
            25..=28 => RowGroup::BothConstant,
            _ => RowGroup::SameDirection,
        }
    }

    /// Group implied by the geometry of a key.
    pub fn of_key(key: &CaseKey) -> RowGroup {
        use Direction::Flat;
        match (key.then_dir, key.else_dir) {
            (Flat, Flat) => RowGroup::BothConstant,
            (a, b) if a == b => RowGroup::SameDirection,
            (Flat, _) | (_, Flat) => {
                let m = if key.then_dir == Flat { Branch::Else } else { Branch::Then };
                match (key.escapes(m), key.toward_guard(m)) {
                    (true, false) => RowGroup::EscapeAway,
                    (false, true) => RowGroup::StayToward,
                    (false, false) => RowGroup::StayAway,
                    (true, true) => RowGroup::EscapeToward,
                }
            }
            _ => {
                if key.escapes(Branch::Then) {
                    RowGroup::BothEscape
                } else {
                    RowGroup::BothStay
                }
            }
        }
    }
}

/// `(phi side, B side, if-branch direction, else-branch direction)` per row.
const ROWS: [(Side, Side, Direction, Direction); 36] = {
    use Direction::{Down as D, Flat as F, Up as U};
    use Side::{Above as A, Below as B};
    [
        (B, A, U, F),
        (A, B, D, F),
        (B, B, F, U),
        (A, A, F, D),
        (B, A, D, F),
        (A, B, U, F),
        (B, B, F, D),
        (A, A, F, U),
        (B, A, F, U),
        (A, B, F, D),
        (A, A, D, F),
        (B, B, U, F),
        (A, A, U, F),
        (A, B, F, U),
        (B, B, D, F),
        (B, A, F, D),
        (B, B, U, D),
        (A, A, D, U),
        (A, B, U, D),
        (B, A, D, U),
        (A, A, U, D),
        (A, B, D, U),
        (B, A, U, D),
        (B, B, D, U),
        (A, A, F, F),
        (A, B, F, F),
        (B, A, F, F),
        (B, B, F, F),
        (A, A, U, U),
        (A, B, U, U),
        (B, A, U, U),
        (B, B, U, U),
        (A, A, D, D),
        (A, B, D, D),
        (B, A, D, D),
        (B, B, D, D),
    ]
};

/// Table row (1-based) for a key.
pub fn table_row(key: &CaseKey) -> u8 {
    let pos = ROWS
        .iter()
        .position(|&(phi, cond, t, e)| {
            phi == key.phi && cond == key.cond && t == key.then_dir && e == key.else_dir
        })
        .expect("table covers every key");
    pos as u8 + 1
}

/// Classifies a branch update on its region `domain`. The direction must be
/// the same at every point of the region; otherwise the update is rejected.
pub fn classify_on_region(upd: &Update, domain: &Interval) -> Result<MonotoneClass, AnalysisError> {
    let (u, v) = (&upd.coeff, &upd.offset);
    if u.is_negative() {
        return Err(AnalysisError::NonMonotone(format!("multiplier {u} alternates the sign of the step")));
    }
    if u.is_zero() {
        return Ok(MonotoneClass::constant(v.clone()));
    }
    if u.is_one() {
        if v.is_zero() {
            return Err(AnalysisError::NonMonotone("identity branch update".into()));
        }
        return Ok(MonotoneClass {
            kind: ClassKind::Ra { v: v.clone() },
            direction: Direction::of_sign(v.sign()),
        });
    }
    // the step (u-1)x + v grows with x, so its sign at the ends decides
    let kind = if v.is_zero() {
        ClassKind::Rg { u: u.clone() }
    } else {
        ClassKind::I { u: u.clone(), v: v.clone() }
    };
    if domain.lo.as_ref().is_some_and(|lo| upd.step_at(lo).is_positive()) {
        return Ok(MonotoneClass { kind, direction: Direction::Up });
    }
    if domain.hi.as_ref().is_some_and(|hi| upd.step_at(hi).is_negative()) {
        return Ok(MonotoneClass { kind, direction: Direction::Down });
    }
    Err(AnalysisError::NonMonotone(format!("x := {u}*x + {v} has a fixed point inside its branch region")))
}

fn holds_label(name: &str, x: &IntVal, atom: &Bound) -> String {
    format!("{name}={x} |= {atom}")
}

fn misses_label(name: &str, x: &IntVal, atom: &Bound) -> String {
    format!("{name}={x} |/= {atom}")
}

/// Conjunction evaluated left to right; conjuncts after the first false one
/// are recorded as not evaluated.
struct Clause(Vec<Conjunct>);

impl Clause {
    fn new(p: &MultiPathLoop) -> Self {
        Clause(vec![Conjunct { label: holds_label("x0", &p.x0, &p.guard), holds: Some(true) }])
    }

    fn live(&self) -> bool {
        self.0.iter().all(|c| c.holds == Some(true))
    }

    fn and(mut self, label: String, eval: impl FnOnce() -> bool) -> Self {
        let holds = if self.live() { Some(eval()) } else { None };
        self.0.push(Conjunct { label, holds });
        self
    }

    fn and_try(
        mut self,
        label: String,
        eval: impl FnOnce() -> Result<bool, AnalysisError>,
    ) -> Result<Self, AnalysisError> {
        let holds = if self.live() { Some(eval()?) } else { None };
        self.0.push(Conjunct { label, holds });
        Ok(self)
    }

    fn done(self) -> Disjunct {
        Disjunct { conjuncts: self.0 }
    }
}

fn from_formula(rule: RuleId, disjuncts: Vec<Disjunct>) -> Verdict {
    if disjuncts.iter().any(Disjunct::holds) {
        Verdict::NonTerminating { rule, witness: Witness::Formula(disjuncts) }
    } else {
        Verdict::terminating(None)
    }
}

fn constant_of(cls: &MonotoneClass) -> IntVal {
    match &cls.kind {
        ClassKind::Constant { b } => b.clone(),
        _ => unreachable!("constant branch expected"),
    }
}

/// Region classes of both branches and the resulting key; `None` when one
/// branch region does not meet the guard.
pub fn classify_branches(
    p: &MultiPathLoop,
) -> Result<Option<(CaseKey, MonotoneClass, MonotoneClass)>, AnalysisError> {
    if p.domain(Branch::Then).is_empty() || p.domain(Branch::Else).is_empty() {
        return Ok(None);
    }
    let cls1 = classify_on_region(&p.then_update, &p.domain(Branch::Then))?;
    let cls2 = classify_on_region(&p.else_update, &p.domain(Branch::Else))?;
    let key = CaseKey {
        phi: Side::of(p.guard.op),
        cond: Side::of(p.cond.op),
        then_dir: cls1.direction,
        else_dir: cls2.direction,
    };
    Ok(Some((key, cls1, cls2)))
}

/// Table row of a loop, if both branch regions meet the guard.
pub fn case_row(p: &MultiPathLoop) -> Result<Option<u8>, AnalysisError> {
    Ok(classify_branches(p)?.map(|(key, _, _)| table_row(&key)))
}

/// Decides a two-branch loop. `budget` bounds the fixed-point search.
pub fn decide_multipath(p: &MultiPathLoop, budget: u64) -> Result<Verdict, AnalysisError> {
    if p.cond.var != p.guard.var {
        return Err(AnalysisError::Shape("branch condition must test the loop variable"));
    }
    if !p.guard.holds_at(&p.x0) {
        return Ok(Verdict::terminating(0));
    }
    let Some((key, cls1, cls2)) = classify_branches(p)? else {
        // a branch whose region misses the guard is never taken
        let live = if p.domain(Branch::Then).is_empty() { Branch::Else } else { Branch::Then };
        return Ok(decide_single(&p.guard, &classify(p.update(live), &p.x0)?, &p.x0));
    };
    let row = table_row(&key);
    let rule = RuleId::CaseRow { row };
    let class_of = |b: Branch| if b == Branch::Then { &cls1 } else { &cls2 };
    let x0 = &p.x0;
    let phi = &p.guard;

    let verdict = match RowGroup::of_key(&key) {
        RowGroup::SameDirection => {
            if key.toward_guard(Branch::Then) {
                Verdict::terminating(None)
            } else {
                let clause =
                    Clause::new(p).and("both branches move away from the guard bound".into(), || true);
                Verdict::NonTerminating {
                    rule: RuleId::SameDirection { row },
                    witness: Witness::Formula(vec![clause.done()]),
                }
            }
        }
        RowGroup::BothConstant => {
            let (b1, b2) = (constant_of(&cls1), constant_of(&cls2));
            let (r1, r2) = (p.region(Branch::Then), p.region(Branch::Else));
            let d1 = Clause::new(p)
                .and(holds_label("x0", x0, &r1), || r1.holds_at(x0))
                .and(holds_label("b1", &b1, phi), || phi.holds_at(&b1))
                .and(holds_label("b1", &b1, &r1), || r1.holds_at(&b1))
                .done();
            let d2 = Clause::new(p)
                .and(holds_label("x0", x0, &r2), || r2.holds_at(x0))
                .and(holds_label("b2", &b2, phi), || phi.holds_at(&b2))
                .and(holds_label("b2", &b2, &r2), || r2.holds_at(&b2))
                .done();
            let d3 = Clause::new(p)
                .and(holds_label("b1", &b1, phi), || phi.holds_at(&b1))
                .and(holds_label("b2", &b2, phi), || phi.holds_at(&b2))
                .done();
            from_formula(rule, vec![d1, d2, d3])
        }
        RowGroup::BothStay => {
            let away = if key.toward_guard(Branch::Then) { Branch::Else } else { Branch::Then };
            let region = p.region(away);
            let d = Clause::new(p).and(holds_label("x0", x0, &region), || region.holds_at(x0)).done();
            from_formula(rule, vec![d])
        }
        RowGroup::BothEscape => {
            let exit = if key.toward_guard(Branch::Then) { Branch::Then } else { Branch::Else };
            let variant = match exit {
                Branch::Then => SearchVariant::Alg3,
                Branch::Else => SearchVariant::Alg4,
            };
            match fixed_point_search(p, exit, budget)? {
                SearchOutcome::Exits => Verdict::terminating(None),
                SearchOutcome::Cycle { jumps } => {
                    let witness = match expand_cycle(p, &jumps[0]) {
                        Some(values) => Witness::Cycle(values),
                        None => Witness::SwitchCycle(jumps),
                    };
                    Verdict::NonTerminating { rule: RuleId::FixedPoint { row, variant }, witness }
                }
            }
        }
        group => {
            let m = if key.then_dir == Direction::Flat { Branch::Else } else { Branch::Then };
            let k = m.other();
            let b = constant_of(class_of(k));
            let (rm, rk) = (p.region(m), p.region(k));
            match group {
                RowGroup::EscapeAway => {
                    let d = Clause::new(p).and(holds_label("b", &b, phi), || phi.holds_at(&b)).done();
                    from_formula(rule, vec![d])
                }
                RowGroup::StayToward => {
                    let d = Clause::new(p)
                        .and(holds_label("x0", x0, &rk), || rk.holds_at(x0))
                        .and(holds_label("b", &b, phi), || phi.holds_at(&b))
                        .and(holds_label("b", &b, &rk), || rk.holds_at(&b))
                        .done();
                    from_formula(rule, vec![d])
                }
                RowGroup::StayAway => {
                    let d1 = Clause::new(p).and(holds_label("x0", x0, &rm), || rm.holds_at(x0)).done();
                    let d2 = Clause::new(p)
                        .and(holds_label("x0", x0, &rk), || rk.holds_at(x0))
                        .and(holds_label("b", &b, phi), || phi.holds_at(&b))
                        .done();
                    from_formula(rule, vec![d1, d2])
                }
                _ => escape_toward(p, rule, m, &b)?,
            }
        }
    };
    Ok(verdict)
}

/// The monotone branch leaves its region heading for the guard bound; the
/// loop survives only if every switch value it produces still satisfies the
/// guard.
fn escape_toward(p: &MultiPathLoop, rule: RuleId, m: Branch, b: &IntVal) -> Result<Verdict, AnalysisError> {
    let (x0, phi) = (&p.x0, &p.guard);
    let rm = p.region(m);
    let upd = p.update(m);
    let psi_holds = |x: &IntVal| escape(x, upd, &rm).map(|y| phi.holds_at(&y));
    let in_m = |x: &IntVal| rm.holds_at(x);

    let d1 = Clause::new(p)
        .and(misses_label("x0", x0, &rm), || !in_m(x0))
        .and(holds_label("b", b, phi), || phi.holds_at(b))
        .and(misses_label("b", b, &rm), || !in_m(b))
        .done();
    let d2 = Clause::new(p)
        .and(holds_label("x0", x0, &rm), || in_m(x0))
        .and_try(format!("psi(x0) |= {phi}"), || psi_holds(x0))?
        .and(holds_label("b", b, phi), || phi.holds_at(b))
        .and(misses_label("b", b, &rm), || !in_m(b))
        .done();
    let d3 = Clause::new(p)
        .and(holds_label("x0", x0, &rm), || in_m(x0))
        .and_try(format!("psi(x0) |= {phi}"), || psi_holds(x0))?
        .and(holds_label("b", b, phi), || phi.holds_at(b))
        .and(holds_label("b", b, &rm), || in_m(b))
        .and_try(format!("psi(b) |= {phi}"), || psi_holds(b))?
        .done();
    let d4 = Clause::new(p)
        .and(misses_label("x0", x0, &rm), || !in_m(x0))
        .and(holds_label("b", b, phi), || phi.holds_at(b))
        .and(holds_label("b", b, &rm), || in_m(b))
        .and_try(format!("psi(b) |= {phi}"), || psi_holds(b))?
        .done();
    Ok(from_formula(rule, vec![d1, d2, d3, d4]))
}
