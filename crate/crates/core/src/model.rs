//! Loop programs, guards and updates.
//!
//! Three loop shapes are modelled:
//!
//! ```text
//! while (x ~ c)     { x := f(x); }                           // single-path
//! while (x - y ~ c) { x := f1(x); y := f2(y); }              // diagonal
//! while (x ~ c)     { if (x ~' c1) x := f1(x); else x := f2(x); } // multipath
//! ```
//!
//! All arithmetic is exact (`BigInt`); exponential updates leave any fixed
//! width within a few dozen iterations.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::AnalysisError;

/// Exact integer value.
pub type IntVal = BigInt;

/// Variable valuation.
pub type Env = BTreeMap<VarName, IntVal>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(String);

impl VarName {
    pub fn new(name: impl Into<String>) -> Self {
        VarName(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VarName {
    fn from(s: &str) -> Self {
        VarName::new(s)
    }
}

/// Relational operator of a guard atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub const ALL: [RelOp; 4] = [RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge];

    pub fn holds(self, lhs: &IntVal, rhs: &IntVal) -> bool {
        match self {
            RelOp::Lt => lhs < rhs,
            RelOp::Le => lhs <= rhs,
            RelOp::Gt => lhs > rhs,
            RelOp::Ge => lhs >= rhs,
        }
    }

    /// Logical negation over the integers: `<` ↔ `>=`, `<=` ↔ `>`.
    pub fn negate(self) -> RelOp {
        match self {
            RelOp::Lt => RelOp::Ge,
            RelOp::Le => RelOp::Gt,
            RelOp::Gt => RelOp::Le,
            RelOp::Ge => RelOp::Lt,
        }
    }

    /// Operator obtained by swapping the operands: `a < b` ⇔ `b > a`.
    pub fn converse(self) -> RelOp {
        match self {
            RelOp::Lt => RelOp::Gt,
            RelOp::Le => RelOp::Ge,
            RelOp::Gt => RelOp::Lt,
            RelOp::Ge => RelOp::Le,
        }
    }

    /// `>`/`>=`: the variable is bounded from below.
    pub fn bounds_below(self) -> bool {
        matches!(self, RelOp::Gt | RelOp::Ge)
    }

    pub fn bounds_above(self) -> bool {
        !self.bounds_below()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }
}

impl fmt::Display for RelOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Diagonal-free atom `var op bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bound {
    pub var: VarName,
    pub op: RelOp,
    pub bound: IntVal,
}

impl Bound {
    pub fn new(var: impl Into<VarName>, op: RelOp, bound: impl Into<IntVal>) -> Self {
        Bound { var: var.into(), op, bound: bound.into() }
    }

    /// Truth of the atom when its variable has value `x`.
    pub fn holds_at(&self, x: &IntVal) -> bool {
        self.op.holds(x, &self.bound)
    }

    pub fn negate(&self) -> Bound {
        Bound { var: self.var.clone(), op: self.op.negate(), bound: self.bound.clone() }
    }

    /// Inclusive integer interval `(lo, hi)` satisfying the atom; `None` is unbounded.
    pub fn interval(&self) -> Interval {
        let c = &self.bound;
        match self.op {
            RelOp::Lt => Interval { lo: None, hi: Some(c - 1) },
            RelOp::Le => Interval { lo: None, hi: Some(c.clone()) },
            RelOp::Gt => Interval { lo: Some(c + 1), hi: None },
            RelOp::Ge => Interval { lo: Some(c.clone()), hi: None },
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.var, self.op, self.bound)
    }
}

/// Diagonal atom `lhs - rhs op bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gap {
    pub lhs: VarName,
    pub rhs: VarName,
    pub op: RelOp,
    pub bound: IntVal,
}

impl Gap {
    pub fn new(
        lhs: impl Into<VarName>,
        rhs: impl Into<VarName>,
        op: RelOp,
        bound: impl Into<IntVal>,
    ) -> Self {
        Gap { lhs: lhs.into(), rhs: rhs.into(), op, bound: bound.into() }
    }

    pub fn holds_at(&self, x: &IntVal, y: &IntVal) -> bool {
        self.op.holds(&(x - y), &self.bound)
    }

    pub fn negate(&self) -> Gap {
        Gap { op: self.op.negate(), ..self.clone() }
    }
}

impl fmt::Display for Gap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} - {} {} {}", self.lhs, self.rhs, self.op, self.bound)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GuardAtom {
    DiagonalFree(Bound),
    Diagonal(Gap),
}

impl GuardAtom {
    pub fn negate(&self) -> GuardAtom {
        match self {
            GuardAtom::DiagonalFree(b) => GuardAtom::DiagonalFree(b.negate()),
            GuardAtom::Diagonal(g) => GuardAtom::Diagonal(g.negate()),
        }
    }
}

impl fmt::Display for GuardAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardAtom::DiagonalFree(b) => b.fmt(f),
            GuardAtom::Diagonal(g) => g.fmt(f),
        }
    }
}

fn lookup<'a>(env: &'a Env, var: &VarName) -> Result<&'a IntVal, AnalysisError> {
    env.get(var).ok_or_else(|| AnalysisError::UnboundVariable(var.clone()))
}

/// Evaluates a guard atom under `env` with exact arithmetic.
pub fn eval_guard(atom: &GuardAtom, env: &Env) -> Result<bool, AnalysisError> {
    match atom {
        GuardAtom::DiagonalFree(b) => Ok(b.holds_at(lookup(env, &b.var)?)),
        GuardAtom::Diagonal(g) => Ok(g.holds_at(lookup(env, &g.lhs)?, lookup(env, &g.rhs)?)),
    }
}

/// Inclusive integer interval with optional ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Option<IntVal>,
    pub hi: Option<IntVal>,
}

impl Interval {
    pub fn intersect(&self, other: &Interval) -> Interval {
        let lo = match (&self.lo, &other.lo) {
            (Some(a), Some(b)) => Some(a.max(b).clone()),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        let hi = match (&self.hi, &other.hi) {
            (Some(a), Some(b)) => Some(a.min(b).clone()),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        Interval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        matches!((&self.lo, &self.hi), (Some(lo), Some(hi)) if lo > hi)
    }
}

/// Canonical affine update `x := coeff * x + offset`.
///
/// Every surface form maps to exactly one pair: `x := b` is `(0, b)`,
/// `x := u * x` is `(u, 0)`, `x := x + v` is `(1, v)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Update {
    pub coeff: IntVal,
    pub offset: IntVal,
}

impl Update {
    pub fn new(coeff: impl Into<IntVal>, offset: impl Into<IntVal>) -> Self {
        Update { coeff: coeff.into(), offset: offset.into() }
    }

    pub fn constant(b: impl Into<IntVal>) -> Self {
        Update::new(0, b)
    }

    pub fn additive(v: impl Into<IntVal>) -> Self {
        Update::new(1, v)
    }

    pub fn is_identity(&self) -> bool {
        self.coeff.is_one() && self.offset.is_zero()
    }

    pub fn apply(&self, x: &IntVal) -> IntVal {
        apply_update(self, x)
    }

    /// `f(x) - x`, the step taken from `x`.
    pub fn step_at(&self, x: &IntVal) -> IntVal {
        (&self.coeff - 1) * x + &self.offset
    }
}

/// Returns `u * x + v`.
pub fn apply_update(upd: &Update, x: &IntVal) -> IntVal {
    &upd.coeff * x + &upd.offset
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    /// `while (x ~ c) { x := f(x); }`
    SinglePath { guard: Bound, update: Update },
    /// `while (x - y ~ c) { x := f1(x); y := f2(y); }`; `lhs_update` drives `guard.lhs`.
    Diagonal { guard: Gap, lhs_update: Update, rhs_update: Update },
    /// `while (x ~ c) { if (x ~' c1) x := f1(x); else x := f2(x); }`
    MultiPath { guard: Bound, cond: Bound, then_update: Update, else_update: Update },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopProgram {
    pub init: Env,
    pub shape: Shape,
}

impl LoopProgram {
    /// Builds a program and checks that every variable it mentions is initialised
    /// and that the variables line up with the shape.
    pub fn new(init: Env, shape: Shape) -> Result<Self, AnalysisError> {
        let p = LoopProgram { init, shape };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        for var in self.variables() {
            lookup(&self.init, var)?;
        }
        match &self.shape {
            Shape::Diagonal { guard, .. } if guard.lhs == guard.rhs => {
                Err(AnalysisError::Shape("diagonal guard compares a variable with itself"))
            }
            Shape::MultiPath { guard, cond, .. } if guard.var != cond.var => {
                Err(AnalysisError::Shape("branch condition must test the loop variable"))
            }
            _ => Ok(()),
        }
    }

    /// Variables in the order the state vector uses.
    pub fn variables(&self) -> alloc::vec::Vec<&VarName> {
        match &self.shape {
            Shape::SinglePath { guard, .. } => alloc::vec![&guard.var],
            Shape::Diagonal { guard, .. } => alloc::vec![&guard.lhs, &guard.rhs],
            Shape::MultiPath { guard, .. } => alloc::vec![&guard.var],
        }
    }

    pub fn guard(&self) -> GuardAtom {
        match &self.shape {
            Shape::SinglePath { guard, .. } | Shape::MultiPath { guard, .. } => {
                GuardAtom::DiagonalFree(guard.clone())
            }
            Shape::Diagonal { guard, .. } => GuardAtom::Diagonal(guard.clone()),
        }
    }

    /// Initial value of `var`.
    pub fn initial(&self, var: &VarName) -> Result<&IntVal, AnalysisError> {
        lookup(&self.init, var)
    }
}
