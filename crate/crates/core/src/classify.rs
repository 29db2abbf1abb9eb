//! Monotonicity classes of affine updates.
//!
//! | update                 | class | `x_n`                                  |
//! |------------------------|-------|----------------------------------------|
//! | `x := x + v`, `v != 0` | `Ra`  | `x0 + v*n`                             |
//! | `x := u*x`, `u > 1`    | `Rg`  | `x0 * u^n`                             |
//! | `x := u*x + v`, `u > 1`, `v != 0` | `I` | `u^n*x0 + v*(u^n - 1)/(u - 1)` |
//!
//! Anything whose sequence from `x0` is constant after the first step is
//! reported as `Constant`; negative multipliers alternate and are rejected.

use alloc::format;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Pow, Signed, Zero};

use crate::model::{IntVal, Update};
use crate::AnalysisError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
    Flat,
}

impl Direction {
    pub fn of_sign(s: Sign) -> Direction {
        match s {
            Sign::Plus => Direction::Up,
            Sign::Minus => Direction::Down,
            Sign::NoSign => Direction::Flat,
        }
    }

    pub fn reversed(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Flat => Direction::Flat,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ClassKind {
    /// Value is `b` from the first iteration on.
    Constant { b: IntVal },
    /// Arithmetic progression.
    Ra { v: IntVal },
    /// Geometric progression.
    Rg { u: IntVal },
    /// Irregular affine recurrence.
    I { u: IntVal, v: IntVal },
}

impl ClassKind {
    pub fn is_exponential(&self) -> bool {
        matches!(self, ClassKind::Rg { .. } | ClassKind::I { .. })
    }

    /// Growth multiplier of an exponential class; 1 for `Ra`, 0 for `Constant`.
    pub fn multiplier(&self) -> IntVal {
        match self {
            ClassKind::Constant { .. } => IntVal::zero(),
            ClassKind::Ra { .. } => IntVal::one(),
            ClassKind::Rg { u } | ClassKind::I { u, .. } => u.clone(),
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            ClassKind::Constant { .. } => "Const",
            ClassKind::Ra { .. } => "Ra",
            ClassKind::Rg { .. } => "Rg",
            ClassKind::I { .. } => "I",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonotoneClass {
    pub kind: ClassKind,
    pub direction: Direction,
}

impl MonotoneClass {
    pub fn constant(b: IntVal) -> Self {
        MonotoneClass { kind: ClassKind::Constant { b }, direction: Direction::Flat }
    }

    /// The update this class stands for. `Constant` maps to `x := b`.
    pub fn update(&self) -> Update {
        match &self.kind {
            ClassKind::Constant { b } => Update::constant(b.clone()),
            ClassKind::Ra { v } => Update::additive(v.clone()),
            ClassKind::Rg { u } => Update::new(u.clone(), 0),
            ClassKind::I { u, v } => Update::new(u.clone(), v.clone()),
        }
    }
}

/// Sign of the first difference of an update with `u > 1` taken at `x`:
/// `x_{n+1} - x_n = ((u-1)*x + v) * u^n`, so it fixes the direction for good.
fn exponential_direction(u: &IntVal, v: &IntVal, x: &IntVal) -> Direction {
    let step: IntVal = (u - 1) * x + v;
    Direction::of_sign(step.sign())
}

/// Classifies `upd` for a variable starting at `x0`.
pub fn classify(upd: &Update, x0: &IntVal) -> Result<MonotoneClass, AnalysisError> {
    let (u, v) = (&upd.coeff, &upd.offset);
    if u.is_negative() {
        return Err(AnalysisError::NonMonotone(format!("multiplier {u} alternates the sign of the step")));
    }
    if u.is_zero() {
        return Ok(MonotoneClass::constant(v.clone()));
    }
    if u.is_one() {
        return Ok(if v.is_zero() {
            MonotoneClass::constant(x0.clone())
        } else {
            MonotoneClass { kind: ClassKind::Ra { v: v.clone() }, direction: Direction::of_sign(v.sign()) }
        });
    }
    match exponential_direction(u, v, x0) {
        Direction::Flat => Ok(MonotoneClass::constant(x0.clone())),
        direction => {
            let kind = if v.is_zero() {
                ClassKind::Rg { u: u.clone() }
            } else {
                ClassKind::I { u: u.clone(), v: v.clone() }
            };
            Ok(MonotoneClass { kind, direction })
        }
    }
}

/// Value after `n` iterations, computed from the recurrence's closed form.
pub fn closed_form(cls: &MonotoneClass, x0: &IntVal, n: u32) -> IntVal {
    match &cls.kind {
        ClassKind::Constant { b } => {
            if n == 0 {
                x0.clone()
            } else {
                b.clone()
            }
        }
        ClassKind::Ra { v } => x0 + v * BigInt::from(n),
        ClassKind::Rg { u } => x0 * Pow::pow(u, n),
        ClassKind::I { u, v } => {
            let un: IntVal = Pow::pow(u, n);
            // sum_{k=0}^{n-1} u^k * v
            let geometric = (&un - 1) / (u - 1);
            un * x0 + v * geometric
        }
    }
}
