//! Bounded concrete execution with exact cycle detection.
//!
//! Runs start on `i128` with checked arithmetic and restart on `BigInt` the
//! first time anything overflows. Cycles are found with Brent's algorithm,
//! which compares states exactly and keeps only two of them in memory.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::model::{IntVal, LoopProgram, RelOp, Shape, Update};
use crate::verdict::Verdict;

/// Values of the program variables, in [`LoopProgram::variables`] order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TraceState(pub Vec<IntVal>);

impl fmt::Display for TraceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    /// The guard was false after `steps` iterations.
    TerminatedIn { steps: u64 },
    /// `entry` is the first state of the run that lies on the cycle; running
    /// `period` iterations from it returns to it.
    CycleDetected { entry: TraceState, period: u64 },
    /// Step budget or value-size cap reached.
    BoundExhausted { last: TraceState, steps: u64 },
}

impl OracleResult {
    pub fn tag(&self) -> &'static str {
        match self {
            OracleResult::TerminatedIn { .. } => "terminated",
            OracleResult::CycleDetected { .. } => "cycle",
            OracleResult::BoundExhausted { .. } => "bound_exhausted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_steps: u64,
    /// Runs whose values outgrow this many bits stop as exhausted.
    pub max_bits: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { max_steps: 1_000_000, max_bits: 1 << 12 }
    }
}

trait Arith: Clone + Ord + Sized {
    fn from_big(v: &IntVal) -> Option<Self>;
    fn to_big(&self) -> IntVal;
    fn affine(u: &Self, x: &Self, v: &Self, max_bits: u64) -> Option<Self>;
    fn diff(a: &Self, b: &Self) -> Option<Self>;
    fn zero() -> Self;
}

impl Arith for i128 {
    fn from_big(v: &IntVal) -> Option<Self> {
        v.to_i128()
    }

    fn to_big(&self) -> IntVal {
        BigInt::from(*self)
    }

    fn affine(u: &Self, x: &Self, v: &Self, _: u64) -> Option<Self> {
        u.checked_mul(*x)?.checked_add(*v)
    }

    fn diff(a: &Self, b: &Self) -> Option<Self> {
        a.checked_sub(*b)
    }

    fn zero() -> Self {
        0
    }
}

impl Arith for BigInt {
    fn from_big(v: &IntVal) -> Option<Self> {
        Some(v.clone())
    }

    fn to_big(&self) -> IntVal {
        self.clone()
    }

    fn affine(u: &Self, x: &Self, v: &Self, max_bits: u64) -> Option<Self> {
        let r = u * x + v;
        (r.bits() <= max_bits).then_some(r)
    }

    fn diff(a: &Self, b: &Self) -> Option<Self> {
        Some(a - b)
    }

    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
}

#[derive(Clone)]
struct Atom<T> {
    op: RelOp,
    c: T,
}

impl<T: Arith> Atom<T> {
    fn holds(&self, x: &T) -> bool {
        match self.op {
            RelOp::Lt => *x < self.c,
            RelOp::Le => *x <= self.c,
            RelOp::Gt => *x > self.c,
            RelOp::Ge => *x >= self.c,
        }
    }
}

#[derive(Clone)]
struct Affine<T> {
    u: T,
    v: T,
}

enum Machine<T> {
    Single { guard: Atom<T>, f: Affine<T> },
    Diagonal { guard: Atom<T>, fx: Affine<T>, fy: Affine<T> },
    Multi { guard: Atom<T>, cond: Atom<T>, f1: Affine<T>, f2: Affine<T> },
}

type State<T> = [T; 2];

enum Run<T> {
    Terminated(u64),
    Cycle {
        entry: State<T>,
        period: u64,
    },
    Exhausted {
        last: State<T>,
        steps: u64,
    },
    /// Arithmetic left the representable range after `steps` iterations.
    Overflow {
        last: State<T>,
        steps: u64,
    },
}

impl<T: Arith> Machine<T> {
    fn compile(p: &LoopProgram) -> Option<(Self, State<T>)> {
        let atom = |op: RelOp, c: &IntVal| Some(Atom { op, c: T::from_big(c)? });
        let affine = |f: &Update| Some(Affine { u: T::from_big(&f.coeff)?, v: T::from_big(&f.offset)? });
        let init = |i: usize| -> Option<T> {
            let vars = p.variables();
            T::from_big(p.initial(vars.get(i)?).ok()?)
        };
        Some(match &p.shape {
            Shape::SinglePath { guard, update } => (
                Machine::Single { guard: atom(guard.op, &guard.bound)?, f: affine(update)? },
                [init(0)?, T::zero()],
            ),
            Shape::Diagonal { guard, lhs_update, rhs_update } => (
                Machine::Diagonal {
                    guard: atom(guard.op, &guard.bound)?,
                    fx: affine(lhs_update)?,
                    fy: affine(rhs_update)?,
                },
                [init(0)?, init(1)?],
            ),
            Shape::MultiPath { guard, cond, then_update, else_update } => (
                Machine::Multi {
                    guard: atom(guard.op, &guard.bound)?,
                    cond: atom(cond.op, &cond.bound)?,
                    f1: affine(then_update)?,
                    f2: affine(else_update)?,
                },
                [init(0)?, T::zero()],
            ),
        })
    }

    fn guard(&self, s: &State<T>) -> Option<bool> {
        match self {
            Machine::Single { guard, .. } | Machine::Multi { guard, .. } => Some(guard.holds(&s[0])),
            Machine::Diagonal { guard, .. } => Some(guard.holds(&T::diff(&s[0], &s[1])?)),
        }
    }

    fn step(&self, s: &State<T>, max_bits: u64) -> Option<State<T>> {
        let apply = |f: &Affine<T>, x: &T| T::affine(&f.u, x, &f.v, max_bits);
        match self {
            Machine::Single { f, .. } => Some([apply(f, &s[0])?, T::zero()]),
            Machine::Diagonal { fx, fy, .. } => Some([apply(fx, &s[0])?, apply(fy, &s[1])?]),
            Machine::Multi { cond, f1, f2, .. } => {
                let f = if cond.holds(&s[0]) { f1 } else { f2 };
                Some([apply(f, &s[0])?, T::zero()])
            }
        }
    }

    fn run(&self, s0: State<T>, cfg: &OracleConfig) -> Run<T> {
        let mut steps = 0u64;
        let mut power = 1u64;
        let mut lam = 0u64;
        let mut tortoise = s0.clone();
        let mut hare = s0.clone();
        let period = loop {
            match self.guard(&hare) {
                None => return Run::Overflow { last: hare, steps },
                Some(false) => return Run::Terminated(steps),
                Some(true) => {}
            }
            if steps >= cfg.max_steps {
                return Run::Exhausted { last: hare, steps };
            }
            hare = match self.step(&hare, cfg.max_bits) {
                Some(next) => next,
                None => return Run::Overflow { last: hare, steps },
            };
            steps += 1;
            lam += 1;
            if hare == tortoise {
                break lam;
            }
            if lam == power {
                tortoise = hare.clone();
                power *= 2;
                lam = 0;
            }
        };
        // first state on the cycle: walk two pointers `period` apart from the start
        let mut lead = s0.clone();
        for _ in 0..period {
            lead = self.step(&lead, cfg.max_bits).expect("replayed prefix");
        }
        let mut trail = s0;
        while trail != lead {
            trail = self.step(&trail, cfg.max_bits).expect("replayed prefix");
            lead = self.step(&lead, cfg.max_bits).expect("replayed prefix");
        }
        Run::Cycle { entry: trail, period }
    }
}

fn trace_state<T: Arith>(p: &LoopProgram, s: &State<T>) -> TraceState {
    TraceState(s[..p.variables().len()].iter().map(T::to_big).collect())
}

/// Runs `p` for at most `max_steps` iterations.
pub fn run(p: &LoopProgram, max_steps: u64) -> OracleResult {
    run_with(p, &OracleConfig { max_steps, ..OracleConfig::default() })
}

pub fn run_with(p: &LoopProgram, cfg: &OracleConfig) -> OracleResult {
    if let Some((m, s0)) = Machine::<i128>::compile(p) {
        if let Some(r) = finish(p, m.run(s0, cfg)) {
            return r;
        }
    }
    let (m, s0) = Machine::<BigInt>::compile(p).expect("program variables are initialised");
    match m.run(s0, cfg) {
        Run::Overflow { last, steps } => OracleResult::BoundExhausted { last: trace_state(p, &last), steps },
        r => finish(p, r).expect("overflow handled above"),
    }
}

fn finish<T: Arith>(p: &LoopProgram, r: Run<T>) -> Option<OracleResult> {
    Some(match r {
        Run::Terminated(steps) => OracleResult::TerminatedIn { steps },
        Run::Cycle { entry, period } => OracleResult::CycleDetected { entry: trace_state(p, &entry), period },
        Run::Exhausted { last, steps } => OracleResult::BoundExhausted { last: trace_state(p, &last), steps },
        Run::Overflow { .. } => return None,
    })
}

/// One iteration from `state`, ignoring the guard.
pub fn step_state(p: &LoopProgram, state: &TraceState) -> TraceState {
    let s = &state.0;
    TraceState(match &p.shape {
        Shape::SinglePath { update, .. } => alloc::vec![update.apply(&s[0])],
        Shape::Diagonal { lhs_update, rhs_update, .. } => {
            alloc::vec![lhs_update.apply(&s[0]), rhs_update.apply(&s[1])]
        }
        Shape::MultiPath { cond, then_update, else_update, .. } => {
            let f = if cond.holds_at(&s[0]) { then_update } else { else_update };
            alloc::vec![f.apply(&s[0])]
        }
    })
}

/// Guard value at `state`.
pub fn guard_at(p: &LoopProgram, state: &TraceState) -> bool {
    let s = &state.0;
    match &p.shape {
        Shape::SinglePath { guard, .. } | Shape::MultiPath { guard, .. } => guard.holds_at(&s[0]),
        Shape::Diagonal { guard, .. } => guard.holds_at(&s[0], &s[1]),
    }
}

/// Number of extra steps inspected when judging an unconfirmed divergence.
pub const DIVERGENCE_WINDOW: usize = 100;

/// From `last`, the guard keeps holding for [`DIVERGENCE_WINDOW`] steps and
/// every variable is strictly monotone or constant, at least one strictly.
pub fn divergence_consistent(p: &LoopProgram, last: &TraceState) -> bool {
    let mut dirs: Vec<Option<core::cmp::Ordering>> = alloc::vec![None; last.0.len()];
    let mut cur = last.clone();
    for _ in 0..DIVERGENCE_WINDOW {
        if !guard_at(p, &cur) {
            return false;
        }
        let next = step_state(p, &cur);
        for ((dir, new), old) in dirs.iter_mut().zip(&next.0).zip(&cur.0) {
            let d = new.cmp(old);
            match *dir {
                None => *dir = Some(d),
                Some(prev) if prev != d => return false,
                _ => {}
            }
        }
        cur = next;
    }
    dirs.iter().any(|d| *d != Some(core::cmp::Ordering::Equal))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Agreement {
    Pass,
    /// Non-termination claimed, the oracle ran out of budget without a cycle.
    PassUnconfirmed {
        divergence_consistent: bool,
    },
    Fail {
        details: String,
    },
    /// Termination claimed after `iterations`, beyond where the oracle stopped.
    Inconclusive {
        iterations: u64,
    },
    /// Unsupported verdicts carry no claim.
    Skipped,
}

impl Agreement {
    pub fn is_fail(&self) -> bool {
        matches!(self, Agreement::Fail { .. })
    }
}

/// Runs the oracle and compares its outcome with `verdict`.
pub fn agreement_check(p: &LoopProgram, verdict: &Verdict, max_steps: u64) -> Agreement {
    agreement(p, verdict, &run(p, max_steps))
}

/// Compares `verdict` with an oracle outcome already computed for `p`.
pub fn agreement(p: &LoopProgram, verdict: &Verdict, oracle: &OracleResult) -> Agreement {
    let fail = |why: &str| Agreement::Fail {
        details: format!("{why}; verdict {verdict:?}; oracle {oracle:?}; trace {}", trace_prefix(p, 50)),
    };
    match (verdict, oracle) {
        (Verdict::Unsupported { .. }, _) => Agreement::Skipped,
        (Verdict::Terminating { iterations }, OracleResult::TerminatedIn { steps }) => match iterations {
            Some(n) if n != steps => fail("iteration count differs"),
            _ => Agreement::Pass,
        },
        (Verdict::NonTerminating { .. }, OracleResult::CycleDetected { .. }) => Agreement::Pass,
        (Verdict::NonTerminating { .. }, OracleResult::BoundExhausted { last, .. }) => {
            Agreement::PassUnconfirmed { divergence_consistent: divergence_consistent(p, last) }
        }
        (Verdict::Terminating { .. }, OracleResult::CycleDetected { .. }) => {
            fail("terminating verdict, oracle found a cycle")
        }
        (Verdict::Terminating { iterations: Some(n) }, OracleResult::BoundExhausted { steps, .. })
            if n > steps =>
        {
            Agreement::Inconclusive { iterations: *n }
        }
        (Verdict::Terminating { .. }, OracleResult::BoundExhausted { .. }) => {
            fail("terminating verdict, oracle still running at its bound")
        }
        (Verdict::NonTerminating { .. }, OracleResult::TerminatedIn { .. }) => {
            fail("non-terminating verdict, oracle terminated")
        }
    }
}

fn trace_prefix(p: &LoopProgram, len: usize) -> String {
    let mut out = String::new();
    let vars = p.variables();
    let mut cur = TraceState(vars.iter().map(|v| p.initial(v).cloned().unwrap_or_default()).collect());
    for i in 0..len {
        if i > 0 {
            out.push_str(" -> ");
        }
        out.push_str(&format!("{cur}"));
        if !guard_at(p, &cur) {
            out.push_str(" [exit]");
            return out;
        }
        if cur.0.iter().any(|v| v.abs().bits() > 256) {
            out.push_str(" ...");
            return out;
        }
        cur = step_state(p, &cur);
    }
    out.push_str(" ...");
    out
}
