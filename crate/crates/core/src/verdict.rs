use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::IntVal;

/// Outcome of a termination analysis for one loop and one initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The guard eventually fails. `iterations` is filled in when the exact
    /// count falls out of the decision for free.
    Terminating {
        iterations: Option<u64>,
    },
    NonTerminating {
        rule: RuleId,
        witness: Witness,
    },
    Unsupported {
        reason: String,
    },
}

impl Verdict {
    pub fn terminating(iterations: impl Into<Option<u64>>) -> Self {
        Verdict::Terminating { iterations: iterations.into() }
    }

    pub fn unsupported(reason: impl Into<String>) -> Self {
        Verdict::Unsupported { reason: reason.into() }
    }

    pub fn is_terminating(&self) -> bool {
        matches!(self, Verdict::Terminating { .. })
    }

    pub fn is_nonterminating(&self) -> bool {
        matches!(self, Verdict::NonTerminating { .. })
    }

    pub fn rule(&self) -> Option<&RuleId> {
        match self {
            Verdict::NonTerminating { rule, .. } => Some(rule),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::NonTerminating { witness, .. } => Some(witness),
            _ => None,
        }
    }

    /// Short tag used in reports: `T`, `NT` or `U`.
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Terminating { .. } => "T",
            Verdict::NonTerminating { .. } => "NT",
            Verdict::Unsupported { .. } => "U",
        }
    }
}

/// Which multipath search procedure produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SearchVariant {
    /// The if-branch is the only branch that can leave the loop guard.
    Alg3,
    /// The else-branch is the only branch that can leave the loop guard.
    Alg4,
}

/// Stopping-condition families for the diagonal search procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StoppingCondition {
    /// x linear down, y exponential down.
    LinearDownExpDown,
    /// x exponential up, y linear up.
    ExpUpLinearUp,
    /// both exponential up.
    BothExpUp,
    /// both exponential down.
    BothExpDown,
}

impl StoppingCondition {
    pub fn rows(self) -> &'static str {
        match self {
            StoppingCondition::LinearDownExpDown => "1-2",
            StoppingCondition::ExpUpLinearUp => "3-4",
            StoppingCondition::BothExpUp => "5-6",
            StoppingCondition::BothExpDown => "7-8",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            StoppingCondition::LinearDownExpDown => "y_n < x_n - c && x_n < 0 && y_n < 0",
            StoppingCondition::ExpUpLinearUp => "x_n > y_n + c",
            StoppingCondition::BothExpUp => "x_n > y_n + c && u1 >= u2",
            StoppingCondition::BothExpDown => "y_n < x_n - c && x_n < 0 && y_n < 0 && u1 <= u2",
        }
    }
}

/// Identifies the rule behind a non-termination verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleId {
    /// Single-path monotone update moving away from the guard bound.
    MovesAway,
    /// Single-path constant update whose value satisfies the guard.
    ConstantFixpoint,
    /// Diagonal guard, the variables move apart.
    DiagonalOpposite,
    /// Diagonal guard with a constant operand.
    DiagonalConstant,
    /// Diagonal guard, both updates additive.
    DiagonalRaRa,
    /// Diagonal guard, both updates geometric.
    DiagonalRgRg,
    /// Diagonal search procedure stopped on a stopping condition.
    DiagonalSearch(StoppingCondition),
    /// Multipath rule-table row with a closed formula.
    CaseRow { row: u8 },
    /// Multipath row where both branches move the same way.
    SameDirection { row: u8 },
    /// Multipath row decided by the fixed-point search.
    FixedPoint { row: u8, variant: SearchVariant },
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleId::MovesAway => f.write_str("Lemma1"),
            RuleId::ConstantFixpoint => f.write_str("SP-const"),
            RuleId::DiagonalOpposite => f.write_str("Diag-opposite"),
            RuleId::DiagonalConstant => f.write_str("Diag-const"),
            RuleId::DiagonalRaRa => f.write_str("Diag-RaRa"),
            RuleId::DiagonalRgRg => f.write_str("Diag-RgRg"),
            RuleId::DiagonalSearch(s) => write!(f, "T2-rows{}", s.rows()),
            RuleId::CaseRow { row } => write!(f, "T3-row{row}"),
            RuleId::SameDirection { row } => write!(f, "T3-row{row}-obs1"),
            RuleId::FixedPoint { row, variant } => {
                let alg = match variant {
                    SearchVariant::Alg3 => "alg3",
                    SearchVariant::Alg4 => "alg4",
                };
                write!(f, "T3-row{row}-{alg}")
            }
        }
    }
}

/// One named conjunct of a non-termination formula and its truth value.
/// `None` means the conjunct was not evaluated because an earlier one failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjunct {
    pub label: String,
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disjunct {
    pub conjuncts: Vec<Conjunct>,
}

impl Disjunct {
    pub fn holds(&self) -> bool {
        self.conjuncts.iter().all(|c| c.holds == Some(true))
    }
}

/// Machine-checkable evidence attached to a non-termination verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Instantiated formula; at least one disjunct holds.
    Formula(Vec<Disjunct>),
    /// Concrete value cycle: running the loop from `values[0]` visits the
    /// listed values in order and returns to `values[0]`.
    Cycle(Vec<IntVal>),
    /// Branch-switch values of a cycle whose concrete orbit is too long to list.
    SwitchCycle(Vec<IntVal>),
    /// The stopping condition held at `iteration` while the gap between the
    /// two variables had stopped shrinking.
    Divergence { iteration: u64, condition: StoppingCondition },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Formula(disjuncts) => {
                for (i, d) in disjuncts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" || ")?;
                    }
                    f.write_str("(")?;
                    for (j, c) in d.conjuncts.iter().enumerate() {
                        if j > 0 {
                            f.write_str(" && ")?;
                        }
                        let mark = match c.holds {
                            Some(true) => "T",
                            Some(false) => "F",
                            None => "-",
                        };
                        write!(f, "{}[{}]", c.label, mark)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            Witness::Cycle(vals) | Witness::SwitchCycle(vals) => {
                let kind = if matches!(self, Witness::Cycle(_)) { "cycle" } else { "switch-cycle" };
                write!(f, "{kind} [")?;
                for (i, v) in vals.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Witness::Divergence { iteration, condition } => {
                write!(f, "stopping condition rows {} at n={}", condition.rows(), iteration)
            }
        }
    }
}
