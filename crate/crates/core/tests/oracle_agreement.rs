//! Verdicts from `analyze` checked against concrete execution.

use monoterm_core::diagonal::{normalize_direction, DiagonalLoop};
use monoterm_core::{
    agreement_check, analyze, run, Agreement, Bound, Env, Gap, IntVal, LoopProgram, OracleResult, RelOp,
    Shape, Update, VarName, Verdict, Witness,
};
use proptest::prelude::*;

const STEPS: u64 = 20_000;

fn env(pairs: &[(&str, i64)]) -> Env {
    pairs.iter().map(|(k, v)| (VarName::from(*k), IntVal::from(*v))).collect()
}

fn update() -> impl Strategy<Value = Update> {
    prop_oneof![
        (-5i64..=5).prop_map(Update::additive),
        (2i64..=3).prop_map(|u| Update::new(u, 0)),
        (2i64..=3, -5i64..=5).prop_map(|(u, v)| Update::new(u, v)),
        (-30i64..=30).prop_map(Update::constant),
    ]
}

fn op() -> impl Strategy<Value = RelOp> {
    (0usize..4).prop_map(|i| RelOp::ALL[i])
}

fn check(p: &LoopProgram) -> Result<Verdict, TestCaseError> {
    let v = analyze(p);
    prop_assert!(!matches!(v, Verdict::Unsupported { .. }), "unsupported: {v:?}");
    let a = agreement_check(p, &v, STEPS);
    prop_assert!(!a.is_fail(), "{a:?}");
    if let Agreement::PassUnconfirmed { divergence_consistent } = a {
        prop_assert!(divergence_consistent, "divergence not monotone: {p:?}");
    }
    Ok(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1500))]

    #[test]
    fn single_path(op in op(), c in -30i64..=30, f in update(), x0 in -30i64..=30) {
        let p = LoopProgram::new(
            env(&[("x", x0)]),
            Shape::SinglePath { guard: Bound::new("x", op, c), update: f },
        ).unwrap();
        check(&p)?;
    }

    #[test]
    fn diagonal(
        op in op(), c in -30i64..=30, f1 in update(), f2 in update(),
        x0 in -30i64..=30, y0 in -30i64..=30,
    ) {
        let p = LoopProgram::new(
            env(&[("x", x0), ("y", y0)]),
            Shape::Diagonal { guard: Gap::new("x", "y", op, c), lhs_update: f1, rhs_update: f2 },
        ).unwrap();
        check(&p)?;
    }

    #[test]
    fn diagonal_normalization_preserves_verdict(
        op in op(), c in -30i64..=30, f1 in update(), f2 in update(),
        x0 in -30i64..=30, y0 in -30i64..=30,
    ) {
        let p = LoopProgram::new(
            env(&[("x", x0), ("y", y0)]),
            Shape::Diagonal { guard: Gap::new("x", "y", op, c), lhs_update: f1, rhs_update: f2 },
        ).unwrap();
        let d = normalize_direction(&DiagonalLoop::from_program(&p).unwrap().unwrap());
        let q = LoopProgram::new(
            [(d.guard.lhs.clone(), d.x0.clone()), (d.guard.rhs.clone(), d.y0.clone())].into_iter().collect(),
            Shape::Diagonal { guard: d.guard, lhs_update: d.lhs_update, rhs_update: d.rhs_update },
        ).unwrap();
        prop_assert_eq!(analyze(&p).tag(), analyze(&q).tag());
        prop_assert_eq!(run(&p, STEPS).tag(), run(&q, STEPS).tag());
    }
}

#[test]
fn table_two_rows_three_four_stay_separated() {
    // x exponential up, y linear up: once the gap clears c it keeps growing
    let p = LoopProgram::new(
        env(&[("x", 1), ("y", 2)]),
        Shape::Diagonal {
            guard: Gap::new("x", "y", RelOp::Gt, -5),
            lhs_update: Update::new(2, 0),
            rhs_update: Update::additive(3),
        },
    )
    .unwrap();
    let v = analyze(&p);
    let Some(Witness::Divergence { iteration, .. }) = v.witness() else { panic!("{v:?}") };
    let (mut x, mut y) = (IntVal::from(1), IntVal::from(2));
    for n in 0..(*iteration + 100) {
        if n >= *iteration {
            assert!(&x - &y > IntVal::from(-5));
        }
        x *= 2;
        y += 3;
    }
}

#[test]
fn oracle_is_deterministic() {
    let p = LoopProgram::new(
        env(&[("x", 7)]),
        Shape::MultiPath {
            guard: Bound::new("x", RelOp::Ge, 0),
            cond: Bound::new("x", RelOp::Le, 5),
            then_update: Update::new(2, 1),
            else_update: Update::additive(-4),
        },
    )
    .unwrap();
    let a = run(&p, 10_000);
    assert_eq!(a, run(&p, 10_000));
    assert!(matches!(a, OracleResult::CycleDetected { .. } | OracleResult::TerminatedIn { .. }));
}
