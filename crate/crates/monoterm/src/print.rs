//! Canonical loop-file rendering. `parse(&print(p)) == p` for every program.

use std::fmt::Write;

use monoterm_core::{IntVal, LoopProgram, Shape, Update, VarName};
use num_traits::{One, Signed, Zero};

fn signed_tail(v: &IntVal) -> String {
    if v.is_negative() {
        format!(" - {}", v.abs())
    } else {
        format!(" + {v}")
    }
}

/// Right-hand side of `var := ...`.
pub fn print_update(var: &VarName, upd: &Update) -> String {
    let (u, v) = (&upd.coeff, &upd.offset);
    if u.is_zero() {
        v.to_string()
    } else if u.is_one() {
        format!("{var}{}", signed_tail(v))
    } else if v.is_zero() {
        format!("{u} * {var}")
    } else {
        format!("{u} * {var}{}", signed_tail(v))
    }
}

pub fn print(p: &LoopProgram) -> String {
    let mut out = String::new();
    for (var, value) in &p.init {
        writeln!(out, "init {var} = {value};").unwrap();
    }
    match &p.shape {
        Shape::SinglePath { guard, update } => {
            writeln!(out, "while ({guard}) {{").unwrap();
            writeln!(out, "  {} := {};", guard.var, print_update(&guard.var, update)).unwrap();
        }
        Shape::Diagonal { guard, lhs_update, rhs_update } => {
            writeln!(out, "while ({guard}) {{").unwrap();
            writeln!(out, "  {} := {};", guard.lhs, print_update(&guard.lhs, lhs_update)).unwrap();
            writeln!(out, "  {} := {};", guard.rhs, print_update(&guard.rhs, rhs_update)).unwrap();
        }
        Shape::MultiPath { guard, cond, then_update, else_update } => {
            let x = &guard.var;
            writeln!(out, "while ({guard}) {{").unwrap();
            writeln!(out, "  if ({cond}) {{").unwrap();
            writeln!(out, "    {x} := {};", print_update(x, then_update)).unwrap();
            writeln!(out, "  }} else {{").unwrap();
            writeln!(out, "    {x} := {};", print_update(x, else_update)).unwrap();
            writeln!(out, "  }}").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn escape_loop_round_trips() {
        let src = "init x = 15; while (x >= 5) { if (x >= 10) { x := x + 1; } else { x := x - 1; } }";
        let p = parse(src).unwrap();
        let text = print(&p);
        let squash = |s: &str| s.split_whitespace().collect::<String>();
        assert_eq!(squash(&text), squash(src));
        assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn diagonal_rendering() {
        let p = parse("init x = 5; init y = 1; while (x - y > 0) { x := x + 1; y := y + 2; }").unwrap();
        assert_eq!(
            print(&p),
            "init x = 5;\ninit y = 1;\nwhile (x - y > 0) {\n  x := x + 1;\n  y := y + 2;\n}\n"
        );
    }

    #[test]
    fn update_rendering() {
        let x = VarName::from("x");
        assert_eq!(print_update(&x, &Update::constant(-4)), "-4");
        assert_eq!(print_update(&x, &Update::additive(0)), "x + 0");
        assert_eq!(print_update(&x, &Update::new(3, 0)), "3 * x");
        assert_eq!(print_update(&x, &Update::new(-2, -7)), "-2 * x - 7");
    }
}
