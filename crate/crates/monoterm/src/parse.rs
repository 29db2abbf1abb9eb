//! Loop-file parser.
//!
//! ```text
//! init x = 15;
//! while (x >= 5) {
//!   if (x >= 10) { x := x + 1; } else { x := x - 1; }
//! }
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use std::collections::BTreeMap;

use monoterm_core::{Bound, Env, Gap, IntVal, LoopProgram, RelOp, Shape, Update, VarName};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: expected {expected}, found {found}")]
    Syntax { line: usize, col: usize, expected: String, found: String },
    #[error("unsupported loop shape: {0}")]
    Shape(String),
    #[error("variable `{var}` is used but never initialised")]
    MissingInit { var: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(IntVal),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Eq,
    Assign,
    Op(RelOp),
    Plus,
    Minus,
    Star,
    AndAnd,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Op(op) => format!("`{op}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            ';' => (Tok::Semi, 1),
            '+' => (Tok::Plus, 1),
            '-' => (Tok::Minus, 1),
            '*' => (Tok::Star, 1),
            '=' => (Tok::Eq, 1),
            ':' if next == Some('=') => (Tok::Assign, 2),
            '&' if next == Some('&') => (Tok::AndAnd, 2),
            '<' if next == Some('=') => (Tok::Op(RelOp::Le), 2),
            '<' => (Tok::Op(RelOp::Lt), 1),
            '>' if next == Some('=') => (Tok::Op(RelOp::Ge), 2),
            '>' => (Tok::Op(RelOp::Gt), 1),
            d if d.is_ascii_digit() => {
                let len = chars[i..].iter().take_while(|c| c.is_ascii_digit()).count();
                let digits: String = chars[i..i + len].iter().collect();
                (Tok::Int(digits.parse().expect("decimal digits")), len)
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let len = chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').count();
                (Tok::Ident(chars[i..i + len].iter().collect()), len)
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    expected: "a token".into(),
                    found: format!("`{other}`"),
                })
            }
        };
        i += len;
        col += len;
        out.push(Spanned { tok, line: start_line, col: start_col });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

enum GuardSyntax {
    Single(Bound),
    Diagonal(Gap),
}

struct Stmt {
    target: VarName,
    update: Update,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn error(&self, expected: &str) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::Syntax { line: t.line, col: t.col, expected: expected.into(), found: t.tok.describe() }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.error(&format!("`{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<VarName, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !matches!(s.as_str(), "init" | "while" | "if" | "else") => {
                let name = VarName::new(s.clone());
                self.bump();
                Ok(name)
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn int(&mut self) -> Result<IntVal, ParseError> {
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.error("integer")),
        }
    }

    fn relop(&mut self) -> Result<RelOp, ParseError> {
        match self.peek() {
            Tok::Op(op) => {
                let op = *op;
                self.bump();
                Ok(op)
            }
            _ => Err(self.error("comparison operator")),
        }
    }

    fn guard(&mut self) -> Result<GuardSyntax, ParseError> {
        let lhs = self.ident()?;
        let g = if *self.peek() == Tok::Minus && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            let rhs = self.ident()?;
            let op = self.relop()?;
            GuardSyntax::Diagonal(Gap::new(lhs, rhs, op, self.int()?))
        } else {
            let op = self.relop()?;
            GuardSyntax::Single(Bound::new(lhs, op, self.int()?))
        };
        if *self.peek() == Tok::AndAnd {
            return Err(ParseError::Shape("guards with more than one atom".into()));
        }
        Ok(g)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let target = self.ident()?;
        self.expect(Tok::Assign, "`:=`")?;
        let update = self.expr(&target)?;
        self.expect(Tok::Semi, "`;`")?;
        Ok(Stmt { target, update })
    }

    fn expr(&mut self, target: &VarName) -> Result<Update, ParseError> {
        let same_var = |p: &mut Self| -> Result<(), ParseError> {
            let v = p.ident()?;
            if v != *target {
                return Err(ParseError::Shape(format!(
                    "`{target}` is updated from `{v}`; updates may only read their own variable"
                )));
            }
            Ok(())
        };
        if matches!(self.peek(), Tok::Ident(_)) {
            same_var(self)?;
            let sign = match self.bump() {
                Tok::Plus => 1,
                Tok::Minus => -1,
                _ => {
                    self.pos -= 1;
                    return Err(self.error("`+` or `-`"));
                }
            };
            return Ok(Update::additive(sign * self.int()?));
        }
        let k = self.int()?;
        if *self.peek() != Tok::Star {
            return Ok(Update::constant(k));
        }
        self.bump();
        same_var(self)?;
        let offset = match self.peek() {
            Tok::Plus => {
                self.bump();
                self.int()?
            }
            Tok::Minus => {
                self.bump();
                -self.int()?
            }
            _ => IntVal::from(0),
        };
        Ok(Update::new(k, offset))
    }

    fn block_stmt(&mut self) -> Result<Stmt, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let s = self.stmt()?;
        if *self.peek() != Tok::RBrace {
            if matches!(self.peek(), Tok::Ident(_)) {
                return Err(ParseError::Shape("branches hold exactly one statement".into()));
            }
            return Err(self.error("`}`"));
        }
        self.bump();
        Ok(s)
    }

    fn program(&mut self) -> Result<(Env, Shape), ParseError> {
        let mut init: BTreeMap<VarName, IntVal> = BTreeMap::new();
        while self.at_keyword("init") {
            self.bump();
            let var = self.ident()?;
            self.expect(Tok::Eq, "`=`")?;
            let value = self.int()?;
            self.expect(Tok::Semi, "`;`")?;
            if init.insert(var.clone(), value).is_some() {
                return Err(ParseError::Shape(format!("`{var}` is initialised twice")));
            }
        }
        self.keyword("while")?;
        self.expect(Tok::LParen, "`(`")?;
        let guard = self.guard()?;
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::LBrace, "`{`")?;

        let shape = if self.at_keyword("if") {
            self.bump();
            self.expect(Tok::LParen, "`(`")?;
            let cond = self.guard()?;
            self.expect(Tok::RParen, "`)`")?;
            let then_s = self.block_stmt()?;
            self.keyword("else")?;
            let else_s = self.block_stmt()?;
            let (GuardSyntax::Single(guard), GuardSyntax::Single(cond)) = (guard, cond) else {
                return Err(ParseError::Shape(
                    "branching loops need diagonal-free guard and condition".into(),
                ));
            };
            if cond.var != guard.var || then_s.target != guard.var || else_s.target != guard.var {
                return Err(ParseError::Shape(
                    "guard, condition and both branches must use the same variable".into(),
                ));
            }
            Shape::MultiPath { guard, cond, then_update: then_s.update, else_update: else_s.update }
        } else {
            let mut stmts = vec![self.stmt()?];
            while *self.peek() != Tok::RBrace {
                if !matches!(self.peek(), Tok::Ident(_)) {
                    return Err(self.error("statement or `}`"));
                }
                stmts.push(self.stmt()?);
            }
            match (guard, stmts.len()) {
                (_, n) if n > 2 => {
                    return Err(ParseError::Shape(format!(
                        "loop body has {n} statements, at most 2 are supported"
                    )))
                }
                (GuardSyntax::Single(guard), 1) => {
                    let s = stmts.pop().expect("one statement");
                    if s.target != guard.var {
                        return Err(ParseError::Shape(format!(
                            "guard tests `{}` but the body updates `{}`",
                            guard.var, s.target
                        )));
                    }
                    Shape::SinglePath { guard, update: s.update }
                }
                (GuardSyntax::Diagonal(guard), 2) => {
                    if guard.lhs == guard.rhs {
                        return Err(ParseError::Shape(
                            "diagonal guard compares a variable with itself".into(),
                        ));
                    }
                    let mut lhs_update = None;
                    let mut rhs_update = None;
                    for s in stmts {
                        let slot = if s.target == guard.lhs {
                            &mut lhs_update
                        } else if s.target == guard.rhs {
                            &mut rhs_update
                        } else {
                            return Err(ParseError::Shape(format!(
                                "`{}` does not occur in the guard",
                                s.target
                            )));
                        };
                        if slot.replace(s.update).is_some() {
                            return Err(ParseError::Shape(format!("`{}` is assigned twice", s.target)));
                        }
                    }
                    match (lhs_update, rhs_update) {
                        (Some(lhs_update), Some(rhs_update)) => {
                            Shape::Diagonal { guard, lhs_update, rhs_update }
                        }
                        _ => return Err(ParseError::Shape("both guard variables must be updated".into())),
                    }
                }
                (GuardSyntax::Single(_), _) => {
                    return Err(ParseError::Shape("a diagonal-free guard takes a one-statement body".into()))
                }
                (GuardSyntax::Diagonal(_), _) => {
                    return Err(ParseError::Shape("a diagonal guard takes a two-statement body".into()))
                }
            }
        };
        self.expect(Tok::RBrace, "`}`")?;
        if *self.peek() != Tok::Eof {
            return Err(self.error("end of input"));
        }
        Ok((init, shape))
    }
}

/// Parses a loop file.
pub fn parse(text: &str) -> Result<LoopProgram, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let (init, shape) = p.program()?;
    let vars: Vec<&VarName> = match &shape {
        Shape::SinglePath { guard, .. } | Shape::MultiPath { guard, .. } => vec![&guard.var],
        Shape::Diagonal { guard, .. } => vec![&guard.lhs, &guard.rhs],
    };
    if let Some(v) = vars.into_iter().find(|v| !init.contains_key(*v)) {
        return Err(ParseError::MissingInit { var: v.to_string() });
    }
    LoopProgram::new(init, shape).map_err(|e| ParseError::Shape(e.to_string()))
}
