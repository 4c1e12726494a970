use std::fmt;

use crate::stream::{Kind, ScalarOp, Value};

/// Parsed specification: input declarations, definitions and outputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpecAst {
    pub inputs: Vec<InputDecl>,
    pub defs: Vec<Definition>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputDecl {
    pub name: String,
    pub kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub name: String,
    pub expr: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Implies,
}

impl UnaryOp {
    pub fn scalar(self) -> ScalarOp {
        match self {
            UnaryOp::Neg => ScalarOp::Neg,
            UnaryOp::Not => ScalarOp::Not,
        }
    }
}

impl BinaryOp {
    pub fn scalar(self) -> ScalarOp {
        match self {
            BinaryOp::Add => ScalarOp::Add,
            BinaryOp::Sub => ScalarOp::Sub,
            BinaryOp::Mul => ScalarOp::Mul,
            BinaryOp::Div => ScalarOp::Div,
            BinaryOp::Lt => ScalarOp::Lt,
            BinaryOp::Le => ScalarOp::Le,
            BinaryOp::Gt => ScalarOp::Gt,
            BinaryOp::Ge => ScalarOp::Ge,
            BinaryOp::Eq => ScalarOp::Eq,
            BinaryOp::Ne => ScalarOp::Ne,
            BinaryOp::And => ScalarOp::And,
            BinaryOp::Or => ScalarOp::Or,
            BinaryOp::Implies => ScalarOp::Implies,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge | BinaryOp::Eq | BinaryOp::Ne
        )
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Implies => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge | BinaryOp::Eq | BinaryOp::Ne => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Boolean or non-negative numeric literal; negation is a unary node.
    Literal(Value),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Prev(Box<Expr>),
    Abs(Box<Expr>),
    /// `default(e, c)`: `c` wherever `e` is undefined.
    Default(Box<Expr>, Value),
}

const UNARY_PREC: u8 = 7;
const ATOM_PREC: u8 = 8;

impl Expr {
    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Expr {
        Expr::Unary(op, Box::new(operand))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Unary(..) => UNARY_PREC,
            _ => ATOM_PREC,
        }
    }
}

pub(crate) fn fmt_literal(v: &Value, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match v {
        Value::Real(r) => {
            let s = format!("{r}");
            if s.contains(['.', 'e', 'i', 'N']) {
                f.write_str(&s)
            } else {
                write!(f, "{s}.0")
            }
        }
        other => write!(f, "{other}"),
    }
}

fn fmt_wrapped(e: &Expr, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(v) => fmt_literal(v, f),
            Expr::Var(name) => f.write_str(name),
            Expr::Unary(op, operand) => {
                f.write_str(match op {
                    UnaryOp::Neg => "-",
                    UnaryOp::Not => "!",
                })?;
                // a nested unary minus would otherwise print as a `--` comment
                fmt_wrapped(operand, operand.precedence() <= UNARY_PREC, f)
            }
            Expr::Binary(op, lhs, rhs) => {
                let p = op.precedence();
                let (lp, rp) = match op {
                    BinaryOp::Implies => (lhs.precedence() <= p, rhs.precedence() < p),
                    op if op.is_comparison() => (lhs.precedence() <= p, rhs.precedence() <= p),
                    _ => (lhs.precedence() < p, rhs.precedence() <= p),
                };
                fmt_wrapped(lhs, lp, f)?;
                write!(f, " {} ", op.scalar().symbol())?;
                fmt_wrapped(rhs, rp, f)
            }
            Expr::Prev(e) => write!(f, "prev({e})"),
            Expr::Abs(e) => write!(f, "abs({e})"),
            Expr::Default(e, c) => {
                write!(f, "default({e}, ")?;
                fmt_literal(c, f)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for SpecAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for input in &self.inputs {
            writeln!(f, "in {}: Events[{}]", input.name, input.kind)?;
        }
        for def in &self.defs {
            writeln!(f, "def {} := {}", def.name, def.expr)?;
        }
        for out in &self.outputs {
            writeln!(f, "out {out}")?;
        }
        Ok(())
    }
}
