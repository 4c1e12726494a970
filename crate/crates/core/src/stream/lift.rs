use std::cmp::Ordering;
use std::fmt;

use super::{Kind, StreamError, Value};

/// Scalar operators that can be lifted pointwise over aligned streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarOp {
    Neg,
    Not,
    Abs,
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

impl ScalarOp {
    pub fn arity(self) -> usize {
        match self {
            ScalarOp::Neg | ScalarOp::Not | ScalarOp::Abs => 1,
            _ => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ScalarOp::Neg => "-",
            ScalarOp::Not => "!",
            ScalarOp::Abs => "abs",
            ScalarOp::Add => "+",
            ScalarOp::Sub => "-",
            ScalarOp::Mul => "*",
            ScalarOp::Div => "/",
            ScalarOp::Lt => "<",
            ScalarOp::Le => "<=",
            ScalarOp::Gt => ">",
            ScalarOp::Ge => ">=",
            ScalarOp::Eq => "==",
            ScalarOp::Ne => "!=",
            ScalarOp::And => "&&",
            ScalarOp::Or => "||",
            ScalarOp::Implies => "->",
        }
    }
}

impl fmt::Display for ScalarOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Applies `op` to one tick's operands.
///
/// Undefined is strict: any `None` operand yields `None`. Integer arithmetic
/// wraps; mixed integer/real arithmetic is carried out in `f64`.
///
/// # Panics
///
/// If `operands.len()` differs from the operator's arity.
pub fn lift(op: ScalarOp, operands: &[Option<Value>]) -> Result<Option<Value>, StreamError> {
    assert_eq!(operands.len(), op.arity(), "`{op}` takes {} operand(s)", op.arity());
    let mut defined = [Value::Bool(false); 2];
    for (slot, v) in defined.iter_mut().zip(operands) {
        match v {
            Some(v) => *slot = *v,
            None => return Ok(None),
        }
    }
    let [a, b] = defined;
    apply(op, a, b).map(Some)
}

fn mismatch(op: ScalarOp, expected: Kind, found: Kind) -> StreamError {
    StreamError::KindMismatch {
        context: Some(format!("operator `{op}`")),
        expected,
        found,
    }
}

fn numeric(op: ScalarOp, v: Value) -> Result<(), StreamError> {
    if v.kind().is_numeric() {
        Ok(())
    } else {
        Err(mismatch(op, Kind::Float, v.kind()))
    }
}

fn boolean(op: ScalarOp, v: Value) -> Result<bool, StreamError> {
    v.as_bool().ok_or_else(|| mismatch(op, Kind::Bool, v.kind()))
}

fn compare(op: ScalarOp, a: Value, b: Value) -> Result<Option<Ordering>, StreamError> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => Ok(Some(x.cmp(&y))),
        (Value::Bool(x), Value::Bool(y)) if matches!(op, ScalarOp::Eq | ScalarOp::Ne) => Ok(Some(x.cmp(&y))),
        _ => {
            numeric(op, a)?;
            numeric(op, b)?;
            Ok(a.as_f64().unwrap().partial_cmp(&b.as_f64().unwrap()))
        }
    }
}

fn apply(op: ScalarOp, a: Value, b: Value) -> Result<Value, StreamError> {
    use ScalarOp::*;
    Ok(match op {
        Neg => match a {
            Value::Int(i) => Value::Int(i.wrapping_neg()),
            Value::Real(r) => Value::Real(-r),
            Value::Bool(_) => return Err(mismatch(op, Kind::Float, Kind::Bool)),
        },
        Abs => match a {
            Value::Int(i) => Value::Int(i.wrapping_abs()),
            Value::Real(r) => Value::Real(r.abs()),
            Value::Bool(_) => return Err(mismatch(op, Kind::Float, Kind::Bool)),
        },
        Not => Value::Bool(!boolean(op, a)?),
        And => Value::Bool(boolean(op, a)? & boolean(op, b)?),
        Or => Value::Bool(boolean(op, a)? | boolean(op, b)?),
        Implies => Value::Bool(!boolean(op, a)? | boolean(op, b)?),
        Add | Sub | Mul | Div => arithmetic(op, a, b)?,
        Lt | Le | Gt | Ge | Eq | Ne => {
            let ord = compare(op, a, b)?;
            Value::Bool(match op {
                Lt => ord == Some(Ordering::Less),
                Le => matches!(ord, Some(Ordering::Less | Ordering::Equal)),
                Gt => ord == Some(Ordering::Greater),
                Ge => matches!(ord, Some(Ordering::Greater | Ordering::Equal)),
                Eq => ord == Some(Ordering::Equal),
                Ne => ord != Some(Ordering::Equal),
                _ => unreachable!(),
            })
        }
    })
}

fn arithmetic(op: ScalarOp, a: Value, b: Value) -> Result<Value, StreamError> {
    if let (Value::Int(x), Value::Int(y)) = (a, b) {
        return Ok(Value::Int(match op {
            ScalarOp::Add => x.wrapping_add(y),
            ScalarOp::Sub => x.wrapping_sub(y),
            ScalarOp::Mul => x.wrapping_mul(y),
            ScalarOp::Div if y == 0 => return Err(StreamError::DivisionByZero),
            ScalarOp::Div => x.wrapping_div(y),
            _ => unreachable!(),
        }));
    }
    numeric(op, a)?;
    numeric(op, b)?;
    let (x, y) = (a.as_f64().unwrap(), b.as_f64().unwrap());
    Ok(Value::Real(match op {
        ScalarOp::Add => x + y,
        ScalarOp::Sub => x - y,
        ScalarOp::Mul => x * y,
        ScalarOp::Div if y == 0.0 => return Err(StreamError::DivisionByZero),
        ScalarOp::Div => x / y,
        _ => unreachable!(),
    }))
}
