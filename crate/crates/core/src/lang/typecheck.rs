use std::collections::HashMap;

use super::ast::{Expr, InputDecl, SpecAst, UnaryOp};
use super::TypeError;
use crate::stream::{Kind, ScalarOp, Value};

/// Reference to a named stream of a specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ref {
    Input(usize),
    Def(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedExpr {
    pub kind: Kind,
    pub node: TypedNode,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypedNode {
    Const(Value),
    Ref(Ref),
    Unary(ScalarOp, Box<TypedExpr>),
    Binary(ScalarOp, Box<TypedExpr>, Box<TypedExpr>),
    /// `slot` numbers every `prev` occurrence of the spec, for interpreters
    /// that keep one buffer per occurrence.
    Prev {
        slot: usize,
        operand: Box<TypedExpr>,
    },
    Default(Box<TypedExpr>, Value),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedDef {
    pub name: String,
    pub expr: TypedExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedOutput {
    pub name: String,
    pub kind: Kind,
    pub source: Ref,
}

/// A specification whose expressions are annotated with kinds and whose
/// names are resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedSpec {
    pub inputs: Vec<InputDecl>,
    pub defs: Vec<TypedDef>,
    pub outputs: Vec<TypedOutput>,
    pub prev_slots: usize,
}

impl TypedSpec {
    pub fn kind_of(&self, r: Ref) -> Kind {
        match r {
            Ref::Input(i) => self.inputs[i].kind,
            Ref::Def(i) => self.defs[i].expr.kind,
        }
    }

    pub fn output(&self, name: &str) -> Option<&TypedOutput> {
        self.outputs.iter().find(|o| o.name == name)
    }
}

pub fn typecheck(ast: &SpecAst) -> Result<TypedSpec, TypeError> {
    let mut cx = Checker {
        names: HashMap::new(),
        kinds: Vec::new(),
        prev_slots: 0,
    };
    for (i, input) in ast.inputs.iter().enumerate() {
        cx.names.insert(input.name.clone(), Ref::Input(i));
    }
    let mut defs = Vec::with_capacity(ast.defs.len());
    for (i, def) in ast.defs.iter().enumerate() {
        let expr = cx.expr(&def.expr, ast)?;
        cx.kinds.push(expr.kind);
        cx.names.insert(def.name.clone(), Ref::Def(i));
        defs.push(TypedDef {
            name: def.name.clone(),
            expr,
        });
    }
    let mut spec = TypedSpec {
        inputs: ast.inputs.clone(),
        defs,
        outputs: Vec::new(),
        prev_slots: cx.prev_slots,
    };
    for name in &ast.outputs {
        let source = *cx.names.get(name).ok_or_else(|| TypeError {
            expr: name.clone(),
            expected: "a declared stream".into(),
            found: None,
        })?;
        spec.outputs.push(TypedOutput {
            name: name.clone(),
            kind: spec.kind_of(source),
            source,
        });
    }
    Ok(spec)
}

struct Checker {
    names: HashMap<String, Ref>,
    kinds: Vec<Kind>,
    prev_slots: usize,
}

fn type_error(e: &Expr, expected: &str, found: Kind) -> TypeError {
    TypeError {
        expr: e.to_string(),
        expected: expected.to_string(),
        found: Some(found),
    }
}

impl Checker {
    fn expr(&mut self, e: &Expr, ast: &SpecAst) -> Result<TypedExpr, TypeError> {
        let typed = |kind, node| TypedExpr { kind, node };
        Ok(match e {
            Expr::Literal(v) => typed(v.kind(), TypedNode::Const(*v)),
            Expr::Var(name) => {
                // names were resolved by the parser, but a hand-built AST may not be
                let r = *self.names.get(name).ok_or_else(|| TypeError {
                    expr: name.clone(),
                    expected: "a declared stream".into(),
                    found: None,
                })?;
                let kind = match r {
                    Ref::Input(i) => ast.inputs[i].kind,
                    Ref::Def(i) => self.kinds[i],
                };
                typed(kind, TypedNode::Ref(r))
            }
            Expr::Unary(op, operand) => {
                let inner = self.expr(operand, ast)?;
                match op {
                    UnaryOp::Neg if !inner.kind.is_numeric() => {
                        return Err(type_error(operand, "Int or Float", inner.kind))
                    }
                    UnaryOp::Not if inner.kind != Kind::Bool => return Err(type_error(operand, "Bool", inner.kind)),
                    _ => {}
                }
                typed(inner.kind, TypedNode::Unary(op.scalar(), Box::new(inner)))
            }
            Expr::Abs(operand) => {
                let inner = self.expr(operand, ast)?;
                if !inner.kind.is_numeric() {
                    return Err(type_error(operand, "Int or Float", inner.kind));
                }
                typed(inner.kind, TypedNode::Unary(ScalarOp::Abs, Box::new(inner)))
            }
            Expr::Binary(op, lhs, rhs) => {
                let l = self.expr(lhs, ast)?;
                let r = self.expr(rhs, ast)?;
                let sop = op.scalar();
                let kind = match sop {
                    ScalarOp::And | ScalarOp::Or | ScalarOp::Implies => {
                        for (side, t) in [(lhs, &l), (rhs, &r)] {
                            if t.kind != Kind::Bool {
                                return Err(type_error(side, "Bool", t.kind));
                            }
                        }
                        Kind::Bool
                    }
                    ScalarOp::Eq | ScalarOp::Ne => {
                        let compatible = (l.kind.is_numeric() && r.kind.is_numeric())
                            || (l.kind == Kind::Bool && r.kind == Kind::Bool);
                        if !compatible {
                            return Err(type_error(rhs, &l.kind.to_string(), r.kind));
                        }
                        Kind::Bool
                    }
                    _ => {
                        for (side, t) in [(lhs, &l), (rhs, &r)] {
                            if !t.kind.is_numeric() {
                                return Err(type_error(side, "Int or Float", t.kind));
                            }
                        }
                        if op.is_comparison() {
                            Kind::Bool
                        } else if l.kind == Kind::Int && r.kind == Kind::Int {
                            Kind::Int
                        } else {
                            Kind::Float
                        }
                    }
                };
                typed(kind, TypedNode::Binary(sop, Box::new(l), Box::new(r)))
            }
            Expr::Prev(operand) => {
                let inner = self.expr(operand, ast)?;
                let slot = self.prev_slots;
                self.prev_slots += 1;
                typed(
                    inner.kind,
                    TypedNode::Prev {
                        slot,
                        operand: Box::new(inner),
                    },
                )
            }
            Expr::Default(operand, lit) => {
                let inner = self.expr(operand, ast)?;
                let fallback = match (inner.kind, *lit) {
                    (Kind::Float, Value::Int(i)) => Value::Real(i as f64),
                    (k, v) if v.kind() == k => v,
                    (k, v) => {
                        return Err(TypeError {
                            expr: e.to_string(),
                            expected: format!("{k} default value"),
                            found: Some(v.kind()),
                        })
                    }
                };
                typed(inner.kind, TypedNode::Default(Box::new(inner), fallback))
            }
        })
    }
}
