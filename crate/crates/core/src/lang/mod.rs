//! The specification language: a small TeSSLa-style stream language.
//!
//! ```text
//! in x: Events[Int]
//! def attack := x - prev(x) > 5 || x - prev(x) < -5
//! out x
//! out attack
//! ```
//!
//! Text is [`parse`]d into a [`SpecAst`], [`typecheck`]ed into a
//! [`TypedSpec`] and [`compile`]d into a [`DataflowGraph`].

mod ast;
mod compile;
mod lexer;
mod parser;
mod typecheck;

use std::sync::Arc;

use thiserror::Error;

pub use ast::{BinaryOp, Definition, Expr, InputDecl, SpecAst, UnaryOp};
pub use compile::{compile, DataflowGraph, Node, NodeId, NodeOp, Sink};
pub use parser::parse;
pub use typecheck::{typecheck, Ref, TypedDef, TypedExpr, TypedNode, TypedOutput, TypedSpec};

use crate::stream::Kind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("duplicate name `{name}` at {line}:{col}")]
    DuplicateName { name: String, line: usize, col: usize },
    #[error("unknown identifier `{name}` at {line}:{col}")]
    UnknownIdentifier { name: String, line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type error in `{expr}`: expected {expected}{}", found.map(|k| format!(", found {k}")).unwrap_or_default())]
pub struct TypeError {
    pub expr: String,
    pub expected: String,
    pub found: Option<Kind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// A specification carried through the whole front end.
#[derive(Debug, Clone)]
pub struct CompiledSpec {
    pub ast: SpecAst,
    pub typed: Arc<TypedSpec>,
    pub graph: Arc<DataflowGraph>,
}

impl CompiledSpec {
    pub fn from_source(src: &str) -> Result<Self, LangError> {
        let ast = parse(src)?;
        let typed = typecheck(&ast)?;
        let graph = compile(&typed);
        Ok(CompiledSpec {
            ast,
            typed: Arc::new(typed),
            graph: Arc::new(graph),
        })
    }
}
