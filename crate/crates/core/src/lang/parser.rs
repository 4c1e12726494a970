use std::collections::HashSet;

use super::ast::{BinaryOp, Definition, Expr, InputDecl, SpecAst, UnaryOp};
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::stream::{Kind, Value};

/// Parses specification text, resolving names as it goes: expressions may
/// only reference inputs and definitions declared by earlier statements.
pub fn parse(src: &str) -> Result<SpecAst, ParseError> {
    let tokens = tokenize(src)?;
    Parser {
        tokens,
        pos: 0,
        declared: HashSet::new(),
    }
    .spec()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    declared: HashSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.tokens[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax {
            line,
            col,
            message: format!("expected {expected}, found {}", self.peek().describe()),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            self.error(what)
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let t = self.bump();
                Ok((name, t.line, t.col))
            }
            _ => self.error("identifier"),
        }
    }

    fn declare(&mut self, name: &str, line: usize, col: usize) -> Result<(), ParseError> {
        if !self.declared.insert(name.to_string()) {
            return Err(ParseError::DuplicateName {
                name: name.to_string(),
                line,
                col,
            });
        }
        Ok(())
    }

    fn spec(mut self) -> Result<SpecAst, ParseError> {
        let mut ast = SpecAst::default();
        let mut outputs = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::In => {
                    self.bump();
                    let (name, line, col) = self.ident()?;
                    self.expect(Tok::Colon, "`:`")?;
                    let kind = self.stream_type()?;
                    self.declare(&name, line, col)?;
                    ast.inputs.push(InputDecl { name, kind });
                }
                Tok::Def => {
                    self.bump();
                    let (name, line, col) = self.ident()?;
                    self.expect(Tok::Assign, "`:=`")?;
                    let expr = self.expr()?;
                    // declared after the body so a definition cannot refer to itself
                    self.declare(&name, line, col)?;
                    ast.defs.push(Definition { name, expr });
                }
                Tok::Out => {
                    self.bump();
                    outputs.push(self.ident()?);
                }
                _ => return self.error("`in`, `def` or `out`"),
            }
        }
        let mut seen = HashSet::new();
        for (name, line, col) in outputs {
            if !self.declared.contains(&name) {
                return Err(ParseError::UnknownIdentifier { name, line, col });
            }
            if !seen.insert(name.clone()) {
                return Err(ParseError::DuplicateName { name, line, col });
            }
            ast.outputs.push(name);
        }
        Ok(ast)
    }

    fn stream_type(&mut self) -> Result<Kind, ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == "Events" => {
                self.bump();
            }
            _ => return self.error("`Events`"),
        }
        self.expect(Tok::LBracket, "`[`")?;
        let kind = match self.peek() {
            Tok::Ident(s) if s == "Int" => Kind::Int,
            Tok::Ident(s) if s == "Float" => Kind::Float,
            Tok::Ident(s) if s == "Bool" => Kind::Bool,
            _ => return self.error("`Int`, `Float` or `Bool`"),
        };
        self.bump();
        self.expect(Tok::RBracket, "`]`")?;
        Ok(kind)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or()
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            lhs = Expr::binary(BinaryOp::Or, lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            lhs = Expr::binary(BinaryOp::And, lhs, self.imp()?);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.cmp()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            return Ok(Expr::binary(BinaryOp::Implies, lhs, self.imp()?));
        }
        Ok(lhs)
    }

    fn cmp(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add()?;
        let op = match self.peek() {
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::EqEq => BinaryOp::Eq,
            Tok::Ne => BinaryOp::Ne,
            _ => return Ok(lhs),
        };
        self.bump();
        Ok(Expr::binary(op, lhs, self.add()?))
    }

    fn add(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.mul()?);
        }
    }

    fn mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let op = match self.peek() {
            Tok::Minus => UnaryOp::Neg,
            Tok::Bang => UnaryOp::Not,
            _ => return self.atom(),
        };
        self.bump();
        Ok(Expr::unary(op, self.unary()?))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::Literal(Value::Int(i)))
            }
            Tok::Real(r) => {
                self.bump();
                Ok(Expr::Literal(Value::Real(r)))
            }
            Tok::True => {
                self.bump();
                Ok(Expr::Literal(Value::Bool(true)))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::Literal(Value::Bool(false)))
            }
            Tok::Ident(name) => {
                let t = self.bump();
                if !self.declared.contains(&name) {
                    return Err(ParseError::UnknownIdentifier {
                        name,
                        line: t.line,
                        col: t.col,
                    });
                }
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Prev | Tok::Abs => {
                let is_prev = *self.peek() == Tok::Prev;
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let e = Box::new(self.expr()?);
                self.expect(Tok::RParen, "`)`")?;
                Ok(if is_prev { Expr::Prev(e) } else { Expr::Abs(e) })
            }
            Tok::Default => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let e = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let lit = self.literal()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Default(Box::new(e), lit))
            }
            _ => self.error("expression"),
        }
    }

    fn literal(&mut self) -> Result<Value, ParseError> {
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let v = match self.peek() {
            Tok::Int(i) => Value::Int(if negative { i.wrapping_neg() } else { *i }),
            Tok::Real(r) => Value::Real(if negative { -r } else { *r }),
            Tok::True if !negative => Value::Bool(true),
            Tok::False if !negative => Value::Bool(false),
            _ => return self.error("literal"),
        };
        self.bump();
        Ok(v)
    }
}
