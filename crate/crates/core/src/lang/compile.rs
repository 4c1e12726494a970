use std::collections::HashMap;

use super::ast::InputDecl;
use super::typecheck::{Ref, TypedExpr, TypedNode, TypedSpec};
use crate::stream::{Kind, ScalarOp, Value};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum NodeOp {
    /// Input stream by declaration index.
    Source(usize),
    Const(Value),
    Unary(ScalarOp, NodeId),
    Binary(ScalarOp, NodeId, NodeId),
    /// Last defined value of the operand at an earlier tick.
    Prev(NodeId),
    Default(NodeId, Value),
}

impl NodeOp {
    pub fn operands(&self) -> Vec<NodeId> {
        match *self {
            NodeOp::Source(_) | NodeOp::Const(_) => vec![],
            NodeOp::Unary(_, a) | NodeOp::Prev(a) | NodeOp::Default(a, _) => vec![a],
            NodeOp::Binary(_, a, b) => vec![a, b],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub op: NodeOp,
    pub kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sink {
    pub name: String,
    pub node: NodeId,
    pub kind: Kind,
}

/// Compiled monitor. Nodes are stored in topological order: every operand id
/// is smaller than the id of the node using it.
#[derive(Debug, Clone, PartialEq)]
pub struct DataflowGraph {
    pub nodes: Vec<Node>,
    pub inputs: Vec<InputDecl>,
    pub sinks: Vec<Sink>,
    /// Node computing each definition, in declaration order.
    pub definitions: Vec<(String, NodeId)>,
}

impl DataflowGraph {
    pub fn sink(&self, name: &str) -> Option<&Sink> {
        self.sinks.iter().find(|s| s.name == name)
    }

    pub fn count(&self, pred: impl Fn(&NodeOp) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(&n.op)).count()
    }

    /// Checks the structural invariants: topological order and operand kinds.
    pub fn validate(&self) -> Result<(), String> {
        for (id, node) in self.nodes.iter().enumerate() {
            let ops = node.op.operands();
            if let Some(bad) = ops.iter().find(|&&o| o >= id) {
                return Err(format!("node {id} depends on later node {bad}"));
            }
            let kind_ok = match node.op {
                NodeOp::Source(i) => self.inputs.get(i).is_some_and(|d| d.kind == node.kind),
                NodeOp::Const(v) => v.kind() == node.kind,
                NodeOp::Prev(a) => self.nodes[a].kind == node.kind,
                NodeOp::Default(a, v) => self.nodes[a].kind == node.kind && v.kind() == node.kind,
                NodeOp::Unary(op, a) => {
                    let k = self.nodes[a].kind;
                    k == node.kind
                        && match op {
                            ScalarOp::Not => k == Kind::Bool,
                            _ => k.is_numeric(),
                        }
                }
                NodeOp::Binary(op, a, b) => {
                    let (ka, kb) = (self.nodes[a].kind, self.nodes[b].kind);
                    match op {
                        ScalarOp::And | ScalarOp::Or | ScalarOp::Implies => {
                            ka == Kind::Bool && kb == Kind::Bool && node.kind == Kind::Bool
                        }
                        ScalarOp::Eq | ScalarOp::Ne => {
                            node.kind == Kind::Bool && ((ka.is_numeric() && kb.is_numeric()) || (ka == kb))
                        }
                        ScalarOp::Lt | ScalarOp::Le | ScalarOp::Gt | ScalarOp::Ge => {
                            node.kind == Kind::Bool && ka.is_numeric() && kb.is_numeric()
                        }
                        _ => {
                            let want = if ka == Kind::Int && kb == Kind::Int {
                                Kind::Int
                            } else {
                                Kind::Float
                            };
                            ka.is_numeric() && kb.is_numeric() && node.kind == want
                        }
                    }
                }
            };
            if !kind_ok {
                return Err(format!("node {id} ({:?}) is ill-kinded", node.op));
            }
        }
        for s in &self.sinks {
            if s.node >= self.nodes.len() || self.nodes[s.node].kind != s.kind {
                return Err(format!("sink `{}` is dangling or ill-kinded", s.name));
            }
        }
        Ok(())
    }
}

/// Hash-consing key: structurally equal operators share one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum NodeKey {
    Source(usize),
    Const(Kind, u64),
    Unary(ScalarOp, NodeId),
    Binary(ScalarOp, NodeId, NodeId),
    Prev(NodeId),
    Default(NodeId, Kind, u64),
}

fn value_bits(v: Value) -> (Kind, u64) {
    match v {
        Value::Int(i) => (Kind::Int, i as u64),
        Value::Real(r) => (Kind::Float, r.to_bits()),
        Value::Bool(b) => (Kind::Bool, b as u64),
    }
}

impl NodeKey {
    fn of(op: &NodeOp) -> NodeKey {
        match *op {
            NodeOp::Source(i) => NodeKey::Source(i),
            NodeOp::Const(v) => {
                let (k, b) = value_bits(v);
                NodeKey::Const(k, b)
            }
            NodeOp::Unary(o, a) => NodeKey::Unary(o, a),
            NodeOp::Binary(o, a, b) => NodeKey::Binary(o, a, b),
            NodeOp::Prev(a) => NodeKey::Prev(a),
            NodeOp::Default(a, v) => {
                let (k, b) = value_bits(v);
                NodeKey::Default(a, k, b)
            }
        }
    }
}

struct Builder {
    nodes: Vec<Node>,
    interned: HashMap<NodeKey, NodeId>,
    defs: Vec<NodeId>,
}

impl Builder {
    fn add(&mut self, op: NodeOp, kind: Kind) -> NodeId {
        let key = NodeKey::of(&op);
        if let Some(&id) = self.interned.get(&key) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(Node { op, kind });
        self.interned.insert(key, id);
        id
    }

    fn resolve(&self, r: Ref) -> NodeId {
        match r {
            // sources are created first, one per input, in declaration order
            Ref::Input(i) => i,
            Ref::Def(i) => self.defs[i],
        }
    }

    fn lower(&mut self, e: &TypedExpr) -> NodeId {
        match &e.node {
            TypedNode::Const(v) => self.add(NodeOp::Const(*v), e.kind),
            TypedNode::Ref(r) => self.resolve(*r),
            TypedNode::Unary(op, a) => {
                let a = self.lower(a);
                self.add(NodeOp::Unary(*op, a), e.kind)
            }
            TypedNode::Binary(ScalarOp::Implies, a, b) => {
                let a = self.lower(a);
                let b = self.lower(b);
                let not_a = self.add(NodeOp::Unary(ScalarOp::Not, a), Kind::Bool);
                self.add(NodeOp::Binary(ScalarOp::Or, not_a, b), Kind::Bool)
            }
            TypedNode::Binary(op, a, b) => {
                let a = self.lower(a);
                let b = self.lower(b);
                self.add(NodeOp::Binary(*op, a, b), e.kind)
            }
            TypedNode::Prev { operand, .. } => {
                let a = self.lower(operand);
                self.add(NodeOp::Prev(a), e.kind)
            }
            TypedNode::Default(a, v) => {
                let a = self.lower(a);
                self.add(NodeOp::Default(a, *v), e.kind)
            }
        }
    }
}

/// Lowers a typed specification to a shared-subexpression dataflow graph.
/// Implication is desugared to `!a || b`.
pub fn compile(spec: &TypedSpec) -> DataflowGraph {
    let mut b = Builder {
        nodes: Vec::new(),
        interned: HashMap::new(),
        defs: Vec::with_capacity(spec.defs.len()),
    };
    for (i, input) in spec.inputs.iter().enumerate() {
        b.add(NodeOp::Source(i), input.kind);
    }
    let mut definitions = Vec::with_capacity(spec.defs.len());
    for def in &spec.defs {
        let id = b.lower(&def.expr);
        b.defs.push(id);
        definitions.push((def.name.clone(), id));
    }
    let sinks = spec
        .outputs
        .iter()
        .map(|o| Sink {
            name: o.name.clone(),
            node: b.resolve(o.source),
            kind: o.kind,
        })
        .collect();
    DataflowGraph {
        nodes: b.nodes,
        inputs: spec.inputs.clone(),
        sinks,
        definitions,
    }
}
