use std::sync::Arc;

use crate::lang::{DataflowGraph, NodeOp};
use crate::stream::{lift, StreamError, Value};

/// Per-tick evaluation of a specification over sample-and-hold inputs.
pub trait TickEvaluator {
    /// Computes every output for one tick. `inputs` follow the declaration
    /// order of the specification's inputs.
    fn step(&mut self, inputs: &[Option<Value>]) -> Result<Vec<Option<Value>>, StreamError>;
}

/// Evaluates a compiled [`DataflowGraph`]: nodes are visited in topological
/// order, then the `prev` buffers are updated for the next tick.
#[derive(Debug, Clone)]
pub struct GraphEvaluator {
    graph: Arc<DataflowGraph>,
    values: Vec<Option<Value>>,
    last_defined: Vec<Option<Value>>,
}

impl GraphEvaluator {
    pub fn new(graph: Arc<DataflowGraph>) -> Self {
        let n = graph.nodes.len();
        GraphEvaluator {
            graph,
            values: vec![None; n],
            last_defined: vec![None; n],
        }
    }
}

impl TickEvaluator for GraphEvaluator {
    fn step(&mut self, inputs: &[Option<Value>]) -> Result<Vec<Option<Value>>, StreamError> {
        for (id, node) in self.graph.nodes.iter().enumerate() {
            let v = match node.op {
                NodeOp::Source(i) => inputs[i],
                NodeOp::Const(c) => Some(c),
                NodeOp::Unary(op, a) => lift(op, &[self.values[a]])?,
                NodeOp::Binary(op, a, b) => lift(op, &[self.values[a], self.values[b]])?,
                NodeOp::Prev(a) => self.last_defined[a],
                NodeOp::Default(a, c) => self.values[a].or(Some(c)),
            };
            self.values[id] = v;
        }
        for (slot, v) in self.last_defined.iter_mut().zip(&self.values) {
            if v.is_some() {
                *slot = *v;
            }
        }
        Ok(self.graph.sinks.iter().map(|s| self.values[s.node]).collect())
    }
}
