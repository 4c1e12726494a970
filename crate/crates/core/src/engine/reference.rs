use std::sync::Arc;

use super::online::{MonitorOutput, OnlineMonitor};
use super::{EngineError, Level, StreamBinding, TickEvaluator};
use crate::lang::{Ref, TypedExpr, TypedNode, TypedSpec};
use crate::stream::{lift, ScalarOp, StreamError, Trace, Value};

/// Tree-walking interpreter over a [`TypedSpec`].
///
/// Shares nothing with the dataflow compiler beyond the typed AST and the
/// scalar operators, so it serves as the oracle for compiled evaluation.
/// Each `prev` occurrence keeps its own buffer.
#[derive(Debug, Clone)]
pub struct ReferenceInterpreter {
    spec: Arc<TypedSpec>,
    defs: Vec<Option<Value>>,
    last_defined: Vec<Option<Value>>,
    seen_now: Vec<Option<Value>>,
}

impl ReferenceInterpreter {
    pub fn new(spec: Arc<TypedSpec>) -> Self {
        ReferenceInterpreter {
            defs: vec![None; spec.defs.len()],
            last_defined: vec![None; spec.prev_slots],
            seen_now: vec![None; spec.prev_slots],
            spec,
        }
    }

    fn eval(&mut self, e: &TypedExpr, inputs: &[Option<Value>]) -> Result<Option<Value>, StreamError> {
        match &e.node {
            TypedNode::Const(v) => Ok(Some(*v)),
            TypedNode::Ref(Ref::Input(i)) => Ok(inputs[*i]),
            TypedNode::Ref(Ref::Def(i)) => Ok(self.defs[*i]),
            TypedNode::Unary(op, a) => {
                let a = self.eval(a, inputs)?;
                lift(*op, &[a])
            }
            TypedNode::Binary(op, a, b) => {
                let a = self.eval(a, inputs)?;
                let b = self.eval(b, inputs)?;
                match op {
                    ScalarOp::Implies => {
                        let not_a = lift(ScalarOp::Not, &[a])?;
                        lift(ScalarOp::Or, &[not_a, b])
                    }
                    _ => lift(*op, &[a, b]),
                }
            }
            TypedNode::Prev { slot, operand } => {
                self.seen_now[*slot] = self.eval(operand, inputs)?;
                Ok(self.last_defined[*slot])
            }
            TypedNode::Default(a, c) => Ok(self.eval(a, inputs)?.or(Some(*c))),
        }
    }
}

impl TickEvaluator for ReferenceInterpreter {
    fn step(&mut self, inputs: &[Option<Value>]) -> Result<Vec<Option<Value>>, StreamError> {
        let spec = Arc::clone(&self.spec);
        for (i, def) in spec.defs.iter().enumerate() {
            self.defs[i] = self.eval(&def.expr, inputs)?;
        }
        for (slot, seen) in self.last_defined.iter_mut().zip(self.seen_now.iter_mut()) {
            if let Some(v) = seen.take() {
                *slot = Some(v);
            }
        }
        Ok(spec
            .outputs
            .iter()
            .map(|o| match o.source {
                Ref::Input(i) => inputs[i],
                Ref::Def(i) => self.defs[i],
            })
            .collect())
    }
}

/// Evaluates `spec` over `trace` with the reference interpreter. Returns
/// every output stream; the verdict slot is the spec's default verdict when
/// it has one, otherwise the first output.
pub fn interpret_reference(
    spec: Arc<TypedSpec>,
    binding: &StreamBinding,
    trace: &Trace,
) -> Result<MonitorOutput, EngineError> {
    let verdict = super::default_verdict(&spec)
        .or_else(|| spec.outputs.first().map(|o| o.name.clone()))
        .unwrap_or_default();
    let evaluator = ReferenceInterpreter::new(Arc::clone(&spec));
    let monitor = OnlineMonitor::with_evaluator("reference", Level::Data, &spec, binding, &verdict, evaluator)?;
    monitor.run_offline(trace)
}
