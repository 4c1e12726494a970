//! Random well-typed specifications and traces shared by the property tests.
#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rvmon_core::engine::{
    interpret_reference, EngineError, GraphEvaluator, Level, MonitorOutput, OnlineMonitor, StreamBinding,
};
use rvmon_core::lang::CompiledSpec;
use rvmon_core::sim::SimConfig;
use rvmon_core::stream::{Event, EventStream, Kind, Time, Trace, Value};

const KINDS: [Kind; 3] = [Kind::Int, Kind::Float, Kind::Bool];

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    names: Vec<(String, Kind)>,
}

impl Gen<'_> {
    fn var(&mut self, kind: Kind) -> Option<String> {
        let matching: Vec<&String> = self.names.iter().filter(|(_, k)| *k == kind).map(|(n, _)| n).collect();
        matching.choose(self.rng).map(|s| s.to_string())
    }

    fn literal(&mut self, kind: Kind, allow_negative: bool) -> String {
        let neg = allow_negative && self.rng.random_bool(0.3);
        let sign = if neg { "-" } else { "" };
        match kind {
            Kind::Int => format!("{sign}{}", self.rng.random_range(0..12)),
            Kind::Float => format!(
                "{sign}{}.{}",
                self.rng.random_range(0..12),
                self.rng.random_range(0..10)
            ),
            Kind::Bool => if self.rng.random_bool(0.5) { "true" } else { "false" }.to_string(),
        }
    }

    fn numeric(&mut self) -> Kind {
        if self.rng.random_bool(0.5) {
            Kind::Int
        } else {
            Kind::Float
        }
    }

    fn leaf(&mut self, kind: Kind) -> String {
        if self.rng.random_bool(0.75) {
            if let Some(v) = self.var(kind) {
                return v;
            }
        }
        self.literal(kind, false)
    }

    /// Fully parenthesized expression of `kind`.
    fn expr(&mut self, kind: Kind, depth: u32) -> String {
        if depth == 0 || self.rng.random_bool(0.2) {
            return self.leaf(kind);
        }
        let d = depth - 1;
        let common = self.rng.random_range(0..10);
        match common {
            0 => return format!("prev({})", self.expr(kind, d)),
            1 => {
                let lit = self.literal(kind, true);
                return format!("default({}, {lit})", self.expr(kind, d));
            }
            _ => {}
        }
        match kind {
            Kind::Bool => match self.rng.random_range(0..6) {
                0 => format!("(!{})", self.expr(Kind::Bool, d)),
                1 => {
                    let op = ["&&", "||", "->"].choose(self.rng).unwrap();
                    format!("({} {op} {})", self.expr(Kind::Bool, d), self.expr(Kind::Bool, d))
                }
                2 => {
                    let op = ["==", "!="].choose(self.rng).unwrap();
                    format!("({} {op} {})", self.expr(Kind::Bool, d), self.expr(Kind::Bool, d))
                }
                _ => {
                    let op = ["<", "<=", ">", ">=", "==", "!="].choose(self.rng).unwrap();
                    let (a, b) = (self.numeric(), self.numeric());
                    format!("({} {op} {})", self.expr(a, d), self.expr(b, d))
                }
            },
            numeric => match self.rng.random_range(0..5) {
                0 => format!("(-{})", self.expr(numeric, d)),
                1 => format!("abs({})", self.expr(numeric, d)),
                _ => {
                    let op = ["+", "-", "*", "/"].choose(self.rng).unwrap();
                    let (a, b) = match numeric {
                        Kind::Int => (Kind::Int, Kind::Int),
                        _ => match self.rng.random_range(0..3) {
                            0 => (Kind::Float, Kind::Int),
                            1 => (Kind::Int, Kind::Float),
                            _ => (Kind::Float, Kind::Float),
                        },
                    };
                    format!("({} {op} {})", self.expr(a, d), self.expr(b, d))
                }
            },
        }
    }
}

/// A random well-typed specification: 1 to 3 inputs, 1 to 5 definitions, every
/// definition and at least one input as outputs.
pub fn random_spec(rng: &mut ChaCha8Rng) -> String {
    let mut g = Gen { rng, names: Vec::new() };
    let mut src = String::new();
    let n_inputs = g.rng.random_range(1..=3);
    for i in 0..n_inputs {
        let kind = *KINDS.choose(g.rng).unwrap();
        src.push_str(&format!("in i{i}: Events[{kind}]\n"));
        g.names.push((format!("i{i}"), kind));
    }
    let n_defs = g.rng.random_range(1..=5);
    for d in 0..n_defs {
        let kind = *KINDS.choose(g.rng).unwrap();
        let depth = g.rng.random_range(1..=4);
        let e = g.expr(kind, depth);
        src.push_str(&format!("def d{d} := {e}\n"));
        g.names.push((format!("d{d}"), kind));
    }
    src.push_str("out i0\n");
    for d in 0..n_defs {
        src.push_str(&format!("out d{d}\n"));
    }
    src
}

/// Random events for each input: a random subset of a jittered 0.1 s grid, so
/// channels have mixed rates and shared timestamps.
pub fn random_trace(rng: &mut ChaCha8Rng, spec: &CompiledSpec, max_ticks: u64) -> Trace {
    let ticks = rng.random_range(0..=max_ticks);
    let mut trace = Trace::new();
    for input in &spec.typed.inputs {
        let mut s = EventStream::with_kind(input.name.clone(), input.kind);
        let density = rng.random_range(0.2..=1.0);
        for k in 0..ticks {
            if !rng.random_bool(density) {
                continue;
            }
            let t = Time::from_millis(k * 100 + if rng.random_bool(0.2) { 50 } else { 0 });
            let v = random_value(rng, input.kind);
            s.append(Event::new(t, v)).unwrap();
        }
        trace.insert(s);
    }
    trace
}

pub fn random_value(rng: &mut ChaCha8Rng, kind: Kind) -> Value {
    match kind {
        Kind::Int => Value::Int(rng.random_range(-6..=6)),
        Kind::Float => Value::Real(rng.random_range(-12..=12) as f64 * 0.5),
        Kind::Bool => Value::Bool(rng.random_bool(0.5)),
    }
}

pub fn compiled_outputs(spec: &CompiledSpec, trace: &Trace) -> Result<MonitorOutput, EngineError> {
    let binding = StreamBinding::identity(&spec.typed);
    let verdict = spec.typed.outputs[0].name.clone();
    OnlineMonitor::with_evaluator(
        "compiled",
        Level::Data,
        &spec.typed,
        &binding,
        &verdict,
        GraphEvaluator::new(spec.graph.clone()),
    )?
    .run_offline(trace)
}

pub fn reference_outputs(spec: &CompiledSpec, trace: &Trace) -> Result<MonitorOutput, EngineError> {
    interpret_reference(spec.typed.clone(), &StreamBinding::identity(&spec.typed), trace)
}

/// Compiled and reference evaluation agree event for event, or fail with the
/// same error.
pub fn agree(spec: &CompiledSpec, trace: &Trace) -> Result<(), String> {
    match (compiled_outputs(spec, trace), reference_outputs(spec, trace)) {
        (Ok(a), Ok(b)) => {
            for (x, y) in a.outputs.iter().zip(&b.outputs) {
                if !x.identical(y) {
                    return Err(format!(
                        "output `{}` differs:\n{:?}\n{:?}",
                        x.channel(),
                        x.events(),
                        y.events()
                    ));
                }
            }
            if a.outputs.len() != b.outputs.len() || a.ticks_evaluated != b.ticks_evaluated {
                return Err("shape differs".into());
            }
            Ok(())
        }
        (Err(a), Err(b)) if a == b => Ok(()),
        (a, b) => Err(format!("results differ: {:?} vs {:?}", a.err(), b.err())),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unattacked scenario with speeds, gaps, geometry and reveal time drawn
/// within validity bounds. A third of the configs add sensor noise.
pub fn random_clean_config(rng: &mut ChaCha8Rng) -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.sim.seed = rng.random();
    cfg.sim.duration = Time::from_millis(rng.random_range(60..=120) * 100);
    if rng.random_bool(1.0 / 3.0) {
        cfg.sim.rel_dist_noise = rng.random_range(0.0..0.5);
        cfg.sim.rel_vel_noise = rng.random_range(0.0..0.3);
    }
    cfg.ego.v0 = rng.random_range(3.0..30.0);
    cfg.mio.lead_enabled = rng.random_bool(0.8);
    cfg.mio.lead_gap = rng.random_range(10.0..150.0);
    cfg.mio.lead_speed = rng.random_range(0.0..15.0);
    cfg.mio.pedestrian_enabled = rng.random_bool(0.7);
    cfg.mio.pedestrian_position = rng.random_range(10.0..120.0);
    cfg.mio.cross_start = rng.random_range(0.0..4.0);
    cfg.mio.lateral_offset = rng.random_range(0.0..4.0);
    cfg.mio.walk_speed = rng.random_range(0.8..2.5);
    cfg.validate().expect("generated config is valid");
    cfg
}
