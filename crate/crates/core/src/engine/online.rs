use std::collections::BTreeMap;

use super::report::{violation_intervals, Interval};
use super::{EngineError, GraphEvaluator, Level, MonitorInstance, StreamBinding, TickEvaluator};
use crate::lang::TypedSpec;
use crate::stream::{Event, EventStream, Kind, SampleHold, Tick, Time, Trace, Value};

/// One output event produced while streaming.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub output: usize,
    pub event: Event,
}

/// Everything one monitor produced over a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorOutput {
    pub monitor: String,
    pub level: Level,
    pub verdict_channel: String,
    /// One stream per spec output, in declaration order. Undefined values are
    /// absent.
    pub outputs: Vec<EventStream>,
    pub ticks_evaluated: usize,
    /// Smallest gap between consecutive evaluated ticks.
    pub period: Option<Time>,
}

impl MonitorOutput {
    pub fn output(&self, name: &str) -> Option<&EventStream> {
        self.outputs.iter().find(|s| s.channel() == name)
    }

    /// The violation stream (`true` = violated).
    pub fn verdict(&self) -> Option<&EventStream> {
        self.output(&self.verdict_channel)
    }

    /// Negated verdict as 1/0 integers: 1 when the property holds.
    pub fn ok_flags(&self) -> EventStream {
        let mut ok = EventStream::with_kind("ok_flag", Kind::Int);
        for e in self.verdict().map(EventStream::events).unwrap_or_default() {
            let holds = e.value == Value::Bool(false);
            ok.append(Event::new(e.t, Value::Int(holds as i64)))
                .expect("verdict stream is ordered");
        }
        ok
    }

    pub fn violation_times(&self) -> Vec<Time> {
        self.verdict()
            .map(|s| {
                s.events()
                    .iter()
                    .filter(|e| e.value == Value::Bool(true))
                    .map(|e| e.t)
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn violation_intervals(&self) -> Vec<Interval> {
        match self.verdict() {
            Some(v) => violation_intervals(v, self.period),
            None => Vec::new(),
        }
    }

    /// Bit-identical comparison of all output streams.
    pub fn identical(&self, other: &MonitorOutput) -> bool {
        self.ticks_evaluated == other.ticks_evaluated
            && self.outputs.len() == other.outputs.len()
            && self.outputs.iter().zip(&other.outputs).all(|(a, b)| a.identical(b))
    }
}

/// Incremental monitor: feed events as they arrive, collect verdicts per
/// batch. Offline evaluation is a single batch followed by [`finish`].
///
/// A tick is evaluated once an event with a later timestamp arrives, since
/// other channels may still report at the same instant.
///
/// [`finish`]: OnlineMonitor::finish
#[derive(Debug, Clone)]
pub struct OnlineMonitor<E = GraphEvaluator> {
    id: String,
    level: Level,
    verdict_channel: String,
    evaluator: E,
    channels: Vec<String>,
    inputs: Vec<(String, Kind)>,
    routes: BTreeMap<String, Vec<usize>>,
    hold: SampleHold,
    outputs: Vec<EventStream>,
    ticks: usize,
    last_tick: Option<Time>,
    period: Option<Time>,
}

impl OnlineMonitor<GraphEvaluator> {
    pub fn new(monitor: &MonitorInstance) -> Result<Self, EngineError> {
        let evaluator = GraphEvaluator::new(monitor.spec.graph.clone());
        OnlineMonitor::with_evaluator(
            &monitor.id,
            monitor.level,
            &monitor.spec.typed,
            &monitor.binding,
            &monitor.verdict_channel,
            evaluator,
        )
    }
}

impl<E: TickEvaluator> OnlineMonitor<E> {
    pub fn with_evaluator(
        id: &str,
        level: Level,
        spec: &TypedSpec,
        binding: &StreamBinding,
        verdict_channel: &str,
        evaluator: E,
    ) -> Result<Self, EngineError> {
        let channels = binding.resolve(spec)?;
        let mut routes: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, ch) in channels.iter().enumerate() {
            routes.entry(ch.clone()).or_default().push(i);
        }
        Ok(OnlineMonitor {
            id: id.to_string(),
            level,
            verdict_channel: verdict_channel.to_string(),
            evaluator,
            hold: SampleHold::new(channels.len()),
            channels,
            inputs: spec.inputs.iter().map(|i| (i.name.clone(), i.kind)).collect(),
            routes,
            outputs: spec
                .outputs
                .iter()
                .map(|o| EventStream::with_kind(o.name.clone(), o.kind))
                .collect(),
            ticks: 0,
            last_tick: None,
            period: None,
        })
    }

    /// Channels this monitor reads.
    pub fn channels(&self) -> impl Iterator<Item = &str> {
        self.routes.keys().map(String::as_str)
    }

    /// Outputs produced so far.
    pub fn outputs(&self) -> &[EventStream] {
        &self.outputs
    }

    /// Feeds one event; events on unbound channels are ignored.
    pub fn push(&mut self, channel: &str, e: Event) -> Result<Vec<Emitted>, EngineError> {
        let Some(targets) = self.routes.get(channel).cloned() else {
            return Ok(Vec::new());
        };
        let mut emitted = Vec::new();
        for idx in targets {
            let (name, kind) = &self.inputs[idx];
            if e.value.kind() != *kind {
                return Err(EngineError::KindMismatch {
                    input: name.clone(),
                    channel: channel.to_string(),
                    expected: *kind,
                    found: e.value.kind(),
                });
            }
            let completed = self.hold.offer(idx, e).map_err(|err| match err {
                crate::stream::StreamError::NonMonotoneTimestamp { last, got, .. } => {
                    crate::stream::StreamError::NonMonotoneTimestamp {
                        channel: channel.to_string(),
                        last,
                        got,
                    }
                }
                other => other,
            })?;
            if let Some(tick) = completed {
                self.evaluate_tick(tick, &mut emitted)?;
            }
        }
        Ok(emitted)
    }

    pub fn push_batch<'a>(
        &mut self,
        events: impl IntoIterator<Item = (&'a str, Event)>,
    ) -> Result<Vec<Emitted>, EngineError> {
        let mut emitted = Vec::new();
        for (channel, e) in events {
            emitted.extend(self.push(channel, e)?);
        }
        Ok(emitted)
    }

    /// Evaluates the pending tick, if any, and returns the collected output.
    pub fn finish(mut self) -> Result<MonitorOutput, EngineError> {
        if let Some(tick) = self.hold.flush() {
            self.evaluate_tick(tick, &mut Vec::new())?;
        }
        Ok(MonitorOutput {
            monitor: self.id,
            level: self.level,
            verdict_channel: self.verdict_channel,
            outputs: self.outputs,
            ticks_evaluated: self.ticks,
            period: self.period,
        })
    }

    /// Validates the binding against `trace` and evaluates it as one batch.
    pub fn run_offline(mut self, trace: &Trace) -> Result<MonitorOutput, EngineError> {
        let mut merged: Vec<(Time, usize, &str, Event)> = Vec::new();
        let distinct: Vec<String> = self.routes.keys().cloned().collect();
        for (ci, channel) in distinct.iter().enumerate() {
            let idx = self.routes[channel][0];
            let stream = trace.get(channel).ok_or_else(|| EngineError::UnboundChannel {
                input: self.inputs[idx].0.clone(),
                channel: channel.clone(),
            })?;
            for &i in &self.routes[channel] {
                let (name, kind) = &self.inputs[i];
                if let Some(found) = stream.kind().filter(|k| k != kind) {
                    return Err(EngineError::KindMismatch {
                        input: name.clone(),
                        channel: channel.clone(),
                        expected: *kind,
                        found,
                    });
                }
            }
            merged.extend(stream.events().iter().map(|e| (e.t, ci, stream.channel(), *e)));
        }
        merged.sort_by_key(|&(t, ci, _, _)| (t, ci));
        for (_, _, channel, e) in merged {
            self.push(channel, e)?;
        }
        self.finish()
    }

    fn evaluate_tick(&mut self, tick: Tick, emitted: &mut Vec<Emitted>) -> Result<(), EngineError> {
        let values = self
            .evaluator
            .step(&tick.values)
            .map_err(|source| EngineError::Eval { t: tick.t, source })?;
        for (i, v) in values.into_iter().enumerate() {
            if let Some(v) = v {
                let event = Event::new(tick.t, v);
                self.outputs[i].append(event)?;
                emitted.push(Emitted { output: i, event });
            }
        }
        if let Some(last) = self.last_tick {
            let gap = tick.t - last;
            self.period = Some(self.period.map_or(gap, |p| p.min(gap)));
        }
        self.last_tick = Some(tick.t);
        self.ticks += 1;
        Ok(())
    }

    pub fn input_channels(&self) -> &[String] {
        &self.channels
    }
}

/// Runs one monitor over a recorded trace.
pub fn evaluate(monitor: &MonitorInstance, trace: &Trace) -> Result<MonitorOutput, EngineError> {
    OnlineMonitor::new(monitor)?.run_offline(trace)
}
