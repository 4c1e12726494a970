//! Timestamped event streams and the stream algebra used by monitors.
//!
//! Every channel of a trace is an [`EventStream`]: a strictly time-ordered
//! sequence of scalar values of a single [`Kind`]. Multi-channel expressions
//! are evaluated over [`align`]ed ticks (sample-and-hold over the union of
//! timestamps) with operators applied pointwise through [`lift`].

mod align;
mod jsonl;
mod lift;
mod time;
mod window;

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use align::{align, SampleHold, Tick};
pub use jsonl::{read_trace, read_trace_file, write_trace, write_trace_file, TraceRecord};
pub use lift::{lift, ScalarOp};
pub use time::Time;
pub use window::StreamWindow;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StreamError {
    #[error("non-monotone timestamp on `{channel}`: {got} does not follow {last}")]
    NonMonotoneTimestamp { channel: String, last: Time, got: Time },
    #[error("kind mismatch{}: expected {expected}, found {found}", context.as_deref().map(|c| format!(" in {c}")).unwrap_or_default())]
    KindMismatch {
        context: Option<String>,
        expected: Kind,
        found: Kind,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid time {0}")]
    InvalidTime(String),
    #[error("trace line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}

/// Scalar kind carried by a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Int,
    Float,
    Bool,
}

impl Kind {
    pub fn is_numeric(self) -> bool {
        matches!(self, Kind::Int | Kind::Float)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Int => "Int",
            Kind::Float => "Float",
            Kind::Bool => "Bool",
        })
    }
}

/// A single scalar sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
}

impl Value {
    pub fn kind(&self) -> Kind {
        match self {
            Value::Int(_) => Kind::Int,
            Value::Real(_) => Kind::Float,
            Value::Bool(_) => Kind::Bool,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(i) => Some(i as f64),
            Value::Real(r) => Some(r),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }

    /// Bit-level identity: unlike `==`, NaN is identical to itself and
    /// `0.0` differs from `-0.0`.
    pub fn identical(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            _ => self == other,
        }
    }

    fn hash_into<H: Hasher>(&self, state: &mut H) {
        match *self {
            Value::Int(i) => (0u8, i).hash(state),
            Value::Real(r) => (1u8, r.to_bits()).hash(state),
            Value::Bool(b) => (2u8, b).hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r:?}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: Time,
    pub value: Value,
}

impl Event {
    pub fn new(t: Time, value: Value) -> Self {
        Event { t, value }
    }
}

/// Events of one named channel. Timestamps strictly increase and every event
/// has the same kind.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    channel: String,
    kind: Option<Kind>,
    events: Vec<Event>,
}

impl EventStream {
    pub fn new(channel: impl Into<String>) -> Self {
        EventStream {
            channel: channel.into(),
            kind: None,
            events: Vec::new(),
        }
    }

    /// A stream whose kind is fixed before the first event arrives.
    pub fn with_kind(channel: impl Into<String>, kind: Kind) -> Self {
        EventStream {
            kind: Some(kind),
            ..EventStream::new(channel)
        }
    }

    pub fn from_events(
        channel: impl Into<String>,
        events: impl IntoIterator<Item = Event>,
    ) -> Result<Self, StreamError> {
        let mut stream = EventStream::new(channel);
        for e in events {
            stream.append(e)?;
        }
        Ok(stream)
    }

    pub fn append(&mut self, e: Event) -> Result<(), StreamError> {
        if let Some(last) = self.events.last() {
            if e.t <= last.t {
                return Err(StreamError::NonMonotoneTimestamp {
                    channel: self.channel.clone(),
                    last: last.t,
                    got: e.t,
                });
            }
        }
        match self.kind {
            Some(kind) if kind != e.value.kind() => {
                return Err(StreamError::KindMismatch {
                    context: Some(format!("channel `{}`", self.channel)),
                    expected: kind,
                    found: e.value.kind(),
                })
            }
            Some(_) => {}
            None => self.kind = Some(e.value.kind()),
        }
        self.events.push(e);
        Ok(())
    }

    pub fn channel(&self) -> &str {
        &self.channel
    }

    pub fn kind(&self) -> Option<Kind> {
        self.kind
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn last(&self) -> Option<&Event> {
        self.events.last()
    }

    pub fn values(&self) -> impl Iterator<Item = Value> + '_ {
        self.events.iter().map(|e| e.value)
    }

    /// Value at `t` under sample-and-hold.
    pub fn value_at(&self, t: Time) -> Option<Value> {
        let idx = self.events.partition_point(|e| e.t <= t);
        idx.checked_sub(1).map(|i| self.events[i].value)
    }

    /// Events with timestamp `<= cutoff`.
    pub fn truncated(&self, cutoff: Time) -> EventStream {
        let end = self.events.partition_point(|e| e.t <= cutoff);
        EventStream {
            channel: self.channel.clone(),
            kind: self.kind,
            events: self.events[..end].to_vec(),
        }
    }

    pub fn renamed(&self, channel: impl Into<String>) -> EventStream {
        EventStream {
            channel: channel.into(),
            ..self.clone()
        }
    }

    /// Bit-identical comparison, see [`Value::identical`].
    pub fn identical(&self, other: &EventStream) -> bool {
        self.channel == other.channel
            && self.events.len() == other.events.len()
            && self
                .events
                .iter()
                .zip(&other.events)
                .all(|(a, b)| a.t == b.t && a.value.identical(&b.value))
    }

    pub(crate) fn events_mut(&mut self) -> &mut [Event] {
        &mut self.events
    }
}

/// A set of channels, keyed by channel name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    streams: BTreeMap<String, EventStream>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn from_streams(streams: impl IntoIterator<Item = EventStream>) -> Self {
        let mut trace = Trace::new();
        for s in streams {
            trace.insert(s);
        }
        trace
    }

    /// Inserts or replaces the stream for its channel.
    pub fn insert(&mut self, stream: EventStream) {
        self.streams.insert(stream.channel.clone(), stream);
    }

    /// Appends to a channel, creating it when absent.
    pub fn push(&mut self, channel: &str, e: Event) -> Result<(), StreamError> {
        if !self.streams.contains_key(channel) {
            self.streams.insert(channel.to_string(), EventStream::new(channel));
        }
        self.streams.get_mut(channel).expect("inserted").append(e)
    }

    pub fn get(&self, channel: &str) -> Option<&EventStream> {
        self.streams.get(channel)
    }

    pub(crate) fn get_mut(&mut self, channel: &str) -> Option<&mut EventStream> {
        self.streams.get_mut(channel)
    }

    pub fn channels(&self) -> impl Iterator<Item = &str> {
        self.streams.keys().map(String::as_str)
    }

    pub fn streams(&self) -> impl Iterator<Item = &EventStream> {
        self.streams.values()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.streams.values().map(EventStream::len).sum()
    }

    /// Latest timestamp over all channels.
    pub fn end_time(&self) -> Option<Time> {
        self.streams.values().filter_map(|s| s.last()).map(|e| e.t).max()
    }

    pub fn truncated(&self, cutoff: Time) -> Trace {
        Trace {
            streams: self
                .streams
                .iter()
                .map(|(k, s)| (k.clone(), s.truncated(cutoff)))
                .collect(),
        }
    }

    /// Content hash over channel names, timestamps and value bits.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for (name, s) in &self.streams {
            name.hash(&mut h);
            s.kind.hash(&mut h);
            for e in &s.events {
                e.t.hash(&mut h);
                e.value.hash_into(&mut h);
            }
        }
        h.finish()
    }

    pub fn identical(&self, other: &Trace) -> bool {
        self.streams.len() == other.streams.len()
            && self
                .streams
                .iter()
                .zip(&other.streams)
                .all(|((ka, a), (kb, b))| ka == kb && a.identical(b))
    }
}
