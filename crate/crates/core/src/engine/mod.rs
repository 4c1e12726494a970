//! Online evaluation of compiled monitors and multilevel monitor sets.
//!
//! A [`MonitorInstance`] pairs a compiled specification with a
//! [`StreamBinding`] that selects its input channels from a shared trace.
//! [`evaluate`] runs one monitor; [`run_set`] runs several independently and
//! aggregates a [`VerdictReport`]. Verdict polarity: `true` means violated.

mod eval;
mod online;
mod reference;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{GraphEvaluator, TickEvaluator};
pub use online::{evaluate, Emitted, MonitorOutput, OnlineMonitor};
pub use reference::{interpret_reference, ReferenceInterpreter};
pub use report::{
    run_set, violation_intervals, write_verdicts, Interval, MonitorRun, MonitorSummary, SetRun, VerdictRecord,
    VerdictReport,
};

use crate::lang::{CompiledSpec, TypedSpec};
use crate::stream::{Kind, StreamError, Time};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("input `{input}` is bound to channel `{channel}`, which is not in the trace")]
    UnboundChannel { input: String, channel: String },
    #[error("input `{input}` has no channel binding")]
    MissingBinding { input: String },
    #[error("binding names `{0}`, which is not an input of the specification")]
    UnknownInput(String),
    #[error("channel `{channel}` carries {found} but input `{input}` is declared {expected}")]
    KindMismatch {
        input: String,
        channel: String,
        expected: Kind,
        found: Kind,
    },
    #[error("verdict output `{0}` is not a Bool output of the specification")]
    InvalidVerdict(String),
    #[error("evaluation failed at t={t}: {source}")]
    Eval { t: Time, source: StreamError },
    #[error("stream error: {0}")]
    Stream(#[from] StreamError),
}

/// Monitor placement in the multilevel architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Integrity of sensed and fused data.
    Data,
    /// Input/output relationships of a controller.
    Functional,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Data => "data",
            Level::Functional => "functional",
        })
    }
}

impl FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "data" | "dm" => Ok(Level::Data),
            "functional" | "fm" => Ok(Level::Functional),
            other => Err(format!("unknown monitor level `{other}`")),
        }
    }
}

/// Spec input name to trace channel name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StreamBinding {
    map: BTreeMap<String, String>,
}

impl StreamBinding {
    /// Binds every input to the channel of the same name.
    pub fn identity(spec: &TypedSpec) -> Self {
        StreamBinding {
            map: spec.inputs.iter().map(|i| (i.name.clone(), i.name.clone())).collect(),
        }
    }

    /// Identity binding with the given overrides.
    pub fn with_overrides<'a>(
        spec: &TypedSpec,
        overrides: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, EngineError> {
        let mut binding = StreamBinding::identity(spec);
        for (input, channel) in overrides {
            if !binding.map.contains_key(input) {
                return Err(EngineError::UnknownInput(input.to_string()));
            }
            binding.map.insert(input.to_string(), channel.to_string());
        }
        Ok(binding)
    }

    pub fn bind(mut self, input: &str, channel: &str) -> Self {
        self.map.insert(input.to_string(), channel.to_string());
        self
    }

    pub fn channel(&self, input: &str) -> Option<&str> {
        self.map.get(input).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Channel for each declared input, in declaration order.
    pub fn resolve(&self, spec: &TypedSpec) -> Result<Vec<String>, EngineError> {
        if let Some(extra) = self.map.keys().find(|k| !spec.inputs.iter().any(|i| &i.name == *k)) {
            return Err(EngineError::UnknownInput(extra.clone()));
        }
        spec.inputs
            .iter()
            .map(|i| {
                self.channel(&i.name)
                    .map(str::to_string)
                    .ok_or_else(|| EngineError::MissingBinding { input: i.name.clone() })
            })
            .collect()
    }
}

/// One monitor of a monitor set.
#[derive(Debug, Clone)]
pub struct MonitorInstance {
    pub id: String,
    pub level: Level,
    pub spec: CompiledSpec,
    pub binding: StreamBinding,
    pub verdict_channel: String,
}

impl MonitorInstance {
    pub fn new(
        id: impl Into<String>,
        level: Level,
        spec: CompiledSpec,
        binding: StreamBinding,
        verdict_channel: impl Into<String>,
    ) -> Result<Self, EngineError> {
        let verdict_channel = verdict_channel.into();
        match spec.typed.output(&verdict_channel) {
            Some(o) if o.kind == Kind::Bool => {}
            _ => return Err(EngineError::InvalidVerdict(verdict_channel)),
        }
        binding.resolve(&spec.typed)?;
        Ok(MonitorInstance {
            id: id.into(),
            level,
            spec,
            binding,
            verdict_channel,
        })
    }

    /// Identity binding and the conventional verdict output: `attack` when
    /// present, otherwise the only Bool output.
    pub fn with_defaults(id: impl Into<String>, level: Level, spec: CompiledSpec) -> Result<Self, EngineError> {
        let verdict = default_verdict(&spec.typed).ok_or_else(|| EngineError::InvalidVerdict("attack".into()))?;
        let binding = StreamBinding::identity(&spec.typed);
        MonitorInstance::new(id, level, spec, binding, verdict)
    }
}

pub fn default_verdict(spec: &TypedSpec) -> Option<String> {
    if let Some(o) = spec.output("attack") {
        return (o.kind == Kind::Bool).then(|| o.name.clone());
    }
    let mut bools = spec.outputs.iter().filter(|o| o.kind == Kind::Bool);
    match (bools.next(), bools.next()) {
        (Some(o), None) => Some(o.name.clone()),
        _ => None,
    }
}
