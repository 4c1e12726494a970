use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, EngineError, Level, MonitorInstance, MonitorOutput};
use crate::stream::{EventStream, StreamError, Time, Trace, Value};

/// Closed interval `[start, end]` of violation ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval(pub Time, pub Time);

impl Interval {
    pub fn start(&self) -> Time {
        self.0
    }

    pub fn end(&self) -> Time {
        self.1
    }
}

/// Groups `true` verdicts into intervals. Two violation ticks join when no
/// `false` verdict lies between them and they are at most `period` apart.
pub fn violation_intervals(verdict: &EventStream, period: Option<Time>) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::new();
    let mut open = false;
    for e in verdict.events() {
        match e.value {
            Value::Bool(true) => {
                let extend = open && matches!((out.last(), period), (Some(iv), Some(p)) if e.t - iv.1 <= p);
                if extend {
                    out.last_mut().expect("open interval").1 = e.t;
                } else {
                    out.push(Interval(e.t, e.t));
                }
                open = true;
            }
            _ => open = false,
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub id: String,
    pub level: Level,
    pub verdict_channel: String,
    pub intervals: Vec<Interval>,
    pub violation_ticks: usize,
    pub first_detection: Option<Time>,
    pub evaluated_ticks: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl MonitorSummary {
    pub fn detections(&self) -> usize {
        self.intervals.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub monitors: Vec<MonitorSummary>,
}

impl VerdictReport {
    pub fn monitor(&self, id: &str) -> Option<&MonitorSummary> {
        self.monitors.iter().find(|m| m.id == id)
    }

    /// Violation intervals summed over the monitors at `level`.
    pub fn detections(&self, level: Level) -> usize {
        self.monitors
            .iter()
            .filter(|m| m.level == level)
            .map(MonitorSummary::detections)
            .sum()
    }

    pub fn has_violations(&self) -> bool {
        self.monitors.iter().any(|m| m.violation_ticks > 0)
    }

    pub fn has_errors(&self) -> bool {
        self.monitors.iter().any(|m| m.error.is_some())
    }
}

#[derive(Debug, Clone)]
pub struct MonitorRun {
    pub id: String,
    pub level: Level,
    pub verdict_channel: String,
    pub result: Result<MonitorOutput, EngineError>,
}

impl MonitorRun {
    pub fn summary(&self) -> MonitorSummary {
        match &self.result {
            Ok(out) => {
                let intervals = out.violation_intervals();
                MonitorSummary {
                    id: self.id.clone(),
                    level: self.level,
                    verdict_channel: self.verdict_channel.clone(),
                    first_detection: intervals.first().map(Interval::start),
                    violation_ticks: out.violation_times().len(),
                    intervals,
                    evaluated_ticks: out.ticks_evaluated,
                    error: None,
                }
            }
            Err(e) => MonitorSummary {
                id: self.id.clone(),
                level: self.level,
                verdict_channel: self.verdict_channel.clone(),
                intervals: Vec::new(),
                violation_ticks: 0,
                first_detection: None,
                evaluated_ticks: 0,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Results of a monitor set, in the order the monitors were given.
#[derive(Debug, Clone, Default)]
pub struct SetRun {
    pub runs: Vec<MonitorRun>,
}

impl SetRun {
    pub fn report(&self) -> VerdictReport {
        VerdictReport {
            monitors: self.runs.iter().map(MonitorRun::summary).collect(),
        }
    }

    pub fn output(&self, id: &str) -> Option<&MonitorOutput> {
        self.runs
            .iter()
            .find(|r| r.id == id)
            .and_then(|r| r.result.as_ref().ok())
    }
}

/// Evaluates every monitor independently over the shared trace.
pub fn run_set(monitors: &[MonitorInstance], trace: &Trace) -> SetRun {
    let runs = monitors
        .par_iter()
        .map(|m| MonitorRun {
            id: m.id.clone(),
            level: m.level,
            verdict_channel: m.verdict_channel.clone(),
            result: evaluate(m, trace),
        })
        .collect();
    SetRun { runs }
}

/// One line of the verdict file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictRecord {
    pub t: Time,
    pub monitor: String,
    pub channel: String,
    pub value: Value,
}

/// Writes each monitor's verdict and ok-flag streams as JSON Lines, ordered
/// by time, then monitor order, verdict before ok-flag.
pub fn write_verdicts(run: &SetRun, mut writer: impl Write) -> Result<(), StreamError> {
    let mut records: Vec<(Time, usize, usize, VerdictRecord)> = Vec::new();
    for (mi, r) in run.runs.iter().enumerate() {
        let Ok(out) = &r.result else { continue };
        let ok = out.ok_flags();
        let streams = out.verdict().into_iter().chain(Some(&ok));
        for (si, s) in streams.enumerate() {
            for e in s.events() {
                records.push((
                    e.t,
                    mi,
                    si,
                    VerdictRecord {
                        t: e.t,
                        monitor: r.id.clone(),
                        channel: s.channel().to_string(),
                        value: e.value,
                    },
                ));
            }
        }
    }
    records.sort_by_key(|&(t, mi, si, _)| (t, mi, si));
    for (_, _, _, rec) in records {
        let line = serde_json::to_string(&rec).map_err(|e| StreamError::Io(e.to_string()))?;
        writeln!(writer, "{line}").map_err(|e| StreamError::Io(e.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{interpret_reference, StreamBinding};
    use crate::lang::CompiledSpec;
    use crate::stream::{Event, Kind};

    const POSITION_RATE: &str = "in x: Events[Int]\ndef attack:= x- prev(x) > 5 || x- prev(x) < -5\nout x\nout attack";
    const FCW_CONSISTENCY: &str = "in fcw_active: Events[Int]\nin aeb_status: Events[Int]\n\
        def braking := aeb_status >= 1 && aeb_status <= 3\n\
        def ok := braking -> fcw_active == 1\ndef attack := !ok\nout ok\nout attack";

    fn secs(s: u64) -> Time {
        Time::from_millis(s * 1000)
    }

    fn ints(channel: &str, vals: &[i64]) -> EventStream {
        EventStream::from_events(
            channel,
            vals.iter()
                .enumerate()
                .map(|(i, v)| Event::new(secs(i as u64), Value::Int(*v))),
        )
        .unwrap()
    }

    fn monitor(id: &str, level: Level, src: &str) -> MonitorInstance {
        MonitorInstance::with_defaults(id, level, CompiledSpec::from_source(src).unwrap()).unwrap()
    }

    fn bools(s: &EventStream) -> Vec<(u64, bool)> {
        s.events()
            .iter()
            .map(|e| (e.t.as_millis() / 1000, e.value.as_bool().unwrap()))
            .collect()
    }

    #[test]
    fn position_rate_example() {
        let trace = Trace::from_streams([ints("x", &[1, 5, 10, 15, 100, 20])]);
        let out = evaluate(&monitor("p1", Level::Data, POSITION_RATE), &trace).unwrap();
        assert_eq!(
            bools(out.verdict().unwrap()),
            [(1, false), (2, false), (3, false), (4, true), (5, true)]
        );
        assert_eq!(out.violation_intervals(), [Interval(secs(4), secs(5))]);
        let spec = CompiledSpec::from_source(POSITION_RATE).unwrap();
        let reference = interpret_reference(spec.typed.clone(), &StreamBinding::identity(&spec.typed), &trace).unwrap();
        assert!(reference.identical(&out));
    }

    #[test]
    fn table_one_ok_flags() {
        let trace = Trace::from_streams([ints("fcw_active", &[0, 0, 1, 1]), ints("aeb_status", &[0, 1, 1, 2])]);
        let out = evaluate(&monitor("p4", Level::Functional, FCW_CONSISTENCY), &trace).unwrap();
        let ok: Vec<_> = out.ok_flags().values().collect();
        assert_eq!(ok, [1, 0, 1, 1].map(Value::Int));
        assert_eq!(
            bools(out.verdict().unwrap()),
            [(0, false), (1, true), (2, false), (3, false)]
        );
    }

    #[test]
    fn empty_trace_gives_empty_verdicts() {
        let trace = Trace::from_streams([EventStream::with_kind("x", Kind::Int)]);
        let out = evaluate(&monitor("p1", Level::Data, POSITION_RATE), &trace).unwrap();
        assert!(out.verdict().unwrap().is_empty());
        assert_eq!(out.ticks_evaluated, 0);
    }

    #[test]
    fn missing_channel_is_unbound() {
        let trace = Trace::from_streams([ints("y", &[1])]);
        assert!(matches!(
            evaluate(&monitor("p1", Level::Data, POSITION_RATE), &trace),
            Err(EngineError::UnboundChannel { .. })
        ));
    }

    #[test]
    fn kind_mismatch_at_binding() {
        let trace =
            Trace::from_streams([EventStream::from_events("x", [Event::new(Time::ZERO, Value::Bool(true))]).unwrap()]);
        assert!(matches!(
            evaluate(&monitor("p1", Level::Data, POSITION_RATE), &trace),
            Err(EngineError::KindMismatch { .. })
        ));
    }

    #[test]
    fn constant_definition_every_tick() {
        let src = "in x: Events[Int]\ndef c := 5\nout c";
        let spec = CompiledSpec::from_source(src).unwrap();
        let trace = Trace::from_streams([ints("x", &[3, 1, 4])]);
        let out = interpret_reference(spec.typed.clone(), &StreamBinding::identity(&spec.typed), &trace).unwrap();
        assert_eq!(
            out.output("c").unwrap().values().collect::<Vec<_>>(),
            [Value::Int(5); 3]
        );
    }

    #[test]
    fn interval_merging() {
        let ms = Time::from_millis;
        let v = EventStream::from_events(
            "attack",
            [
                (0, false),
                (100, true),
                (200, true),
                (300, false),
                (400, true),
                (700, true),
            ]
            .map(|(t, b)| Event::new(ms(t), Value::Bool(b))),
        )
        .unwrap();
        assert_eq!(
            violation_intervals(&v, Some(ms(100))),
            [
                Interval(ms(100), ms(200)),
                Interval(ms(400), ms(400)),
                Interval(ms(700), ms(700))
            ]
        );
        assert_eq!(violation_intervals(&v, None).len(), 4);
    }

    #[test]
    fn set_isolates_failures() {
        let div = "in x: Events[Int]\ndef attack := 10 / (x - 5) > 1\nout attack";
        let trace = Trace::from_streams([ints("x", &[1, 5, 10, 15, 100, 20])]);
        let before = trace.fingerprint();
        let set = [
            monitor("bad", Level::Data, div),
            monitor("p1", Level::Data, POSITION_RATE),
        ];
        let run = run_set(&set, &trace);
        assert_eq!(trace.fingerprint(), before);
        let report = run.report();
        assert!(report.monitor("bad").unwrap().error.is_some());
        let p1 = report.monitor("p1").unwrap();
        assert_eq!(p1.first_detection, Some(secs(4)));
        assert_eq!(p1.violation_ticks, 2);
        assert_eq!(report.detections(Level::Data), 1);
        assert!(run_set(&[], &trace).report().monitors.is_empty());
    }

    #[test]
    fn verdict_lines() {
        let trace = Trace::from_streams([ints("x", &[1, 5, 100])]);
        let run = run_set(&[monitor("p1", Level::Data, POSITION_RATE)], &trace);
        let mut buf = Vec::new();
        write_verdicts(&run, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"t\":1.0,\"monitor\":\"p1\",\"channel\":\"attack\",\"value\":false}\n\
             {\"t\":1.0,\"monitor\":\"p1\",\"channel\":\"ok_flag\",\"value\":1}\n\
             {\"t\":2.0,\"monitor\":\"p1\",\"channel\":\"attack\",\"value\":true}\n\
             {\"t\":2.0,\"monitor\":\"p1\",\"channel\":\"ok_flag\",\"value\":0}\n"
        );
    }
}
