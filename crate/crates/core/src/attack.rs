//! Attack injection: additive spoofing of sensed channels, controller output
//! clamps, and the position replay exemplar.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stream::{Event, EventStream, Kind, Time, Trace, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("unknown attack target channel `{0}`")]
    UnknownChannel(String),
    #[error("spoof window starting at {t_start} lies outside the run [0, {horizon}]")]
    ScheduleOutOfRange { t_start: Time, horizon: Time },
    #[error("spoof windows starting at {first} and {second} overlap")]
    OverlappingSchedule { first: Time, second: Time },
    #[error("clamp value {0} is not a braking stage (0..=3)")]
    InvalidClampValue(i64),
    #[error("channel `{channel}` carries {kind} values; cannot add {magnitude}")]
    NotOffsettable {
        channel: String,
        kind: Kind,
        magnitude: f64,
    },
}

/// One additive offset window. Without a duration the window covers a single
/// sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpoofWindow {
    pub t_start: Time,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<Time>,
    pub magnitude: f64,
}

impl SpoofWindow {
    pub fn new(t_start: Time, duration: Time, magnitude: f64) -> Self {
        SpoofWindow {
            t_start,
            duration: Some(duration),
            magnitude,
        }
    }

    /// Exclusive end given the sampling period.
    pub fn end(&self, sample: Time) -> Time {
        self.t_start + self.duration.unwrap_or(sample)
    }

    pub fn covers(&self, t: Time, sample: Time) -> bool {
        self.t_start <= t && t < self.end(sample)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttackSpec {
    #[default]
    None,
    DataSpoof {
        target: String,
        schedule: Vec<SpoofWindow>,
    },
    FunctionalFault {
        #[serde(default)]
        t_start: Time,
        clamp: i64,
    },
    PositionReplay,
}

impl AttackSpec {
    /// Two one-sample +12 m/s offsets on relative velocity at 3.1 s and 4.4 s.
    pub fn velocity_spoof() -> AttackSpec {
        let ms = Time::from_millis;
        AttackSpec::DataSpoof {
            target: "rel_vel".into(),
            schedule: vec![
                SpoofWindow::new(ms(3100), ms(100), 12.0),
                SpoofWindow::new(ms(4400), ms(100), 12.0),
            ],
        }
    }

    /// Braking stage held at or below 1 for the whole run.
    pub fn stage_clamp() -> AttackSpec {
        AttackSpec::FunctionalFault {
            t_start: Time::ZERO,
            clamp: 1,
        }
    }

    /// Reads an attack from TOML, either a bare table or one under `[attack]`.
    pub fn from_toml(text: &str) -> Result<AttackSpec, String> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wrapped {
            attack: AttackSpec,
        }
        match toml::from_str::<Wrapped>(text) {
            Ok(w) => Ok(w.attack),
            Err(wrapped) => toml::from_str::<AttackSpec>(text).map_err(|bare| {
                if text.contains("[attack]") {
                    wrapped.to_string()
                } else {
                    bare.to_string()
                }
            }),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AttackSpec::None => "none",
            AttackSpec::DataSpoof { .. } => "data_spoof",
            AttackSpec::FunctionalFault { .. } => "functional_fault",
            AttackSpec::PositionReplay => "position_replay",
        }
    }

    /// Checks the schedule against a run of length `horizon` sampled every
    /// `sample`.
    pub fn validate(&self, horizon: Time, sample: Time) -> Result<(), AttackError> {
        match self {
            AttackSpec::DataSpoof { schedule, .. } => validate_schedule(schedule, horizon, sample),
            AttackSpec::FunctionalFault { t_start, clamp } => {
                StageClamp::new(*t_start, *clamp)?;
                if *t_start > horizon {
                    return Err(AttackError::ScheduleOutOfRange {
                        t_start: *t_start,
                        horizon,
                    });
                }
                Ok(())
            }
            AttackSpec::None | AttackSpec::PositionReplay => Ok(()),
        }
    }
}

fn validate_schedule(schedule: &[SpoofWindow], horizon: Time, sample: Time) -> Result<(), AttackError> {
    let mut sorted: Vec<&SpoofWindow> = schedule.iter().collect();
    sorted.sort_by_key(|w| w.t_start);
    for w in &sorted {
        if w.t_start > horizon || w.magnitude.is_nan() || w.magnitude.is_infinite() {
            return Err(AttackError::ScheduleOutOfRange {
                t_start: w.t_start,
                horizon,
            });
        }
    }
    for pair in sorted.windows(2) {
        if pair[0].end(sample) > pair[1].t_start {
            return Err(AttackError::OverlappingSchedule {
                first: pair[0].t_start,
                second: pair[1].t_start,
            });
        }
    }
    Ok(())
}

/// Total offset active at `t`.
pub fn spoof_offset(schedule: &[SpoofWindow], t: Time, sample: Time) -> f64 {
    schedule
        .iter()
        .filter(|w| w.covers(t, sample))
        .map(|w| w.magnitude)
        .sum()
}

/// Applies `schedule` to `target` in a recorded trace. Timestamps and all other
/// channels are untouched. A window without duration hits only the first event
/// at or after its start.
pub fn inject_data_spoof(trace: &Trace, target: &str, schedule: &[SpoofWindow]) -> Result<Trace, AttackError> {
    let stream = trace
        .get(target)
        .ok_or_else(|| AttackError::UnknownChannel(target.to_string()))?;
    let horizon = trace.end_time().unwrap_or(Time::ZERO);
    validate_schedule(schedule, horizon, Time::from_millis(1))?;
    let mut offsets = vec![0.0; stream.len()];
    for w in schedule {
        let events = stream.events();
        let first = events.partition_point(|e| e.t < w.t_start);
        let last = match w.duration {
            Some(d) => events.partition_point(|e| e.t < w.t_start + d),
            None => (first + 1).min(events.len()),
        };
        for off in &mut offsets[first..last] {
            *off += w.magnitude;
        }
    }
    let mut out = trace.clone();
    let spoofed = out.get_mut(target).expect("target present");
    for (e, off) in spoofed.events_mut().iter_mut().zip(offsets) {
        if off == 0.0 {
            continue;
        }
        e.value = match e.value {
            Value::Real(r) => Value::Real(r + off),
            Value::Int(i) if off.fract() == 0.0 => Value::Int(i.wrapping_add(off as i64)),
            other => {
                return Err(AttackError::NotOffsettable {
                    channel: target.to_string(),
                    kind: other.kind(),
                    magnitude: off,
                })
            }
        };
    }
    Ok(out)
}

/// Controller output clamp from `t_start` onward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageClamp {
    pub t_start: Time,
    pub clamp: u8,
}

impl StageClamp {
    pub fn new(t_start: Time, clamp: i64) -> Result<Self, AttackError> {
        match u8::try_from(clamp) {
            Ok(c) if c <= 3 => Ok(StageClamp { t_start, clamp: c }),
            _ => Err(AttackError::InvalidClampValue(clamp)),
        }
    }

    pub fn apply(&self, t: Time, stage: u8) -> u8 {
        if t >= self.t_start {
            stage.min(self.clamp)
        } else {
            stage
        }
    }
}

/// Position samples `x` at 0..5 s: 1, 5, 10, 15, 100, 20 m.
pub fn position_replay() -> EventStream {
    let values = [1, 5, 10, 15, 100, 20];
    EventStream::from_events(
        "x",
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Event::new(Time::from_millis(i as u64 * 1000), Value::Int(v))),
    )
    .expect("increasing timestamps")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(v: u64) -> Time {
        Time::from_millis(v)
    }

    fn grid_trace() -> Trace {
        let mut t = Trace::new();
        for k in 0..60u64 {
            t.push("rel_vel", Event::new(ms(k * 100), Value::Real(-10.0 + k as f64 * 0.1)))
                .unwrap();
            t.push("aeb_status", Event::new(ms(k * 100), Value::Int(0))).unwrap();
        }
        t
    }

    #[test]
    fn spoof_only_inside_windows() {
        let clean = grid_trace();
        let AttackSpec::DataSpoof { schedule, .. } = AttackSpec::velocity_spoof() else {
            unreachable!()
        };
        let spoofed = inject_data_spoof(&clean, "rel_vel", &schedule).unwrap();
        assert!(spoofed
            .get("aeb_status")
            .unwrap()
            .identical(clean.get("aeb_status").unwrap()));
        let a = clean.get("rel_vel").unwrap().events();
        let b = spoofed.get("rel_vel").unwrap().events();
        let changed: Vec<u64> = a
            .iter()
            .zip(b)
            .filter(|(x, y)| x.value != y.value)
            .map(|(x, _)| x.t.as_millis())
            .collect();
        assert_eq!(changed, [3100, 4400]);
        assert!(a.iter().zip(b).all(|(x, y)| x.t == y.t));
    }

    #[test]
    fn zero_magnitude_is_identity() {
        let clean = grid_trace();
        let spoofed = inject_data_spoof(&clean, "rel_vel", &[SpoofWindow::new(ms(1000), ms(2000), 0.0)]).unwrap();
        assert!(spoofed.identical(&clean));
    }

    #[test]
    fn schedule_errors() {
        let clean = grid_trace();
        assert_eq!(
            inject_data_spoof(&clean, "speed", &[]),
            Err(AttackError::UnknownChannel("speed".into()))
        );
        assert!(matches!(
            inject_data_spoof(&clean, "rel_vel", &[SpoofWindow::new(ms(9000), ms(100), 1.0)]),
            Err(AttackError::ScheduleOutOfRange { .. })
        ));
        assert!(matches!(
            inject_data_spoof(
                &clean,
                "rel_vel",
                &[
                    SpoofWindow::new(ms(1000), ms(500), 1.0),
                    SpoofWindow::new(ms(1200), ms(100), 1.0)
                ]
            ),
            Err(AttackError::OverlappingSchedule { .. })
        ));
        assert!(matches!(
            inject_data_spoof(&clean, "aeb_status", &[SpoofWindow::new(ms(1000), ms(100), 0.5)]),
            Err(AttackError::NotOffsettable { .. })
        ));
    }

    #[test]
    fn undated_window_hits_one_sample() {
        let clean = grid_trace();
        let w = SpoofWindow {
            t_start: ms(1050),
            duration: None,
            magnitude: 2.0,
        };
        let spoofed = inject_data_spoof(&clean, "aeb_status", &[SpoofWindow { magnitude: 1.0, ..w }]).unwrap();
        let hit: Vec<_> = spoofed
            .get("aeb_status")
            .unwrap()
            .events()
            .iter()
            .filter(|e| e.value == Value::Int(1))
            .map(|e| e.t.as_millis())
            .collect();
        assert_eq!(hit, [1100]);
    }

    #[test]
    fn clamp_values() {
        assert_eq!(StageClamp::new(ms(0), 4), Err(AttackError::InvalidClampValue(4)));
        assert_eq!(StageClamp::new(ms(0), -1), Err(AttackError::InvalidClampValue(-1)));
        let c = StageClamp::new(ms(2000), 1).unwrap();
        assert_eq!(c.apply(ms(1900), 3), 3);
        assert_eq!(c.apply(ms(2000), 3), 1);
        assert_eq!(c.apply(ms(2100), 0), 0);
        let full = StageClamp::new(ms(0), 3).unwrap();
        assert!((0..=3).all(|s| full.apply(ms(0), s) == s));
    }

    #[test]
    fn replay_stream() {
        let x = position_replay();
        assert_eq!(x.len(), 6);
        assert_eq!(x.values().collect::<Vec<_>>(), [1, 5, 10, 15, 100, 20].map(Value::Int));
    }

    #[test]
    fn toml_attack_section() {
        #[derive(Deserialize)]
        struct Doc {
            attack: AttackSpec,
        }
        let doc: Doc = toml::from_str(
            "[attack]\nkind = \"data_spoof\"\ntarget = \"rel_vel\"\n\
             schedule = [{ t_start = 3.1, duration = 0.1, magnitude = 12.0 }, { t_start = 4.4, duration = 0.1, magnitude = 12.0 }]\n",
        )
        .unwrap();
        assert_eq!(doc.attack, AttackSpec::velocity_spoof());
        let doc: Doc = toml::from_str("[attack]\nkind = \"functional_fault\"\nclamp = 1\n").unwrap();
        assert_eq!(doc.attack, AttackSpec::stage_clamp());
        assert!(toml::from_str::<Doc>("[attack]\nkind = \"functional_fault\"\nclamp = 1\nextra = 2\n").is_err());
        assert_eq!(
            AttackSpec::from_toml("kind = \"functional_fault\"\nclamp = 1\n"),
            Ok(AttackSpec::stage_clamp())
        );
        assert_eq!(
            AttackSpec::from_toml("[attack]\nkind = \"none\"\n"),
            Ok(AttackSpec::None)
        );
        assert!(AttackSpec::from_toml("kind = \"meteor\"\n").is_err());
    }
}
