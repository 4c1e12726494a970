use super::{Event, EventStream, StreamError, Time, Value};

/// Values of every aligned channel at one timestamp; `None` means the channel
/// has produced no event yet.
#[derive(Debug, Clone, PartialEq)]
pub struct Tick {
    pub t: Time,
    pub values: Vec<Option<Value>>,
}

/// Incremental sample-and-hold aligner.
///
/// Events are offered in global time order (ties across channels allowed).
/// A tick is complete once an event with a later timestamp arrives, or on
/// [`SampleHold::flush`].
#[derive(Debug, Clone)]
pub struct SampleHold {
    held: Vec<Option<Value>>,
    pending: Option<Time>,
    last_event: Vec<Option<Time>>,
}

impl SampleHold {
    pub fn new(channels: usize) -> Self {
        SampleHold {
            held: vec![None; channels],
            pending: None,
            last_event: vec![None; channels],
        }
    }

    /// Feeds one event for channel `idx`; returns the previous tick when `e`
    /// starts a new one.
    pub fn offer(&mut self, idx: usize, e: Event) -> Result<Option<Tick>, StreamError> {
        if let Some(last) = self.last_event[idx] {
            if e.t <= last {
                return Err(StreamError::NonMonotoneTimestamp {
                    channel: format!("#{idx}"),
                    last,
                    got: e.t,
                });
            }
        }
        let completed = match self.pending {
            Some(p) if e.t < p => {
                return Err(StreamError::NonMonotoneTimestamp {
                    channel: format!("#{idx}"),
                    last: p,
                    got: e.t,
                })
            }
            Some(p) if e.t > p => Some(self.snapshot(p)),
            _ => None,
        };
        self.pending = Some(e.t);
        self.last_event[idx] = Some(e.t);
        self.held[idx] = Some(e.value);
        Ok(completed)
    }

    pub fn flush(&mut self) -> Option<Tick> {
        self.pending.take().map(|t| self.snapshot(t))
    }

    /// Timestamp of the tick still open for more events.
    pub fn pending(&self) -> Option<Time> {
        self.pending
    }

    fn snapshot(&self, t: Time) -> Tick {
        Tick {
            t,
            values: self.held.clone(),
        }
    }
}

/// Aligns streams over the sorted union of their timestamps, holding each
/// channel's most recent value.
pub fn align(streams: &[&EventStream]) -> Vec<Tick> {
    let mut merged: Vec<(Time, usize, Value)> = streams
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.events().iter().map(move |e| (e.t, i, e.value)))
        .collect();
    merged.sort_by_key(|&(t, i, _)| (t, i));

    let mut hold = SampleHold::new(streams.len());
    let mut ticks = Vec::new();
    for (t, i, value) in merged {
        let tick = hold
            .offer(i, Event::new(t, value))
            .expect("event streams are strictly ordered");
        ticks.extend(tick);
    }
    ticks.extend(hold.flush());
    ticks
}
