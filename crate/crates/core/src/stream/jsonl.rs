//! JSON Lines trace format: one `{"t", "channel", "value"}` object per line,
//! globally sorted by `t`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Event, StreamError, Time, Trace, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub t: Time,
    pub channel: String,
    pub value: Value,
}

pub fn read_trace(reader: impl BufRead) -> Result<Trace, StreamError> {
    let mut trace = Trace::new();
    let mut last_t = Time::ZERO;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| StreamError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord = serde_json::from_str(&line).map_err(|e| StreamError::Format {
            line: line_no,
            message: e.to_string(),
        })?;
        if rec.t < last_t {
            return Err(StreamError::Format {
                line: line_no,
                message: format!("t={} is earlier than the previous line (t={last_t})", rec.t),
            });
        }
        last_t = rec.t;
        trace
            .push(&rec.channel, Event::new(rec.t, rec.value))
            .map_err(|e| StreamError::Format {
                line: line_no,
                message: e.to_string(),
            })?;
    }
    Ok(trace)
}

pub fn read_trace_file(path: &Path) -> Result<Trace, StreamError> {
    let file = File::open(path).map_err(|e| StreamError::Io(format!("{}: {e}", path.display())))?;
    read_trace(BufReader::new(file))
}

/// Writes every event of `trace` ordered by `(t, channel)`.
pub fn write_trace(trace: &Trace, mut writer: impl Write) -> Result<(), StreamError> {
    let mut rows: Vec<(Time, &str, Value)> = trace
        .streams()
        .flat_map(|s| s.events().iter().map(move |e| (e.t, s.channel(), e.value)))
        .collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    for (t, channel, value) in rows {
        if let Value::Real(r) = value {
            if !r.is_finite() {
                return Err(StreamError::Format {
                    line: 0,
                    message: format!("non-finite value {r} on `{channel}` at t={t}"),
                });
            }
        }
        let rec = TraceRecord {
            t,
            channel: channel.to_string(),
            value,
        };
        let line = serde_json::to_string(&rec).map_err(|e| StreamError::Io(e.to_string()))?;
        writeln!(writer, "{line}").map_err(|e| StreamError::Io(e.to_string()))?;
    }
    writer.flush().map_err(|e| StreamError::Io(e.to_string()))
}

pub fn write_trace_file(trace: &Trace, path: &Path) -> Result<(), StreamError> {
    let file = File::create(path).map_err(|e| StreamError::Io(format!("{}: {e}", path.display())))?;
    write_trace(trace, BufWriter::new(file))
}
