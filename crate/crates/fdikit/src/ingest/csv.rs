//! Canonical CSV formats for traces and phase-event logs.
//!
//! Trace files: header `t,value`, decimal point `.`, UTF-8, LF endings.
//! Event files: header `t,phase_type,boundary,instance`, boundary in
//! {start, end}. Floats are written in shortest round-trip form so
//! write(read(f)) is byte-identical for canonical files.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::trace::{
    BehaviourLabel, MetricKind, MetricTrace, PhaseBoundary, PhaseEvent, Sample,
};

pub const TRACE_HEADER: &str = "t,value";
pub const EVENT_HEADER: &str = "t,phase_type,boundary,instance";

/// Reads a trace CSV, rebases timestamps so the first sample sits at t = 0,
/// and validates the result.
pub fn read_trace_csv<T: Real>(
    path: &Path,
    metric: MetricKind,
    scenario_id: &str,
    label: BehaviourLabel,
) -> Result<MetricTrace<T>> {
    let samples = read_trace_samples(path)?;
    MetricTrace::new(scenario_id, metric, samples, label)
}

/// Parses and rebases trace samples without validating them; the `validate`
/// command uses this to report findings instead of bailing out.
pub fn read_trace_samples<T: Real>(path: &Path) -> Result<Vec<Sample<T>>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let path_str = path.display().to_string();

    let mut samples: Vec<Sample<T>> = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&*path_str, e))?;
        let lineno = idx + 1;
        if idx == 0 {
            if line != TRACE_HEADER {
                return Err(Error::Parse {
                    path: path_str,
                    line: lineno,
                    message: format!("expected header {TRACE_HEADER:?}, found {line:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (t_str, value_str) = line.split_once(',').ok_or_else(|| Error::Parse {
            path: path_str.clone(),
            line: lineno,
            message: "expected two comma-separated fields".into(),
        })?;
        let t = t_str.parse::<T>().map_err(|_| Error::Parse {
            path: path_str.clone(),
            line: lineno,
            message: format!("invalid t: {t_str:?}"),
        })?;
        let value = value_str.parse::<T>().map_err(|_| Error::Parse {
            path: path_str.clone(),
            line: lineno,
            message: format!("invalid value: {value_str:?}"),
        })?;
        samples.push(Sample::new(t, value));
    }
    if !saw_header {
        return Err(Error::Parse {
            path: path_str,
            line: 1,
            message: "file is empty".into(),
        });
    }

    // Rebase to run-relative seconds: passports compare runs of different
    // absolute times.
    if let Some(first) = samples.first().map(|s| s.t) {
        if first.is_finite() && first != T::zero() {
            for s in &mut samples {
                s.t = s.t - first;
            }
        }
    }

    Ok(samples)
}

/// Writes a trace in canonical form.
pub fn write_trace_csv<T: Real>(trace: &MetricTrace<T>, path: &Path) -> Result<()> {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for s in &trace.samples {
        out.push_str(&format!("{},{}\n", s.t, s.value));
    }
    let mut file =
        std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads a phase-event log and returns it sorted by time, with end events
/// before start events at equal timestamps (ties otherwise keep file order).
pub fn read_phase_events_csv<T: Real>(path: &Path) -> Result<Vec<PhaseEvent<T>>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let path_str = path.display().to_string();

    let mut events: Vec<PhaseEvent<T>> = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&*path_str, e))?;
        let lineno = idx + 1;
        if idx == 0 {
            if line != EVENT_HEADER {
                return Err(Error::Parse {
                    path: path_str,
                    line: lineno,
                    message: format!("expected header {EVENT_HEADER:?}, found {line:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                path: path_str.clone(),
                line: lineno,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let t = fields[0].parse::<T>().map_err(|_| Error::Parse {
            path: path_str.clone(),
            line: lineno,
            message: format!("invalid t: {:?}", fields[0]),
        })?;
        let boundary = match fields[2] {
            "start" => PhaseBoundary::Start,
            "end" => PhaseBoundary::End,
            other => {
                return Err(Error::UnknownBoundary {
                    path: path_str,
                    line: lineno,
                    token: other.to_string(),
                })
            }
        };
        let instance: u32 = fields[3].parse().map_err(|_| Error::Parse {
            path: path_str.clone(),
            line: lineno,
            message: format!("invalid instance: {:?}", fields[3]),
        })?;
        events.push(PhaseEvent {
            t,
            phase_type: fields[1].to_string(),
            boundary,
            instance,
        });
    }
    if !saw_header {
        return Err(Error::Parse {
            path: path_str,
            line: 1,
            message: "file is empty".into(),
        });
    }

    events.sort_by(|a, b| {
        a.t.partial_cmp(&b.t)
            .expect("finite event times")
            .then(a.boundary.cmp(&b.boundary))
    });
    Ok(events)
}

/// Writes a phase-event log in canonical form.
pub fn write_phase_events_csv<T: Real>(events: &[PhaseEvent<T>], path: &Path) -> Result<()> {
    let mut out = String::from(EVENT_HEADER);
    out.push('\n');
    for ev in events {
        out.push_str(&format!(
            "{},{},{},{}\n",
            ev.t, ev.phase_type, ev.boundary, ev.instance
        ));
    }
    let mut file =
        std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}
