//! Run records: per-message trace records and per-cycle observations.

use std::fmt;
use std::io::Write;

use crate::error::SimError;
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Init,
    /// λ evaluated just before an internal transition.
    Output,
    Internal,
    External,
    /// `δ_G` at a coordinator.
    Global,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Init => "init",
            EventKind::Output => "output",
            EventKind::Internal => "internal",
            EventKind::External => "external",
            EventKind::Global => "global",
        })
    }
}

/// One handled message. Empty strings stand for null values.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub time: SimTime,
    pub model_path: String,
    pub kind: EventKind,
    pub state: String,
    pub output: String,
    pub y_up: String,
    pub s_g: String,
}

pub const TRACE_HEADER: [&str; 7] = ["time", "model_path", "kind", "state", "output", "y_up", "s_G"];

impl TraceRecord {
    fn fields(&self) -> [String; 7] {
        [
            self.time.to_string(),
            self.model_path.clone(),
            self.kind.to_string(),
            self.state.clone(),
            self.output.clone(),
            self.y_up.clone(),
            self.s_g.clone(),
        ]
    }
}

/// State of every leaf after one root cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub time: SimTime,
    pub output: Option<String>,
    pub states: Vec<(String, String)>,
}

pub(crate) enum TraceSink {
    Memory(Vec<TraceRecord>),
    Csv(csv::Writer<Box<dyn Write + Send>>),
}

impl TraceSink {
    pub(crate) fn csv(writer: Box<dyn Write + Send>) -> Result<Self, SimError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(TRACE_HEADER).map_err(|e| SimError::Trace(e.to_string()))?;
        Ok(TraceSink::Csv(w))
    }

    pub(crate) fn push(&mut self, record: TraceRecord) -> Result<(), SimError> {
        match self {
            TraceSink::Memory(v) => {
                v.push(record);
                Ok(())
            }
            TraceSink::Csv(w) => w.write_record(record.fields()).map_err(|e| SimError::Trace(e.to_string())),
        }
    }

    pub(crate) fn flush(&mut self) -> Result<(), SimError> {
        match self {
            TraceSink::Memory(_) => Ok(()),
            TraceSink::Csv(w) => w.flush().map_err(|e| SimError::Trace(e.to_string())),
        }
    }
}

/// Writes records in the trace CSV layout.
pub fn write_trace_csv<W: Write>(records: &[TraceRecord], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(TRACE_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}
