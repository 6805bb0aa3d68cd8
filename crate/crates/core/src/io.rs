//! Event and sweep CSV files.
//!
//! Events: header `event_id,detector,time_fs`, rows in stream order.
//! Sweeps: header `phase_rad,heralded_d1,heralded_d2,delayed_d1,delayed_d2,total_signal`.
//! Reals are written in shortest round-trip form, so files re-parse into the
//! same records bit for bit.

use std::io::{Read, Write};

use crate::analysis::{SweepResult, SweepRow};
use crate::coincidence::{check_sorted, DetectionEvent};
use crate::error::{Error, Result};

pub const EVENT_HEADER: [&str; 3] = ["event_id", "detector", "time_fs"];
pub const SWEEP_HEADER: [&str; 6] = [
    "phase_rad",
    "heralded_d1",
    "heralded_d2",
    "delayed_d1",
    "delayed_d2",
    "total_signal",
];

pub fn write_events<W: Write>(out: W, events: &[DetectionEvent]) -> Result<()> {
    check_sorted(events, "events")?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(EVENT_HEADER)?;
    for e in events {
        w.write_record([e.event_id.to_string(), e.detector.to_string(), e.time.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn reader<R: Read>(input: R, header: &[&str]) -> Result<csv::Reader<R>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let got = r.headers()?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Csv {
            line: 1,
            msg: format!(
                "expected header `{}`, got `{}`",
                header.join(","),
                got.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(r)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line());
    let raw = rec.get(idx).ok_or_else(|| Error::Csv {
        line,
        msg: format!("missing `{name}`"),
    })?;
    raw.parse().map_err(|_| Error::Csv {
        line,
        msg: format!("invalid `{name}` value `{raw}`"),
    })
}

pub fn read_events<R: Read>(input: R) -> Result<Vec<DetectionEvent>> {
    let mut r = reader(input, &EVENT_HEADER)?;
    let mut events = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let detector = rec.get(1).unwrap_or("").parse().map_err(|e: Error| Error::Csv {
            line: rec.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        events.push(DetectionEvent {
            event_id: field(&rec, 0, "event_id")?,
            detector,
            time: field(&rec, 2, "time_fs")?,
        });
    }
    check_sorted(&events, "events")?;
    Ok(events)
}

pub fn write_sweep<W: Write>(out: W, sweep: &SweepResult) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in sweep.rows() {
        w.write_record([
            format!("{:?}", r.phase),
            r.heralded_d1.to_string(),
            r.heralded_d2.to_string(),
            r.delayed_d1.to_string(),
            r.delayed_d2.to_string(),
            r.total_signal.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep<R: Read>(input: R) -> Result<SweepResult> {
    let mut r = reader(input, &SWEEP_HEADER)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(SweepRow {
            phase: field(&rec, 0, "phase_rad")?,
            heralded_d1: field(&rec, 1, "heralded_d1")?,
            heralded_d2: field(&rec, 2, "heralded_d2")?,
            delayed_d1: field(&rec, 3, "delayed_d1")?,
            delayed_d2: field(&rec, 4, "delayed_d2")?,
            total_signal: field(&rec, 5, "total_signal")?,
        });
    }
    SweepResult::new(rows)
}
