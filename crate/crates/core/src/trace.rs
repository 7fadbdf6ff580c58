//! Per-slot stimulus and its text file format.
//!
//! One slot per line, `<t> <c> <a> [<id> <priority>]`, with `c` and `a` in
//! `{0, 1}` and the id/priority pair present iff `a = 1`. Lines starting with
//! `#` (after optional whitespace) and blank lines are ignored. Slots must
//! run 1, 2, 3, ... without gaps.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::model::{Packet, PacketId, Priority};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Arrival {
    pub id: PacketId,
    pub priority: Priority,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TraceEvent {
    pub t: u64,
    pub arrival: Option<Arrival>,
    pub control: bool,
}

impl TraceEvent {
    pub fn packet(&self) -> Option<Packet> {
        self.arrival.map(|a| Packet { id: a.id, priority: a.priority, birth_slot: self.t })
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("slot {t}: {reason}")]
    Invalid { t: u64, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Checks slot contiguity from 1 and global uniqueness of ids and priorities.
pub fn validate(events: &[TraceEvent]) -> Result<(), TraceError> {
    let mut ids = HashSet::new();
    let mut prios = HashSet::new();
    for (i, ev) in events.iter().enumerate() {
        let want = i as u64 + 1;
        if ev.t != want {
            return Err(TraceError::Invalid { t: ev.t, reason: format!("expected slot {want}") });
        }
        if let Some(a) = ev.arrival {
            if !ids.insert(a.id) {
                return Err(TraceError::Invalid { t: ev.t, reason: format!("duplicate id {}", a.id) });
            }
            if !prios.insert(a.priority) {
                return Err(TraceError::Invalid {
                    t: ev.t,
                    reason: format!("duplicate priority {}", a.priority),
                });
            }
        }
    }
    Ok(())
}

/// Renumbers slots to `1..=len`, keeping order.
pub fn reslot(events: &mut [TraceEvent]) {
    for (i, ev) in events.iter_mut().enumerate() {
        ev.t = i as u64 + 1;
    }
}

fn parse_bit(tok: &str, what: &str) -> Result<bool, String> {
    match tok {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(format!("{what} must be 0 or 1, got {tok:?}")),
    }
}

fn parse_line(text: &str) -> Result<TraceEvent, String> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let t: u64 = toks[0].parse().map_err(|_| format!("bad slot {:?}", toks[0]))?;
    if toks.len() < 3 {
        return Err("expected `<t> <c> <a> [<id> <priority>]`".into());
    }
    let control = parse_bit(toks[1], "control")?;
    let arrives = parse_bit(toks[2], "arrival flag")?;
    let arrival = match (arrives, toks.len()) {
        (false, 3) => None,
        (true, 5) => Some(Arrival {
            id: PacketId(toks[3].parse().map_err(|_| format!("bad id {:?}", toks[3]))?),
            priority: toks[4].parse().map_err(|_| format!("bad priority {:?}", toks[4]))?,
        }),
        (false, _) => return Err("id/priority given without an arrival".into()),
        (true, _) => return Err("arrival needs exactly `<id> <priority>`".into()),
    };
    Ok(TraceEvent { t, arrival, control })
}

pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<TraceEvent>, TraceError> {
    let mut events = Vec::new();
    let mut ids = HashSet::new();
    let mut prios = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fail = |reason: String| TraceError::Parse { line: lineno, reason };
        let ev = parse_line(text).map_err(fail)?;
        let want = events.len() as u64 + 1;
        if ev.t != want {
            return Err(fail(format!("slot {} out of sequence, expected {want}", ev.t)));
        }
        if let Some(a) = ev.arrival {
            if !ids.insert(a.id) {
                return Err(fail(format!("duplicate id {}", a.id)));
            }
            if !prios.insert(a.priority) {
                return Err(fail(format!("duplicate priority {}", a.priority)));
            }
        }
        events.push(ev);
    }
    Ok(events)
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceEvent>, TraceError> {
    read_trace(io::Cursor::new(text))
}

pub fn format_event(ev: &TraceEvent) -> String {
    let mut s = String::new();
    let c = ev.control as u8;
    match ev.arrival {
        Some(a) => write!(s, "{} {} 1 {} {}", ev.t, c, a.id, a.priority),
        None => write!(s, "{} {} 0", ev.t, c),
    }
    .expect("writing to a String");
    s
}

pub fn write_trace<W: Write>(mut w: W, events: &[TraceEvent], comment: Option<&str>) -> io::Result<()> {
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    for ev in events {
        writeln!(w, "{}", format_event(ev))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_skips_comments() {
        let text = "# header\n1 0 1 7 -3\n\n  # inner\n2 1 0\n";
        let evs = parse_trace(text).unwrap();
        assert_eq!(evs.len(), 2);
        assert_eq!(evs[0].arrival, Some(Arrival { id: PacketId(7), priority: -3 }));
        assert!(evs[1].control);
        assert_eq!(evs[1].arrival, None);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_trace("1 0 0\n# c\n3 0 0\n").unwrap_err();
        match err {
            TraceError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_trace("1 2 0\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        assert!(parse_trace("1 0 1 5\n").is_err());
        assert!(parse_trace("1 0 0 5 6\n").is_err());
        assert!(parse_trace("1 0 1 1 5\n2 0 1 2 5\n").is_err());
        assert!(parse_trace("1 0 1 1 5\n2 0 1 1 6\n").is_err());
        assert!(parse_trace("x 0 0\n").is_err());
    }

    #[test]
    fn writer_matches_format() {
        let evs = vec![
            TraceEvent { t: 1, arrival: Some(Arrival { id: PacketId(3), priority: 42 }), control: false },
            TraceEvent { t: 2, arrival: None, control: true },
        ];
        let mut buf = Vec::new();
        write_trace(&mut buf, &evs, Some("demo")).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# demo\n1 0 1 3 42\n2 1 0\n");
    }

    #[test]
    fn validate_catches_gaps() {
        let mut evs = vec![
            TraceEvent { t: 1, arrival: None, control: false },
            TraceEvent { t: 3, arrival: None, control: false },
        ];
        assert!(validate(&evs).is_err());
        reslot(&mut evs);
        assert!(validate(&evs).is_ok());
    }
}
