//! Behavioral n-to-1 FIFO multiplexer.
//!
//! A multiplexer accepts up to `n` packets per slot, releases at most one,
//! and keeps at most `B` buffered. Anything beyond `B` after the departure
//! and the appends is reported as lost, latest-appended first.

use std::collections::VecDeque;

use thiserror::Error;

use crate::model::Packet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MuxError {
    #[error("{got} arrivals on a {fan_in}-input multiplexer")]
    Overcommit { got: usize, fan_in: usize },
    #[error("multiplexer needs fan-in >= 1 and buffer >= 1 (got n={fan_in}, B={buffer})")]
    InvalidConfig { fan_in: usize, buffer: usize },
}

/// When a packet may leave relative to the slot it arrived in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Timing {
    /// Output at slot t is the head buffered at the end of t-1.
    Registered,
    /// An arrival into an empty buffer leaves in the same slot.
    CutThrough,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MuxConfig {
    pub fan_in: usize,
    pub buffer: usize,
    pub timing: Timing,
}

impl MuxConfig {
    pub fn new(fan_in: usize, buffer: usize, timing: Timing) -> Result<Self, MuxError> {
        if fan_in == 0 || buffer == 0 {
            return Err(MuxError::InvalidConfig { fan_in, buffer });
        }
        Ok(MuxConfig { fan_in, buffer, timing })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MuxOutput {
    pub departure: Option<Packet>,
    pub losses: Vec<Packet>,
}

/// Slot-stepped element with a single FIFO-ish departure stream.
pub trait Multiplexer {
    /// Departure the next step will produce, as far as it is fixed by the
    /// state at the end of the previous slot. For registered elements this
    /// is exact; a cut-through element with an empty buffer reports `None`
    /// even though a same-slot arrival could transit.
    fn scheduled_departure(&self) -> Option<&Packet>;

    fn step(&mut self, arrivals: &[Packet]) -> Result<MuxOutput, MuxError>;

    fn occupancy(&self) -> usize;

    fn fan_in(&self) -> usize;

    /// Appends every buffered packet to `out`.
    fn collect_packets(&self, out: &mut Vec<Packet>);
}

#[derive(Clone, Debug)]
pub struct FifoMux {
    config: MuxConfig,
    fifo: VecDeque<Packet>,
    slot: u64,
}

impl FifoMux {
    pub fn new(config: MuxConfig) -> Self {
        FifoMux { config, fifo: VecDeque::with_capacity(config.buffer + config.fan_in), slot: 0 }
    }

    pub fn config(&self) -> MuxConfig {
        self.config
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn head(&self) -> Option<&Packet> {
        self.fifo.front()
    }

    /// Buffered packets, oldest first.
    pub fn contents(&self) -> impl Iterator<Item = &Packet> {
        self.fifo.iter()
    }
}

impl Multiplexer for FifoMux {
    fn scheduled_departure(&self) -> Option<&Packet> {
        self.fifo.front()
    }

    fn step(&mut self, arrivals: &[Packet]) -> Result<MuxOutput, MuxError> {
        if arrivals.len() > self.config.fan_in {
            return Err(MuxError::Overcommit { got: arrivals.len(), fan_in: self.config.fan_in });
        }
        let mut out = MuxOutput::default();
        let mut rest = arrivals;
        match self.fifo.pop_front() {
            Some(head) => out.departure = Some(head),
            None if self.config.timing == Timing::CutThrough => {
                if let Some((first, tail)) = arrivals.split_first() {
                    out.departure = Some(*first);
                    rest = tail;
                }
            }
            None => {}
        }
        self.fifo.extend(rest.iter().copied());
        while self.fifo.len() > self.config.buffer {
            out.losses.extend(self.fifo.pop_back());
        }
        self.slot += 1;
        Ok(out)
    }

    fn occupancy(&self) -> usize {
        self.fifo.len()
    }

    fn fan_in(&self) -> usize {
        self.config.fan_in
    }

    fn collect_packets(&self, out: &mut Vec<Packet>) {
        out.extend(self.fifo.iter().copied());
    }
}
