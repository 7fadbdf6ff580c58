//! Ideal discrete-time priority queue used as the reference model.
//!
//! Each slot carries at most one arrival and one control bit. With the
//! control bit set the highest-priority packet among the buffered ones and
//! the arrival departs; without it, an arrival into a full queue causes the
//! lowest-priority packet of the same set to be lost.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{Packet, Priority};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("arrival priority {0} already buffered")]
    DuplicatePriority(Priority),
    #[error("capacity must be positive")]
    ZeroCapacity,
}

/// Cumulative `a`, `d`, `l` tallies and the current occupancy `q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FlowCounters {
    pub arrivals: u64,
    pub departures: u64,
    pub losses: u64,
    pub occupancy: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleOutput {
    pub departure: Option<Packet>,
    pub loss: Option<Packet>,
}

#[derive(Clone, Debug)]
pub struct PriorityQueueOracle {
    buffered: BTreeMap<Priority, Packet>,
    capacity: usize,
    slot: u64,
    counters: FlowCounters,
}

impl PriorityQueueOracle {
    pub fn new(capacity: usize) -> Result<Self, OracleError> {
        if capacity == 0 {
            return Err(OracleError::ZeroCapacity);
        }
        Ok(PriorityQueueOracle {
            buffered: BTreeMap::new(),
            capacity,
            slot: 0,
            counters: FlowCounters::default(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Index of the last completed slot; 0 before the first step.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn occupancy(&self) -> usize {
        self.buffered.len()
    }

    pub fn counters(&self) -> FlowCounters {
        self.counters
    }

    /// Buffered packets, highest priority first.
    pub fn buffered(&self) -> impl Iterator<Item = &Packet> {
        self.buffered.values().rev()
    }

    pub fn step(&mut self, arrival: Option<Packet>, control: bool) -> Result<OracleOutput, OracleError> {
        if let Some(a) = arrival {
            if self.buffered.contains_key(&a.priority) {
                return Err(OracleError::DuplicatePriority(a.priority));
            }
        }
        let was_full = self.buffered.len() == self.capacity;
        if let Some(a) = arrival {
            self.buffered.insert(a.priority, a);
        }
        let mut out = OracleOutput::default();
        if control {
            out.departure = self.buffered.pop_last().map(|(_, p)| p);
        } else if was_full && arrival.is_some() {
            out.loss = self.buffered.pop_first().map(|(_, p)| p);
        }

        self.slot += 1;
        let c = &mut self.counters;
        c.arrivals += arrival.is_some() as u64;
        c.departures += out.departure.is_some() as u64;
        c.losses += out.loss.is_some() as u64;
        c.occupancy = self.buffered.len();
        Ok(out)
    }
}
