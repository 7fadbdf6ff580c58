//! A 4-to-1 unit assembled from three 2-to-1 FIFO stages.
//!
//! Two registered front stages each take up to two of the four inputs;
//! their outputs feed a cut-through back stage. A packet buffered in a front
//! stage at the end of slot t-1 can therefore leave the unit at slot t, which
//! gives the unit the same external latency as a registered 4-to-1
//! multiplexer. Order is FIFO per front stage, not globally.

use crate::model::Packet;
use crate::mux::{FifoMux, MuxConfig, MuxError, MuxOutput, Multiplexer, Timing};

const FRONT_FAN_IN: usize = 2;

#[derive(Clone, Debug)]
pub struct ComposedMux {
    front: [FifoMux; 2],
    back: FifoMux,
    peak_occupancy: usize,
}

impl ComposedMux {
    /// Every stage gets buffer `buffer`.
    pub fn new(buffer: usize) -> Result<Self, MuxError> {
        let front = MuxConfig::new(FRONT_FAN_IN, buffer, Timing::Registered)?;
        let back = MuxConfig::new(2, buffer, Timing::CutThrough)?;
        Ok(ComposedMux {
            front: [FifoMux::new(front), FifoMux::new(front)],
            back: FifoMux::new(back),
            peak_occupancy: 0,
        })
    }

    /// Largest end-of-slot occupancy seen so far.
    pub fn peak_occupancy(&self) -> usize {
        self.peak_occupancy
    }

    pub fn front(&self, idx: usize) -> &FifoMux {
        &self.front[idx]
    }

    pub fn back(&self) -> &FifoMux {
        &self.back
    }

    /// Splits `arrivals` across the two front stages, each arrival to the
    /// stage with the lower post-emission occupancy (front 0 on ties), at
    /// most two per stage.
    fn split(&self, arrivals: &[Packet]) -> [Vec<Packet>; 2] {
        let mut load = self.front.each_ref().map(|f| f.occupancy().saturating_sub(1));
        let mut parts: [Vec<Packet>; 2] = [Vec::new(), Vec::new()];
        for &p in arrivals {
            let pick = (0..2)
                .filter(|&i| parts[i].len() < FRONT_FAN_IN)
                .min_by_key(|&i| (load[i], i))
                .expect("at most four arrivals");
            load[pick] += 1;
            parts[pick].push(p);
        }
        parts
    }
}

impl Multiplexer for ComposedMux {
    fn scheduled_departure(&self) -> Option<&Packet> {
        self.back.head().or_else(|| self.front[0].head()).or_else(|| self.front[1].head())
    }

    fn step(&mut self, arrivals: &[Packet]) -> Result<MuxOutput, MuxError> {
        if arrivals.len() > 2 * FRONT_FAN_IN {
            return Err(MuxError::Overcommit { got: arrivals.len(), fan_in: 2 * FRONT_FAN_IN });
        }
        let parts = self.split(arrivals);
        let mut losses = Vec::new();
        let mut into_back = Vec::with_capacity(2);
        for (stage, part) in self.front.iter_mut().zip(&parts) {
            let out = stage.step(part)?;
            into_back.extend(out.departure);
            losses.extend(out.losses);
        }
        let out = self.back.step(&into_back)?;
        losses.extend(out.losses);
        self.peak_occupancy = self.peak_occupancy.max(self.occupancy());
        Ok(MuxOutput { departure: out.departure, losses })
    }

    fn occupancy(&self) -> usize {
        self.front[0].occupancy() + self.front[1].occupancy() + self.back.occupancy()
    }

    fn fan_in(&self) -> usize {
        2 * FRONT_FAN_IN
    }

    fn collect_packets(&self, out: &mut Vec<Packet>) {
        self.back.collect_packets(out);
        self.front[0].collect_packets(out);
        self.front[1].collect_packets(out);
    }
}
