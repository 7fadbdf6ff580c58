#![allow(dead_code)]

use optiq_core::model::Packet;
use optiq_core::mux::{FifoMux, MuxConfig, Multiplexer, Timing};
use optiq_core::oracle::PriorityQueueOracle;
use optiq_core::trace::TraceEvent;

/// Single-queue FIFO reference: everything that ever entered, minus what
/// left, in arrival order.
pub struct RefFifo {
    pub fan_in: usize,
    pub buffer: usize,
    pub timing: Timing,
    pub stored: Vec<Packet>,
}

pub struct RefStep {
    pub departure: Option<Packet>,
    pub losses: Vec<Packet>,
}

impl RefFifo {
    pub fn new(fan_in: usize, buffer: usize, timing: Timing) -> Self {
        RefFifo { fan_in, buffer, timing, stored: Vec::new() }
    }

    pub fn step(&mut self, arrivals: &[Packet]) -> RefStep {
        assert!(arrivals.len() <= self.fan_in);
        let q_prev = self.stored.len();
        let mut line: Vec<Packet> = self.stored.iter().chain(arrivals).copied().collect();
        let departs = match self.timing {
            Timing::Registered => q_prev > 0,
            Timing::CutThrough => !line.is_empty(),
        };
        let departure = if departs { Some(line.remove(0)) } else { None };
        let keep = line.len().min(self.buffer);
        let mut losses = line.split_off(keep);
        losses.reverse();
        self.stored = line;
        RefStep { departure, losses }
    }
}

/// Drives a `FifoMux` and the reference side by side over `pattern`
/// (arrival counts per slot) and checks M1-M4 plus exact agreement.
pub fn check_mux_case(fan_in: usize, buffer: usize, timing: Timing, pattern: &[usize]) -> Result<(), String> {
    let mut mux = FifoMux::new(MuxConfig::new(fan_in, buffer, timing).map_err(|e| e.to_string())?);
    let mut reference = RefFifo::new(fan_in, buffer, timing);
    let mut next_id = 0u64;
    let mut arrived: Vec<u64> = Vec::new();
    let mut departed: Vec<u64> = Vec::new();
    let mut lost = 0usize;
    for (t, &n) in pattern.iter().enumerate() {
        let arrivals: Vec<Packet> = (0..n)
            .map(|_| {
                next_id += 1;
                Packet::new(next_id, next_id as i64, t as u64 + 1)
            })
            .collect();
        arrived.extend(arrivals.iter().map(|p| p.id.0));
        let q_prev = mux.occupancy();
        let out = mux.step(&arrivals).map_err(|e| e.to_string())?;
        let want = reference.step(&arrivals);
        if out.departure != want.departure || out.losses != want.losses {
            return Err(format!("slot {}: got {:?}/{:?}, reference {:?}/{:?}", t + 1, out.departure, out.losses, want.departure, want.losses));
        }
        let d = out.departure.is_some() as usize;
        // M1
        if mux.occupancy() + d + out.losses.len() != q_prev + n {
            return Err(format!("slot {}: flow conservation", t + 1));
        }
        // M2
        let should_depart = match timing {
            Timing::Registered => q_prev > 0,
            Timing::CutThrough => q_prev + n > 0,
        };
        if out.departure.is_some() != should_depart {
            return Err(format!("slot {}: non-idling", t + 1));
        }
        // M3
        let excess = (q_prev + n).saturating_sub(d + buffer);
        if out.losses.len() != excess || mux.occupancy() > buffer {
            return Err(format!("slot {}: loss count {} vs {}", t + 1, out.losses.len(), excess));
        }
        departed.extend(out.departure.map(|p| p.id.0));
        lost += out.losses.len();
    }
    // M4: departures form a subsequence of arrival order.
    let mut it = arrived.iter();
    if !departed.iter().all(|d| it.any(|a| a == d)) {
        return Err("departures out of FIFO order".into());
    }
    if departed.len() + lost + mux.occupancy() != arrived.len() {
        return Err("packets unaccounted for".into());
    }
    Ok(())
}

/// Steps the oracle through `events` and checks P1-P5 in closed form
/// against a sorted-vector model of the buffer.
pub fn check_oracle_trace(capacity: usize, events: &[TraceEvent]) -> Result<(), String> {
    let mut oracle = PriorityQueueOracle::new(capacity).map_err(|e| e.to_string())?;
    let mut model: Vec<Packet> = Vec::new();
    for ev in events {
        let q_prev = oracle.occupancy();
        let a = ev.arrival.is_some() as usize;
        let mut pool = model.clone();
        pool.extend(ev.packet());
        pool.sort_by_key(|p| std::cmp::Reverse(p.priority));

        let out = oracle.step(ev.packet(), ev.control).map_err(|e| e.to_string())?;
        let d = out.departure.is_some() as usize;
        let l = out.loss.is_some() as usize;
        let t = ev.t;
        // P1
        if oracle.occupancy() != q_prev + a - d - l {
            return Err(format!("slot {t}: P1"));
        }
        // P2
        if (d == 1) != (ev.control && q_prev + a > 0) {
            return Err(format!("slot {t}: P2"));
        }
        // P3
        if l != (q_prev + a).saturating_sub(d + capacity) {
            return Err(format!("slot {t}: P3"));
        }
        // P4
        if let Some(p) = out.departure {
            if pool.first() != Some(&p) {
                return Err(format!("slot {t}: P4"));
            }
        }
        // P5
        if let Some(p) = out.loss {
            if pool.len() != capacity + 1 || pool.last() != Some(&p) {
                return Err(format!("slot {t}: P5"));
            }
        }
        pool.retain(|p| Some(*p) != out.departure && Some(*p) != out.loss);
        model = pool;
        let buffered: Vec<Packet> = oracle.buffered().copied().collect();
        if buffered != model {
            return Err(format!("slot {t}: buffer contents"));
        }
    }
    Ok(())
}

/// Brute-force priority-queue replay: per-slot (departure id, loss id).
pub fn replay_outcomes(capacity: usize, events: &[TraceEvent]) -> Vec<(Option<u64>, Option<u64>)> {
    let mut held: Vec<Packet> = Vec::new();
    let mut out = Vec::new();
    for ev in events {
        let full = held.len() == capacity;
        held.extend(ev.packet());
        held.sort_by_key(|p| std::cmp::Reverse(p.priority));
        if ev.control && !held.is_empty() {
            out.push((Some(held.remove(0).id.0), None));
        } else if !ev.control && full && ev.arrival.is_some() {
            out.push((None, held.pop().map(|p| p.id.0)));
        } else {
            out.push((None, None));
        }
    }
    out
}

/// `(arrival?, priority, control)` triples to a trace with unique priorities:
/// colliding priorities are bumped to the next free value.
pub fn build_trace(raw: &[(bool, i64, bool)]) -> Vec<TraceEvent> {
    use optiq_core::model::PacketId;
    use optiq_core::trace::Arrival;
    let mut seen = std::collections::HashSet::new();
    let mut id = 0u64;
    raw.iter()
        .enumerate()
        .map(|(i, &(arrives, prio, control))| {
            let arrival = arrives.then(|| {
                let mut p = prio;
                while !seen.insert(p) {
                    p += 1;
                }
                id += 1;
                Arrival { id: PacketId(id), priority: p }
            });
            TraceEvent { t: i as u64 + 1, arrival, control }
        })
        .collect()
}
