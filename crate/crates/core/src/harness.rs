//! Trace generation, lockstep comparison against the reference queue, and
//! counterexample shrinking.
//!
//! A cell is one `(m, multiplexer kind, trace)` triple. Its verdict is
//! `Exact` only when the construction produced the same departure and loss
//! packet identities as the oracle in every slot and never tripped an
//! audit. Otherwise the first offending slot is reported and the run stops.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{queue_capacity, PacketId, Priority};
use crate::oracle::PriorityQueueOracle;
use crate::pqueue::{BuildOptions, Construction, ConstructionFault, Diagnostics, InvariantPolicy, MuxKind, Mutation};
use crate::trace::{reslot, Arrival, TraceEvent};

/// Gap between consecutive generated priorities.
const PRIORITY_SPACING: Priority = 1 << 16;

pub const SWEEP_P_ARRIVAL: [f64; 4] = [0.1, 0.5, 0.9, 1.0];
pub const SWEEP_P_CONTROL: [f64; 5] = [0.0, 0.1, 0.5, 0.9, 1.0];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{name} must lie in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("unknown pattern {0:?} (expected random, burst, fill_drain or adversarial)")]
    UnknownPattern(String),
    #[error("cannot set up construction: {0}")]
    Setup(#[from] ConstructionFault),
    #[error("trace does not diverge; nothing to shrink")]
    NotDivergent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Random,
    Burst,
    FillDrain,
    Adversarial,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [Pattern::Random, Pattern::Burst, Pattern::FillDrain, Pattern::Adversarial];
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::Random => "random",
            Pattern::Burst => "burst",
            Pattern::FillDrain => "fill_drain",
            Pattern::Adversarial => "adversarial",
        })
    }
}

impl FromStr for Pattern {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.to_string() == s || p.to_string().replace('_', "-") == s)
            .ok_or_else(|| HarnessError::UnknownPattern(s.to_string()))
    }
}

/// Recipe for a generated trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSpec {
    pub pattern: Pattern,
    pub slots: usize,
    pub p_arrival: f64,
    pub p_control: f64,
    pub seed: u64,
}

impl fmt::Display for TraceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} slots={} p_arrival={} p_control={} seed={}",
            self.pattern, self.slots, self.p_arrival, self.p_control, self.seed
        )
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<(), HarnessError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(HarnessError::InvalidProbability { name, value })
    }
}

/// Widely spaced, distinct priorities in random order.
fn shuffled_priorities(n: usize, rng: &mut ChaCha8Rng) -> Vec<Priority> {
    let half = n as Priority / 2;
    let mut v: Vec<Priority> = (0..n as Priority).map(|k| (k - half) * PRIORITY_SPACING).collect();
    v.shuffle(rng);
    v
}

struct Emitter {
    events: Vec<TraceEvent>,
    next_id: u64,
}

impl Emitter {
    fn push(&mut self, priority: Option<Priority>, control: bool) {
        let arrival = priority.map(|priority| {
            self.next_id += 1;
            Arrival { id: PacketId(self.next_id), priority }
        });
        let t = self.events.len() as u64 + 1;
        self.events.push(TraceEvent { t, arrival, control });
    }

    fn len(&self) -> usize {
        self.events.len()
    }
}

/// Deterministic trace for `spec`, sized for a queue of `capacity` packets.
///
/// * `random`: independent Bernoulli arrival and control bits.
/// * `burst`: alternating runs (length 1..=2B) of arrival-only slots and
///   control-only slots, each slot within a run firing with its probability.
/// * `fill_drain`: B arrivals then B controls, repeated.
/// * `adversarial`: fills to B, then arrives every slot with a new highest
///   or new lowest priority in turn; the control bit is Bernoulli, so the
///   queue stays pinned at B either way.
pub fn gen_trace(spec: &TraceSpec, capacity: usize) -> Result<Vec<TraceEvent>, HarnessError> {
    check_probability("p_arrival", spec.p_arrival)?;
    check_probability("p_control", spec.p_control)?;
    let cap = capacity.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Emitter { events: Vec::with_capacity(spec.slots), next_id: 0 };
    match spec.pattern {
        Pattern::Random => {
            let mut prios = shuffled_priorities(spec.slots, &mut rng).into_iter();
            while out.len() < spec.slots {
                let arrive = rng.gen_bool(spec.p_arrival);
                let control = rng.gen_bool(spec.p_control);
                out.push(arrive.then(|| prios.next().unwrap()), control);
            }
        }
        Pattern::Burst => {
            let mut prios = shuffled_priorities(spec.slots, &mut rng).into_iter();
            let mut arriving = true;
            while out.len() < spec.slots {
                let run = rng.gen_range(1..=2 * cap).min(spec.slots - out.len());
                for _ in 0..run {
                    if arriving {
                        let arrive = rng.gen_bool(spec.p_arrival);
                        out.push(arrive.then(|| prios.next().unwrap()), false);
                    } else {
                        out.push(None, rng.gen_bool(spec.p_control));
                    }
                }
                arriving = !arriving;
            }
        }
        Pattern::FillDrain => {
            let mut prios = shuffled_priorities(spec.slots, &mut rng).into_iter();
            while out.len() < spec.slots {
                let phase = (out.len() / cap) % 2;
                if phase == 0 {
                    out.push(prios.next(), false);
                } else {
                    out.push(None, true);
                }
            }
        }
        Pattern::Adversarial => {
            let fill = cap.min(spec.slots);
            for p in shuffled_priorities(fill, &mut rng) {
                out.push(Some(p), false);
            }
            let mut high = (cap as Priority + 1) * PRIORITY_SPACING;
            let mut low = -high;
            let mut take_high = true;
            while out.len() < spec.slots {
                let p = if take_high {
                    high += PRIORITY_SPACING;
                    high
                } else {
                    low -= PRIORITY_SPACING;
                    low
                };
                take_high = !take_high;
                out.push(Some(p), rng.gen_bool(spec.p_control));
            }
        }
    }
    Ok(out.events)
}

/// Every combination of the given patterns, probabilities and seeds.
pub fn spec_grid(
    patterns: &[Pattern],
    p_arrival: &[f64],
    p_control: &[f64],
    seeds: Range<u64>,
    slots: usize,
) -> Vec<TraceSpec> {
    let mut out = Vec::new();
    for &pattern in patterns {
        for &pa in p_arrival {
            for &pc in p_control {
                for seed in seeds.clone() {
                    out.push(TraceSpec { pattern, slots, p_arrival: pa, p_control: pc, seed });
                }
            }
        }
    }
    out
}

/// The standard sweep recipes: every pattern, arrival and control
/// probability, with `seeds` seeds each.
pub fn standard_specs(seeds: u64, slots: usize) -> Vec<TraceSpec> {
    spec_grid(&Pattern::ALL, &SWEEP_P_ARRIVAL, &SWEEP_P_CONTROL, 0..seeds, slots)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Setup {
    pub m: u32,
    pub kind: MuxKind,
    pub mutation: Option<Mutation>,
}

impl Setup {
    pub fn new(m: u32, kind: MuxKind) -> Self {
        Setup { m, kind, mutation: None }
    }

    pub fn mutated(self, mutation: Mutation) -> Self {
        Setup { mutation: Some(mutation), ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Exact,
    Divergent,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Exact => "EXACT",
            Verdict::Divergent => "DIVERGENT",
        })
    }
}

/// Departure and loss identities of one slot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SlotOutcome {
    pub departure: Option<PacketId>,
    pub loss: Option<PacketId>,
}

impl fmt::Display for SlotOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |x: Option<PacketId>| x.map_or("-".to_string(), |p| p.to_string());
        write!(f, "D {} L {}", show(self.departure), show(self.loss))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub slot: u64,
    pub expected: SlotOutcome,
    /// `None` when the construction faulted before producing outputs.
    pub actual: Option<SlotOutcome>,
    /// One-line cause.
    pub reason: String,
    /// Full message, including any state dump.
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerdictReport {
    pub setup: Setup,
    pub descriptor: String,
    pub slots: usize,
    pub verdict: Verdict,
    pub divergence: Option<Divergence>,
    pub tallies: Diagnostics,
    pub wall: Duration,
}

impl VerdictReport {
    /// Equality on everything except wall time.
    pub fn same_outcome(&self, other: &VerdictReport) -> bool {
        self.setup == other.setup
            && self.descriptor == other.descriptor
            && self.slots == other.slots
            && self.verdict == other.verdict
            && self.divergence == other.divergence
            && self.tallies == other.tallies
    }
}

/// Runs the oracle and the construction side by side over `trace`.
pub fn differential_run(setup: &Setup, trace: &[TraceEvent], descriptor: &str) -> Result<VerdictReport, HarnessError> {
    let started = Instant::now();
    let options = BuildOptions { mutation: setup.mutation, policy: InvariantPolicy::Record };
    let mut construction = Construction::with_options(setup.m, setup.kind, options)?;
    let capacity = queue_capacity::<usize>(setup.m).map_err(ConstructionFault::from)?;
    let mut oracle = PriorityQueueOracle::new(capacity).expect("capacity is positive");

    let mut divergence = None;
    for ev in trace {
        let arrival = ev.packet();
        let t = construction.slot() + 1;
        let expected = match oracle.step(arrival, ev.control) {
            Ok(o) => SlotOutcome { departure: o.departure.map(|p| p.id), loss: o.loss.map(|p| p.id) },
            Err(e) => {
                let reason = format!("invalid trace: {e}");
                divergence = Some(Divergence {
                    slot: t,
                    expected: SlotOutcome::default(),
                    actual: None,
                    detail: reason.clone(),
                    reason,
                });
                break;
            }
        };
        match construction.step(arrival, ev.control) {
            Err(fault) => {
                divergence = Some(Divergence {
                    slot: fault.slot().unwrap_or(t),
                    expected,
                    actual: None,
                    reason: fault.headline(),
                    detail: fault.to_string(),
                });
                break;
            }
            Ok(report) => {
                let actual = SlotOutcome { departure: report.departure, loss: report.loss };
                let reason = if actual != expected {
                    Some(format!("slot {t}: expected {expected}, got {actual}"))
                } else {
                    report.violations.first().map(|v| format!("slot {t}: {v}"))
                };
                if let Some(reason) = reason {
                    let detail = format!("{reason}\n{}", construction.dump());
                    divergence = Some(Divergence { slot: t, expected, actual: Some(actual), reason, detail });
                    break;
                }
            }
        }
    }

    Ok(VerdictReport {
        setup: *setup,
        descriptor: descriptor.to_string(),
        slots: trace.len(),
        verdict: if divergence.is_some() { Verdict::Divergent } else { Verdict::Exact },
        divergence,
        tallies: *construction.diagnostics(),
        wall: started.elapsed(),
    })
}

fn diverges(setup: &Setup, events: &[TraceEvent]) -> bool {
    let mut candidate = events.to_vec();
    reslot(&mut candidate);
    differential_run(setup, &candidate, "shrink")
        .map(|r| r.verdict == Verdict::Divergent)
        .unwrap_or(false)
}

/// Reduces a diverging trace to a 1-minimal one: it still diverges, and
/// dropping any single slot (and renumbering the rest) makes it exact.
/// Delta debugging first, then single-slot removals until none applies.
pub fn shrink(trace: &[TraceEvent], setup: &Setup) -> Result<Vec<TraceEvent>, HarnessError> {
    let report = differential_run(setup, trace, "shrink")?;
    let Some(div) = report.divergence else {
        return Err(HarnessError::NotDivergent);
    };
    let mut cur: Vec<TraceEvent> = trace[..(div.slot as usize).min(trace.len())].to_vec();
    if !diverges(setup, &cur) {
        cur = trace.to_vec();
    }

    let mut n = 2usize;
    while cur.len() >= 2 {
        let len = cur.len();
        let chunk = len.div_ceil(n);
        let mut reduced = false;
        for start in (0..len).step_by(chunk) {
            let subset = &cur[start..(start + chunk).min(len)];
            if subset.len() < len && diverges(setup, subset) {
                cur = subset.to_vec();
                n = 2;
                reduced = true;
                break;
            }
        }
        if !reduced && n > 2 {
            for start in (0..len).step_by(chunk) {
                let complement: Vec<TraceEvent> =
                    cur[..start].iter().chain(&cur[(start + chunk).min(len)..]).copied().collect();
                if diverges(setup, &complement) {
                    cur = complement;
                    n = (n - 1).max(2);
                    reduced = true;
                    break;
                }
            }
        }
        if !reduced {
            if n >= len {
                break;
            }
            n = (2 * n).min(len);
        }
    }

    loop {
        let hit = (0..cur.len()).find(|&i| {
            let without: Vec<TraceEvent> = cur[..i].iter().chain(&cur[i + 1..]).copied().collect();
            diverges(setup, &without)
        });
        match hit {
            Some(i) => {
                cur.remove(i);
            }
            None => break,
        }
    }
    reslot(&mut cur);
    Ok(cur)
}

/// One sweep cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub setup: Setup,
    pub spec: TraceSpec,
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: Cell,
    pub report: VerdictReport,
    /// Shrunk trace, present for divergent cells when shrinking was requested.
    pub counterexample: Option<Vec<TraceEvent>>,
}

fn run_cell(cell: &Cell, shrink_divergent: bool) -> Result<CellResult, HarnessError> {
    let capacity = queue_capacity::<usize>(cell.setup.m).map_err(ConstructionFault::from)?;
    let trace = gen_trace(&cell.spec, capacity)?;
    let report = differential_run(&cell.setup, &trace, &cell.spec.to_string())?;
    let counterexample = if shrink_divergent && report.verdict == Verdict::Divergent {
        Some(shrink(&trace, &cell.setup)?)
    } else {
        None
    };
    Ok(CellResult { cell: *cell, report, counterexample })
}

/// Runs every cell, in parallel when `parallel` is set. Results keep the
/// order of `cells` either way.
pub fn run_cells(cells: &[Cell], shrink_divergent: bool, parallel: bool) -> Result<Vec<CellResult>, HarnessError> {
    if parallel {
        cells.par_iter().map(|c| run_cell(c, shrink_divergent)).collect()
    } else {
        cells.iter().map(|c| run_cell(c, shrink_divergent)).collect()
    }
}

/// Orders results by `(m, kind, mutation, pattern, seed, p_arrival, p_control)`.
pub fn canonical_order(results: &mut [CellResult]) {
    results.sort_by(|a, b| {
        let ka = (a.cell.setup, a.cell.spec.pattern, a.cell.spec.seed);
        let kb = (b.cell.setup, b.cell.spec.pattern, b.cell.spec.seed);
        ka.cmp(&kb)
            .then(a.cell.spec.p_arrival.total_cmp(&b.cell.spec.p_arrival))
            .then(a.cell.spec.p_control.total_cmp(&b.cell.spec.p_control))
    });
}
