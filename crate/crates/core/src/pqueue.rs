//! The switch-plus-multiplexer-groups priority queue.
//!
//! `2m - 1` groups of four 4-to-1 multiplexers sit behind one logical
//! crossbar. Every slot the switch sees the external arrival plus the head
//! of every non-empty multiplexer. It hands the departing and lost packet (if
//! any) to the outputs, ranks everything that is left, and pushes each
//! switch-resident packet into the group whose rank interval contains its
//! rank, spreading a group's inflow so its four buffers stay within one
//! packet of each other.
//!
//! Every end-of-slot audit from the correctness argument runs each slot:
//! rank windows, per-slot rank drift, intra-group balance, group and total
//! occupancy, inflow locality and magnitude, and absence of multiplexer loss.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::compose::ComposedMux;
use crate::model::{self, ModelError, Packet, PacketId, Priority, RankInterval, SystemParams};
use crate::mux::{FifoMux, MuxConfig, MuxError, MuxOutput, Multiplexer, Timing};
use crate::trace::TraceEvent;

pub const MUXES_PER_GROUP: usize = 4;
pub const MUX_FAN_IN: usize = 4;
/// Input links per group.
pub const GROUP_INPUTS: usize = MUXES_PER_GROUP * MUX_FAN_IN;
/// Inflow bound when packets only come from the external input and the
/// outputs of the neighbouring groups.
pub const LOCAL_INFLOW_BOUND: usize = 1 + 3 * MUXES_PER_GROUP;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MuxKind {
    Behavioral,
    Composed,
}

impl fmt::Display for MuxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MuxKind::Behavioral => "behavioral",
            MuxKind::Composed => "composed",
        })
    }
}

/// Deliberate construction bugs used to check that the harness notices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mutation {
    /// Rank 3 moves from group 2 to group 3.
    ShiftedPsiBoundary,
    /// Each group fills its first multiplexer before touching the next.
    NoBalancing,
    /// Routing uses ranks computed before the departure and loss leave.
    PreRemovalRanking,
    /// Each group gets the buffer of the next group toward the edge,
    /// `B_(g-1)`, which halves every buffer of size >= 2.
    UndersizedBuffers,
    /// Every buffer of size >= 2 shrinks by one. Not part of [`Mutation::ALL`]:
    /// no traffic tried so far fills a multiplexer to `B_g`, so this one
    /// behaves exactly like the real layout.
    TrimmedBuffers,
}

impl Mutation {
    pub const ALL: [Mutation; 4] = [
        Mutation::ShiftedPsiBoundary,
        Mutation::NoBalancing,
        Mutation::PreRemovalRanking,
        Mutation::UndersizedBuffers,
    ];
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mutation::ShiftedPsiBoundary => "shifted-psi-boundary",
            Mutation::NoBalancing => "no-balancing",
            Mutation::PreRemovalRanking => "pre-removal-ranking",
            Mutation::UndersizedBuffers => "undersized-buffers",
            Mutation::TrimmedBuffers => "trimmed-buffers",
        })
    }
}

impl std::str::FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mutation::ALL
            .into_iter()
            .chain([Mutation::TrimmedBuffers])
            .find(|m| m.to_string() == s)
            .ok_or_else(|| format!("unknown mutation {s:?}"))
    }
}

/// What to do when an end-of-slot audit fails.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InvariantPolicy {
    /// Stop with [`ConstructionFault::Invariant`].
    #[default]
    Abort,
    /// Keep going; violations land in the slot report and the tallies.
    Record,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    External,
    Group(usize),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::External => f.write_str("in"),
            Source::Group(g) => write!(f, "g{g}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    RankWindow { packet: PacketId, group: usize, rank: usize, window: (usize, usize) },
    RankDrift { packet: PacketId, from: usize, to: usize },
    Balance { group: usize, spread: usize },
    GroupCapacity { group: usize, occupancy: usize, bound: usize },
    TotalCapacity { occupancy: usize, capacity: usize },
    Locality { packet: PacketId, group: usize, source: Source },
    InflowAboveLocalBound { group: usize, inflow: usize },
    MuxLoss { packet: PacketId, group: usize, mux: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RankWindow { packet, group, rank, window } => write!(
                f,
                "packet {packet} in group {group} has rank {rank} outside [{}, {}]",
                window.0, window.1
            ),
            Violation::RankDrift { packet, from, to } => {
                write!(f, "packet {packet} rank moved {from} -> {to}")
            }
            Violation::Balance { group, spread } => {
                write!(f, "group {group} occupancy spread {spread}")
            }
            Violation::GroupCapacity { group, occupancy, bound } => {
                write!(f, "group {group} holds {occupancy} > {bound}")
            }
            Violation::TotalCapacity { occupancy, capacity } => {
                write!(f, "system holds {occupancy} > {capacity}")
            }
            Violation::Locality { packet, group, source } => {
                write!(f, "packet {packet} entered group {group} from {source}")
            }
            Violation::InflowAboveLocalBound { group, inflow } => {
                write!(f, "group {group} inflow {inflow} > {LOCAL_INFLOW_BOUND}")
            }
            Violation::MuxLoss { packet, group, mux } => {
                write!(f, "packet {packet} dropped by multiplexer {mux} of group {group}")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionFault {
    #[error(transparent)]
    Params(#[from] ModelError),
    #[error("slot {slot}: multiplexer fault: {source}")]
    Mux { slot: u64, source: MuxError },
    #[error("slot {slot}: duplicate live priority {priority}")]
    DuplicatePriority { slot: u64, priority: Priority },
    #[error("slot {slot}: departing packet {packet} is not on the switch\n{dump}")]
    DepartureUnreachable { slot: u64, packet: PacketId, dump: String },
    #[error("slot {slot}: lost packet {packet} is not on the switch\n{dump}")]
    LossUnreachable { slot: u64, packet: PacketId, dump: String },
    #[error("slot {slot}: packet {packet} with rank {rank} matches no group\n{dump}")]
    Unroutable { slot: u64, packet: PacketId, rank: usize, dump: String },
    #[error("slot {slot}: {inflow} packets routed to group {group} with {GROUP_INPUTS} inputs\n{dump}")]
    Collision { slot: u64, group: usize, inflow: usize, dump: String },
    #[error("slot {slot}: {violation}\n{dump}")]
    Invariant { slot: u64, violation: Violation, dump: String },
}

impl ConstructionFault {
    pub fn slot(&self) -> Option<u64> {
        match self {
            ConstructionFault::Params(_) => None,
            ConstructionFault::Mux { slot, .. }
            | ConstructionFault::DuplicatePriority { slot, .. }
            | ConstructionFault::DepartureUnreachable { slot, .. }
            | ConstructionFault::LossUnreachable { slot, .. }
            | ConstructionFault::Unroutable { slot, .. }
            | ConstructionFault::Collision { slot, .. }
            | ConstructionFault::Invariant { slot, .. } => Some(*slot),
        }
    }

    /// First line of the message, without the state dump.
    pub fn headline(&self) -> String {
        self.to_string().lines().next().unwrap_or_default().to_string()
    }
}

/// Per-slot output and diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotReport {
    pub t: u64,
    pub departure: Option<PacketId>,
    pub loss: Option<PacketId>,
    /// Packets routed into each group this slot, group 1 first.
    pub inflow: Vec<usize>,
    /// Distinct origins of those packets, per group.
    pub sources: Vec<Vec<Source>>,
    /// Largest single-group inflow since the start of the run.
    pub max_inflow: usize,
    /// End-of-slot occupancy of every multiplexer.
    pub occupancies: Vec<[usize; MUXES_PER_GROUP]>,
    pub violations: Vec<Violation>,
}

/// Running tallies over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub slots: u64,
    pub max_inflow: usize,
    pub max_spread: usize,
    pub rank_checks: u64,
    pub drift_checks: u64,
    pub rank_window_violations: u64,
    pub drift_violations: u64,
    pub balance_violations: u64,
    pub group_capacity_violations: u64,
    pub total_capacity_violations: u64,
    pub locality_violations: u64,
    pub inflow_violations: u64,
    pub mux_losses: u64,
}

impl Diagnostics {
    pub fn violations(&self) -> u64 {
        self.rank_window_violations
            + self.drift_violations
            + self.balance_violations
            + self.group_capacity_violations
            + self.total_capacity_violations
            + self.locality_violations
            + self.inflow_violations
            + self.mux_losses
    }

    fn record(&mut self, v: &Violation) {
        let slot = match v {
            Violation::RankWindow { .. } => &mut self.rank_window_violations,
            Violation::RankDrift { .. } => &mut self.drift_violations,
            Violation::Balance { .. } => &mut self.balance_violations,
            Violation::GroupCapacity { .. } => &mut self.group_capacity_violations,
            Violation::TotalCapacity { .. } => &mut self.total_capacity_violations,
            Violation::Locality { .. } => &mut self.locality_violations,
            Violation::InflowAboveLocalBound { .. } => &mut self.inflow_violations,
            Violation::MuxLoss { .. } => &mut self.mux_losses,
        };
        *slot += 1;
    }
}

/// A multiplexer slot in a group: behavioral or three-stage composed.
#[derive(Clone, Debug)]
pub enum MuxUnit {
    Behavioral(FifoMux),
    Composed(ComposedMux),
}

impl MuxUnit {
    fn new(kind: MuxKind, buffer: usize) -> Result<Self, MuxError> {
        Ok(match kind {
            MuxKind::Behavioral => {
                MuxUnit::Behavioral(FifoMux::new(MuxConfig::new(MUX_FAN_IN, buffer, Timing::Registered)?))
            }
            MuxKind::Composed => MuxUnit::Composed(ComposedMux::new(buffer)?),
        })
    }

    fn inner(&self) -> &dyn Multiplexer {
        match self {
            MuxUnit::Behavioral(m) => m,
            MuxUnit::Composed(m) => m,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Multiplexer {
        match self {
            MuxUnit::Behavioral(m) => m,
            MuxUnit::Composed(m) => m,
        }
    }
}

impl Multiplexer for MuxUnit {
    fn scheduled_departure(&self) -> Option<&Packet> {
        self.inner().scheduled_departure()
    }

    fn step(&mut self, arrivals: &[Packet]) -> Result<MuxOutput, MuxError> {
        self.inner_mut().step(arrivals)
    }

    fn occupancy(&self) -> usize {
        self.inner().occupancy()
    }

    fn fan_in(&self) -> usize {
        self.inner().fan_in()
    }

    fn collect_packets(&self, out: &mut Vec<Packet>) {
        self.inner().collect_packets(out)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildOptions {
    pub mutation: Option<Mutation>,
    pub policy: InvariantPolicy,
}

#[derive(Clone, Debug)]
pub struct Construction {
    params: SystemParams,
    kind: MuxKind,
    options: BuildOptions,
    /// Rank intervals actually used for routing; differs from the canonical
    /// layout only under a mutation.
    routing: Vec<RankInterval>,
    groups: Vec<Vec<MuxUnit>>,
    slot: u64,
    /// Priorities of the end-of-slot population, highest first.
    prev_ranked: Vec<Priority>,
    diag: Diagnostics,
}

fn rank_of(ranked: &[Packet], priority: Priority) -> Option<usize> {
    ranked.binary_search_by(|p| priority.cmp(&p.priority)).ok().map(|i| i + 1)
}

impl Construction {
    /// Empty construction for `m` with the canonical layout.
    pub fn build(m: u32, kind: MuxKind) -> Result<Self, ConstructionFault> {
        Self::with_options(m, kind, BuildOptions::default())
    }

    pub fn with_options(m: u32, kind: MuxKind, options: BuildOptions) -> Result<Self, ConstructionFault> {
        let params = SystemParams::new(m)?;
        let mut routing = params.psi().to_vec();
        let mut buffers = params.group_buffers().to_vec();
        match options.mutation {
            Some(Mutation::ShiftedPsiBoundary) if routing.len() >= 3 => {
                routing[1] = RankInterval::new(routing[1].lo(), routing[1].hi() - 1)?;
                routing[2] = RankInterval::new(routing[2].lo() - 1, routing[2].hi())?;
            }
            Some(Mutation::UndersizedBuffers) => {
                for b in buffers.iter_mut().filter(|b| **b >= 2) {
                    *b /= 2;
                }
            }
            Some(Mutation::TrimmedBuffers) => {
                for b in buffers.iter_mut().filter(|b| **b >= 2) {
                    *b -= 1;
                }
            }
            _ => {}
        }
        let groups = buffers
            .iter()
            .map(|&b| (0..MUXES_PER_GROUP).map(|_| MuxUnit::new(kind, b)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|source| ConstructionFault::Mux { slot: 0, source })?;
        Ok(Construction {
            params,
            kind,
            options,
            routing,
            groups,
            slot: 0,
            prev_ranked: Vec::new(),
            diag: Diagnostics::default(),
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn kind(&self) -> MuxKind {
        self.kind
    }

    pub fn options(&self) -> BuildOptions {
        self.options
    }

    /// Last completed slot.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diag
    }

    pub fn group(&self, g: usize) -> &[MuxUnit] {
        &self.groups[g - 1]
    }

    pub fn occupancy(&self) -> usize {
        self.groups.iter().flatten().map(|m| m.occupancy()).sum()
    }

    pub fn group_occupancy(&self, g: usize) -> usize {
        self.groups[g - 1].iter().map(|m| m.occupancy()).sum()
    }

    /// Packets currently buffered in group `g`.
    pub fn group_packets(&self, g: usize) -> Vec<Packet> {
        let mut out = Vec::new();
        for m in &self.groups[g - 1] {
            m.collect_packets(&mut out);
        }
        out
    }

    /// Human-readable snapshot of every multiplexer.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "state after slot {} (m={}, {})", self.slot, self.params.m(), self.kind);
        let mut buf = Vec::new();
        for (gi, group) in self.groups.iter().enumerate() {
            let _ = write!(s, "  group {}:", gi + 1);
            for m in group {
                buf.clear();
                m.collect_packets(&mut buf);
                let items: Vec<String> = buf.iter().map(|p| format!("{}@{}", p.id, p.priority)).collect();
                let _ = write!(s, " [{}]", items.join(" "));
            }
            s.push('\n');
        }
        s
    }

    fn violation(&mut self, t: u64, found: &mut Vec<Violation>, v: Violation) -> Result<(), ConstructionFault> {
        self.diag.record(&v);
        if self.options.policy == InvariantPolicy::Abort {
            return Err(ConstructionFault::Invariant { slot: t, violation: v, dump: self.dump() });
        }
        found.push(v);
        Ok(())
    }

    /// Advances one slot.
    pub fn step(&mut self, arrival: Option<Packet>, control: bool) -> Result<SlotReport, ConstructionFault> {
        let t = self.slot + 1;
        let capacity = self.params.capacity();
        let group_count = self.groups.len();
        let q_prev = self.occupancy();

        // Switch inputs: port 0 is the external link, then every
        // multiplexer output in group order.
        let mut switch: Vec<(Packet, Source)> = Vec::with_capacity(1 + group_count * MUXES_PER_GROUP);
        switch.extend(arrival.map(|p| (p, Source::External)));
        let mut emissions = Vec::with_capacity(group_count);
        for (gi, group) in self.groups.iter().enumerate() {
            let heads: [Option<Packet>; MUXES_PER_GROUP] =
                std::array::from_fn(|i| group[i].scheduled_departure().copied());
            switch.extend(heads.iter().flatten().map(|&p| (p, Source::Group(gi + 1))));
            emissions.push(heads);
        }

        let mut population = Vec::with_capacity(q_prev + 1);
        for m in self.groups.iter().flatten() {
            m.collect_packets(&mut population);
        }
        population.extend(arrival);
        model::sort_by_rank(&mut population).map_err(|e| match e {
            ModelError::DuplicatePriority(priority) => ConstructionFault::DuplicatePriority { slot: t, priority },
            other => ConstructionFault::Params(other),
        })?;

        let on_switch = |id: PacketId| switch.iter().any(|(p, _)| p.id == id);
        let departure = (control && !population.is_empty()).then(|| population[0]);
        if let Some(d) = departure {
            if !on_switch(d.id) {
                return Err(ConstructionFault::DepartureUnreachable { slot: t, packet: d.id, dump: self.dump() });
            }
        }
        let loss = (!control && q_prev == capacity && arrival.is_some() && population.len() > capacity)
            .then(|| population[capacity]);
        if let Some(l) = loss {
            if !on_switch(l.id) {
                return Err(ConstructionFault::LossUnreachable { slot: t, packet: l.id, dump: self.dump() });
            }
        }

        let start = departure.is_some() as usize;
        let end = population.len() - loss.is_some() as usize;
        let pre_removal = self.options.mutation == Some(Mutation::PreRemovalRanking);

        let mut inflow = vec![0usize; group_count];
        let mut sources: Vec<Vec<Source>> = vec![Vec::new(); group_count];
        let mut buckets: Vec<Vec<Packet>> = vec![Vec::new(); group_count];
        let mut found = Vec::new();
        for &(p, src) in &switch {
            if Some(p.id) == departure.map(|d| d.id) || Some(p.id) == loss.map(|l| l.id) {
                continue;
            }
            let rank = if pre_removal {
                rank_of(&population, p.priority)
            } else {
                rank_of(&population[start..end], p.priority)
            }
            .expect("switch packets are part of the population");
            let Some(g) = model::group_of_rank(&self.routing, rank) else {
                return Err(ConstructionFault::Unroutable { slot: t, packet: p.id, rank, dump: self.dump() });
            };
            inflow[g - 1] += 1;
            if !sources[g - 1].contains(&src) {
                sources[g - 1].push(src);
            }
            buckets[g - 1].push(p);
            if let Source::Group(h) = src {
                if h.abs_diff(g) > 1 {
                    self.violation(t, &mut found, Violation::Locality { packet: p.id, group: g, source: src })?;
                }
            }
        }
        for s in &mut sources {
            s.sort_unstable();
        }
        for (gi, &n) in inflow.iter().enumerate() {
            if n > GROUP_INPUTS {
                return Err(ConstructionFault::Collision { slot: t, group: gi + 1, inflow: n, dump: self.dump() });
            }
        }

        // Balancing and insertion.
        let balance = self.options.mutation != Some(Mutation::NoBalancing);
        let mut mux_lost: Vec<(PacketId, usize, usize)> = Vec::new();
        for (gi, group) in self.groups.iter_mut().enumerate() {
            let mut load: [usize; MUXES_PER_GROUP] =
                std::array::from_fn(|i| group[i].occupancy() - emissions[gi][i].is_some() as usize);
            let mut assigned: [Vec<Packet>; MUXES_PER_GROUP] = Default::default();
            for &p in &buckets[gi] {
                let open = (0..MUXES_PER_GROUP).filter(|&i| assigned[i].len() < group[i].fan_in());
                let pick = if balance {
                    open.min_by_key(|&i| (load[i], i))
                } else {
                    open.min()
                }
                .expect("inflow within group input count");
                load[pick] += 1;
                assigned[pick].push(p);
            }
            for (i, m) in group.iter_mut().enumerate() {
                let out = m.step(&assigned[i]).map_err(|source| ConstructionFault::Mux { slot: t, source })?;
                debug_assert_eq!(out.departure, emissions[gi][i]);
                mux_lost.extend(out.losses.iter().map(|p| (p.id, gi + 1, i)));
            }
        }
        self.slot = t;
        self.diag.slots = t;

        for (packet, group, mux) in mux_lost.iter().copied() {
            self.violation(t, &mut found, Violation::MuxLoss { packet, group, mux })?;
        }
        for (gi, &n) in inflow.iter().enumerate() {
            self.diag.max_inflow = self.diag.max_inflow.max(n);
            if n > LOCAL_INFLOW_BOUND {
                self.violation(t, &mut found, Violation::InflowAboveLocalBound { group: gi + 1, inflow: n })?;
            }
        }

        // End-of-slot population and its ranks.
        let mut ranked: Vec<Packet> = population[start..end].to_vec();
        if !mux_lost.is_empty() {
            ranked.retain(|p| !mux_lost.iter().any(|(id, _, _)| *id == p.id));
        }

        let occupancies: Vec<[usize; MUXES_PER_GROUP]> = self
            .groups
            .iter()
            .map(|g| std::array::from_fn(|i| g[i].occupancy()))
            .collect();
        let total: usize = occupancies.iter().flatten().sum();
        if total > capacity {
            self.violation(t, &mut found, Violation::TotalCapacity { occupancy: total, capacity })?;
        }
        for (gi, occ) in occupancies.iter().enumerate() {
            let g = gi + 1;
            let spread = occ.iter().max().unwrap() - occ.iter().min().unwrap();
            self.diag.max_spread = self.diag.max_spread.max(spread);
            if spread > 1 {
                self.violation(t, &mut found, Violation::Balance { group: g, spread })?;
            }
            let held: usize = occ.iter().sum();
            let bound = self.params.group_occupancy_bound(g);
            if held > bound {
                self.violation(t, &mut found, Violation::GroupCapacity { group: g, occupancy: held, bound })?;
            }
        }

        let mut members = Vec::new();
        for g in 1..=group_count {
            members.clear();
            for m in &self.groups[g - 1] {
                m.collect_packets(&mut members);
            }
            let window = self.params.rank_window(g);
            for p in &members {
                self.diag.rank_checks += 1;
                let rank = rank_of(&ranked, p.priority).expect("buffered packets are ranked");
                if rank < window.0 || rank > window.1 {
                    self.violation(t, &mut found, Violation::RankWindow { packet: p.id, group: g, rank, window })?;
                }
            }
        }

        let mut drifted = Vec::new();
        for (i, p) in ranked.iter().enumerate() {
            let Ok(prev) = self.prev_ranked.binary_search_by(|q| p.priority.cmp(q)) else { continue };
            self.diag.drift_checks += 1;
            let (from, to) = (prev + 1, i + 1);
            if from.abs_diff(to) > 1 {
                drifted.push(Violation::RankDrift { packet: p.id, from, to });
            }
        }
        for v in drifted {
            self.violation(t, &mut found, v)?;
        }
        self.prev_ranked.clear();
        self.prev_ranked.extend(ranked.iter().map(|p| p.priority));

        Ok(SlotReport {
            t,
            departure: departure.map(|p| p.id),
            loss: loss.map(|p| p.id),
            inflow,
            sources,
            max_inflow: self.diag.max_inflow,
            occupancies,
            violations: found,
        })
    }

    /// Steps through `trace` in order.
    pub fn run_trace(&mut self, trace: &[TraceEvent]) -> Result<Vec<SlotReport>, ConstructionFault> {
        trace.iter().map(|ev| self.step(ev.packet(), ev.control)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pk(id: u64, prio: i64) -> Packet {
        Packet::new(id, prio, 0)
    }

    #[test]
    fn build_layouts() {
        let c = Construction::build(3, MuxKind::Behavioral).unwrap();
        assert_eq!(c.params().group_count(), 5);
        assert_eq!(c.params().group_buffers(), &[1, 1, 2, 1, 1]);
        assert!((1..=5).all(|g| c.group(g).len() == 4));
        let c = Construction::build(1, MuxKind::Composed).unwrap();
        assert_eq!(c.params().group_count(), 1);
        assert_eq!(c.params().group_buffers(), &[1]);
        let c = Construction::build(4, MuxKind::Behavioral).unwrap();
        assert_eq!(c.params().group_buffers(), &[1, 1, 2, 4, 2, 1, 1]);
        assert!(matches!(Construction::build(0, MuxKind::Behavioral), Err(ConstructionFault::Params(_))));
    }

    #[test]
    fn lone_arrival_with_control_departs_directly() {
        let mut c = Construction::build(3, MuxKind::Behavioral).unwrap();
        let r = c.step(Some(pk(1, 100)), true).unwrap();
        assert_eq!(r.departure, Some(PacketId(1)));
        assert!(r.inflow.iter().all(|&n| n == 0));
        assert_eq!(c.occupancy(), 0);
    }

    #[test]
    fn lone_arrival_goes_to_group_one() {
        let mut c = Construction::build(3, MuxKind::Behavioral).unwrap();
        let r = c.step(Some(pk(1, 100)), false).unwrap();
        assert_eq!(r.inflow, vec![1, 0, 0, 0, 0]);
        assert_eq!(r.sources[0], vec![Source::External]);
        assert_eq!(c.group_occupancy(1), 1);
    }

    #[test]
    fn rank_five_lands_in_group_three() {
        let mut c = Construction::build(3, MuxKind::Behavioral).unwrap();
        for i in 0..4 {
            c.step(Some(pk(i, 1000 - 10 * i as i64)), false).unwrap();
        }
        let r = c.step(Some(pk(9, 1)), false).unwrap();
        assert_eq!(r.inflow[2], 2, "ranks 4 and 5 both belong to the third group");
        let ranks: Vec<_> = c.group_packets(3).iter().map(|p| p.id).collect();
        assert!(ranks.contains(&PacketId(9)));
    }

    #[test]
    fn full_system_drops_lowest_arrival() {
        let mut c = Construction::build(3, MuxKind::Behavioral).unwrap();
        for i in 0..10 {
            c.step(Some(pk(i, 1000 + i as i64)), false).unwrap();
        }
        assert_eq!(c.occupancy(), 10);
        let r = c.step(Some(pk(77, 5)), false).unwrap();
        assert_eq!(r.loss, Some(PacketId(77)));
        assert_eq!(r.departure, None);
        assert_eq!(c.occupancy(), 10);
    }

    #[test]
    fn duplicate_priority_faults() {
        let mut c = Construction::build(2, MuxKind::Behavioral).unwrap();
        c.step(Some(pk(1, 5)), false).unwrap();
        let err = c.step(Some(pk(2, 5)), false).unwrap_err();
        assert_eq!(err, ConstructionFault::DuplicatePriority { slot: 2, priority: 5 });
    }

    #[test]
    fn pre_removal_ranking_hits_unroutable_corner() {
        let mut c = Construction::with_options(
            2,
            MuxKind::Behavioral,
            BuildOptions { mutation: Some(Mutation::PreRemovalRanking), policy: InvariantPolicy::Record },
        )
        .unwrap();
        for i in 0..4 {
            c.step(Some(pk(i, 100 + i as i64)), false).unwrap();
        }
        let err = c.step(Some(pk(9, 1)), true).unwrap_err();
        assert!(matches!(err, ConstructionFault::Unroutable { slot: 5, rank: 5, .. }), "{err}");
    }

    #[test]
    fn fault_messages_carry_dump() {
        let mut c = Construction::build(2, MuxKind::Behavioral).unwrap();
        c.step(Some(pk(1, 5)), false).unwrap();
        let dump = c.dump();
        assert!(dump.contains("group 1: [1@5]"), "{dump}");
    }
}
