//! Slot-level simulation and differential verification of an optical
//! priority queue assembled from a crossbar switch and groups of FIFO
//! multiplexers.
//!
//! The pieces, bottom up:
//!
//! * [`model`]: packets, ranks, rank intervals and buffer sizing.
//! * [`oracle`]: the ideal priority queue used as the reference.
//! * [`mux`] and [`compose`]: behavioral and three-stage 4-to-1 multiplexers.
//! * [`pqueue`]: the construction itself, with per-slot invariant audits.
//! * [`harness`]: trace generation, lockstep comparison and shrinking.
//! * [`cost`]: closed-form hardware tallies.

pub mod compose;
pub mod cost;
pub mod harness;
pub mod model;
pub mod mux;
pub mod num;
pub mod oracle;
pub mod pqueue;
pub mod report;
pub mod trace;

pub use model::{Packet, PacketId, Priority, SystemParams};
pub use pqueue::{Construction, MuxKind, Mutation};

/// Cost sheet in 64-bit arithmetic, enough for every `m` the simulator runs.
pub type CostSheet = cost::CostSheet<u64>;
/// Cost sheet in 128-bit arithmetic for very large `m`.
pub type WideCostSheet = cost::CostSheet<u128>;
/// Rank interval over machine-sized ranks.
pub type RankInterval = model::RankInterval<usize>;
