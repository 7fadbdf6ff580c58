//! Packets, ranks, and the sizing formulas of the multiplexer-group layout.
//!
//! Ranks are 1-based: the live packet with the largest priority value has
//! rank 1. The rank range `1..=B` is split into `2m - 1` consecutive
//! intervals, one per multiplexer group; the lower half doubles in width
//! group by group and the upper half mirrors it.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::num::Count;

/// Larger value means more urgent.
pub type Priority = i64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PacketId(pub u64);

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Packet {
    pub id: PacketId,
    pub priority: Priority,
    /// Slot in which the packet arrived at the system.
    pub birth_slot: u64,
}

impl Packet {
    pub fn new(id: u64, priority: Priority, birth_slot: u64) -> Self {
        Packet { id: PacketId(id), priority, birth_slot }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("m must be at least 1, got {0}")]
    InvalidM(u32),
    #[error("group index {g} out of range 1..={max} for m={m}")]
    GroupOutOfRange { g: usize, m: u32, max: usize },
    #[error("formula overflows the scalar type for m={0}")]
    Overflow(u32),
    #[error("two live packets share priority {0}")]
    DuplicatePriority(Priority),
    #[error("invalid rank interval [{lo}, {hi}]")]
    InvalidInterval { lo: String, hi: String },
}

/// Inclusive range of ranks, `1 <= lo <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RankInterval<T = usize> {
    lo: T,
    hi: T,
}

impl<T: Count> RankInterval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self, ModelError> {
        if lo < T::one() || hi < lo {
            return Err(ModelError::InvalidInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        Ok(RankInterval { lo, hi })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn len(&self) -> T {
        self.hi - self.lo + T::one()
    }

    pub fn contains(&self, rank: T) -> bool {
        self.lo <= rank && rank <= self.hi
    }
}

fn check_m(m: u32) -> Result<(), ModelError> {
    if m == 0 {
        Err(ModelError::InvalidM(m))
    } else {
        Ok(())
    }
}

/// `3 * 2^(m-1)` evaluated in `T`.
fn three_halves_pow<T: Count>(m: u32) -> Result<T, ModelError> {
    T::pow2(m - 1)
        .and_then(|p| p.checked_mul(&T::lift(3)?))
        .ok_or(ModelError::Overflow(m))
}

/// Buffer size of the ideal priority queue emulated with parameter `m`:
/// `3 * 2^(m-1) - 2`.
pub fn queue_capacity<T: Count>(m: u32) -> Result<T, ModelError> {
    check_m(m)?;
    let two = T::lift(2).ok_or(ModelError::Overflow(m))?;
    three_halves_pow::<T>(m)?.checked_sub(&two).ok_or(ModelError::Overflow(m))
}

/// The `2m - 1` rank intervals, group 1 first.
pub fn psi_partition<T: Count>(m: u32) -> Result<Vec<RankInterval<T>>, ModelError> {
    check_m(m)?;
    let overflow = || ModelError::Overflow(m);
    let one = T::one();
    let mut out = Vec::with_capacity(2 * m as usize - 1);
    for j in 1..=m {
        let lo = T::pow2(j - 1).ok_or_else(overflow)?;
        let hi = T::pow2(j).ok_or_else(overflow)? - one;
        out.push(RankInterval::new(lo, hi)?);
    }
    let top = three_halves_pow::<T>(m)?;
    for j in m + 1..=2 * m - 1 {
        let k = 2 * m - j;
        let lo = top - T::pow2(k).ok_or_else(overflow)?;
        let hi = top - T::pow2(k - 1).ok_or_else(overflow)? - one;
        out.push(RankInterval::new(lo, hi)?);
    }
    Ok(out)
}

/// Per-multiplexer buffer in group `g` (1-based). Groups `g` and `2m - g`
/// are identical; in the lower half `B_1 = 1` and `B_j = 2^(j-2)`.
pub fn group_buffer_size<T: Count>(g: usize, m: u32) -> Result<T, ModelError> {
    check_m(m)?;
    let groups = 2 * m as usize - 1;
    if g == 0 || g > groups {
        return Err(ModelError::GroupOutOfRange { g, m, max: groups });
    }
    let j = g.min(2 * m as usize - g) as u32;
    if j == 1 {
        Ok(T::one())
    } else {
        T::pow2(j - 2).ok_or(ModelError::Overflow(m))
    }
}

/// Sorts packets by descending priority so that index `k` holds rank `k + 1`.
pub fn sort_by_rank(packets: &mut [Packet]) -> Result<(), ModelError> {
    packets.sort_unstable_by_key(|p| std::cmp::Reverse(p.priority));
    match packets.windows(2).find(|w| w[0].priority == w[1].priority) {
        Some(w) => Err(ModelError::DuplicatePriority(w[0].priority)),
        None => Ok(()),
    }
}

/// Rank of every packet in `population`.
pub fn ranks(population: &[Packet]) -> Result<HashMap<PacketId, usize>, ModelError> {
    let mut sorted = population.to_vec();
    sort_by_rank(&mut sorted)?;
    Ok(sorted.iter().enumerate().map(|(i, p)| (p.id, i + 1)).collect())
}

/// Layout of the construction for a given `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    m: u32,
    capacity: usize,
    psi: Vec<RankInterval>,
    group_buffers: Vec<usize>,
}

impl SystemParams {
    pub fn new(m: u32) -> Result<Self, ModelError> {
        let capacity = queue_capacity::<usize>(m)?;
        let psi = psi_partition::<usize>(m)?;
        let group_buffers = (1..=psi.len())
            .map(|g| group_buffer_size::<usize>(g, m))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SystemParams { m, capacity, psi, group_buffers })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `B`, the emulated queue's buffer.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn group_count(&self) -> usize {
        self.psi.len()
    }

    pub fn psi(&self) -> &[RankInterval] {
        &self.psi
    }

    pub fn group_buffers(&self) -> &[usize] {
        &self.group_buffers
    }

    /// Interval of group `g` (1-based).
    pub fn interval(&self, g: usize) -> RankInterval {
        self.psi[g - 1]
    }

    /// Per-multiplexer buffer of group `g` (1-based).
    pub fn buffer(&self, g: usize) -> usize {
        self.group_buffers[g - 1]
    }

    /// Group whose interval contains `rank`.
    pub fn group_of_rank(&self, rank: usize) -> Option<usize> {
        group_of_rank(&self.psi, rank)
    }

    /// Ranks a packet buffered in group `g` may hold: the group's interval
    /// widened by `B_g - 1` on each side, since a packet spends at most
    /// `B_g - 1` further slots in a FIFO and its rank moves by at most one
    /// per slot.
    pub fn rank_window(&self, g: usize) -> (usize, usize) {
        let slack = self.buffer(g) - 1;
        let iv = self.interval(g);
        (iv.lo().saturating_sub(slack).max(1), iv.hi() + slack)
    }

    /// Most packets group `g` can hold at the end of a slot: one per rank in
    /// [`rank_window`](Self::rank_window).
    pub fn group_occupancy_bound(&self, g: usize) -> usize {
        let (lo, hi) = self.rank_window(g);
        hi.min(self.capacity) + 1 - lo
    }
}

/// Group (1-based) of the interval in `layout` containing `rank`.
pub fn group_of_rank(layout: &[RankInterval], rank: usize) -> Option<usize> {
    let idx = layout.partition_point(|iv| iv.hi() < rank);
    layout.get(idx).filter(|iv| iv.contains(rank)).map(|_| idx + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(v: &[RankInterval]) -> Vec<(usize, usize)> {
        v.iter().map(|iv| (iv.lo(), iv.hi())).collect()
    }

    #[test]
    fn psi_small_cases() {
        assert_eq!(bounds(&psi_partition(1).unwrap()), vec![(1, 1)]);
        assert_eq!(bounds(&psi_partition(2).unwrap()), vec![(1, 1), (2, 3), (4, 4)]);
        assert_eq!(
            bounds(&psi_partition(3).unwrap()),
            vec![(1, 1), (2, 3), (4, 7), (8, 9), (10, 10)]
        );
    }

    #[test]
    fn rejects_zero_m() {
        assert_eq!(psi_partition::<usize>(0), Err(ModelError::InvalidM(0)));
        assert_eq!(queue_capacity::<u64>(0), Err(ModelError::InvalidM(0)));
        assert!(SystemParams::new(0).is_err());
    }

    #[test]
    fn capacity_values() {
        assert_eq!(queue_capacity::<u32>(1).unwrap(), 1);
        assert_eq!(queue_capacity::<u32>(3).unwrap(), 10);
        assert_eq!(queue_capacity::<u64>(6).unwrap(), 94);
        assert_eq!(queue_capacity::<u8>(7).unwrap(), 190);
        assert_eq!(queue_capacity::<u8>(8), Err(ModelError::Overflow(8)));
        assert_eq!(queue_capacity::<u128>(64).unwrap(), 3 * (1u128 << 63) - 2);
    }

    #[test]
    fn buffer_sizes() {
        assert_eq!(group_buffer_size::<usize>(1, 3).unwrap(), 1);
        assert_eq!(group_buffer_size::<usize>(3, 3).unwrap(), 2);
        assert_eq!(group_buffer_size::<usize>(5, 3).unwrap(), 1);
        assert!(matches!(
            group_buffer_size::<usize>(6, 3),
            Err(ModelError::GroupOutOfRange { g: 6, .. })
        ));
        assert!(group_buffer_size::<usize>(0, 3).is_err());
        let p = SystemParams::new(4).unwrap();
        assert_eq!(p.group_buffers(), &[1, 1, 2, 4, 2, 1, 1]);
    }

    #[test]
    fn interval_rejects_inverted() {
        assert!(RankInterval::new(3usize, 2).is_err());
        assert!(RankInterval::new(0usize, 2).is_err());
    }

    #[test]
    fn ranks_small() {
        let ps = [Packet::new(0, 5, 0), Packet::new(1, 9, 0), Packet::new(2, 2, 0)];
        let r = ranks(&ps).unwrap();
        assert_eq!(r[&PacketId(1)], 1);
        assert_eq!(r[&PacketId(0)], 2);
        assert_eq!(r[&PacketId(2)], 3);
        let single = ranks(&[Packet::new(7, -4, 0)]).unwrap();
        assert_eq!(single[&PacketId(7)], 1);
        let four: Vec<_> = (0..4).map(|i| Packet::new(i, 10 * (i as i64 + 1), 0)).collect();
        let r = ranks(&four).unwrap();
        assert_eq!((0..4).map(|i| r[&PacketId(i)]).collect::<Vec<_>>(), vec![4, 3, 2, 1]);
    }

    #[test]
    fn ranks_duplicate_is_fault() {
        let ps = [Packet::new(0, 5, 0), Packet::new(1, 5, 0)];
        assert_eq!(ranks(&ps), Err(ModelError::DuplicatePriority(5)));
    }

    #[test]
    fn group_lookup() {
        let p = SystemParams::new(3).unwrap();
        let groups: Vec<_> = (1..=10).map(|r| p.group_of_rank(r).unwrap()).collect();
        assert_eq!(groups, vec![1, 2, 2, 3, 3, 3, 3, 4, 4, 5]);
        assert_eq!(p.group_of_rank(0), None);
        assert_eq!(p.group_of_rank(11), None);
    }

    #[test]
    fn windows_and_bounds() {
        let p = SystemParams::new(3).unwrap();
        assert_eq!(p.rank_window(1), (1, 1));
        assert_eq!(p.rank_window(2), (2, 3));
        assert_eq!(p.rank_window(3), (3, 8));
        assert_eq!(p.rank_window(5), (10, 10));
        let caps: Vec<_> = (1..=5).map(|g| p.group_occupancy_bound(g)).collect();
        assert_eq!(caps, vec![1, 2, 6, 2, 1]);
    }
}
