//! Closed-form hardware tallies for the construction.
//!
//! The component schedule for a given `m` is a `(32m-14)`-port main switch,
//! 48 switches with 3 ports, 24 switches with `j+1` ports for every
//! `j = 3..m-1`, 12 switches with `m+1` ports, and `12(m^2 - 2m + 3)`
//! fiber delay lines. Merging every switch into one crossbar gives
//! `12m^2 + 56m - 2` ports with the same fibers.
//!
//! The formulas are reported as stated. They agree with a per-group
//! derivation (three 2-to-1 multiplexers per 4-to-1, each needing a
//! `(M+2)`-port switch and `M = ceil(log2(B+1))` delay lines) only for
//! `m >= 3`; see [`derived_component_cost`].

use std::collections::BTreeMap;

use thiserror::Error;

use crate::num::Count;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("m must be at least 1, got {0}")]
    InvalidM(u32),
    #[error("cost formula overflows the scalar type for m={0}")]
    Overflow(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CombinedCost<T> {
    /// Port count of the single merged crossbar.
    pub switch_size: T,
    pub fiber_count: T,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostSheet<T> {
    pub m: u32,
    pub main_switch_size: T,
    /// Port count -> number of such switches.
    pub small_switches: BTreeMap<T, T>,
    pub fiber_count: T,
    pub combined: CombinedCost<T>,
}

impl<T: Count> CostSheet<T> {
    pub fn small_switch_count(&self) -> T {
        self.small_switches.values().fold(T::zero(), |a, &b| a + b)
    }

    /// Sum of ports over every switch in the component schedule.
    pub fn total_ports(&self) -> Option<T> {
        self.small_switches
            .iter()
            .try_fold(self.main_switch_size, |acc, (&size, &count)| acc.checked_add(&size.checked_mul(&count)?))
    }
}

struct Poly<T> {
    m: u32,
    mv: T,
}

impl<T: Count> Poly<T> {
    fn new(m: u32) -> Result<Self, CostError> {
        if m == 0 {
            return Err(CostError::InvalidM(m));
        }
        Ok(Poly { m, mv: T::lift(m as u64).ok_or(CostError::Overflow(m))? })
    }

    fn c(&self, v: u64) -> Result<T, CostError> {
        T::lift(v).ok_or(CostError::Overflow(self.m))
    }

    fn mul(&self, a: T, b: T) -> Result<T, CostError> {
        a.checked_mul(&b).ok_or(CostError::Overflow(self.m))
    }

    fn add(&self, a: T, b: T) -> Result<T, CostError> {
        a.checked_add(&b).ok_or(CostError::Overflow(self.m))
    }

    fn sub(&self, a: T, b: T) -> Result<T, CostError> {
        a.checked_sub(&b).ok_or(CostError::Overflow(self.m))
    }

    fn square(&self) -> Result<T, CostError> {
        self.mul(self.mv, self.mv)
    }

    /// `12(m^2 - 2m + 3)`; `m^2 + 3 > 2m` for every `m`.
    fn fibers(&self) -> Result<T, CostError> {
        let inner = self.sub(self.add(self.square()?, self.c(3)?)?, self.mul(self.c(2)?, self.mv)?)?;
        self.mul(self.c(12)?, inner)
    }
}

/// Merged single-crossbar cost: `12m^2 + 56m - 2` ports.
pub fn combined_cost<T: Count>(m: u32) -> Result<CombinedCost<T>, CostError> {
    let p = Poly::<T>::new(m)?;
    let quad = p.mul(p.c(12)?, p.square()?)?;
    let lin = p.mul(p.c(56)?, p.mv)?;
    Ok(CombinedCost { switch_size: p.sub(p.add(quad, lin)?, p.c(2)?)?, fiber_count: p.fibers()? })
}

/// Full component schedule. For `m < 3` the `j = 3..m-1` range is empty.
pub fn component_cost<T: Count>(m: u32) -> Result<CostSheet<T>, CostError> {
    let p = Poly::<T>::new(m)?;
    let main = p.sub(p.mul(p.c(32)?, p.mv)?, p.c(14)?)?;
    let mut small = BTreeMap::new();
    let mut add = |size: T, count: T| -> Result<(), CostError> {
        let e = small.entry(size).or_insert_with(T::zero);
        *e = p.add(*e, count)?;
        Ok(())
    };
    add(p.c(3)?, p.c(48)?)?;
    for j in 3..m as u64 {
        add(p.c(j + 1)?, p.c(24)?)?;
    }
    add(p.add(p.mv, T::one())?, p.c(12)?)?;
    let fiber_count = p.fibers()?;
    Ok(CostSheet {
        m,
        main_switch_size: main,
        small_switches: small,
        fiber_count,
        combined: combined_cost(m)?,
    })
}

/// Component tally rebuilt from the group layout: every group holds four
/// 4-to-1 multiplexers of three 2-to-1 stages each; a 2-to-1 stage with
/// buffer `B` takes an `(M+2)`-port switch and `M = ceil(log2(B+1))` delay
/// lines. The main switch has one port per multiplexer input plus the
/// departure and loss outputs.
///
/// Returns `(main switch ports, switch ports -> count, fibers)`.
pub fn derived_component_cost(m: u32) -> Result<(u64, BTreeMap<u64, u64>, u64), CostError> {
    if m == 0 {
        return Err(CostError::InvalidM(m));
    }
    let groups = 2 * m as u64 - 1;
    let mut small = BTreeMap::new();
    let mut fibers = 0u64;
    for g in 1..=groups as usize {
        let b: u64 = crate::model::group_buffer_size(g, m).map_err(|_| CostError::Overflow(m))?;
        let delay_lines = u64::BITS - b.leading_zeros();
        let stages = 4 * 3;
        *small.entry(delay_lines as u64 + 2).or_insert(0) += stages;
        fibers += stages * delay_lines as u64;
    }
    Ok((16 * groups + 2, small, fibers))
}

/// `log2(B)^2 / combined_switch_size`, which levels off as `m` grows when
/// the switch is quadratic in `log B`.
pub fn log_square_ratio(m: u32) -> Result<f64, CostError> {
    let b: u64 = crate::model::queue_capacity(m).map_err(|_| CostError::Overflow(m))?;
    let size: u64 = combined_cost(m)?.switch_size;
    let lb = (b as f64).log2();
    Ok(lb * lb / size as f64)
}
