//! Integer scalar abstraction for the closed-form sizing and cost formulas.
//!
//! Everything that is a pure polynomial or power of two in `m` is generic
//! over [`Count`], so the same formula can be evaluated in `u32`, `u64` or
//! `u128` with overflow reported instead of wrapped.

use std::fmt;
use std::hash::Hash;

use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, PrimInt, ToPrimitive, Unsigned};

/// An unsigned machine integer usable as a count, size or rank.
pub trait Count:
    PrimInt
    + Unsigned
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + ToPrimitive
    + Hash
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// `2^k`, or `None` when it does not fit.
    fn pow2(k: u32) -> Option<Self> {
        if k >= Self::zero().count_zeros() {
            None
        } else {
            Some(Self::one() << k as usize)
        }
    }

    fn lift(v: u64) -> Option<Self> {
        Self::from_u64(v)
    }
}

impl<T> Count for T where
    T: PrimInt
        + Unsigned
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromPrimitive
        + ToPrimitive
        + Hash
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}
