//! Integer coefficient types accepted by the polynomial and Lin2 engines.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// An exact signed integer usable as a polynomial coefficient or equation weight.
///
/// Blanket-implemented for every type with the listed capabilities, which
/// covers `i64`, `i128` and [`BigInt`]. Fixed-width types wrap on overflow
/// in release builds, so prefer `BigInt` when `m` is unbounded.
pub trait Coefficient:
    Clone
    + Ord
    + Debug
    + Display
    + FromStr
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Into<BigInt>
    + Send
    + Sync
    + 'static
{
    fn from_count(count: u64) -> Self {
        Self::from_u64(count).expect("count fits coefficient type")
    }

    fn to_big(&self) -> BigInt {
        self.clone().into()
    }
}

impl<T> Coefficient for T where
    T: Clone
        + Ord
        + Debug
        + Display
        + FromStr
        + Signed
        + FromPrimitive
        + ToPrimitive
        + Into<BigInt>
        + Send
        + Sync
        + 'static
{
}
