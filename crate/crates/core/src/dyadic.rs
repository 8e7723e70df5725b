use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
#[allow(unused_imports)]
use num_traits::Float;

/// A dyadic frequency scale `N = 2^k` (anchor 1, `k` may be negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicScale(i32);

impl DyadicScale {
    pub const fn from_exponent(k: i32) -> Self {
        DyadicScale(k)
    }

    /// The scale `2^round(log2 n)`, rejecting values that are not powers of two.
    pub fn from_value(n: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(crate::error::invalid("N", "must be positive and finite"));
        }
        let k = n.log2().round();
        if (2f64.powi(k as i32) - n).abs() > 1e-12 * n {
            return Err(crate::error::invalid("N", "must be a power of two"));
        }
        Ok(DyadicScale(k as i32))
    }

    pub fn exponent(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        2f64.powi(self.0)
    }

    pub fn double(self) -> Self {
        DyadicScale(self.0 + 1)
    }

    pub fn half(self) -> Self {
        DyadicScale(self.0 - 1)
    }

    /// Smallest scale the grid supports: the first power of two at least four times
    /// the lowest spectral node, so `P_{≤N_min/2}` still holds a mode.
    pub fn min_for(grid: &RadialGrid) -> Self {
        DyadicScale((4.0 * grid.freqs()[0]).log2().ceil() as i32)
    }

    /// Largest scale the grid supports: `N ≤ ρ_max / 4`.
    pub fn max_for(grid: &RadialGrid) -> Self {
        DyadicScale((grid.rho_max() / 4.0).log2().floor() as i32)
    }

    pub fn check_in(self, grid: &RadialGrid) -> Result<Self> {
        let (lo, hi) = (Self::min_for(grid), Self::max_for(grid));
        if self < lo || self > hi {
            return Err(Error::ScaleOutOfRange { scale: self.value(), min: lo.value(), max: hi.value() });
        }
        Ok(self)
    }

    /// Inclusive ladder `lo, 2 lo, …, hi`.
    pub fn ladder(lo: Self, hi: Self) -> Vec<Self> {
        (lo.0..=hi.0).map(DyadicScale).collect()
    }
}

impl fmt::Display for DyadicScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}
