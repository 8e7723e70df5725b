//! Reproducible random smooth radial fields for property tests and
//! fitted-constant studies.
//!
//! A profile is `Σ_j c_j r^{2m_j} e^{-a_j r²}` with complex `c_j`, `m_j ∈ {0,1,2}`
//! and widths `a_j` drawn log-uniformly. It is a function of `|x|²`, hence
//! smooth on ℝ^d, and it can be sampled on any grid.

use alloc::vec::Vec;
use alloc::sync::Arc;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::field::RadialField;
use crate::grid::RadialGrid;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    /// Largest number of terms per profile (at least one is used).
    pub max_terms: usize,
    /// Range of the Gaussian widths `a_j`.
    pub width: (f64, f64),
    /// Allow complex coefficients.
    pub complex: bool,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec { max_terms: 4, width: (0.3, 3.0), complex: true }
    }
}

impl CorpusSpec {
    /// Profiles with content up to frequency `≈ 4 sqrt(a_max)`.
    pub fn broadband(a_max: f64) -> Self {
        CorpusSpec { max_terms: 4, width: (0.3, a_max), complex: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coeff: Complex64,
    power: i32,
    width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothProfile {
    terms: Vec<Term>,
}

impl SmoothProfile {
    pub fn random(spec: &CorpusSpec, rng: &mut impl Rng) -> Self {
        let count = rng.gen_range(1..=spec.max_terms.max(1));
        let (lo, hi) = (spec.width.0.ln(), spec.width.1.ln());
        let terms = (0..count)
            .map(|_| {
                let width = if hi > lo { rng.gen_range(lo..hi).exp() } else { spec.width.0 };
                let power = rng.gen_range(0..=2);
                let re = rng.gen_range(-1.0..1.0);
                let im = if spec.complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
                // keep the peak of r^{2m} e^{-a r²} at order one
                let peak = if power == 0 { 1.0 } else { (power as f64 / width).powi(power) * (-(power as f64)).exp() };
                Term { coeff: Complex64::new(re, im) / peak, power, width }
            })
            .collect();
        SmoothProfile { terms }
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        let r2 = r * r;
        self.terms.iter().map(|t| t.coeff * r2.powi(t.power) * (-t.width * r2).exp()).sum()
    }

    pub fn sample(&self, grid: Arc<RadialGrid>) -> RadialField {
        RadialField::from_fn(grid, |r| self.eval(r))
    }
}

/// `count` profiles from a fixed seed.
pub fn profiles(spec: &CorpusSpec, count: usize, seed: u64) -> Vec<SmoothProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| SmoothProfile::random(spec, &mut rng)).collect()
}

/// `count` fields sampled on `grid`; errors if the widths would not fit the grid.
pub fn fields(grid: &Arc<RadialGrid>, spec: &CorpusSpec, count: usize, seed: u64) -> Result<Vec<RadialField>> {
    if !(spec.width.0 > 0.0 && spec.width.1 >= spec.width.0) {
        return Err(invalid("width", "need 0 < a_min <= a_max"));
    }
    if spec.width.0 * grid.r_max() * grid.r_max() < 30.0 {
        return Err(invalid("width", "widest profile is not negligible at r_max"));
    }
    Ok(profiles(spec, count, seed).iter().map(|p| p.sample(grid.clone())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_reproducible() {
        let a = profiles(&CorpusSpec::default(), 5, 7);
        let b = profiles(&CorpusSpec::default(), 5, 7);
        assert_eq!(a, b);
        assert_ne!(a, profiles(&CorpusSpec::default(), 5, 8));
    }

    #[test]
    fn rejects_profiles_wider_than_the_grid() {
        let g = Arc::new(RadialGrid::new(4, 5.0, 64).unwrap());
        assert!(fields(&g, &CorpusSpec::default(), 3, 1).is_err());
    }
}
