//! Single-field integrals: mass, energy, Lebesgue and Sobolev norms.
//!
//! Everything uses the grid's fixed quadrature; spatial integrals use the
//! spatial weights and derivative norms go through Plancherel on the spectral
//! weights.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::{RadialField, SpectralField};
#[allow(unused_imports)]
use num_traits::Float;

/// Spectral tail above which a field is considered under-resolved.
pub const RESOLVED_TAIL: f64 = 1e-6;

/// Sign of the nonlinearity `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Coupling {
    /// `μ = -1`
    Focusing,
    /// `μ = +1`
    Defocusing,
}

impl Coupling {
    pub fn mu(self) -> f64 {
        match self {
            Coupling::Focusing => -1.0,
            Coupling::Defocusing => 1.0,
        }
    }

    pub fn from_mu(mu: f64) -> Result<Self> {
        if mu == -1.0 {
            Ok(Coupling::Focusing)
        } else if mu == 1.0 {
            Ok(Coupling::Defocusing)
        } else {
            Err(invalid("mu", "must be +1 or -1"))
        }
    }
}

/// Exponent `2(d+2)/d` of the potential term.
pub fn potential_exponent(dim: u32) -> f64 {
    2.0 * (dim as f64 + 2.0) / dim as f64
}

/// `F(u) = |u|^{4/d} u` (the nonlinearity without the sign `μ`).
pub fn nonlinearity(u: &RadialField) -> RadialField {
    let p = 4.0 / u.grid().dim() as f64;
    u.map(|_, v| v * v.norm().powf(p))
}

/// `M(f) = ∫ |f|² dx`.
pub fn mass(f: &RadialField) -> f64 {
    f.values().iter().zip(f.grid().weights()).map(|(v, w)| w * v.norm_sqr()).sum()
}

/// `‖f - g‖₂`.
pub fn l2_distance(f: &RadialField, g: &RadialField) -> Result<f64> {
    Ok(mass(&f.sub(g)?).sqrt())
}

/// `∫ |f|^p dx` (no root).
pub fn lebesgue_integral(f: &RadialField, p: f64) -> f64 {
    f.values().iter().zip(f.grid().weights()).map(|(v, w)| w * v.norm().powf(p)).sum()
}

/// `‖f‖_p` for `p ≥ 1`; `p = ∞` gives the maximum over the nodes.
pub fn lebesgue_norm(f: &RadialField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid("p", "Lebesgue exponent must be at least 1"));
    }
    if p.is_infinite() {
        return Ok(f.values().iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    Ok(lebesgue_integral(f, p).powf(1.0 / p))
}

/// `‖ |∇|^s f ‖₂ = ‖ρ^s f̂‖₂` for `s ∈ [-2, 3]`.
pub fn sobolev_norm(f: &RadialField, s: f64) -> Result<f64> {
    if !(-2.0..=3.0).contains(&s) {
        return Err(invalid("s", "regularity must lie in [-2, 3]"));
    }
    Ok(spectral_sobolev(&f.forward(), s))
}

pub(crate) fn spectral_sobolev(spec: &SpectralField, s: f64) -> f64 {
    spec.multiply_real(|rho| rho.powf(s)).norm_sq().sqrt()
}

/// `‖∇f‖₂²` via Plancherel.
pub fn kinetic(f: &RadialField) -> f64 {
    kinetic_spectral(&f.forward())
}

pub(crate) fn kinetic_spectral(spec: &SpectralField) -> f64 {
    spec.coeffs()
        .iter()
        .zip(spec.grid().spectral_weights())
        .zip(spec.grid().freqs())
        .map(|((c, w), rho)| w * rho * rho * c.norm_sqr())
        .sum()
}

/// Errors with [`Error::UnderResolved`] if more than [`RESOLVED_TAIL`] of the
/// mass sits above `ρ_max / 2`.
pub fn ensure_resolved(spec: &SpectralField) -> Result<()> {
    let tail = spec.tail_fraction();
    if tail > RESOLVED_TAIL {
        return Err(Error::UnderResolved { tail });
    }
    Ok(())
}

/// `E(f) = ½‖∇f‖² + μ d/(2(d+2)) ‖f‖^{2(d+2)/d}_{2(d+2)/d}`.
pub fn energy(f: &RadialField, coupling: Coupling) -> Result<f64> {
    let spec = f.forward();
    ensure_resolved(&spec)?;
    Ok(energy_parts(f, &spec, coupling))
}

pub(crate) fn energy_parts(f: &RadialField, spec: &SpectralField, coupling: Coupling) -> f64 {
    let d = f.grid().dim() as f64;
    let potential = lebesgue_integral(f, potential_exponent(f.grid().dim()));
    0.5 * kinetic_spectral(spec) + coupling.mu() * d / (2.0 * (d + 2.0)) * potential
}

/// `⟨f, g⟩ = ∫ f̄ g dx`.
pub fn inner(f: &RadialField, g: &RadialField) -> Result<Complex64> {
    f.same_grid(g)?;
    Ok(f.values()
        .iter()
        .zip(g.values())
        .zip(f.grid().weights())
        .map(|((a, b), w)| a.conj() * b * *w)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use alloc::sync::Arc;
    use core::f64::consts::PI;

    fn gaussian(n: usize) -> RadialField {
        let g = Arc::new(RadialGrid::new(4, 20.0, n).unwrap());
        RadialField::from_real_fn(g, |r| (-r * r).exp())
    }

    #[test]
    fn gaussian_mass_and_lebesgue() {
        let f = gaussian(512);
        let want = (PI / 2.0).powi(2);
        assert!((mass(&f) - want).abs() < 1e-8 * want);
        let l2 = lebesgue_norm(&f, 2.0).unwrap();
        assert!((l2 * l2 - want).abs() < 1e-8 * want);
        assert!((sobolev_norm(&f, 0.0).unwrap().powi(2) - want).abs() < 1e-8 * want);
    }

    #[test]
    fn gaussian_kinetic_energy() {
        // ½∫|∇e^{-r²}|² = ½ ∫ 4r² e^{-2r²} dx = π²/2 in d = 4
        let f = gaussian(512);
        let half_kinetic = 0.5 * kinetic(&f);
        assert!((half_kinetic - PI * PI / 2.0).abs() < 1e-9);
        // |f|^3 integral: 2π² ∫ r³ e^{-3r²} dr = π²/9
        let e = energy(&f, Coupling::Focusing).unwrap();
        assert!((e - (PI * PI / 2.0 - PI * PI / 27.0)).abs() < 1e-9);
    }

    #[test]
    fn zero_field_norms_vanish() {
        let f = RadialField::zeros(gaussian(64).grid().clone());
        assert_eq!(mass(&f), 0.0);
        assert_eq!(lebesgue_norm(&f, 3.0).unwrap(), 0.0);
        assert_eq!(lebesgue_norm(&f, f64::INFINITY).unwrap(), 0.0);
        assert_eq!(energy(&f, Coupling::Focusing).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_exponents() {
        let f = gaussian(64);
        assert!(lebesgue_norm(&f, 0.5).is_err());
        assert!(sobolev_norm(&f, 3.5).is_err());
        assert!(sobolev_norm(&f, -2.5).is_err());
    }

    #[test]
    fn under_resolved_energy_is_an_error() {
        let g = Arc::new(RadialGrid::new(4, 20.0, 64).unwrap());
        // spectrum centred near the band limit
        let f = RadialField::from_real_fn(g, |r| (-(r - 10.0).powi(2)).exp() * (8.0 * r).cos());
        assert!(matches!(energy(&f, Coupling::Defocusing), Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn sobolev_one_scales_linearly() {
        let f = gaussian(512);
        let s1 = sobolev_norm(&f, 1.0).unwrap();
        for lambda in [0.5, 2.0] {
            let g = f.rescale(lambda).unwrap();
            let got = sobolev_norm(&g, 1.0).unwrap();
            assert!((got - lambda * s1).abs() < 1e-6 * lambda * s1);
        }
    }
}
