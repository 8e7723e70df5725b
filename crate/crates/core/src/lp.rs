//! Littlewood-Paley projections, smooth spatial cutoffs, the in/out
//! decomposition and ratio estimators for the classical harmonic-analysis
//! inequalities (Bernstein, mismatch, radial Sobolev, fractional chain rule).
//!
//! All frequency projections are exact multipliers on the radial spectrum, so
//! they commute with the free propagator and with each other.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::dyadic::DyadicScale;
use crate::error::{invalid, Error, Result};
use crate::evolution::free_propagate;
use crate::field::{RadialField, SpectralField};
use crate::grid::sphere_area;
use crate::norms::{ensure_resolved, lebesgue_norm, mass, nonlinearity, potential_exponent};
#[allow(unused_imports)]
use num_traits::Float;

/// Relative size below which a projected band counts as vanishing.
const VANISHING: f64 = 1e-12;

/// The bump `φ`: equal to 1 on `[0, 1]`, 0 on `[25/24, ∞)`, with the
/// transition `h(s) / (h(s) + h(1-s))`, `h(y) = e^{-1/y}`, in between.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CutoffProfile;

impl CutoffProfile {
    pub const PLATEAU: f64 = 1.0;
    pub const SUPPORT: f64 = 25.0 / 24.0;

    /// `φ(x)` for `x ≥ 0` (negative arguments are reflected).
    pub fn eval(self, x: f64) -> f64 {
        let x = x.abs();
        if x <= Self::PLATEAU {
            return 1.0;
        }
        if x >= Self::SUPPORT {
            return 0.0;
        }
        let s = (Self::SUPPORT - x) / (Self::SUPPORT - Self::PLATEAU);
        let a = bump(s);
        let b = bump(1.0 - s);
        a / (a + b)
    }

    /// `φ_{≤C}(x) = φ(x/C)`.
    pub fn le(self, c: f64, x: f64) -> f64 {
        self.eval(x / c)
    }

    /// `φ_{>C} = 1 - φ_{≤C}`.
    pub fn gt(self, c: f64, x: f64) -> f64 {
        1.0 - self.le(c, x)
    }
}

fn bump(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        (-1.0 / y).exp()
    }
}

const PHI: CutoffProfile = CutoffProfile;

/// Symbol of `P_N`: `φ(ρ/N) - φ(2ρ/N)`.
pub fn band_symbol(n: DyadicScale, rho: f64) -> f64 {
    let n = n.value();
    PHI.eval(rho / n) - PHI.eval(2.0 * rho / n)
}

/// Symbol of `P_{≤N}`.
pub fn low_symbol(n: DyadicScale, rho: f64) -> f64 {
    PHI.eval(rho / n.value())
}

/// Symbol of `P̃_N = P_{N/2} + P_N + P_{2N}`.
pub fn fat_symbol(n: DyadicScale, rho: f64) -> f64 {
    let n = n.value();
    PHI.eval(rho / (2.0 * n)) - PHI.eval(4.0 * rho / n)
}

fn apply(f: &RadialField, symbol: impl Fn(f64) -> f64) -> RadialField {
    f.forward().multiply_real(symbol).inverse()
}

/// `P_N f`.
pub fn project_band(f: &RadialField, n: DyadicScale) -> Result<RadialField> {
    n.check_in(f.grid())?;
    Ok(apply(f, |rho| band_symbol(n, rho)))
}

/// `P_{≤N} f`.
pub fn project_low(f: &RadialField, n: DyadicScale) -> Result<RadialField> {
    n.check_in(f.grid())?;
    Ok(apply(f, |rho| low_symbol(n, rho)))
}

/// `P_{>N} f = f - P_{≤N} f`.
pub fn project_high(f: &RadialField, n: DyadicScale) -> Result<RadialField> {
    n.check_in(f.grid())?;
    Ok(apply(f, |rho| 1.0 - low_symbol(n, rho)))
}

/// `P_{≥N} f = f - P_{≤N/2} f`.
pub fn project_at_least(f: &RadialField, n: DyadicScale) -> Result<RadialField> {
    n.check_in(f.grid())?;
    Ok(apply(f, |rho| 1.0 - low_symbol(n.half(), rho)))
}

/// `P̃_N f`.
pub fn project_fat(f: &RadialField, n: DyadicScale) -> Result<RadialField> {
    n.check_in(f.grid())?;
    Ok(apply(f, |rho| fat_symbol(n, rho)))
}

/// `P_{≤N_min} f` together with `P_N f` for every dyadic `N_min < N ≤ N_max`.
pub fn decompose(f: &RadialField) -> (RadialField, Vec<(DyadicScale, RadialField)>) {
    let lo = DyadicScale::min_for(f.grid());
    let hi = DyadicScale::max_for(f.grid());
    let spec = f.forward();
    let low = spec.multiply_real(|rho| low_symbol(lo, rho)).inverse();
    let bands = DyadicScale::ladder(lo.double(), hi)
        .into_iter()
        .map(|n| (n, spec.multiply_real(|rho| band_symbol(n, rho)).inverse()))
        .collect();
    (low, bands)
}

/// `φ_{≤R}(x) f(x)`.
pub fn cutoff_inside(f: &RadialField, radius: f64) -> Result<RadialField> {
    check_radius(radius)?;
    Ok(f.map(|r, v| v * PHI.le(radius, r)))
}

/// `φ_{>R}(x) f(x)`.
pub fn cutoff_outside(f: &RadialField, radius: f64) -> Result<RadialField> {
    check_radius(radius)?;
    Ok(f.map(|r, v| v * PHI.gt(radius, r)))
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid("radius", "must be positive and finite"));
    }
    Ok(())
}

fn nonvanishing(band: &RadialField, f: &RadialField) -> Result<f64> {
    let norm = mass(band).sqrt();
    let reference = mass(f).sqrt();
    if norm == 0.0 || norm <= VANISHING * reference {
        return Err(Error::VanishingBand);
    }
    Ok(norm)
}

/// `‖P_N f‖_q / (N^{d/p - d/q} ‖P_N f‖_p)`.
pub fn bernstein_ratio(f: &RadialField, n: DyadicScale, p: f64, q: f64) -> Result<f64> {
    if p.is_nan() || q.is_nan() || p < 1.0 || q < p {
        return Err(invalid("p, q", "need 1 <= p <= q"));
    }
    let band = project_band(f, n)?;
    nonvanishing(&band, f)?;
    let d = f.grid().dim() as f64;
    let power = d / p - if q.is_infinite() { 0.0 } else { d / q };
    Ok(lebesgue_norm(&band, q)? / (n.value().powf(power) * lebesgue_norm(&band, p)?))
}

/// `‖∇P_N f‖₂ / (N ‖P_N f‖₂)`.
pub fn bernstein_gradient_ratio(f: &RadialField, n: DyadicScale) -> Result<f64> {
    n.check_in(f.grid())?;
    let spec = f.forward().multiply_real(|rho| band_symbol(n, rho));
    let plain = spec.norm_sq().sqrt();
    if plain == 0.0 || plain <= VANISHING * mass(f).sqrt() {
        return Err(Error::VanishingBand);
    }
    let grad = spec.multiply_real(|rho| rho).norm_sq().sqrt();
    Ok(grad / (n.value() * plain))
}

/// `‖φ_{>R} P_{≤N} φ_{≤R/2} f‖₂`, or with `∇` applied after the projection.
pub fn mismatch_real(f: &RadialField, radius: f64, n: DyadicScale, with_gradient: bool) -> Result<f64> {
    check_radius(radius)?;
    let nr = n.value() * radius;
    if nr < 4.0 {
        return Err(Error::VacuousRegime(nr));
    }
    n.check_in(f.grid())?;
    let inner = cutoff_inside(f, radius / 2.0)?;
    let spec = inner.forward().multiply_real(|rho| low_symbol(n, rho));
    let projected = if with_gradient {
        let grid = f.grid().clone();
        RadialField::new(grid.clone(), grid.radial_derivative(spec.coeffs()))?
    } else {
        spec.inverse()
    };
    Ok(mass(&cutoff_outside(&projected, radius)?).sqrt())
}

/// `‖P_N φ_{≤R} P_M f‖₂` for well-separated bands `max{N,M} ≥ 4 min{N,M}`.
pub fn mismatch_freq(f: &RadialField, n: DyadicScale, m: DyadicScale, radius: f64) -> Result<f64> {
    let (big, small) = if n.value() >= m.value() { (n, m) } else { (m, n) };
    if big.value() < 4.0 * small.value() {
        return Err(Error::BandSeparation { big: big.value(), small: small.value() });
    }
    let inner = cutoff_inside(&project_band(f, m)?, radius)?;
    Ok(mass(&project_band(&inner, n)?).sqrt())
}

/// `max_j r_j^{(d-1)/2} |P_N f(r_j)| / (N^{1/2} ‖P_N f‖₂)`.
pub fn radial_sobolev_ratio(f: &RadialField, n: DyadicScale) -> Result<f64> {
    let band = project_band(f, n)?;
    let norm = nonvanishing(&band, f)?;
    let half = 0.5 * (f.grid().dim() as f64 - 1.0);
    let peak = band
        .grid()
        .radii()
        .iter()
        .zip(band.values())
        .map(|(r, v)| r.powf(half) * v.norm())
        .fold(0.0, f64::max);
    Ok(peak / (n.value().sqrt() * norm))
}

/// Outgoing (`+`) or incoming (`-`) part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Wave {
    Outgoing,
    Incoming,
}

impl Wave {
    fn sign(self) -> f64 {
        match self {
            Wave::Outgoing => 1.0,
            Wave::Incoming => -1.0,
        }
    }
}

/// `P^± f(r) = ½ f(r) ± (i/π) r^{2-d} PV∫₀^∞ f(ρ) ρ^{d-1} / (r² - ρ²) dρ`.
pub fn in_out(f: &RadialField, wave: Wave) -> Result<RadialField> {
    let pv = principal_value(f)?;
    let grid = f.grid();
    let d = grid.dim() as i32;
    let factor = Complex64::new(0.0, wave.sign() / PI);
    let values = grid
        .radii()
        .iter()
        .zip(f.values())
        .zip(&pv)
        .map(|((&r, &v), &p)| 0.5 * v + factor * r.powi(2 - d) * p)
        .collect();
    RadialField::new(grid.clone(), values)
}

/// `PV∫₀^R f(ρ) ρ^{d-1} / (r² - ρ²) dρ` at every node `r = r_j`.
///
/// With `g(ρ) = f(ρ) ρ^{d-1} / (r + ρ)` the integrand is `g(ρ)/(r - ρ)`; the
/// difference quotient `(g(ρ) - g(r))/(r - ρ)` is regular and goes through the
/// grid quadrature (its value at `ρ = r` is `-g'(r)`), and the subtracted pole
/// integrates to `g(r) ln(r / (R - r))`.
fn principal_value(f: &RadialField) -> Result<Vec<Complex64>> {
    let grid = f.grid();
    let d = grid.dim() as i32;
    let r_max = grid.r_max();
    let area = sphere_area(grid.dim());
    let radii = grid.radii();
    // plain dρ weights on the nodes
    let dr: Vec<f64> = radii.iter().zip(grid.weights()).map(|(r, w)| w / (area * r.powi(d - 1))).collect();
    let slope = grid.radial_derivative(&grid.forward(f.values()));
    let vals = f.values();
    let out = radii
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let g = |k: usize| vals[k] * radii[k].powi(d - 1) / (r + radii[k]);
            let g_r = vals[j] * r.powi(d - 2) * 0.5;
            let dg = slope[j] * r.powi(d - 2) * 0.5 + vals[j] * r.powi(d - 3) * ((d - 1) as f64 * 0.5 - 0.25);
            let mut acc = -dg * dr[j];
            for k in 0..radii.len() {
                if k != j {
                    acc += (g(k) - g_r) / (r - radii[k]) * dr[k];
                }
            }
            acc + g_r * (r / (r_max - r)).ln()
        })
        .collect();
    Ok(out)
}

/// `‖φ_{>1/N} P^± P_{≥N} f‖₂ / ‖f‖₂`.
pub fn in_out_truncated_ratio(f: &RadialField, n: DyadicScale, wave: Wave) -> Result<f64> {
    let norm = mass(f).sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    let high = project_at_least(f, n)?;
    let part = in_out(&high, wave)?;
    Ok(mass(&cutoff_outside(&part, 1.0 / n.value())?).sqrt() / norm)
}

/// What the key column of a [`BandNormTable`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Axis {
    Frequency,
    Radius,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandRow {
    pub key: f64,
    pub value: f64,
}

/// Measured norms keyed by a strictly increasing dyadic scale, radius or time.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandNormTable {
    /// Which norm was measured, e.g. `"sup_t ||phi_>1 P_N u||_2"`.
    pub quantity: String,
    pub axis: Axis,
    pub rows: Vec<BandRow>,
}

impl BandNormTable {
    pub fn new(quantity: impl Into<String>, axis: Axis, rows: Vec<BandRow>) -> Result<Self> {
        if rows.windows(2).any(|w| !(w[1].key > w[0].key)) {
            return Err(invalid("rows", "keys must increase strictly"));
        }
        if rows.iter().any(|r| !r.value.is_finite() || r.value < 0.0 || !r.key.is_finite()) {
            return Err(invalid("rows", "values must be finite and nonnegative"));
        }
        Ok(BandNormTable { quantity: quantity.into(), axis, rows })
    }

    pub fn keys(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.key).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn max(&self) -> f64 {
        self.rows.iter().map(|r| r.value).fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.rows.iter().map(|r| r.value).fold(f64::INFINITY, f64::min)
    }
}

/// `t^{d/2} ‖e^{itΔ} P_N f‖_∞` for each `t` in `times ⊂ [N^{-2}, 10]`.
pub fn dispersive_decay(f: &RadialField, n: DyadicScale, times: &[f64]) -> Result<BandNormTable> {
    if times.is_empty() {
        return Err(Error::Empty("time list"));
    }
    let lo = n.value().powi(-2);
    if times.iter().any(|&t| !(t >= lo * (1.0 - 1e-12) && t <= 10.0)) {
        return Err(invalid("times", "must lie in [N^-2, 10]"));
    }
    let band = project_band(f, n)?;
    let half_d = 0.5 * f.grid().dim() as f64;
    let rows = times
        .iter()
        .map(|&t| {
            let sup = lebesgue_norm(&free_propagate(&band, t), f64::INFINITY)?;
            Ok(BandRow { key: t, value: sup * t.powf(half_d) })
        })
        .collect::<Result<Vec<_>>>()?;
    BandNormTable::new("t^{d/2} ||e^{itD} P_N f||_inf", Axis::Time, rows)
}

/// `‖|∇|^s F(u)‖_{2(d+2)/(d+4)} / (‖|∇|^s u‖_{2(d+2)/d} ‖u‖^{4/d}_{2(d+2)/d})`.
pub fn fractional_chain_ratio(u: &RadialField, s: f64) -> Result<f64> {
    let d = u.grid().dim() as f64;
    if !(s > 0.0 && s < 1.0 + 4.0 / d) {
        return Err(invalid("s", "need 0 < s < 1 + 4/d"));
    }
    let spec = u.forward();
    if spec.norm_sq() == 0.0 {
        return Err(Error::ZeroField);
    }
    ensure_resolved(&spec)?;
    let p = potential_exponent(u.grid().dim());
    let dual = 2.0 * (d + 2.0) / (d + 4.0);
    let top = lebesgue_norm(&fractional(&nonlinearity(u).forward(), s), dual)?;
    let grad = lebesgue_norm(&fractional(&spec, s), p)?;
    let base = lebesgue_norm(u, p)?;
    Ok(top / (grad * base.powf(4.0 / d)))
}

fn fractional(spec: &SpectralField, s: f64) -> RadialField {
    spec.multiply_real(|rho| rho.powf(s)).inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_plateau_support_and_bounds() {
        assert_eq!(PHI.eval(0.0), 1.0);
        assert_eq!(PHI.eval(1.0), 1.0);
        assert_eq!(PHI.eval(25.0 / 24.0 + 1e-12), 0.0);
        let mut prev = 1.0;
        for k in 0..=1000 {
            let x = 1.0 + k as f64 * (1.0 / 24.0) / 1000.0;
            let v = PHI.eval(x);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn profile_is_symmetric_about_the_midpoint() {
        let mid = 0.5 * (1.0 + 25.0 / 24.0);
        // Rounding of mid ± h (half an ulp near 1) is amplified by the 24x
        // transition slope and by φ' = 2 at the midpoint, at each of two points.
        let tol = 4.0 * 24.0 * 2.0 * f64::EPSILON;
        for k in 1..20 {
            let h = k as f64 / 20.0 / 48.0;
            assert!((PHI.eval(mid - h) + PHI.eval(mid + h) - 1.0).abs() < tol);
        }
    }

    #[test]
    fn band_symbol_is_one_on_its_plateau() {
        let n = DyadicScale::from_exponent(4);
        for k in 0..=100 {
            let rho = 16.0 * (25.0 / 48.0 + k as f64 / 100.0 * (1.0 - 25.0 / 48.0));
            assert!((band_symbol(n, rho) - 1.0).abs() < 1e-15);
            assert!((fat_symbol(n, rho) - 1.0).abs() < 1e-15);
        }
        assert_eq!(band_symbol(n, 7.9), 0.0);
        assert_eq!(band_symbol(n, 16.7), 0.0);
    }
}
