//! Observables of a trajectory: virial dynamics, kinetic-energy localization,
//! concentration radii and fitted decay exponents for band norms.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dyadic::DyadicScale;
use crate::error::{invalid, Error, Result};
use crate::evolution::{Stepper, Trajectory};
use crate::field::RadialField;
use crate::lp::{band_symbol, Axis, BandNormTable, BandRow, CutoffProfile};
use crate::norms::{energy, ensure_resolved, kinetic, mass, Coupling};
#[allow(unused_imports)]
use num_traits::Float;

/// Band norms below this are treated as round-off.
pub const NOISE_FLOOR: f64 = 1e-12;

/// `V_R = ∫ φ_{≤R}(x) |x|² |f|² dx`; `R = ∞` gives the untruncated virial.
pub fn truncated_virial(f: &RadialField, radius: f64) -> f64 {
    let phi = CutoffProfile;
    f.grid()
        .radii()
        .iter()
        .zip(f.values())
        .zip(f.grid().weights())
        .map(|((&r, v), w)| {
            let cut = if radius.is_infinite() { 1.0 } else { phi.le(radius, r) };
            w * cut * r * r * v.norm_sqr()
        })
        .sum()
}

/// `∂_tt V_R` at snapshot time `t` by the five-point centred stencil. Needs two
/// equally spaced snapshots on each side.
pub fn virial_acceleration(traj: &Trajectory, radius: f64, t: f64) -> Result<f64> {
    let i = traj
        .index_of(t)
        .ok_or_else(|| Error::InsufficientSnapshots(format!("no snapshot at t = {t}")))?;
    let snaps = &traj.snapshots;
    if i < 2 || i + 2 >= snaps.len() {
        return Err(Error::InsufficientSnapshots(format!("t = {t} needs two snapshots on each side")));
    }
    let h = snaps[i + 1].t - snaps[i].t;
    for k in i - 2..i + 2 {
        if ((snaps[k + 1].t - snaps[k].t) - h).abs() > 1e-9 * h {
            return Err(Error::InsufficientSnapshots("stencil needs uniform snapshot spacing".into()));
        }
    }
    let v = |k: usize| truncated_virial(&snaps[k].field, radius);
    let num = -v(i + 2) + 16.0 * v(i + 1) - 30.0 * v(i) + 16.0 * v(i - 1) - v(i - 2);
    Ok(num / (12.0 * h * h))
}

/// Limit of `∂_tt V_R` as `R → ∞` for energy `E = ½‖∇u‖² + μ d/(2(d+2)) ∫|u|^{2(d+2)/d}`.
pub fn virial_limit(energy: f64) -> f64 {
    16.0 * energy
}

/// A radius on the grid with its node index.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridRadius {
    pub radius: f64,
    pub cell: usize,
}

/// Smallest node `r_j` whose tail `½ density_j + Σ_{k > j} density_k` is at most
/// `eta`; node `j` owns the cell around it, so only its upper half counts.
fn tail_radius(nodes: &[f64], density: &[f64], eta: f64) -> GridRadius {
    let mut beyond = 0.0;
    let mut cell = nodes.len();
    for j in (0..nodes.len()).rev() {
        if beyond + 0.5 * density[j] > eta {
            break;
        }
        beyond += density[j];
        cell = j;
    }
    let cell = cell.min(nodes.len() - 1);
    GridRadius { radius: nodes[cell], cell }
}

/// Smallest node `R` with `∫_{|x| ≥ R} |∇f|² dx ≤ eta`.
pub fn kinetic_localization_radius(f: &RadialField, eta: f64) -> Result<GridRadius> {
    let grid = f.grid();
    let spec = f.forward();
    ensure_resolved(&spec)?;
    let slope = grid.radial_derivative(spec.coeffs());
    let density: Vec<f64> = slope.iter().zip(grid.weights()).map(|(s, w)| w * s.norm_sqr()).collect();
    let total: f64 = density.iter().sum();
    if !(eta > 0.0) || eta >= total {
        return Err(invalid("eta", format!("need 0 < eta < ||grad f||^2 = {total:.6e}")));
    }
    Ok(tail_radius(grid.radii(), &density, eta))
}

/// Spatial and frequency radii outside of which at most `η` of the mass lies.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConcentrationReport {
    pub eta: f64,
    pub spatial: GridRadius,
    pub frequency: GridRadius,
    pub t: Option<f64>,
}

impl ConcentrationReport {
    /// `C_ξ(η) / C_x(η)`; scales like `N(t)²` under `λ^{d/2} u(λx)`, so it
    /// serves as a frequency-scale proxy for a generic solution.
    pub fn scale_proxy(&self) -> f64 {
        self.frequency.radius / self.spatial.radius
    }
}

pub fn concentration_radii(f: &RadialField, eta: f64) -> Result<ConcentrationReport> {
    let grid = f.grid();
    let spec = f.forward();
    ensure_resolved(&spec)?;
    let m = mass(f);
    if !(eta > 0.0) || eta >= m {
        return Err(invalid("eta", format!("need 0 < eta < mass = {m:.6e}")));
    }
    let space: Vec<f64> = f.values().iter().zip(grid.weights()).map(|(v, w)| w * v.norm_sqr()).collect();
    let freq: Vec<f64> =
        spec.coeffs().iter().zip(grid.spectral_weights()).map(|(c, w)| w * c.norm_sqr()).collect();
    Ok(ConcentrationReport {
        eta,
        spatial: tail_radius(grid.radii(), &space, eta),
        frequency: tail_radius(grid.freqs(), &freq, eta),
        t: None,
    })
}

/// [`concentration_radii`] at every snapshot.
pub fn concentration_along(traj: &Trajectory, eta: f64) -> Result<Vec<ConcentrationReport>> {
    traj.snapshots
        .iter()
        .map(|s| concentration_radii(&s.field, eta).map(|r| ConcentrationReport { t: Some(s.t), ..r }))
        .collect()
}

/// Per-snapshot observables.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    /// Energy of the flow that produced the snapshot (`½‖∇u‖²` for the free flow).
    pub energy: f64,
    /// `V_R` at the requested radius.
    pub virial: f64,
    /// `‖P_N u‖₂` per scale.
    pub band_norms: Vec<BandRow>,
    /// Kinetic localization radius at `η = fraction · ‖∇u‖²`.
    pub localization: GridRadius,
    /// Concentration radii at `η = fraction · M(u)`.
    pub concentration: ConcentrationReport,
}

/// Observables of every snapshot. The energy uses the run's coupling, or the
/// free energy when the run used the linear stepper; `coupling` is the fallback
/// for trajectories without a configuration.
pub fn records_along(
    traj: &Trajectory,
    coupling: Coupling,
    virial_radius: f64,
    scales: &[DyadicScale],
    fraction: f64,
) -> Result<Vec<DiagnosticsRecord>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(invalid("fraction", "must lie in (0, 1)"));
    }
    for n in scales {
        n.check_in(traj.grid())?;
    }
    let flow = match &traj.config {
        Some(cfg) if cfg.stepper == Stepper::Linear => None,
        Some(cfg) => Some(cfg.coupling),
        None => Some(coupling),
    };
    traj.snapshots
        .iter()
        .map(|s| {
            let f = &s.field;
            let m = mass(f);
            let k = kinetic(f);
            let energy = match flow {
                Some(c) => energy(f, c)?,
                None => 0.5 * k,
            };
            let spec = f.forward();
            let band_norms = scales
                .iter()
                .map(|&n| BandRow { key: n.value(), value: spec.multiply_real(|rho| band_symbol(n, rho)).norm_sq().sqrt() })
                .collect();
            Ok(DiagnosticsRecord {
                t: s.t,
                mass: m,
                energy,
                virial: truncated_virial(f, virial_radius),
                band_norms,
                localization: kinetic_localization_radius(f, fraction * k)?,
                concentration: ConcentrationReport { t: Some(s.t), ..concentration_radii(f, fraction * m)? },
            })
        })
        .collect()
}

/// Outcome of a decay fit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    /// Fewer than two points above the noise floor: decay is faster than any
    /// resolvable power.
    Superpolynomial,
    Pass,
    Fail,
}

/// Least-squares power law fitted to a [`BandNormTable`] in `log₂`–`log₂`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayFitReport {
    pub table: BandNormTable,
    /// Fitted slope of `log₂ value` against `log₂ key`.
    pub slope: Option<f64>,
    /// Root-mean-square deviation of the fit (in `log₂` units).
    pub residual: f64,
    /// Keys that entered the fit (those above the noise floor).
    pub used: Vec<f64>,
    /// Slope the data must reach (at most, within the residual) to pass.
    pub threshold: f64,
    pub verdict: Verdict,
    pub note: String,
}

impl DecayFitReport {
    fn from_table(table: BandNormTable, threshold: f64) -> Self {
        let used: Vec<(f64, f64)> = table
            .rows
            .iter()
            .filter(|r| r.value > NOISE_FLOOR)
            .map(|r| (r.key.log2(), r.value.log2()))
            .collect();
        if used.len() < 2 {
            return DecayFitReport {
                used: used.iter().map(|p| p.0.exp2()).collect(),
                table,
                slope: None,
                residual: 0.0,
                threshold,
                verdict: Verdict::Superpolynomial,
                note: "all band norms at the noise floor: superpolynomial, exponent unresolvable".into(),
            };
        }
        let (slope, intercept) = least_squares(&used);
        let residual = (used.iter().map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>()
            / used.len() as f64)
            .sqrt();
        let verdict = if slope <= threshold + residual { Verdict::Pass } else { Verdict::Fail };
        DecayFitReport {
            used: used.iter().map(|p| p.0.exp2()).collect(),
            table,
            slope: Some(slope),
            residual,
            threshold,
            verdict,
            note: format!("fitted slope {slope:.4} against threshold {threshold:.4}"),
        }
    }

    pub fn passes(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `‖φ_{>R} P_N u‖₂`.
fn shell_band_norm(u: &RadialField, n: DyadicScale, radius: f64) -> f64 {
    outside_norm(&u.forward().multiply_real(|rho| band_symbol(n, rho)).inverse(), radius)
}

/// Frequency decay exponent: `max_t ‖φ_{>shell_cut} P_N u(t)‖₂` per `N`,
/// tested against `N^{-1-(d-1)/d}`. The max over stored snapshots is a lower
/// bound for the supremum in time.
pub fn frequency_decay_fit(traj: &Trajectory, shell_cut: f64, scales: &[DyadicScale]) -> Result<DecayFitReport> {
    if scales.len() < 4 {
        return Err(invalid("scales", "need at least four dyadic scales"));
    }
    if !(shell_cut > 0.0) {
        return Err(invalid("shell_cut", "must be positive"));
    }
    let grid = traj.grid();
    let mut sorted = scales.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != scales.len() {
        return Err(invalid("scales", "must be distinct"));
    }
    for n in &sorted {
        n.check_in(grid)?;
    }
    let rows = sorted
        .iter()
        .map(|&n| BandRow {
            key: n.value(),
            value: traj.snapshots.iter().map(|s| shell_band_norm(&s.field, n, shell_cut)).fold(0.0, f64::max),
        })
        .collect();
    let table = BandNormTable::new(format!("max_t ||phi_>{shell_cut} P_N u(t)||_2"), Axis::Frequency, rows)?;
    let d = grid.dim() as f64;
    Ok(DecayFitReport::from_table(table, -(1.0 + (d - 1.0) / d)))
}

/// Spatial decay: `max_{t, N₀ ≤ N ≤ N₁} ‖φ_{>R} P_N u(t)‖₂` per `R`. Passes when
/// the fitted power is negative (`δ = -slope > 0`).
pub fn spatial_decay_scan(
    traj: &Trajectory,
    scale_range: (DyadicScale, DyadicScale),
    radii: &[f64],
) -> Result<DecayFitReport> {
    if radii.is_empty() {
        return Err(Error::Empty("radius list"));
    }
    if radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("radii", "must be positive and strictly increasing"));
    }
    let grid = traj.grid();
    let (lo, hi) = scale_range;
    lo.check_in(grid)?;
    hi.check_in(grid)?;
    if hi < lo {
        return Err(invalid("scale_range", "need N0 <= N1"));
    }
    let scales = DyadicScale::ladder(lo, hi);
    let mut best = alloc::vec![0.0f64; radii.len()];
    for snap in &traj.snapshots {
        let spec = snap.field.forward();
        for &n in &scales {
            let band = spec.multiply_real(|rho| band_symbol(n, rho)).inverse();
            for (b, &r) in best.iter_mut().zip(radii) {
                *b = b.max(outside_norm(&band, r));
            }
        }
    }
    let rows = radii.iter().zip(&best).map(|(&key, &value)| BandRow { key, value }).collect();
    let table = BandNormTable::new(format!("max_(t, {lo}<=N<={hi}) ||phi_>R P_N u(t)||_2"), Axis::Radius, rows)?;
    Ok(DecayFitReport::from_table(table, 0.0))
}

fn outside_norm(f: &RadialField, radius: f64) -> f64 {
    let phi = CutoffProfile;
    f.grid()
        .radii()
        .iter()
        .zip(f.values())
        .zip(f.grid().weights())
        .map(|((&r, v), w)| {
            let c = phi.gt(radius, r);
            w * c * c * v.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_a_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 3.0 - 1.5 * k as f64)).collect();
        let (s, c) = least_squares(&pts);
        assert!((s + 1.5).abs() < 1e-14 && (c - 3.0).abs() < 1e-14);
    }

    #[test]
    fn tail_radius_picks_the_first_admissible_node() {
        let nodes = [1.0, 2.0, 3.0, 4.0];
        let density = [0.4, 0.3, 0.2, 0.1];
        assert_eq!(tail_radius(&nodes, &density, 0.25).cell, 2);
        assert_eq!(tail_radius(&nodes, &density, 0.35).cell, 2);
        assert_eq!(tail_radius(&nodes, &density, 0.05).cell, 3);
        assert_eq!(tail_radius(&nodes, &density, 0.95).cell, 0);
    }
}
