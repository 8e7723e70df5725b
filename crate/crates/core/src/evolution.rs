//! Time integration of `i u_t + Δu = μ |u|^{4/d} u` by Strang splitting.
//!
//! The nonlinear substep `i u_t = μ |u|^{4/d} u` keeps `|u|` fixed pointwise,
//! so it is solved exactly as a phase rotation; the linear substep is the
//! exact multiplier `e^{-i t ρ²}` on the radial transform.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::{RadialField, SpectralField};
use crate::grid::RadialGrid;
use crate::norms::{energy_parts, kinetic_spectral, mass, nonlinearity};
pub use crate::norms::Coupling;
#[allow(unused_imports)]
use num_traits::Float;

/// Spectral tail (fraction of mass above `ρ_max/2`) that aborts a run.
pub const GUARD_TAIL: f64 = 1e-4;
/// Growth of `‖∇u‖₂` over its initial value that aborts a run.
pub const GUARD_GROWTH: f64 = 1e3;

/// Which equation the stepper integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Stepper {
    /// Full equation, Strang splitting.
    Strang,
    /// Free Schrödinger flow (`F ≡ 0`).
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationConfig {
    pub coupling: Coupling,
    pub dt: f64,
    /// Start time of the run.
    pub t_start: f64,
    /// Length of the run.
    pub duration: f64,
    /// Store a snapshot every `cadence` steps.
    pub cadence: usize,
    pub stepper: Stepper,
}

impl SimulationConfig {
    pub fn new(coupling: Coupling, dt: f64, duration: f64) -> Self {
        SimulationConfig { coupling, dt, t_start: 0.0, duration, cadence: 10, stepper: Stepper::Strang }
    }

    pub fn with_cadence(mut self, cadence: usize) -> Self {
        self.cadence = cadence;
        self
    }

    pub fn with_start(mut self, t_start: f64) -> Self {
        self.t_start = t_start;
        self
    }

    pub fn with_stepper(mut self, stepper: Stepper) -> Self {
        self.stepper = stepper;
        self
    }

    /// Number of steps; errors unless `duration/dt` is an integer multiple of the cadence.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", "must be positive and finite"));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(invalid("duration", "must be positive and finite"));
        }
        if !self.t_start.is_finite() {
            return Err(invalid("t_start", "must be finite"));
        }
        if self.cadence == 0 {
            return Err(invalid("cadence", "must be at least 1"));
        }
        let ratio = self.duration / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-6 * ratio.max(1.0) {
            return Err(invalid("dt", "must divide the duration"));
        }
        let steps = steps as usize;
        if steps % self.cadence != 0 {
            return Err(invalid("cadence", format!("must divide the step count {steps}")));
        }
        Ok(steps)
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.duration
    }

    /// `dt · ρ_max² ≤ π`; a diagnostic for phase accuracy of the top modes.
    pub fn phase_resolved(&self, grid: &RadialGrid) -> bool {
        self.dt * grid.rho_max() * grid.rho_max() <= core::f64::consts::PI
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: RadialField,
}

/// Conserved quantities recorded at each snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConservationEntry {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub tail: f64,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum RunOutcome {
    Completed,
    BlowupGuard { t: f64, growth: f64 },
    ResolutionLoss { t: f64, tail: f64 },
}

impl RunOutcome {
    pub fn error(self) -> Option<Error> {
        match self {
            RunOutcome::Completed => None,
            RunOutcome::BlowupGuard { t, growth } => Some(Error::BlowupGuard { time: t, growth }),
            RunOutcome::ResolutionLoss { t, tail } => Some(Error::ResolutionLoss { time: t, tail }),
        }
    }
}

/// Time-ordered snapshots of one run (or a synthetic sequence of fields).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: Option<SimulationConfig>,
    pub snapshots: Vec<Snapshot>,
    pub log: Vec<ConservationEntry>,
    pub outcome: RunOutcome,
}

impl Trajectory {
    /// Wraps externally built snapshots; times must increase strictly and all
    /// fields must share one grid.
    pub fn from_snapshots(snapshots: Vec<Snapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::Empty("trajectory"));
        }
        for pair in snapshots.windows(2) {
            if !(pair[1].t > pair[0].t) {
                return Err(invalid("snapshots", "times must increase strictly"));
            }
            pair[0].field.same_grid(&pair[1].field)?;
        }
        Ok(Trajectory { config: None, snapshots, log: Vec::new(), outcome: RunOutcome::Completed })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.snapshots[0].field.grid()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("nonempty trajectory")
    }

    /// Snapshot whose time is within `1e-9` of `t`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.snapshots.iter().position(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1.0))
    }

    /// Relative mass drift `max |M(t) - M(0)| / M(0)` over the log.
    pub fn mass_drift(&self) -> f64 {
        drift(self.log.iter().map(|e| e.mass))
    }

    /// Relative energy drift over the log, normalised by `max(|E(0)|, ‖∇u_0‖²/2)`.
    pub fn energy_drift(&self) -> f64 {
        let Some(first) = self.log.first() else { return 0.0 };
        let scale = first.energy.abs().max(0.5 * first.kinetic);
        if scale == 0.0 {
            return 0.0;
        }
        self.log.iter().map(|e| (e.energy - first.energy).abs()).fold(0.0, f64::max) / scale
    }

    /// Snapshots within `[t0, t1]`; errors when the window is not covered.
    pub fn window(&self, t0: f64, t1: f64) -> Result<&[Snapshot]> {
        if !(t1 > t0) {
            return Err(invalid("interval", "need t0 < t1"));
        }
        let eps = 1e-9 * t1.abs().max(1.0);
        let first = self.first().t;
        let last = self.last().t;
        if first > t0 + eps || last < t1 - eps {
            return Err(Error::InsufficientSnapshots(format!(
                "trajectory spans [{first}, {last}], window is [{t0}, {t1}]"
            )));
        }
        let lo = self.snapshots.iter().position(|s| s.t >= t0 - eps).unwrap_or(0);
        let hi = self.snapshots.iter().rposition(|s| s.t <= t1 + eps).unwrap_or(0);
        if hi <= lo {
            return Err(Error::InsufficientSnapshots(format!(
                "window [{t0}, {t1}] is shorter than one snapshot spacing"
            )));
        }
        Ok(&self.snapshots[lo..=hi])
    }

    /// Errors unless every step was stored.
    pub fn require_dense(&self) -> Result<()> {
        match &self.config {
            Some(cfg) if cfg.cadence != 1 => Err(Error::InsufficientSnapshots(format!(
                "dense cadence required, trajectory stores every {} steps",
                cfg.cadence
            ))),
            _ => Ok(()),
        }
    }
}

fn drift(values: impl Iterator<Item = f64>) -> f64 {
    let mut first = None;
    let mut worst: f64 = 0.0;
    for v in values {
        let f = *first.get_or_insert(v);
        if f != 0.0 {
            worst = worst.max((v - f).abs() / f.abs());
        }
    }
    worst
}

/// `e^{itΔ} f`: exact multiplier `e^{-itρ²}` on the spectrum.
pub fn free_propagate(f: &RadialField, t: f64) -> RadialField {
    if t == 0.0 {
        return f.clone();
    }
    propagate_spectral(&f.forward(), t).inverse()
}

fn propagate_spectral(spec: &SpectralField, t: f64) -> SpectralField {
    spec.multiply(|rho| Complex64::from_polar(1.0, -t * rho * rho))
}

fn nonlinear_phase(u: &RadialField, tau: f64, coupling: Coupling) -> RadialField {
    let p = 4.0 / u.grid().dim() as f64;
    let mu = coupling.mu();
    u.map(|_, v| v * Complex64::from_polar(1.0, -mu * v.norm().powf(p) * tau))
}

/// One Strang step; errors if the spectral tail passes [`GUARD_TAIL`].
pub fn step(u: &RadialField, dt: f64, coupling: Coupling) -> Result<RadialField> {
    let (next, tail) = strang(u, dt, coupling);
    if tail > GUARD_TAIL {
        return Err(Error::ResolutionLoss { time: dt, tail });
    }
    Ok(next)
}

fn strang(u: &RadialField, dt: f64, coupling: Coupling) -> (RadialField, f64) {
    let half = nonlinear_phase(u, 0.5 * dt, coupling);
    let spec = propagate_spectral(&half.forward(), dt);
    let tail = spec.tail_fraction();
    (nonlinear_phase(&spec.inverse(), 0.5 * dt, coupling), tail)
}

/// Runs `cfg` from `u0`. A guard trip stops the run early and is recorded in
/// [`Trajectory::outcome`] with the partial trajectory kept.
pub fn evolve(cfg: &SimulationConfig, u0: &RadialField) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    if !u0.is_finite() {
        return Err(invalid("u0", "non-finite initial data"));
    }
    let initial = record(cfg, cfg.t_start, u0);
    let tail = initial.tail;
    if tail > GUARD_TAIL {
        return Err(Error::UnderResolved { tail });
    }
    let grad0 = initial.kinetic.sqrt();
    let mut traj = Trajectory {
        config: Some(cfg.clone()),
        snapshots: alloc::vec![Snapshot { t: cfg.t_start, field: u0.clone() }],
        log: alloc::vec![initial],
        outcome: RunOutcome::Completed,
    };
    let mut u = u0.clone();
    for n in 1..=steps {
        let t = cfg.t_start + n as f64 * cfg.dt;
        u = match cfg.stepper {
            Stepper::Strang => strang(&u, cfg.dt, cfg.coupling).0,
            Stepper::Linear => free_propagate(&u, cfg.dt),
        };
        if n % cfg.cadence == 0 {
            let entry = record(cfg, t, &u);
            let growth = if grad0 > 0.0 { entry.kinetic.sqrt() / grad0 } else { 1.0 };
            traj.snapshots.push(Snapshot { t, field: u.clone() });
            traj.log.push(entry);
            if entry.tail > GUARD_TAIL {
                traj.outcome = RunOutcome::ResolutionLoss { t, tail: entry.tail };
                break;
            }
            if growth > GUARD_GROWTH {
                traj.outcome = RunOutcome::BlowupGuard { t, growth };
                break;
            }
        }
    }
    Ok(traj)
}

fn record(cfg: &SimulationConfig, t: f64, u: &RadialField) -> ConservationEntry {
    let spec = u.forward();
    let energy = match cfg.stepper {
        Stepper::Strang => energy_parts(u, &spec, cfg.coupling),
        Stepper::Linear => 0.5 * kinetic_spectral(&spec),
    };
    ConservationEntry { t, mass: mass(u), energy, kinetic: kinetic_spectral(&spec), tail: spec.tail_fraction() }
}

/// `‖u(t1) - e^{i(t1-t0)Δ} u(t0) + i ∫_{t0}^{t1} e^{i(t1-s)Δ} μF(u(s)) ds‖₂`, with
/// the time integral by the composite trapezoid rule over stored snapshots.
pub fn duhamel_residual(traj: &Trajectory, t0: f64, t1: f64) -> Result<f64> {
    let i0 = traj
        .index_of(t0)
        .ok_or_else(|| Error::InsufficientSnapshots(format!("no snapshot at t0 = {t0}")))?;
    let i1 = traj
        .index_of(t1)
        .ok_or_else(|| Error::InsufficientSnapshots(format!("no snapshot at t1 = {t1}")))?;
    if i1 <= i0 {
        return Err(Error::InsufficientSnapshots("need t0 < t1 with snapshots between".into()));
    }
    let (coupling, forcing) = match &traj.config {
        Some(cfg) => (cfg.coupling, cfg.stepper == Stepper::Strang),
        None => (Coupling::Focusing, true),
    };
    let mu = coupling.mu();
    let snaps = &traj.snapshots[i0..=i1];
    let end = snaps.last().expect("window").t;
    let start = propagate_spectral(&snaps[0].field.forward(), end - snaps[0].t);
    let mut acc: Vec<Complex64> = snaps.last().unwrap().field.forward().coeffs().to_vec();
    for (a, s) in acc.iter_mut().zip(start.coeffs()) {
        *a -= s;
    }
    if forcing {
        let last = snaps.len() - 1;
        for (j, snap) in snaps.iter().enumerate() {
            let h_left = if j > 0 { snap.t - snaps[j - 1].t } else { 0.0 };
            let h_right = if j < last { snaps[j + 1].t - snap.t } else { 0.0 };
            let weight = 0.5 * (h_left + h_right);
            let forced = propagate_spectral(&nonlinearity(&snap.field).forward(), end - snap.t);
            let factor = Complex64::new(0.0, mu * weight);
            for (a, c) in acc.iter_mut().zip(forced.coeffs()) {
                *a += factor * c;
            }
        }
    }
    let residual = SpectralField::new(traj.grid().clone(), acc)?;
    Ok(residual.norm_sq().sqrt())
}
