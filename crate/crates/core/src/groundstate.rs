//! The ground state `Q`: the positive radial decaying solution of
//! `ΔQ - Q + Q^{1+4/d} = 0`.
//!
//! The profile is computed by a Petviashvili iteration on the grid and
//! cross-checked against an independent shooting integration of the radial
//! ODE. The explicit solutions built from `Q` (the solitary wave and the
//! pseudo-conformal blowup solution) live here as well.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::RadialField;
use crate::grid::{sphere_area, RadialGrid};
use crate::norms::{
    ensure_resolved, energy_parts, kinetic_spectral, lebesgue_integral, mass, potential_exponent,
    Coupling, RESOLVED_TAIL,
};
#[allow(unused_imports)]
use num_traits::Float;

/// A certified ground state on a grid.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub profile: RadialField,
    pub dim: u32,
    /// `M(Q) = ‖Q‖₂²`
    pub mass: f64,
    /// `‖∇Q‖₂²`
    pub kinetic: f64,
    /// `‖Q‖_{2(d+2)/d}^{2(d+2)/d}`
    pub potential: f64,
    /// `‖ΔQ - Q + Q^{1+4/d}‖₂ / ‖Q‖₂`
    pub residual: f64,
    pub iterations: usize,
}

/// Initial profile for the iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seed {
    /// `amplitude · e^{-r²}`; a negative amplitude is folded onto the positive root.
    Gaussian { amplitude: f64 },
}

impl Default for Seed {
    fn default() -> Self {
        Seed::Gaussian { amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PetviashviliOptions {
    pub seed: Seed,
    /// Stabilizing exponent on the Petviashvili factor; `None` uses the
    /// standard `p/(p-1)` for the nonlinearity degree `p = 1 + 4/d`.
    pub stabilizer: Option<f64>,
    pub max_iterations: usize,
}

impl Default for PetviashviliOptions {
    fn default() -> Self {
        PetviashviliOptions { seed: Seed::default(), stabilizer: None, max_iterations: 2000 }
    }
}

/// Standard stabilizing exponent `p/(p-1) = (d+4)/4`.
pub fn standard_stabilizer(dim: u32) -> f64 {
    let p = 1.0 + 4.0 / dim as f64;
    p / (p - 1.0)
}

/// Solves for `Q` with the default options.
pub fn solve_ground_state(grid: Arc<RadialGrid>, tol: f64) -> Result<GroundState> {
    solve_ground_state_with(grid, tol, &PetviashviliOptions::default())
}

pub fn solve_ground_state_with(
    grid: Arc<RadialGrid>,
    tol: f64,
    opts: &PetviashviliOptions,
) -> Result<GroundState> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(invalid("tol", "must be positive and finite"));
    }
    let dim = grid.dim();
    let p = 4.0 / dim as f64;
    let gamma = opts.stabilizer.unwrap_or_else(|| standard_stabilizer(dim));

    let Seed::Gaussian { amplitude } = opts.seed;
    if amplitude == 0.0 || !amplitude.is_finite() {
        return Err(invalid("seed", "Gaussian amplitude must be nonzero and finite"));
    }
    let seed = RadialField::from_real_fn(grid.clone(), |r| amplitude * (-r * r).exp());
    let roundtrip = seed.forward().inverse();
    let seed_err = (mass(&roundtrip.sub(&seed)?) / mass(&seed)).sqrt();
    if seed_err > tol / 10.0 {
        return Err(Error::ResolutionTooLow { n: grid.len(), min: grid.len() * 2 });
    }

    let weights = grid.spectral_weights();
    let freqs = grid.freqs();
    // Sign is fixed by projection, so a negative seed lands on the positive root.
    let mut q = seed.map(|_, v| Complex64::new(v.norm(), 0.0));
    let mut last_change = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let q_hat = q.forward();
        let n_hat = q.map(|_, v| v * v.norm().powf(p)).forward();
        let mut num = 0.0;
        let mut den = 0.0;
        for m in 0..grid.len() {
            let l = 1.0 + freqs[m] * freqs[m];
            num += weights[m] * l * q_hat.coeffs()[m].norm_sqr();
            den += weights[m] * (n_hat.coeffs()[m].conj() * q_hat.coeffs()[m]).re;
        }
        if !(den > 0.0) {
            return Err(Error::NonConvergence { iterations: it, change: f64::NAN });
        }
        let factor = (num / den).powf(gamma);
        let raw = n_hat.multiply_real(|rho| factor / (1.0 + rho * rho)).inverse();
        let peak = raw.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let next = raw.map(|_, v| Complex64::new(v.norm(), 0.0));
        let change = (mass(&next.sub(&q)?) / mass(&next)).sqrt();
        q = next;
        last_change = change;
        if change < 1e-14 || (change < tol * 1e-2 && residual(&q) < tol / 10.0) {
            // the fixed point must already be positive before projection
            let most_negative = raw.values().iter().map(|v| v.re).fold(0.0, f64::min);
            if most_negative < -1e-8 * peak {
                return Err(Error::SignChanging);
            }
            return finish(q, it);
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iterations, change: last_change })
}

fn finish(profile: RadialField, iterations: usize) -> Result<GroundState> {
    let dim = profile.grid().dim();
    let spec = profile.forward();
    let ground = GroundState {
        dim,
        mass: mass(&profile),
        kinetic: kinetic_spectral(&spec),
        potential: lebesgue_integral(&profile, potential_exponent(dim)),
        residual: residual(&profile),
        iterations,
        profile,
    };
    Ok(ground)
}

/// `‖ΔQ - Q + |Q|^{4/d} Q‖₂ / ‖Q‖₂`, with `Δ` applied spectrally.
pub fn residual(q: &RadialField) -> f64 {
    let p = 4.0 / q.grid().dim() as f64;
    let lap = q.forward().multiply_real(|rho| -rho * rho).inverse();
    let values: Vec<Complex64> = lap
        .values()
        .iter()
        .zip(q.values())
        .map(|(l, v)| l - v + v * v.norm().powf(p))
        .collect();
    let res = RadialField::new(q.grid().clone(), values).expect("finite residual");
    (mass(&res) / mass(q)).sqrt()
}

impl GroundState {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.profile.grid()
    }

    /// `Q(0)` by band-limited interpolation.
    pub fn amplitude(&self) -> f64 {
        self.profile.resample(&[0.0])[0].re
    }

    /// `‖∇Q‖² / ‖Q‖_{p}^{p}`, equal to `d/(d+2)` for the exact ground state.
    pub fn pohozaev_kinetic_ratio(&self) -> f64 {
        self.kinetic / self.potential
    }

    /// `M(Q) / ‖Q‖_{p}^{p}`, equal to `2/(d+2)` for the exact ground state.
    pub fn pohozaev_mass_ratio(&self) -> f64 {
        self.mass / self.potential
    }

    /// `E(Q) / ‖∇Q‖²` in the focusing case.
    pub fn energy_ratio(&self) -> f64 {
        energy_parts(&self.profile, &self.profile.forward(), Coupling::Focusing) / self.kinetic
    }

    /// Smallest index after which the profile fails to be nonincreasing by more
    /// than `slack · Q(r_1)`, if any.
    pub fn monotonicity_violation(&self, slack: f64) -> Option<usize> {
        let v = self.profile.values();
        let top = v[0].re;
        v.windows(2).position(|w| w[1].re > w[0].re + slack * top)
    }

    pub fn is_positive(&self) -> bool {
        self.profile.values().iter().all(|v| v.re > 0.0 && v.im == 0.0)
    }
}

/// Sharp Gagliardo-Nirenberg quotient
/// `J(f) = ‖f‖_{p}^{p} / [ (d+2)/d · (M(f)/M(Q))^{2/d} · ‖∇f‖² ]`, `p = 2(d+2)/d`.
/// Equals one exactly on the orbit of `Q` under scaling, phase and modulus.
pub fn gn_ratio(f: &RadialField, ground: &GroundState) -> Result<f64> {
    let m = mass(f);
    if m == 0.0 {
        return Err(Error::ZeroField);
    }
    let spec = f.forward();
    ensure_resolved(&spec)?;
    let d = f.grid().dim() as f64;
    let potential = lebesgue_integral(f, potential_exponent(f.grid().dim()));
    let kinetic = kinetic_spectral(&spec);
    Ok(potential / ((d + 2.0) / d * (m / ground.mass).powf(2.0 / d) * kinetic))
}

/// Solitary wave `e^{it} Q`.
pub fn make_sw(ground: &GroundState, t: f64) -> RadialField {
    ground.profile.scale(Complex64::from_polar(1.0, t))
}

/// Pseudo-conformal solution `|t|^{-d/2} e^{i(|x|²-4)/(4t)} Q(x/t)`, blowing up at `t = 0`.
pub fn make_pc(ground: &GroundState, t: f64) -> Result<RadialField> {
    if t == 0.0 || !t.is_finite() {
        return Err(invalid("t", "pseudo-conformal time must be nonzero and finite"));
    }
    let grid = ground.grid().clone();
    let s = t.abs();
    let d = grid.dim() as f64;
    // the dilated profile must still fit inside the truncation radius
    let edge = ground.profile.resample(&[grid.r_max() / s])[0].norm();
    let peak = ground.amplitude();
    if s > 1.0 && edge > 1e-8 * peak {
        return Err(invalid("t", "dilated profile exceeds the truncation radius"));
    }
    let radii: Vec<f64> = grid.radii().iter().map(|r| r / s).collect();
    let profile = ground.profile.resample(&radii);
    let values = grid
        .radii()
        .iter()
        .zip(profile)
        .map(|(&r, q)| q * Complex64::from_polar(s.powf(-d / 2.0), (r * r - 4.0) / (4.0 * t)))
        .collect();
    let field = RadialField::new(grid, values)?;
    // a profile narrower than the node spacing is sampled as (nearly) zero
    if (mass(&field) - ground.mass).abs() > 1e-6 * ground.mass {
        return Err(invalid("t", "concentrated profile is not resolved by the grid"));
    }
    let tail = field.forward().tail_fraction();
    if tail > RESOLVED_TAIL {
        return Err(Error::UnderResolved { tail });
    }
    Ok(field)
}

/// Result of the shooting integration of the radial ODE.
#[derive(Debug, Clone, Copy)]
pub struct ShootingResult {
    /// `Q(0)`
    pub amplitude: f64,
    /// `M(Q)` integrated along the trajectory up to the separation radius.
    pub mass: f64,
    /// Radius at which the bracketing trajectories separate.
    pub reach: f64,
}

/// Shooting on `Q(0)` for `Q'' + (d-1)/r Q' - Q + |Q|^{4/d} Q = 0`, `Q'(0) = 0`,
/// bisecting between trajectories that cross zero (too large) and those that
/// turn upward before crossing (too small).
pub fn shoot_ground_state(dim: u32) -> Result<ShootingResult> {
    if !(2..=crate::grid::MAX_DIMENSION).contains(&dim) {
        return Err(Error::DimensionOutOfRange(dim));
    }
    let mut lo = 1.0 + 1e-6;
    let mut hi = 2.0;
    while matches!(shoot(dim, hi).outcome, Outcome::Undershoot) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NonConvergence { iterations: 0, change: hi });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(dim, mid).outcome {
            Outcome::Undershoot => lo = mid,
            Outcome::Overshoot => hi = mid,
        }
    }
    let run = shoot(dim, lo);
    Ok(ShootingResult { amplitude: lo, mass: run.mass, reach: run.reach })
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Overshoot,
    Undershoot,
}

struct Shot {
    outcome: Outcome,
    mass: f64,
    reach: f64,
}

const R_LIMIT: f64 = 60.0;

fn shoot(dim: u32, amplitude: f64) -> Shot {
    let d = dim as f64;
    let p = 4.0 / d;
    let area = sphere_area(dim);
    let rhs = |r: f64, y: [f64; 3]| -> [f64; 3] {
        let q = y[0];
        let dq = y[1];
        [dq, -(d - 1.0) / r * dq + q - q * q.abs().powf(p), area * q * q * r.powf(d - 1.0)]
    };
    // series start: Q ≈ a + c r², c = (a - a^{1+p}) / (2d)
    let r0 = 1e-4;
    let c = (amplitude - amplitude.powf(1.0 + p)) / (2.0 * d);
    let mut r = r0;
    let mut y = [amplitude + c * r0 * r0, 2.0 * c * r0, area * amplitude * amplitude * r0.powf(d) / d];
    let mut h = 1e-3;
    let atol = 1e-13;
    while r < R_LIMIT {
        let (next, err) = dopri_step(&rhs, r, y, h);
        let scale = atol + 1e-12 * y[0].abs().max(next[0].abs());
        let ratio = err / scale;
        if ratio <= 1.0 {
            r += h;
            y = next;
            if y[0] < 0.0 {
                return Shot { outcome: Outcome::Overshoot, mass: y[2], reach: r };
            }
            if y[1] > 0.0 {
                return Shot { outcome: Outcome::Undershoot, mass: y[2], reach: r };
            }
        }
        let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * grow).min(0.05);
    }
    Shot { outcome: Outcome::Undershoot, mass: y[2], reach: r }
}

fn dopri_step(f: &impl Fn(f64, [f64; 3]) -> [f64; 3], t: f64, y: [f64; 3], h: f64) -> ([f64; 3], f64) {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] =
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut k = [[0.0; 3]; 7];
    for s in 0..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..3 {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = f(t + C[s] * h, ys);
    }
    let mut out = y;
    let mut err: f64 = 0.0;
    for i in 0..2 {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for s in 0..7 {
            hi += B5[s] * k[s][i];
            lo += B4[s] * k[s][i];
        }
        out[i] = y[i] + h * hi;
        err = err.max((h * (hi - lo)).abs());
    }
    out[2] = y[2] + h * (0..7).map(|s| B5[s] * k[s][2]).sum::<f64>();
    (out, err)
}

/// Every check the certification report carries, with the thresholds used.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certificate {
    pub dim: u32,
    pub mass: f64,
    pub kinetic: f64,
    pub amplitude: f64,
    pub residual: f64,
    pub pohozaev_kinetic_ratio: f64,
    pub pohozaev_mass_ratio: f64,
    pub energy_ratio: f64,
    pub gn_ratio: f64,
    pub shooting_amplitude: f64,
    pub shooting_mass: f64,
    pub mass_agreement: f64,
    pub positive: bool,
    pub monotone: bool,
    pub passed: bool,
}

/// Certification thresholds.
pub const POHOZAEV_TOL: f64 = 1e-4;
pub const ENERGY_TOL: f64 = 1e-4;
pub const GN_TOL: f64 = 1e-3;
pub const SHOOTING_TOL: f64 = 1e-4;

/// Runs every certification check against the residual tolerance `tol`.
pub fn certify(ground: &GroundState, tol: f64) -> Result<Certificate> {
    let d = ground.dim as f64;
    let shot = shoot_ground_state(ground.dim)?;
    let kinetic_ratio = ground.pohozaev_kinetic_ratio();
    let mass_ratio = ground.pohozaev_mass_ratio();
    let energy_ratio = ground.energy_ratio();
    let gn = gn_ratio(&ground.profile, ground)?;
    let agreement = (ground.mass - shot.mass).abs() / ground.mass;
    let positive = ground.is_positive();
    let monotone = ground.monotonicity_violation(1e-10).is_none();
    let passed = ground.residual < tol
        && (kinetic_ratio - d / (d + 2.0)).abs() < POHOZAEV_TOL * d / (d + 2.0)
        && (mass_ratio - 2.0 / (d + 2.0)).abs() < POHOZAEV_TOL * 2.0 / (d + 2.0)
        && energy_ratio.abs() < ENERGY_TOL
        && (gn - 1.0).abs() < GN_TOL
        && agreement < SHOOTING_TOL
        && positive
        && monotone;
    Ok(Certificate {
        dim: ground.dim,
        mass: ground.mass,
        kinetic: ground.kinetic,
        amplitude: ground.amplitude(),
        residual: ground.residual,
        pohozaev_kinetic_ratio: kinetic_ratio,
        pohozaev_mass_ratio: mass_ratio,
        energy_ratio,
        gn_ratio: gn,
        shooting_amplitude: shot.amplitude,
        shooting_mass: shot.mass,
        mass_agreement: agreement,
        positive,
        monotone,
        passed,
    })
}

/// Solves and certifies; a failed certification is an error carrying the reason.
pub fn solve_certified(grid: Arc<RadialGrid>, tol: f64) -> Result<(GroundState, Certificate)> {
    let ground = solve_ground_state(grid, tol)?;
    let cert = certify(&ground, tol)?;
    if !cert.passed {
        return Err(Error::Certification(format!("{cert:?}")));
    }
    Ok((ground, cert))
}
