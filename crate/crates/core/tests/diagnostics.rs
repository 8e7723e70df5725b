use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use radnls_core::corpus::{self, CorpusSpec};
use radnls_core::diagnostics::{
    concentration_along, concentration_radii, records_along, frequency_decay_fit, kinetic_localization_radius,
    spatial_decay_scan, truncated_virial, virial_acceleration, virial_limit, Verdict,
};
use radnls_core::evolution::{evolve, Snapshot, Stepper};
use radnls_core::groundstate::solve_ground_state;
use radnls_core::lp::CutoffProfile;
use radnls_core::norms::{energy, kinetic, mass};
use radnls_core::{
    Complex64, Coupling, DyadicScale, GroundState, RadialField, RadialGrid, SimulationConfig,
    SpectralField, Trajectory,
};

fn grid(r_max: f64, n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(4, r_max, n).unwrap())
}

fn scale(n: f64) -> DyadicScale {
    DyadicScale::from_value(n).unwrap()
}

fn ground() -> &'static GroundState {
    static Q: OnceLock<GroundState> = OnceLock::new();
    Q.get_or_init(|| solve_ground_state(grid(20.0, 512), 1e-10).unwrap())
}

/// Solitary-wave run with every step stored.
fn sw_run() -> &'static Trajectory {
    static T: OnceLock<Trajectory> = OnceLock::new();
    T.get_or_init(|| {
        let cfg = SimulationConfig::new(Coupling::Focusing, 1e-3, 0.5).with_cadence(1);
        evolve(&cfg, &ground().profile).unwrap()
    })
}

fn gaussian(g: &Arc<RadialGrid>, amp: f64) -> RadialField {
    RadialField::from_real_fn(g.clone(), |r| amp * (-r * r).exp())
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

fn smoothstep(x: f64) -> f64 {
    let h = |y: f64| if y <= 0.0 { 0.0 } else { (-1.0 / y).exp() };
    h(x) / (h(x) + h(1.0 - x))
}

/// Root of a decreasing function on `[lo, hi]` by bisection.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule on `[a, b]`.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn virial_of_gaussian() {
    let g = grid(20.0, 512);
    let f = gaussian(&g, 1.0);
    assert_eq!(truncated_virial(&RadialField::zeros(g.clone()), 5.0), 0.0);
    let exact = PI * PI / 4.0;
    assert!((truncated_virial(&f, 15.0) - exact).abs() < 1e-9);
    assert!((truncated_virial(&f, f64::INFINITY) - exact).abs() < 1e-9);
    let mut prev = 0.0;
    for r in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let v = truncated_virial(&f, r);
        assert!(v >= prev);
        assert!(v <= (25.0 * r / 24.0).powi(2) * mass(&f));
        prev = v;
    }
}

#[test]
fn free_virial_is_eight_times_kinetic() {
    let g = grid(20.0, 512);
    let u0 = gaussian(&g, 1.0);
    let cfg = SimulationConfig::new(Coupling::Focusing, 1e-3, 0.1)
        .with_cadence(1)
        .with_stepper(Stepper::Linear);
    let traj = evolve(&cfg, &u0).unwrap();
    let k = kinetic(&u0);
    for t in [0.01, 0.05, 0.09] {
        let acc = virial_acceleration(&traj, f64::INFINITY, t).unwrap();
        assert!((acc - 8.0 * k).abs() < 0.05 * 8.0 * k, "t={t}: {acc}");
    }
    assert!(virial_acceleration(&traj, f64::INFINITY, 0.001).is_err());
    assert!(virial_acceleration(&traj, f64::INFINITY, 0.1).is_err());
}

#[test]
fn solitary_wave_virial_vanishes() {
    let traj = sw_run();
    let k = ground().kinetic;
    for t in [0.1, 0.25, 0.4] {
        let acc = virial_acceleration(traj, 10.0, t).unwrap();
        assert!(acc.abs() < 1e-4 * 8.0 * k, "t={t}: {acc}");
    }
}

#[test]
fn defocusing_virial_matches_energy() {
    let g = grid(20.0, 512);
    let u0 = gaussian(&g, 3.0);
    let e = energy(&u0, Coupling::Defocusing).unwrap();
    assert!(e > 0.0);
    let cfg = SimulationConfig::new(Coupling::Defocusing, 1e-3, 0.05).with_cadence(1);
    let traj = evolve(&cfg, &u0).unwrap();
    let acc = virial_acceleration(&traj, 15.0, 0.02).unwrap();
    assert!(acc > 0.0);
    assert!((acc - virial_limit(e)).abs() < 0.1 * virial_limit(e), "{acc} vs {}", virial_limit(e));
}

#[test]
fn kinetic_localization_is_uniform_along_solitary_wave() {
    let traj = sw_run();
    let eta = 1e-2 * ground().kinetic;
    let cells: Vec<usize> = traj
        .snapshots
        .iter()
        .step_by(20)
        .map(|s| kinetic_localization_radius(&s.field, eta).unwrap().cell)
        .collect();
    assert!(cells.len() >= 20);
    let lo = *cells.iter().min().unwrap();
    let hi = *cells.iter().max().unwrap();
    assert!(hi - lo <= 1, "{cells:?}");
}

#[test]
fn kinetic_localization_limits_and_scaling() {
    let g = grid(20.0, 1024);
    let f = RadialField::from_real_fn(g.clone(), |r| (1.0 + r * r) * (-r * r / 2.0).exp());
    let total = kinetic(&f);
    assert!(kinetic_localization_radius(&f, total * 1.01).is_err());
    assert!(kinetic_localization_radius(&f, 0.0).is_err());
    let near = kinetic_localization_radius(&f, total * (1.0 - 1e-12)).unwrap();
    assert_eq!(near.cell, 0);
    assert_eq!(near.radius, g.radii()[0]);
    let cell = g.radii()[1] - g.radii()[0];
    let eta = 1e-2 * total;
    let base = kinetic_localization_radius(&f, eta).unwrap().radius;
    for lambda in [0.5, 2.0] {
        let s = f.rescale(lambda).unwrap();
        // ‖∇‖² scales by λ², so the same tail fraction needs η λ²
        let r = kinetic_localization_radius(&s, eta * lambda * lambda).unwrap().radius;
        assert!((r - base / lambda).abs() <= cell * 1.01, "λ={lambda}: {r} vs {}", base / lambda);
    }
}

#[test]
fn concentration_constant_along_solitary_wave() {
    let traj = sw_run();
    let reports = concentration_along(traj, 1e-2 * ground().mass).unwrap();
    assert_eq!(reports.len(), traj.snapshots.len());
    let xs: Vec<usize> = reports.iter().map(|r| r.spatial.cell).collect();
    let ks: Vec<usize> = reports.iter().map(|r| r.frequency.cell).collect();
    assert!(xs.iter().max().unwrap() - xs.iter().min().unwrap() <= 1);
    assert!(ks.iter().max().unwrap() - ks.iter().min().unwrap() <= 1);
    assert!(reports.iter().all(|r| r.scale_proxy().is_finite() && r.t.is_some()));
}

#[test]
fn gaussian_half_mass_radii() {
    let g = grid(20.0, 1024);
    let f = gaussian(&g, 1.0);
    let rep = concentration_radii(&f, 0.5 * mass(&f)).unwrap();
    // tail fractions in d = 4: (1 + 2R²) e^{-2R²} in space, (1 + ρ²/2) e^{-ρ²/2} in frequency
    let y = bisect(|y| (1.0 + y) * (-y).exp() - 0.5, 0.0, 10.0);
    let rx = (y / 2.0).sqrt();
    let rk = (2.0 * y).sqrt();
    let dx = g.radii()[1] - g.radii()[0];
    let dk = g.freqs()[1] - g.freqs()[0];
    assert!((rep.spatial.radius - rx).abs() <= dx, "{} vs {rx}", rep.spatial.radius);
    assert!((rep.frequency.radius - rk).abs() <= dk, "{} vs {rk}", rep.frequency.radius);
    assert!(concentration_radii(&f, mass(&f)).is_err());
    assert!(concentration_radii(&f, -1.0).is_err());
}

#[test]
fn concentration_scaling() {
    // 1% tails of the Gaussian in closed form, rescaled by λ
    let g = grid(20.0, 1024);
    let f = gaussian(&g, 1.0);
    let y = bisect(|y| (1.0 + y) * (-y).exp() - 0.01, 0.0, 20.0);
    let (rx, rk) = ((y / 2.0).sqrt(), (2.0 * y).sqrt());
    let dx = g.radii()[1] - g.radii()[0];
    let dk = g.freqs()[1] - g.freqs()[0];
    for lambda in [0.5, 1.0, 2.0] {
        let s = f.rescale(lambda).unwrap();
        let rep = concentration_radii(&s, 1e-2 * mass(&s)).unwrap();
        assert!((rep.spatial.radius - rx / lambda).abs() <= dx, "λ={lambda}");
        assert!((rep.frequency.radius - rk * lambda).abs() <= dk, "λ={lambda}");
    }
}

#[test]
fn solitary_wave_frequency_decay_passes() {
    let scales = DyadicScale::ladder(scale(2.0), scale(16.0));
    let report = frequency_decay_fit(sw_run(), 1.0, &scales).unwrap();
    assert!(report.passes(), "{}", report.note);
    assert_eq!(report.threshold, -1.75);
    if let Some(slope) = report.slope {
        assert!(slope <= -1.75 + report.residual);
    }
    assert!(frequency_decay_fit(sw_run(), 1.0, &scales[..3]).is_err());
}

#[test]
fn free_gaussian_frequency_decay_is_superpolynomial() {
    let g = grid(20.0, 1024);
    let cfg = SimulationConfig::new(Coupling::Focusing, 1e-3, 0.1)
        .with_cadence(10)
        .with_stepper(Stepper::Linear);
    let traj = evolve(&cfg, &gaussian(&g, 1.0)).unwrap();
    let report = frequency_decay_fit(&traj, 1.0, &DyadicScale::ladder(scale(4.0), scale(32.0))).unwrap();
    assert!(report.passes());
    assert!(matches!(report.verdict, Verdict::Superpolynomial | Verdict::Pass), "{}", report.note);
}

/// Field whose shell band norms are `N^{-1.2}` exactly: each band carries a
/// spectral bump inside its plateau, shifted outward by the phase `e^{-8iρ}`.
fn planted_frequency(g: &Arc<RadialGrid>, scales: &[DyadicScale]) -> RadialField {
    let phi = CutoffProfile;
    let mut total = RadialField::zeros(g.clone());
    for &n in scales {
        let nv = n.value();
        let coeffs = g
            .freqs()
            .iter()
            .map(|&rho| Complex64::from_polar(bump((rho - 0.75 * nv) / (0.2 * nv)), -8.0 * rho))
            .collect();
        let v = SpectralField::new(g.clone(), coeffs).unwrap().inverse();
        let shell = v.map(|r, x| x * phi.gt(1.0, r));
        let c = nv.powf(-1.2) / mass(&shell).sqrt();
        total = total.add(&v.scale(Complex64::new(c, 0.0))).unwrap();
    }
    total
}

#[test]
fn planted_frequency_slope_is_recovered_and_fails() {
    let g = grid(40.0, 2048);
    let scales = DyadicScale::ladder(scale(4.0), scale(32.0));
    let u = planted_frequency(&g, &scales);
    let traj = Trajectory::from_snapshots(vec![Snapshot { t: 0.0, field: u }]).unwrap();
    let report = frequency_decay_fit(&traj, 1.0, &scales).unwrap();
    let slope = report.slope.unwrap();
    assert!((slope + 1.2).abs() < 0.05, "{slope}");
    assert_eq!(report.verdict, Verdict::Fail);
    assert!(!report.passes());
}

/// Field whose band-64 tail mass beyond `R` is proportional to `1/R` on `[1, 8]`:
/// density `r^{-2}` up to `r ≈ 12`, with the cut-off mass parked in a lump further out.
fn planted_spatial(g: &Arc<RadialGrid>) -> RadialField {
    let on = |r: f64| smoothstep((r - 0.5) / 0.5);
    let off = |r: f64| 1.0 - smoothstep(r - 11.0);
    // ∫_R^∞ r^{-2} on·off dr = 1/R - missing for R ≥ 1, the lump restores `missing`
    let missing = simpson(|r| (1.0 - off(r)) / (r * r), 11.0, 12.0, 2000) + 1.0 / 12.0;
    let area = 2.0 * PI * PI;
    let lump = |r: f64| bump((r - 14.5) / 2.0);
    let lump_mass = area * simpson(|r| lump(r).powi(2) * r.powi(3), 12.5, 16.5, 4000);
    let amp = (area * missing / lump_mass).sqrt();
    RadialField::from_fn(g.clone(), |r| {
        let envelope = (on(r) * off(r)).sqrt() * r.powf(-2.5) + amp * lump(r);
        Complex64::from_polar(envelope, 48.0 * r)
    })
}

#[test]
fn planted_spatial_decay_is_recovered() {
    let g = grid(20.0, 2048);
    let u = planted_spatial(&g);
    let traj = Trajectory::from_snapshots(vec![Snapshot { t: 0.0, field: u }]).unwrap();
    let radii = [2.0, 2.0 * 2f64.sqrt(), 4.0, 4.0 * 2f64.sqrt(), 8.0];
    let report = spatial_decay_scan(&traj, (scale(32.0), scale(64.0)), &radii).unwrap();
    let delta = -report.slope.unwrap();
    assert!((delta - 0.5).abs() < 0.05, "{delta}");
    assert!(report.passes());
    assert!(spatial_decay_scan(&traj, (scale(32.0), scale(64.0)), &[]).is_err());
    assert!(spatial_decay_scan(&traj, (scale(32.0), scale(64.0)), &[4.0, 2.0]).is_err());
}

#[test]
fn solitary_wave_spatial_decay_passes() {
    // bands below about 24π/r_max are not resolved by the spectral spacing
    let report = spatial_decay_scan(sw_run(), (scale(8.0), scale(16.0)), &[1.0, 2.0, 4.0, 8.0]).unwrap();
    assert!(report.passes(), "{}", report.note);
    let values = report.table.values();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn per_snapshot_records() {
    let traj = sw_run();
    let scales = DyadicScale::ladder(scale(1.0), scale(8.0));
    let records = records_along(traj, Coupling::Focusing, 10.0, &scales, 1e-2).unwrap();
    assert_eq!(records.len(), traj.snapshots.len());
    let q = ground();
    let e = energy(&q.profile, Coupling::Focusing).unwrap();
    for r in &records {
        assert!((r.mass - q.mass).abs() < 1e-8 * q.mass);
        assert!((r.energy - e).abs() < 1e-5 * q.kinetic);
        assert!((r.virial - truncated_virial(&q.profile, 10.0)).abs() < 1e-3 * r.virial);
        assert_eq!(r.band_norms.len(), 4);
        // the bands and the low part at N = 1 partition the mass
        assert!(r.band_norms.iter().map(|b| b.value.powi(2)).sum::<f64>() < r.mass);
    }
    assert!(records_along(traj, Coupling::Focusing, 10.0, &scales, 0.0).is_err());

    // the free flow records half the kinetic energy
    let g = grid(20.0, 512);
    let cfg = SimulationConfig::new(Coupling::Focusing, 1e-3, 0.01).with_stepper(Stepper::Linear);
    let free = evolve(&cfg, &gaussian(&g, 1.0)).unwrap();
    let rec = records_along(&free, Coupling::Defocusing, 10.0, &[], 0.5).unwrap();
    assert!((rec[0].energy - 0.5 * kinetic(&gaussian(&g, 1.0))).abs() < 1e-14);
}

#[test]
fn fits_are_reproducible() {
    let scales = DyadicScale::ladder(scale(2.0), scale(16.0));
    let a = frequency_decay_fit(sw_run(), 1.0, &scales).unwrap();
    let b = frequency_decay_fit(sw_run(), 1.0, &scales).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn virial_bound_and_monotone_radii(seed in any::<u64>(), r in 0.2f64..8.0) {
        let g = grid(20.0, 256);
        let f = corpus::fields(&g, &CorpusSpec::default(), 1, seed).unwrap().remove(0);
        let v = truncated_virial(&f, r);
        prop_assert!(v >= 0.0);
        prop_assert!(v <= (25.0 * r / 24.0).powi(2) * mass(&f) * (1.0 + 1e-12));
        prop_assert!(truncated_virial(&f, 2.0 * r) >= v);
        let m = mass(&f);
        let a = concentration_radii(&f, 1e-3 * m).unwrap();
        let b = concentration_radii(&f, 1e-1 * m).unwrap();
        prop_assert!(b.spatial.radius <= a.spatial.radius);
        prop_assert!(b.frequency.radius <= a.frequency.radius);
    }
}
