use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use radnls_core::corpus::{self, CorpusSpec};
use radnls_core::groundstate::{
    certify, gn_ratio, make_pc, make_sw, shoot_ground_state, solve_ground_state,
    solve_ground_state_with, standard_stabilizer, PetviashviliOptions, Seed,
};
use radnls_core::norms::{energy, kinetic, lebesgue_integral, mass};
use radnls_core::{Complex64, Coupling, Error, GroundState, RadialField, RadialGrid};

const TOL: f64 = 1e-8;

fn grid(n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(4, 20.0, n).unwrap())
}

fn ground() -> &'static GroundState {
    static Q: OnceLock<GroundState> = OnceLock::new();
    Q.get_or_init(|| solve_ground_state(grid(512), TOL).unwrap())
}

#[test]
fn residual_below_tolerance() {
    let q = ground();
    assert!(q.residual < TOL);
    assert_eq!(q.dim, 4);
}

#[test]
fn pohozaev_relations() {
    let q = ground();
    let p3 = lebesgue_integral(&q.profile, 3.0);
    assert!((q.kinetic / p3 - 2.0 / 3.0).abs() < 1e-4 * 2.0 / 3.0);
    assert!((q.mass - 2.0 / 6.0 * p3).abs() < 1e-4 * q.mass);
    let e = energy(&q.profile, Coupling::Focusing).unwrap();
    assert!(e.abs() < 1e-4 * q.kinetic);
}

#[test]
fn frozen_values() {
    // frozen from a run at n = 1024 and cross-checked by shooting
    let q = ground();
    assert!((q.amplitude() - 8.6719).abs() < 1e-3, "{}", q.amplitude());
    assert!((q.mass - 408.857).abs() < 1e-2, "{}", q.mass);
    assert!((q.kinetic - 2.0 * q.mass).abs() < 1e-4 * q.kinetic);
}

#[test]
fn shooting_agrees() {
    let q = ground();
    let shot = shoot_ground_state(4).unwrap();
    assert!((shot.mass - q.mass).abs() < 1e-4 * q.mass);
    assert!((shot.amplitude - q.amplitude()).abs() < 1e-4 * q.amplitude());
    assert!(matches!(shoot_ground_state(1), Err(Error::DimensionOutOfRange(1))));
}

#[test]
fn positive_and_decreasing() {
    let q = ground();
    assert!(q.is_positive());
    assert_eq!(q.monotonicity_violation(1e-10), None);
}

#[test]
fn negative_seed_gives_same_profile() {
    let opts = PetviashviliOptions { seed: Seed::Gaussian { amplitude: -1.0 }, ..Default::default() };
    let neg = solve_ground_state_with(grid(512), TOL, &opts).unwrap();
    let diff = mass(&neg.profile.sub(&ground().profile).unwrap()).sqrt();
    assert!(diff < 1e-7 * ground().mass.sqrt());
}

#[test]
fn insensitive_to_stabilizer() {
    let base = standard_stabilizer(4);
    assert_eq!(base, 2.0);
    for gamma in [1.75, 2.25] {
        let opts = PetviashviliOptions { stabilizer: Some(gamma), ..Default::default() };
        let other = solve_ground_state_with(grid(512), TOL, &opts).unwrap();
        assert!((other.mass - ground().mass).abs() < 1e-7 * ground().mass, "γ={gamma}");
    }
}

#[test]
fn grid_stable_under_doubling() {
    let fine = solve_ground_state(grid(1024), TOL).unwrap();
    assert!((fine.mass - ground().mass).abs() < 1e-6 * fine.mass);
}

#[test]
fn rejects_bad_tolerance_and_coarse_grid() {
    assert!(solve_ground_state(grid(512), 0.0).is_err());
    assert!(solve_ground_state(grid(512), f64::NAN).is_err());
    let coarse = Arc::new(RadialGrid::new(4, 20.0, 16).unwrap());
    assert!(matches!(solve_ground_state(coarse, TOL), Err(Error::ResolutionTooLow { .. })));
}

#[test]
fn gn_equality_on_the_orbit() {
    let q = ground();
    assert!((gn_ratio(&q.profile, q).unwrap() - 1.0).abs() < 1e-3);
    for (c, theta, lambda) in [(0.5, 1.0, 1.5), (2.0, -2.0, 0.75)] {
        let f = q.profile.rescale(lambda).unwrap().scale(Complex64::from_polar(c, theta));
        let j = gn_ratio(&f, q).unwrap();
        assert!((j - 1.0).abs() < 1e-3, "λ={lambda}: {j}");
    }
}

#[test]
fn gaussian_is_strictly_below_the_sharp_constant() {
    let q = ground();
    let g = RadialField::from_real_fn(q.grid().clone(), |r| (-r * r).exp());
    let j = gn_ratio(&g, q).unwrap();
    assert!(j > 0.0 && j < 0.99, "{j}");
    assert_eq!(gn_ratio(&RadialField::zeros(q.grid().clone()), q), Err(Error::ZeroField));
}

#[test]
fn gn_bound_over_corpus() {
    let q = ground();
    let fields = corpus::fields(q.grid(), &CorpusSpec::default(), 100, 2024).unwrap();
    for (i, f) in fields.iter().enumerate() {
        let j = gn_ratio(f, q).unwrap();
        assert!(j <= 1.0 + 1e-3, "field {i}: {j}");
    }
}

#[test]
fn solitary_wave_and_pseudo_conformal() {
    let q = ground();
    assert_eq!(make_sw(q, 0.0).values(), q.profile.values());
    let pc = make_pc(q, -0.7).unwrap();
    assert!((mass(&pc) - q.mass).abs() < 1e-6 * q.mass);
    let ratio = (kinetic(&make_pc(q, -0.5).unwrap()) / kinetic(&make_pc(q, -0.25).unwrap())).sqrt();
    assert!((ratio - 0.5).abs() < 0.05, "{ratio}");
    assert!(make_pc(q, 0.0).is_err());
    assert!(make_pc(q, 1e-3).is_err());
}

#[test]
fn certification_passes() {
    let cert = certify(ground(), TOL).unwrap();
    assert!(cert.passed, "{cert:?}");
    assert!(cert.mass_agreement < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sharp_gn_inequality(seed in any::<u64>()) {
        let q = ground();
        let f = corpus::fields(q.grid(), &CorpusSpec::default(), 1, seed).unwrap().remove(0);
        prop_assert!(gn_ratio(&f, q).unwrap() <= 1.0 + 1e-3);
    }

    #[test]
    fn pc_mass_is_conserved(t in -1.0f64..-0.2) {
        let q = ground();
        let pc = make_pc(q, t).unwrap();
        prop_assert!((mass(&pc) - q.mass).abs() < 1e-6 * q.mass);
    }
}
