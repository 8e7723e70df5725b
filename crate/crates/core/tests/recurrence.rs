use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use radnls_core::evolution::{evolve, Snapshot, Stepper};
use radnls_core::groundstate::solve_ground_state;
use radnls_core::norms::{lebesgue_norm, mass};
use radnls_core::recurrence::{
    check_recurrence, dual_nonlinearity_norm, extract_a_sequence, iterate_induction, strichartz_exponent,
    strichartz_norm, synthetic_sequence, verify_recursive_control, window, ASequence, Constraint,
    LemmaStatus, Provenance, RecurrenceParams, Violation, DEFAULT_WINDOW_EXPONENT,
};
use radnls_core::{
    Coupling, DyadicScale, Error, GroundState, RadialField, RadialGrid, SimulationConfig, Trajectory,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(r_max: f64, n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(4, r_max, n).unwrap())
}

fn scale(n: f64) -> DyadicScale {
    DyadicScale::from_value(n).unwrap()
}

fn ground(n: usize) -> GroundState {
    solve_ground_state(grid(10.0, n), 1e-10).unwrap()
}

fn sw_run(q: &GroundState, duration: f64) -> Trajectory {
    let cfg = SimulationConfig::new(Coupling::Focusing, 1e-3, duration).with_cadence(1);
    evolve(&cfg, &q.profile).unwrap()
}

struct Fixture {
    q: GroundState,
    traj: Trajectory,
}

/// Solitary wave on `r_max = 10`, `n = 1024`, every step stored over `[0, 1]`.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let q = ground(1024);
        let traj = sw_run(&q, 1.0);
        Fixture { q, traj }
    })
}

fn params(s: f64, gamma: f64, c1: f64, m0: f64, beta: f64, a: f64) -> RecurrenceParams {
    RecurrenceParams { s, gamma, c1, m0: scale(m0), beta, a }
}

fn constant_trajectory(f: &RadialField, count: usize) -> Trajectory {
    let snaps = (0..count).map(|k| Snapshot { t: k as f64 / (count - 1) as f64, field: f.clone() }).collect();
    Trajectory::from_snapshots(snaps).unwrap()
}

#[test]
fn strichartz_of_trivial_trajectories() {
    let g = grid(10.0, 256);
    assert_eq!(strichartz_exponent(4), 4.0);
    assert!(strichartz_exponent(2).is_infinite());
    let zero = constant_trajectory(&RadialField::zeros(g.clone()), 11);
    assert_eq!(strichartz_norm(&zero, 0.0, 1.0).unwrap(), 0.0);
    let f = RadialField::from_real_fn(g, |r| 3.0 * (-r * r).exp());
    let traj = constant_trajectory(&f, 11);
    let expected = mass(&f).sqrt().max(lebesgue_norm(&f, 4.0).unwrap());
    assert!((strichartz_norm(&traj, 0.0, 1.0).unwrap() - expected).abs() < 1e-12 * expected);
    assert!(strichartz_norm(&traj, 0.0, 2.0).is_err());
    assert!(strichartz_norm(&traj, 0.5, 0.5).is_err());
}

#[test]
fn strichartz_of_solitary_wave() {
    let Fixture { q, traj } = fixture();
    let expected = q.mass.sqrt().max(lebesgue_norm(&q.profile, 4.0).unwrap());
    let got = strichartz_norm(traj, 0.0, 1.0).unwrap();
    assert!((got - expected).abs() < 1e-6 * expected, "{got} vs {expected}");
}

#[test]
fn strichartz_needs_dense_cadence() {
    let q = ground(256);
    let cfg = SimulationConfig::new(Coupling::Focusing, 1e-3, 0.1).with_cadence(10);
    let traj = evolve(&cfg, &q.profile).unwrap();
    assert!(matches!(strichartz_norm(&traj, 0.0, 0.1), Err(Error::InsufficientSnapshots(_))));
}

#[test]
fn dual_nonlinearity_norms() {
    let Fixture { traj, .. } = fixture();
    let (t0, t1) = window(0.0, scale(16.0), DEFAULT_WINDOW_EXPONENT);
    assert_eq!((t0, t1), (0.0, 0.25));
    let at16 = dual_nonlinearity_norm(traj, scale(16.0), t0, t1).unwrap();
    let at32 = dual_nonlinearity_norm(traj, scale(32.0), t0, t1).unwrap();
    assert!(at16 > 0.0);
    assert!(at32 < at16 / 4.0, "{at16} {at32}");

    let g = traj.grid().clone();
    let zero = constant_trajectory(&RadialField::zeros(g.clone()), 11);
    assert_eq!(dual_nonlinearity_norm(&zero, scale(16.0), 0.0, 1.0).unwrap(), 0.0);
    let lin = SimulationConfig::new(Coupling::Focusing, 1e-3, 0.1)
        .with_cadence(1)
        .with_stepper(Stepper::Linear);
    let run = evolve(&lin, &fixture().q.profile).unwrap();
    assert_eq!(dual_nonlinearity_norm(&run, scale(16.0), 0.0, 0.1).unwrap(), 0.0);
    assert!(dual_nonlinearity_norm(traj, scale(16.0), 0.0, 0.0005).is_err());
}

#[test]
fn extracted_sequence_from_solitary_wave() {
    let Fixture { traj, .. } = fixture();
    let scales = DyadicScale::ladder(scale(4.0), scale(64.0));
    let seq = extract_a_sequence(traj, &scales, DEFAULT_WINDOW_EXPONENT).unwrap();
    let Provenance::Extracted { trivial_bound: Some(a), window_exponent } = seq.provenance else {
        panic!("expected an extracted sequence with a trivial bound");
    };
    assert_eq!(window_exponent, 0.5);
    assert!(seq.values.windows(2).all(|w| w[1] < w[0]), "{:?}", seq.values);
    assert!(seq.values.iter().all(|&v| v <= a));
    // frozen: A_4 ≈ 6.10 and at least eight orders of magnitude lost by N = 64
    assert!((seq.values[0] - 6.10).abs() < 0.01, "{}", seq.values[0]);
    assert!(seq.values[4] < 1e-8 * seq.values[0]);
}

#[test]
fn a_n_is_monotone_on_a_fixed_window() {
    let Fixture { traj, .. } = fixture();
    let scales = DyadicScale::ladder(scale(2.0), scale(64.0));
    // a vanishing window exponent keeps the window at [0, 1] for every N
    let seq = extract_a_sequence(traj, &scales, 1e-12).unwrap();
    assert!(seq.values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}

#[test]
fn extraction_errors_and_zero() {
    let g = grid(10.0, 256);
    let zero = constant_trajectory(&RadialField::zeros(g.clone()), 11);
    let seq = extract_a_sequence(&zero, &DyadicScale::ladder(scale(2.0), scale(8.0)), 0.5).unwrap();
    assert!(seq.values.iter().all(|&v| v == 0.0));
    let short = SimulationConfig::new(Coupling::Focusing, 1e-3, 0.1).with_cadence(1);
    let f = RadialField::from_real_fn(g, |r| (-r * r).exp());
    let run = evolve(&short, &f).unwrap();
    assert!(matches!(
        extract_a_sequence(&run, &[scale(4.0)], 0.5),
        Err(Error::CoverageGap(n)) if n == 4.0
    ));
    assert!(matches!(extract_a_sequence(&run, &[], 0.5), Err(Error::Empty(_))));
}

#[test]
fn sequence_validation() {
    let ladder = DyadicScale::ladder(scale(1.0), scale(8.0));
    assert!(ASequence::new(ladder.clone(), vec![1.0; 4], Provenance::Synthetic).is_ok());
    assert!(ASequence::new(ladder.clone(), vec![1.0; 3], Provenance::Synthetic).is_err());
    let gap = vec![scale(1.0), scale(4.0)];
    assert!(matches!(ASequence::new(gap, vec![1.0, 1.0], Provenance::Synthetic), Err(Error::CoverageGap(_))));
    assert!(ASequence::new(ladder, vec![1.0, -1.0, 1.0, 1.0], Provenance::Synthetic).is_err());
}

#[test]
fn recurrence_trivial_cases() {
    let p = params(1.25, 0.2, 1.0, 1.0, 0.25, 10.0);
    let zero = ASequence::from_fn(scale(1.0), scale(1024.0), |_| 0.0).unwrap();
    let report = check_recurrence(&zero, &p).unwrap();
    assert!(report.holds);
    for row in &report.rows {
        assert!((row.slack - row.n.powf(-1.25)).abs() < 1e-15);
    }
    let power = ASequence::from_fn(scale(1.0), scale(1024.0), |n| n.powf(-1.25)).unwrap();
    for c1 in [1.0, 3.0] {
        let report = check_recurrence(&power, &RecurrenceParams { c1, ..p }).unwrap();
        assert!(report.holds);
        assert!(report.rows.iter().all(|r| r.slack >= 0.0));
    }
    let late = ASequence::from_fn(scale(2.0), scale(8.0), |_| 0.0).unwrap();
    assert!(matches!(check_recurrence(&late, &p), Err(Error::CoverageGap(_))));
}

#[test]
fn recurrence_param_validation() {
    let ok = params(1.25, 0.2, 1.0, 1.0, 0.25, 10.0);
    assert!(ok.validate().is_ok());
    assert!(params(1.0, 0.2, 1.0, 1.0, 0.25, 10.0).validate().is_err());
    assert!(params(1.25, 0.3, 1.0, 1.0, 0.25, 10.0).validate().is_err());
    assert!(params(1.25, 0.2, 0.0, 1.0, 0.25, 10.0).validate().is_err());
    assert!(params(1.25, 0.2, 1.0, 0.5, 0.25, 10.0).validate().is_err());
    assert!(params(1.25, 0.2, 1.0, 1.0, 1.0, 10.0).validate().is_err());
    assert!(params(1.25, 0.2, 1.0, 1.0, 0.25, 0.0).validate().is_err());
}

#[test]
fn minimal_c1_is_grid_stable() {
    let p = params(1.25, 0.2, 1.0, 4.0, 0.25, 10.0);
    let scales = DyadicScale::ladder(scale(4.0), scale(64.0));
    let coarse = extract_a_sequence(&fixture().traj, &scales, 0.5).unwrap();
    let fine_run = sw_run(&ground(2048), 0.5);
    let fine = extract_a_sequence(&fine_run, &scales, 0.5).unwrap();
    let a = check_recurrence(&coarse, &p).unwrap().minimal_c1;
    let b = check_recurrence(&fine, &p).unwrap().minimal_c1;
    assert!(a.is_finite() && a > 0.0);
    assert!((b / a - 1.0).abs() < 0.3, "{a} vs {b}");
    // frozen at n = 1024
    assert!((a - 6.1002).abs() < 1e-3, "{a}");
}

#[test]
fn power_sequence_satisfies_the_lemma() {
    let mut p = params(1.25, 0.2, 1.0, 1.0, 0.5, 10.0);
    p.beta = 0.5 * p.admissibility().threshold;
    let seq = ASequence::from_fn(scale(1.0), DyadicScale::from_exponent(40), |n| n.powf(-1.25)).unwrap();
    let report = verify_recursive_control(&seq, &p).unwrap();
    assert_eq!(report.status, LemmaStatus::Holds);
    assert!(report.rows.iter().all(|r| r.pass && r.a_n <= 2.0 * r.n.powf(-1.05)));
    assert!(report.oracle_confirms && report.induction_consistent);
}

#[test]
fn saturating_example_is_inadmissible() {
    let p = params(1.25, 0.2, 1.0, 1.0, 1e-3, 10.0);
    let adm = p.admissibility();
    assert!(adm.threshold < 1e-15, "{}", adm.threshold);
    assert_eq!(adm.violated, vec![Constraint::BaseCase, Constraint::InductiveStep]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let seq = synthetic_sequence(&p, DyadicScale::from_exponent(20), true, &mut rng).unwrap();
    let report = verify_recursive_control(&seq, &p).unwrap();
    let LemmaStatus::Inapplicable { violations } = &report.status else {
        panic!("expected inapplicable, got {:?}", report.status);
    };
    let named: Vec<Constraint> = violations
        .iter()
        .filter_map(|v| match v {
            Violation::Constraint { constraint, .. } => Some(*constraint),
            _ => None,
        })
        .collect();
    assert_eq!(named, vec![Constraint::BaseCase, Constraint::InductiveStep]);
    assert!(violations.iter().all(|v| !v.describe().is_empty()));
    // the induction oracle still confirms the conclusion on this range
    assert!(report.oracle_confirms);
    assert!(report.rows.iter().all(|r| r.pass));
    assert!(iterate_induction(&p, DyadicScale::from_exponent(20)).is_err());
}

#[test]
fn adversarial_constant_sequence_is_inapplicable() {
    let p = params(1.25, 0.2, 1.0, 1.0, 0.5, 10.0);
    let seq = ASequence::from_fn(scale(1.0), DyadicScale::from_exponent(20), |_| 10.0).unwrap();
    let report = verify_recursive_control(&seq, &p).unwrap();
    let LemmaStatus::Inapplicable { violations } = report.status else { panic!() };
    assert!(violations.iter().any(|v| matches!(v, Violation::Constraint { .. })));
    assert!(violations.iter().any(|v| matches!(v, Violation::Recurrence { .. })));
}

#[test]
fn induction_table_rows() {
    let mut p = params(1.5, 0.3, 2.0, 2.0, 0.5, 5.0);
    p.beta = 0.5 * p.admissibility().threshold;
    let n_max = DyadicScale::from_exponent(70);
    let table = iterate_induction(&p, n_max).unwrap();
    let m0 = p.m0.value();
    // j = 1: the trivial bound substituted into the hypothesis
    for (k, &n) in table.scales.iter().enumerate() {
        let mut sum = 0.0;
        let mut m = m0;
        while m <= p.beta * n {
            sum += (m / n).powf(p.s) * p.a;
            m *= 2.0;
        }
        let expected = p.a.min(p.c1 * m0.powf(p.s) * n.powf(-p.s) + sum);
        assert!((table.iterates[0][k] - expected).abs() <= 1e-12 * expected);
    }
    for k in 0..table.scales.len() {
        let limit = p.conclusion_bound(table.scales[k]);
        for j in 1..table.bounds.len() {
            let (now, before) = (table.bounds[j][k], table.bounds[j - 1][k]);
            assert!(now <= before);
            // strict wherever the tail β'^j is still visible next to the limit
            if p.beta.powi(j as i32) > 1e-14 * limit {
                assert!(now < before);
            }
        }
        assert!(table.bounds[0].last().unwrap() > table.bounds.last().unwrap().last().unwrap());
        let last = table.bounds.last().unwrap()[k];
        assert!((last - limit).abs() <= 1e-12 * limit);
    }
}

#[test]
fn halving_beta_changes_minimal_c1_by_at_most_the_removed_terms() {
    let Fixture { traj, .. } = fixture();
    let seq = extract_a_sequence(traj, &DyadicScale::ladder(scale(4.0), scale(64.0)), 0.5).unwrap();
    for beta in [1.0, 0.5, 0.25] {
        let p = params(1.25, 0.2, 1.0, 4.0, beta * 0.999, 10.0);
        let half = RecurrenceParams { beta: p.beta / 2.0, ..p };
        let a = check_recurrence(&seq, &p).unwrap();
        let b = check_recurrence(&seq, &half).unwrap();
        let removed = a
            .rows
            .iter()
            .zip(&b.rows)
            .map(|(x, y)| (x.rhs - y.rhs) / (p.m0.value().powf(p.s) * x.n.powf(-p.s)))
            .fold(0.0, f64::max);
        assert!(b.minimal_c1 >= a.minimal_c1 - 1e-12);
        assert!(b.minimal_c1 <= a.minimal_c1 + removed + 1e-12);
    }
}

fn admissible_params() -> impl Strategy<Value = RecurrenceParams> {
    (1.1f64..3.0, 0.05f64..0.95, 0.1f64..10.0, 0i32..4, 0.01f64..0.99, 0.5f64..20.0).prop_map(
        |(s, g, c1, m0, u, a)| {
            let gamma = g * (s - 1.0);
            let mut p = RecurrenceParams { s, gamma, c1, m0: DyadicScale::from_exponent(m0), beta: 0.5, a };
            p.beta = u * p.admissibility().threshold;
            p
        },
    )
}

/// Direct check of `A_N ≤ 2C₁M₀^s N^{-s+γ}` for every `N ≥ M₀`.
fn brute_force_conclusion(seq: &ASequence, p: &RecurrenceParams) -> bool {
    seq.scales
        .iter()
        .zip(&seq.values)
        .filter(|(n, _)| **n >= p.m0)
        .all(|(n, a)| *a <= 2.0 * p.c1 * p.m0.value().powf(p.s) * n.value().powf(p.gamma - p.s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn verifier_agrees_with_brute_force(p in admissible_params(), seed in any::<u64>(), top in 10i32..90) {
        prop_assert!(p.admissibility().admissible());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_max = DyadicScale::from_exponent(p.m0.exponent() + top);
        let seq = synthetic_sequence(&p, n_max, false, &mut rng).unwrap();
        let report = verify_recursive_control(&seq, &p).unwrap();
        let direct = brute_force_conclusion(&seq, &p);
        prop_assert_eq!(report.status == LemmaStatus::Holds, direct);
        prop_assert!(direct);
        prop_assert!(report.oracle_confirms && report.induction_consistent);
    }

    #[test]
    fn verifier_never_reports_holds_on_a_counterexample(
        p in admissible_params(),
        values in proptest::collection::vec(0.0f64..30.0, 8..40),
    ) {
        let seq = ASequence::new(
            DyadicScale::ladder(p.m0, DyadicScale::from_exponent(p.m0.exponent() + values.len() as i32 - 1)),
            values,
            Provenance::Synthetic,
        ).unwrap();
        let report = verify_recursive_control(&seq, &p).unwrap();
        if !brute_force_conclusion(&seq, &p) {
            prop_assert!(report.status != LemmaStatus::Holds);
        }
        // with admissible constants a failing conclusion always traces back to a hypothesis
        prop_assert!(report.status != LemmaStatus::Fails, "{:?}", report.status);
    }
}
