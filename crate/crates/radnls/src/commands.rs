//! The five subcommands. Each returns a report and an exit code, or an error
//! whose exit code follows [`crate::error::exit`].

use std::path::{Path, PathBuf};

use radnls_core::diagnostics::{
    concentration_along, frequency_decay_fit, kinetic_localization_radius, records_along, spatial_decay_scan,
    truncated_virial, virial_acceleration, virial_limit,
};
use radnls_core::evolution::{evolve, Stepper};
use radnls_core::groundstate::{make_pc, make_sw};
use radnls_core::norms::{energy, kinetic, l2_distance, mass};
use radnls_core::recurrence::{
    check_recurrence, extract_a_sequence, iterate_induction, synthetic_sequence, verify_recursive_control,
    ASequence, LemmaStatus,
};
use radnls_core::{DyadicScale, GroundState, RadialField, Trajectory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cache::GroundStateCache;
use crate::checks::{self, Context};
use crate::config::{Diagnostic, InitialCondition, RunConfig, SequenceSource};
use crate::error::{exit, CliError, CliResult};
use crate::formats::{self, read_trajectory, write_snapshot, write_text, write_trajectory};
use crate::report::{Check, Report, Stamp};

/// Everything a command needs besides its own arguments.
pub struct Env {
    pub config: RunConfig,
    /// Directory relative output paths and the cache resolve against.
    pub root: PathBuf,
}

pub struct Outcome {
    pub report: Report,
    pub exit: u8,
}

impl Env {
    pub fn stamp(&self) -> Stamp {
        Stamp::new(self.config.hash(), self.config.seed)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.config.output_dir(&self.root)
    }

    fn ground(&self) -> CliResult<GroundState> {
        let grid = self.config.grid()?;
        let gs = &self.config.ground_state;
        let cache = GroundStateCache::new(&self.root);
        Ok(cache.get_or_solve(&grid, gs.tol, gs.cache, &self.stamp())?.0)
    }
}

fn finish(report: Report) -> Outcome {
    let exit = if report.passed() { exit::OK } else { exit::DIAGNOSTIC };
    Outcome { report, exit }
}

/// Solves, certifies, and writes `ground_state.bin`, `ground_state.txt` and
/// `certification.json` to the output directory.
pub fn ground_state(env: &Env) -> CliResult<Outcome> {
    env.config.validate()?;
    let grid = env.config.grid()?;
    let stamp = env.stamp();
    let tol = env.config.ground_state.tol;
    let ground = radnls_core::groundstate::solve_ground_state(grid, tol)?;
    let cert = radnls_core::groundstate::certify(&ground, tol)?;
    let out = env.output_dir();
    write_snapshot(&out.join("ground_state.bin"), &ground.profile, 0.0, &stamp)?;
    write_text(&out.join("ground_state.txt"), &ground.profile, 0.0, &stamp)?;

    let mut report = Report::new("ground-state", stamp.clone());
    let d = ground.dim as f64;
    report.row("mass", None, ground.mass);
    report.row("kinetic", None, ground.kinetic);
    report.row("amplitude", None, cert.amplitude);
    report.checks.push(Check::below("residual", cert.residual, tol));
    report.checks.push(Check::within("pohozaev_kinetic_ratio", cert.pohozaev_kinetic_ratio, d / (d + 2.0), 1e-4));
    report.checks.push(Check::within("pohozaev_mass_ratio", cert.pohozaev_mass_ratio, 2.0 / (d + 2.0), 1e-4));
    report.checks.push(Check::below("energy_ratio", cert.energy_ratio.abs(), 1e-4));
    report.checks.push(Check::within("gn_ratio", cert.gn_ratio, 1.0, 1e-3));
    report.checks.push(Check::below("shooting_mass_agreement", cert.mass_agreement, 1e-4));
    report.checks.push(Check::flag("positive", cert.positive, "Q > 0"));
    report.checks.push(Check::flag("monotone", cert.monotone, "Q nonincreasing"));
    report.detail("certificate", &cert);
    formats::write_json(&out.join("certification.json"), &report)?;
    if cert.passed && env.config.ground_state.cache {
        GroundStateCache::new(&env.root).store(&ground, &cert, tol, &stamp)?;
    }
    Ok(finish(report))
}

fn initial_field(env: &Env) -> CliResult<(RadialField, Option<GroundState>)> {
    let cfg = &env.config;
    let grid = cfg.grid()?;
    let t0 = cfg.time.t_start;
    Ok(match &cfg.initial {
        InitialCondition::Gaussian { amplitude, width } => {
            let (a, w) = (*amplitude, *width);
            (RadialField::from_real_fn(grid, move |r| a * (-w * r * r).exp()), None)
        }
        InitialCondition::File { path } => (formats::read_profile(path, &grid)?, None),
        kind => {
            let q = env.ground()?;
            let u0 = match kind {
                InitialCondition::GroundState => q.profile.clone(),
                InitialCondition::Sw => make_sw(&q, t0),
                _ => make_pc(&q, t0)?,
            };
            (u0, Some(q))
        }
    })
}

/// Runs the configured evolution and writes `trajectory/` under the output
/// directory. A guard trip still writes the partial trajectory, then exits 4.
pub fn evolve_cmd(env: &Env) -> CliResult<Outcome> {
    env.config.validate()?;
    let sim = env.config.simulation()?;
    let (u0, ground) = initial_field(env)?;
    let traj = evolve(&sim, &u0)?;
    let stamp = env.stamp();
    let mut checks = vec![
        Check::below("mass_drift", traj.mass_drift(), 1e-8),
        Check::below("energy_drift", traj.energy_drift(), 1e-5),
    ];
    if let (Some(q), None) = (&ground, traj.outcome.error()) {
        let t = traj.last().t;
        let scale = q.mass.sqrt();
        match env.config.initial {
            InitialCondition::GroundState | InitialCondition::Sw if sim.stepper == Stepper::Strang => {
                let err = l2_distance(&traj.last().field, &make_sw(q, t))? / scale;
                checks.push(Check::below("sw_final_error", err, 1e-4));
            }
            InitialCondition::PcGroundState if sim.stepper == Stepper::Strang && t < 0.0 => {
                let err = l2_distance(&traj.last().field, &make_pc(q, t)?)? / scale;
                checks.push(Check::below("pc_final_error", err, 1e-2));
            }
            _ => {}
        }
    }
    let dir = env.output_dir().join("trajectory");
    let manifest = write_trajectory(&dir, &traj, &stamp, checks.clone())?;

    let mut report = Report::new("evolve", stamp);
    for e in &traj.log {
        report.row("mass", Some(e.t), e.mass);
        report.row("energy", Some(e.t), e.energy);
    }
    report.checks = checks;
    report.detail("trajectory", dir.display().to_string());
    report.detail("outcome", manifest.outcome);
    report.detail("snapshots", manifest.snapshots.len());
    if let Some(err) = traj.outcome.error() {
        report.detail("error", CliError::Core(err).to_json());
        return Ok(Outcome { report, exit: exit::NUMERICAL_GUARD });
    }
    // drift and oracle checks are recorded, not enforced, by `evolve`
    Ok(Outcome { report, exit: exit::OK })
}

fn scale_range(range: (f64, f64)) -> CliResult<(DyadicScale, DyadicScale)> {
    Ok((DyadicScale::from_value(range.0)?, DyadicScale::from_value(range.1)?))
}

/// Default virial times: the interior quartiles, snapped to stored snapshots.
fn quartiles(traj: &Trajectory) -> Vec<f64> {
    let times = traj.times();
    let k = times.len();
    if k < 5 {
        return Vec::new();
    }
    [k / 4, k / 2, 3 * k / 4].iter().map(|&i| times[i.clamp(2, k - 3)]).collect()
}

/// Runs the configured diagnostics on a stored trajectory.
pub fn diagnose(env: &Env, trajectory: &Path) -> CliResult<Outcome> {
    env.config.validate()?;
    let (_, traj) = read_trajectory(trajectory)?;
    let coupling = traj.config.as_ref().map(|c| c.coupling).unwrap_or(env.config.coupling()?);
    let linear = traj.config.as_ref().is_some_and(|c| c.stepper == Stepper::Linear);
    let mut report = Report::new("diagnose", env.stamp());
    report.detail("trajectory", trajectory.display().to_string());
    for d in &env.config.diagnostics {
        match d {
            Diagnostic::Conservation { mass_tol, energy_tol } => {
                report.checks.push(Check::below("mass_drift", traj.mass_drift(), *mass_tol));
                report.checks.push(Check::below("energy_drift", traj.energy_drift(), *energy_tol));
            }
            Diagnostic::Virial { radius, times, tol } => {
                let radius = radius.unwrap_or(f64::INFINITY);
                let u0 = &traj.first().field;
                let e = if linear { 0.5 * kinetic(u0) } else { energy(u0, coupling)? };
                let target = virial_limit(e);
                let times = if times.is_empty() { quartiles(&traj) } else { times.clone() };
                if times.is_empty() {
                    return Err(CliError::Invalid("virial needs at least five stored snapshots".into()));
                }
                for t in times {
                    let acc = virial_acceleration(&traj, radius, t)?;
                    report.row("virial_acceleration", Some(t), acc);
                    let rel = (acc - target).abs() / target.abs().max(f64::MIN_POSITIVE);
                    report.checks.push(Check::below(format!("virial_vs_16E_at_{t}"), rel, *tol));
                }
                report.row("virial_limit_16E", None, target);
                if radius.is_finite() {
                    let worst = traj
                        .snapshots
                        .iter()
                        .map(|s| truncated_virial(&s.field, radius) / ((25.0 * radius / 24.0).powi(2) * mass(&s.field)))
                        .fold(0.0, f64::max);
                    report.checks.push(Check {
                        name: "virial_bound_ratio".into(),
                        value: worst,
                        requirement: "<= 1".into(),
                        passed: worst <= 1.0,
                    });
                }
            }
            Diagnostic::Localization { fraction, max_cells } => {
                let eta = fraction * kinetic(&traj.first().field);
                let mut cells = Vec::with_capacity(traj.snapshots.len());
                for s in &traj.snapshots {
                    let r = kinetic_localization_radius(&s.field, eta)?;
                    report.row("kinetic_localization_radius", Some(s.t), r.radius);
                    cells.push(r.cell as i64);
                }
                let spread = cells.iter().map(|c| (c - cells[0]).unsigned_abs()).max().unwrap_or(0);
                report.checks.push(Check {
                    name: "localization_cell_offset".into(),
                    value: spread as f64,
                    requirement: format!("<= {max_cells}"),
                    passed: spread <= *max_cells as u64,
                });
            }
            Diagnostic::Concentration { fraction } => {
                let eta = fraction * mass(&traj.first().field);
                for c in concentration_along(&traj, eta)? {
                    report.row("spatial_concentration_radius", c.t, c.spatial.radius);
                    report.row("frequency_concentration_radius", c.t, c.frequency.radius);
                }
            }
            Diagnostic::FrequencyDecay { shell, scales } => {
                let (lo, hi) = scale_range(*scales)?;
                let fit = frequency_decay_fit(&traj, *shell, &DyadicScale::ladder(lo, hi))?;
                report.table(&fit.table);
                report.checks.push(Check {
                    name: "frequency_decay".into(),
                    value: fit.slope.unwrap_or(f64::NEG_INFINITY),
                    requirement: format!("noise floor or slope <= {}", fit.threshold),
                    passed: fit.passes(),
                });
                report.detail("frequency_decay", &fit);
            }
            Diagnostic::SpatialDecay { scales, radii } => {
                let fit = spatial_decay_scan(&traj, scale_range(*scales)?, radii)?;
                report.table(&fit.table);
                report.checks.push(Check {
                    name: "spatial_decay".into(),
                    value: fit.slope.unwrap_or(f64::NEG_INFINITY),
                    requirement: "noise floor or slope < 0".into(),
                    passed: fit.passes(),
                });
                report.detail("spatial_decay", &fit);
            }
            Diagnostic::Records { virial_radius, scales, fraction } => {
                let (lo, hi) = scale_range(*scales)?;
                let records = records_along(&traj, coupling, *virial_radius, &DyadicScale::ladder(lo, hi), *fraction)?;
                for r in &records {
                    report.row("mass", Some(r.t), r.mass);
                    report.row("energy", Some(r.t), r.energy);
                    report.row("virial", Some(r.t), r.virial);
                }
                report.detail("records", &records);
            }
        }
    }
    let out = env.output_dir().join("diagnostics.json");
    formats::write_json(&out, &report)?;
    Ok(finish(report))
}

fn lemma_sequence(env: &Env) -> CliResult<ASequence> {
    let lemma = &env.config.lemma;
    let p = lemma.params()?;
    Ok(match &lemma.source {
        SequenceSource::Synthetic { n_max, saturate } => {
            let mut rng = ChaCha8Rng::seed_from_u64(env.config.seed);
            synthetic_sequence(&p, DyadicScale::from_value(*n_max)?, *saturate, &mut rng)?
        }
        SequenceSource::Power { exponent, scale, n_max } => {
            let (e, c) = (*exponent, *scale);
            ASequence::from_fn(p.m0, DyadicScale::from_value(*n_max)?, move |n| c * n.powf(-e))?
        }
        SequenceSource::Trajectory { path, scales, window_exponent } => {
            let (_, traj) = read_trajectory(path)?;
            let (lo, hi) = scale_range(*scales)?;
            extract_a_sequence(&traj, &DyadicScale::ladder(lo, hi), *window_exponent)?
        }
    })
}

/// Recurrence check, lemma verification and (when admissible) the induction table.
/// Exits 1 only when the lemma's conclusion fails under admissible constants.
pub fn lemma(env: &Env) -> CliResult<Outcome> {
    env.config.validate()?;
    let p = env.config.lemma.params()?;
    let seq = lemma_sequence(env)?;
    let recurrence = check_recurrence(&seq, &p)?;
    let verification = verify_recursive_control(&seq, &p)?;
    let mut report = Report::new("lemma", env.stamp());
    for (n, a) in seq.scales.iter().zip(&seq.values) {
        report.row("A_N", Some(n.value()), *a);
    }
    for r in &recurrence.rows {
        report.row("recurrence_rhs", Some(r.n), r.rhs);
        report.row("recurrence_slack", Some(r.n), r.slack);
    }
    for r in &verification.rows {
        report.row("conclusion_bound", Some(r.n), r.bound);
    }
    report.row("minimal_c1", None, recurrence.minimal_c1);
    report.row("admissibility_threshold", None, verification.admissibility.threshold);
    let status = match &verification.status {
        LemmaStatus::Holds => "holds",
        LemmaStatus::Fails => "fails",
        LemmaStatus::Inapplicable { .. } => "inapplicable",
    };
    report.checks.push(Check::flag("lemma_not_failed", verification.status != LemmaStatus::Fails, format!("status {status}")));
    report.detail("status", status);
    report.detail("sequence", &seq);
    report.detail("recurrence", &recurrence);
    report.detail("verification", &verification);
    if env.config.lemma.induction && verification.admissibility.admissible() {
        report.detail("induction", iterate_induction(&p, seq.last())?);
    }
    formats::write_json(&env.output_dir().join("lemma.json"), &report)?;
    Ok(finish(report))
}

/// Runs the chosen suites; known shortfalls are reported but do not fail.
pub fn selftest(env: &Env, ids: &[u8]) -> CliResult<Outcome> {
    let ctx = Context::new();
    let mut report = Report::new("selftest", env.stamp());
    let mut blocking = false;
    let mut results = Vec::new();
    for &id in ids {
        let r = checks::run(id, &ctx)?;
        eprintln!("{}", r.line());
        blocking |= !r.blocking().is_empty();
        report.row(format!("criterion_{id}_seconds"), None, r.seconds);
        for c in &r.checks {
            let mut check = c.check.clone();
            check.name = format!("{id}.{}", check.name);
            report.checks.push(check);
        }
        results.push(r);
    }
    report.detail("criteria", &results);
    let exit = if blocking { exit::DIAGNOSTIC } else { exit::OK };
    Ok(Outcome { report, exit })
}
