//! Discrete Strichartz norms, the sequence `A_N = ‖P_{≥N} u‖_{S([0, N^{-κ}])}`,
//! and a checker for the dyadic recursive-control lemma: from
//!
//! ```text
//! A_N ≤ C₁ M₀^s N^{-s} + Σ_{M₀ ≤ M ≤ β'N} (M/N)^s A_M,   A_N ≤ A,
//! ```
//!
//! for small enough `β'`, conclude `A_N ≤ 2 C₁ M₀^s N^{-s+γ}`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;

use crate::dyadic::DyadicScale;
use crate::error::{invalid, Error, Result};
use crate::evolution::{Snapshot, Stepper, Trajectory};
use crate::field::RadialField;
use crate::lp::low_symbol;
use crate::norms::{lebesgue_integral, lebesgue_norm, mass, nonlinearity};
#[allow(unused_imports)]
use num_traits::Float;

/// Window `[t₀, t₀ + N^{-κ}]` exponent used for `A_N`.
pub const DEFAULT_WINDOW_EXPONENT: f64 = 0.5;

fn check_interval(t0: f64, t1: f64) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(invalid("interval", "need finite t0 < t1"));
    }
    Ok(())
}

/// `∫_{t0}^{t1} g(u(t)) dt` by the trapezoid rule on the stored snapshots,
/// with `g` linearly interpolated across a window edge that falls between
/// two snapshots.
fn time_integral(traj: &Trajectory, t0: f64, t1: f64, g: impl Fn(&RadialField) -> f64) -> Result<f64> {
    let snaps: &[Snapshot] = &traj.snapshots;
    let eps = 1e-9 * t1.abs().max(1.0);
    let (first, last) = (snaps[0].t, snaps[snaps.len() - 1].t);
    if first > t0 + eps || last < t1 - eps {
        return Err(Error::InsufficientSnapshots(format!(
            "trajectory spans [{first}, {last}], window is [{t0}, {t1}]"
        )));
    }
    let lo = snaps.iter().position(|s| s.t >= t0 - eps).expect("covered window");
    let hi = snaps.iter().rposition(|s| s.t <= t1 + eps).expect("covered window");
    if hi < lo {
        return Err(Error::InsufficientSnapshots(format!("no snapshot inside [{t0}, {t1}]")));
    }
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(hi - lo + 3);
    let edge = |k: usize, t: f64| {
        let (a, b) = (&snaps[k - 1], &snaps[k]);
        let w = (t - a.t) / (b.t - a.t);
        g(&a.field) * (1.0 - w) + g(&b.field) * w
    };
    if snaps[lo].t > t0 + eps {
        points.push((t0, edge(lo, t0)));
    }
    points.extend(snaps[lo..=hi].iter().map(|s| (s.t, g(&s.field))));
    if snaps[hi].t < t1 - eps {
        points.push((t1, edge(hi + 1, t1)));
    }
    Ok(points.windows(2).map(|p| 0.5 * (p[1].0 - p[0].0) * (p[0].1 + p[1].1)).sum())
}

/// Endpoint exponent `2d/(d-2)` of the Strichartz space (`∞` when `d = 2`).
pub fn strichartz_exponent(dim: u32) -> f64 {
    if dim == 2 {
        f64::INFINITY
    } else {
        2.0 * dim as f64 / (dim as f64 - 2.0)
    }
}

fn strichartz_of(traj: &Trajectory, t0: f64, t1: f64, map: impl Fn(&RadialField) -> RadialField) -> Result<f64> {
    check_interval(t0, t1)?;
    traj.require_dense()?;
    let window = traj.window(t0, t1)?;
    let p = strichartz_exponent(traj.grid().dim());
    let sup = window.iter().map(|s| mass(&map(&s.field)).sqrt()).fold(0.0, f64::max);
    let l2 = time_integral(traj, t0, t1, |f| {
        let n = lebesgue_norm(&map(f), p).unwrap_or(0.0);
        n * n
    })?;
    Ok(sup.max(l2.sqrt()))
}

/// `‖u‖_{S([t0,t1])} = max(‖u‖_{L^∞_t L²_x}, ‖u‖_{L²_t L^{2d/(d-2)}_x})` over stored
/// snapshots; the sup is a max over snapshots.
pub fn strichartz_norm(traj: &Trajectory, t0: f64, t1: f64) -> Result<f64> {
    strichartz_of(traj, t0, t1, |f| f.clone())
}

/// `[t₀, t₀ + N^{-κ}]`.
pub fn window(start: f64, n: DyadicScale, exponent: f64) -> (f64, f64) {
    (start, start + n.value().powf(-exponent))
}

fn project_at_least(f: &RadialField, n: DyadicScale) -> RadialField {
    f.forward().multiply_real(|rho| 1.0 - low_symbol(n.half(), rho)).inverse()
}

/// `‖P_{≥N} F(u)‖_{L^{2(d+2)/(d+4)}_{t,x}([t0,t1])}` with `F(u) = |u|^{4/d} u`.
pub fn dual_nonlinearity_norm(traj: &Trajectory, n: DyadicScale, t0: f64, t1: f64) -> Result<f64> {
    check_interval(t0, t1)?;
    n.check_in(traj.grid())?;
    traj.require_dense()?;
    traj.window(t0, t1)?;
    if matches!(&traj.config, Some(cfg) if cfg.stepper == Stepper::Linear) {
        return Ok(0.0);
    }
    let d = traj.grid().dim() as f64;
    let q = 2.0 * (d + 2.0) / (d + 4.0);
    let total = time_integral(traj, t0, t1, |f| lebesgue_integral(&project_at_least(&nonlinearity(f), n), q))?;
    Ok(total.powf(1.0 / q))
}

/// Where an [`ASequence`] came from.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Provenance {
    /// `trivial_bound` is `‖u‖_{S([t₀, t₀+1])} + 1` when the run is long enough.
    Extracted { window_exponent: f64, trivial_bound: Option<f64> },
    Synthetic,
}

/// Values `A_N` on a gap-free dyadic ladder.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ASequence {
    pub scales: Vec<DyadicScale>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl ASequence {
    pub fn new(scales: Vec<DyadicScale>, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::Empty("A sequence"));
        }
        if scales.len() != values.len() {
            return Err(invalid("values", "one value per scale"));
        }
        if let Some(w) = scales.windows(2).find(|w| w[1] != w[0].double()) {
            return Err(Error::CoverageGap(w[0].double().value()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("values", "must be finite and nonnegative"));
        }
        Ok(ASequence { scales, values, provenance })
    }

    /// Builds the sequence `f(N)` on `lo, 2lo, …, hi`.
    pub fn from_fn(lo: DyadicScale, hi: DyadicScale, f: impl Fn(f64) -> f64) -> Result<Self> {
        let scales = DyadicScale::ladder(lo, hi);
        let values = scales.iter().map(|n| f(n.value())).collect();
        Self::new(scales, values, Provenance::Synthetic)
    }

    pub fn get(&self, n: DyadicScale) -> Option<f64> {
        let k = n.exponent() - self.scales[0].exponent();
        usize::try_from(k).ok().and_then(|k| self.values.get(k).copied())
    }

    pub fn first(&self) -> DyadicScale {
        self.scales[0]
    }

    pub fn last(&self) -> DyadicScale {
        *self.scales.last().expect("nonempty")
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// `A_N = ‖P_{≥N} u‖_{S([t₀, t₀ + N^{-κ}])}` for each `N`, with `t₀` the
/// trajectory start.
pub fn extract_a_sequence(traj: &Trajectory, scales: &[DyadicScale], window_exponent: f64) -> Result<ASequence> {
    if scales.is_empty() {
        return Err(Error::Empty("scale list"));
    }
    if !(window_exponent > 0.0) {
        return Err(invalid("window_exponent", "must be positive"));
    }
    let mut sorted = scales.to_vec();
    sorted.sort();
    let start = traj.first().t;
    let trivial = strichartz_norm(traj, start, start + 1.0).ok().map(|s| s + 1.0);
    let values = sorted
        .iter()
        .map(|&n| {
            n.check_in(traj.grid())?;
            let (t0, t1) = window(start, n, window_exponent);
            strichartz_of(traj, t0, t1, |f| project_at_least(f, n)).map_err(|e| match e {
                Error::InsufficientSnapshots(_) => Error::CoverageGap(n.value()),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ASequence::new(sorted, values, Provenance::Extracted { window_exponent, trivial_bound: trivial })
}

/// Constants of the lemma; `beta` is `β'`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecurrenceParams {
    pub s: f64,
    pub gamma: f64,
    pub c1: f64,
    pub m0: DyadicScale,
    pub beta: f64,
    /// The trivial bound `A`.
    pub a: f64,
}

/// One of the two smallness conditions on `β'` used in the proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Constraint {
    /// `β'^{s-1} < 1 / (100 C max(A, 1/100))`, closing the base case and the `β'^{j}` tail.
    BaseCase,
    /// `β'^γ < 1 / (100 C)`, closing the inductive step.
    InductiveStep,
}

impl Constraint {
    pub fn describe(self) -> &'static str {
        match self {
            Constraint::BaseCase => "beta'^(s-1) < 1/(100 C A)",
            Constraint::InductiveStep => "beta'^gamma < 1/(100 C)",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Admissibility {
    /// Dyadic-sum constant `C`.
    pub sum_constant: f64,
    /// Largest admissible `β'` (exclusive).
    pub threshold: f64,
    /// `rhs - lhs` of each constraint; positive means satisfied.
    pub base_margin: f64,
    pub step_margin: f64,
    pub violated: Vec<Constraint>,
}

impl Admissibility {
    pub fn admissible(&self) -> bool {
        self.violated.is_empty()
    }
}

impl RecurrenceParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.s, self.gamma, self.c1, self.beta, self.a].iter().all(|v| v.is_finite());
        if !finite {
            return Err(invalid("params", "must be finite"));
        }
        if !(self.s > 1.0) {
            return Err(invalid("s", "need s > 1"));
        }
        if !(self.gamma > 0.0) || !(self.s - self.gamma > 1.0) {
            return Err(invalid("gamma", "need gamma > 0 and s - gamma > 1"));
        }
        if !(self.c1 > 0.0) {
            return Err(invalid("c1", "must be positive"));
        }
        if self.m0.exponent() < 0 {
            return Err(invalid("m0", "need M0 >= 1"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid("beta", "need 0 < beta' < 1"));
        }
        if !(self.a > 0.0) {
            return Err(invalid("a", "trivial bound must be positive"));
        }
        Ok(())
    }

    /// Bound for the dyadic sums in the proof: `Σ_{M ≤ β'N} (M/N)^s ≤ C β'^s`
    /// needs `1/(1 - 2^{-s})`, and `Σ_{M ≤ β'N} M^γ ≤ C (β'N)^γ` needs
    /// `1/(1 - 2^{-γ})`; both are below `max(1/(1 - 2^{1-s}), 1/(1 - 2^{-γ}))`.
    pub fn sum_constant(&self) -> f64 {
        let cs = 1.0 / (1.0 - (1.0 - self.s).exp2());
        let cg = 1.0 / (1.0 - (-self.gamma).exp2());
        cs.max(cg)
    }

    pub fn admissibility(&self) -> Admissibility {
        let c = self.sum_constant();
        let base_rhs = 1.0 / (100.0 * c * self.a.max(0.01));
        let step_rhs = 1.0 / (100.0 * c);
        let base_margin = base_rhs - self.beta.powf(self.s - 1.0);
        let step_margin = step_rhs - self.beta.powf(self.gamma);
        let threshold = base_rhs.powf(1.0 / (self.s - 1.0)).min(step_rhs.powf(1.0 / self.gamma));
        let mut violated = Vec::new();
        if base_margin <= 0.0 {
            violated.push(Constraint::BaseCase);
        }
        if step_margin <= 0.0 {
            violated.push(Constraint::InductiveStep);
        }
        Admissibility { sum_constant: c, threshold, base_margin, step_margin, violated }
    }

    /// `2 C₁ M₀^s N^{-s+γ}`.
    pub fn conclusion_bound(&self, n: f64) -> f64 {
        2.0 * self.c1 * self.m0.value().powf(self.s) * n.powf(self.gamma - self.s)
    }

    fn lead(&self, n: f64) -> f64 {
        self.c1 * self.m0.value().powf(self.s) * n.powf(-self.s)
    }
}

/// `Σ (M/N)^s A_M` over dyadic `M` in `[lo, hi]` (both inclusive), reading `A_M`
/// through `value`.
fn dyadic_sum(n: DyadicScale, s: f64, lo: DyadicScale, hi_value: f64, value: impl Fn(DyadicScale) -> f64) -> f64 {
    let mut m = lo;
    let mut acc = 0.0;
    while m.value() <= hi_value * (1.0 + 1e-12) {
        acc += (m.value() / n.value()).powf(s) * value(m);
        m = m.double();
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecurrenceRow {
    pub n: f64,
    pub a_n: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecurrenceReport {
    pub rows: Vec<RecurrenceRow>,
    /// Smallest `C₁` for which every row holds.
    pub minimal_c1: f64,
    pub holds: bool,
}

fn covering(seq: &ASequence, m0: DyadicScale) -> Result<()> {
    if seq.first() > m0 {
        return Err(Error::CoverageGap(m0.value()));
    }
    if seq.last() < m0 {
        return Err(Error::CoverageGap(m0.value()));
    }
    Ok(())
}

/// Evaluates `A_N ≤ C₁M₀^s N^{-s} + Σ_{M₀ < M ≤ 2β'N} (M/N)^s A_M` for every
/// `N ≥ M₀` in the sequence.
pub fn check_recurrence(seq: &ASequence, params: &RecurrenceParams) -> Result<RecurrenceReport> {
    params.validate()?;
    covering(seq, params.m0)?;
    let value = |m: DyadicScale| seq.get(m).unwrap_or(0.0);
    let mut rows = Vec::new();
    let mut minimal: f64 = 0.0;
    for (&n, &a_n) in seq.scales.iter().zip(&seq.values).filter(|(n, _)| **n >= params.m0) {
        let sum = dyadic_sum(n, params.s, params.m0.double(), 2.0 * params.beta * n.value(), value);
        let unit = params.m0.value().powf(params.s) * n.value().powf(-params.s);
        let rhs = params.c1 * unit + sum;
        minimal = minimal.max((a_n - sum) / unit);
        rows.push(RecurrenceRow { n: n.value(), a_n, rhs, slack: rhs - a_n });
    }
    Ok(RecurrenceReport { holds: minimal <= params.c1, minimal_c1: minimal, rows })
}

/// Right-hand side of the lemma hypothesis at `N`, window `M₀ ≤ M ≤ β'N`.
fn hypothesis_rhs(params: &RecurrenceParams, n: DyadicScale, value: impl Fn(DyadicScale) -> f64) -> f64 {
    params.lead(n.value()) + dyadic_sum(n, params.s, params.m0, params.beta * n.value(), value)
}

/// A hypothesis of the lemma that the sequence fails.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Violation {
    /// `A_N > A`.
    TrivialBound { n: f64, a_n: f64 },
    /// `A_N` exceeds the recurrence right-hand side.
    Recurrence { n: f64, a_n: f64, rhs: f64 },
    Constraint { constraint: Constraint, margin: f64 },
}

impl Violation {
    pub fn describe(&self) -> String {
        match self {
            Violation::TrivialBound { n, a_n } => format!("A_N <= A fails at N = {n} (A_N = {a_n:.6e})"),
            Violation::Recurrence { n, a_n, rhs } => {
                format!("recurrence hypothesis fails at N = {n} (A_N = {a_n:.6e} > {rhs:.6e})")
            }
            Violation::Constraint { constraint, margin } => {
                format!("beta' inadmissible: {} (margin {margin:.3e})", constraint.describe())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", rename_all = "snake_case"))]
pub enum LemmaStatus {
    /// Hypotheses and admissibility hold and so does the conclusion.
    Holds,
    /// Hypotheses hold but the conclusion fails at some `N`.
    Fails,
    /// A hypothesis or smallness condition fails; the lemma says nothing.
    Inapplicable { violations: Vec<Violation> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConclusionRow {
    pub n: f64,
    pub a_n: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub status: LemmaStatus,
    pub rows: Vec<ConclusionRow>,
    pub admissibility: Admissibility,
    /// Induction steps run by the oracle.
    pub iterations: usize,
    /// The oracle's fixed point stays below `2C₁M₀^s N^{-s+γ}` at every `N`.
    pub oracle_confirms: bool,
    /// Every oracle iterate met `2C₁M₀^s N^{-s+γ} + β'^j`.
    pub induction_consistent: bool,
}

/// Applies the lemma to `seq`: checks the hypotheses and smallness of `β'`,
/// runs the induction oracle and tests the conclusion at every `N ≥ M₀`.
pub fn verify_recursive_control(seq: &ASequence, params: &RecurrenceParams) -> Result<VerificationReport> {
    params.validate()?;
    covering(seq, params.m0)?;
    let admissibility = params.admissibility();
    let mut violations: Vec<Violation> = admissibility
        .violated
        .iter()
        .map(|&constraint| Violation::Constraint {
            constraint,
            margin: match constraint {
                Constraint::BaseCase => admissibility.base_margin,
                Constraint::InductiveStep => admissibility.step_margin,
            },
        })
        .collect();
    let value = |m: DyadicScale| seq.get(m).unwrap_or(0.0);
    let ladder: Vec<(DyadicScale, f64)> =
        seq.scales.iter().copied().zip(seq.values.iter().copied()).filter(|(n, _)| *n >= params.m0).collect();
    for &(n, a_n) in &ladder {
        if a_n > params.a {
            violations.push(Violation::TrivialBound { n: n.value(), a_n });
        }
        let rhs = hypothesis_rhs(params, n, value);
        if a_n > rhs * (1.0 + 1e-12) {
            violations.push(Violation::Recurrence { n: n.value(), a_n, rhs });
        }
    }
    let table = iterate_oracle(params, ladder.last().map(|p| p.0).unwrap_or(params.m0));
    let rows: Vec<ConclusionRow> = ladder
        .iter()
        .map(|&(n, a_n)| {
            let bound = params.conclusion_bound(n.value());
            ConclusionRow { n: n.value(), a_n, bound, pass: a_n <= bound }
        })
        .collect();
    let status = if !violations.is_empty() {
        LemmaStatus::Inapplicable { violations }
    } else if rows.iter().all(|r| r.pass) {
        LemmaStatus::Holds
    } else {
        LemmaStatus::Fails
    };
    Ok(VerificationReport {
        status,
        rows,
        admissibility,
        iterations: table.iterates.len(),
        oracle_confirms: table.fixed_point_below_conclusion(params),
        induction_consistent: table.consistent(),
    })
}

/// Per-`j` bounds on the ladder `M₀, …, N_max`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InductionTable {
    pub scales: Vec<f64>,
    /// Row `j-1` holds `2C₁M₀^s N^{-s+γ} + β'^j`.
    pub bounds: Vec<Vec<f64>>,
    /// Row `j-1` holds the `j`-th oracle iterate: starting from `b₀ = A`,
    /// `b_{j+1}(N) = min(A, C₁M₀^s N^{-s} + Σ_{M₀ ≤ M ≤ β'N} (M/N)^s b_j(M))`,
    /// the best bound the two hypotheses give after `j` substitutions.
    pub iterates: Vec<Vec<f64>>,
}

impl InductionTable {
    fn consistent(&self) -> bool {
        self.bounds.iter().zip(&self.iterates).all(|(b, it)| it.iter().zip(b).all(|(x, y)| *x <= *y * (1.0 + 1e-12)))
    }

    fn fixed_point_below_conclusion(&self, params: &RecurrenceParams) -> bool {
        let Some(last) = self.iterates.last() else { return true };
        last.iter().zip(&self.scales).all(|(b, &n)| *b <= params.conclusion_bound(n) * (1.0 + 1e-12))
    }
}

/// Runs the induction to `j` with `β'^j < 10⁻¹² min_N 2C₁M₀^s N^{-s+γ}` (and at
/// least until the iterates stop changing).
pub fn iterate_induction(params: &RecurrenceParams, n_max: DyadicScale) -> Result<InductionTable> {
    params.validate()?;
    if n_max < params.m0 {
        return Err(invalid("n_max", "must be at least M0"));
    }
    let admissibility = params.admissibility();
    if !admissibility.admissible() {
        let names: Vec<&str> = admissibility.violated.iter().map(|c| c.describe()).collect();
        return Err(invalid("beta", format!("inadmissible: {}", names.join("; "))));
    }
    Ok(iterate_oracle(params, n_max))
}

fn iterate_oracle(params: &RecurrenceParams, n_max: DyadicScale) -> InductionTable {
    let ladder = DyadicScale::ladder(params.m0, n_max.max(params.m0));
    let scales: Vec<f64> = ladder.iter().map(|n| n.value()).collect();
    let conclusion: Vec<f64> = scales.iter().map(|&n| params.conclusion_bound(n)).collect();
    let floor = 1e-12 * conclusion.iter().copied().fold(f64::INFINITY, f64::min);
    let base = params.m0.exponent();
    let mut current = alloc::vec![params.a; ladder.len()];
    let mut bounds = Vec::new();
    let mut iterates = Vec::new();
    let mut j = 0usize;
    loop {
        j += 1;
        let prev = current.clone();
        for (k, &n) in ladder.iter().enumerate() {
            let rhs = hypothesis_rhs(params, n, |m| prev[(m.exponent() - base) as usize]);
            current[k] = params.a.min(rhs);
        }
        let tail = params.beta.powi(j as i32);
        bounds.push(conclusion.iter().map(|c| c + tail).collect());
        iterates.push(current.clone());
        let settled = current == prev;
        if (tail < floor && settled) || j >= 10_000 {
            break;
        }
    }
    InductionTable { scales, bounds, iterates }
}

/// A sequence meeting both hypotheses on `M₀, …, N_max`: each `A_N` is
/// `min(A, rhs_N)` (the recurrence right-hand side from the earlier values)
/// times a factor, `1` when `saturate` is set and uniform in `[0, 1]` otherwise.
pub fn synthetic_sequence(
    params: &RecurrenceParams,
    n_max: DyadicScale,
    saturate: bool,
    rng: &mut impl Rng,
) -> Result<ASequence> {
    params.validate()?;
    if n_max < params.m0 {
        return Err(invalid("n_max", "must be at least M0"));
    }
    let ladder = DyadicScale::ladder(params.m0, n_max);
    let base = params.m0.exponent();
    let mut values: Vec<f64> = Vec::with_capacity(ladder.len());
    for &n in &ladder {
        let rhs = hypothesis_rhs(params, n, |m| values[(m.exponent() - base) as usize]);
        let factor = if saturate { 1.0 } else { rng.gen_range(0.0..=1.0) };
        values.push(params.a.min(rhs) * factor);
    }
    ASequence::new(ladder, values, Provenance::Synthetic)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_sum_constant_dominates() {
        let p = RecurrenceParams {
            s: 1.25,
            gamma: 0.2,
            c1: 1.0,
            m0: DyadicScale::from_exponent(0),
            beta: 1e-3,
            a: 10.0,
        };
        assert!((p.sum_constant() - 1.0 / (1.0 - (-0.2f64).exp2())).abs() < 1e-12);
    }

    #[test]
    fn dyadic_sum_is_inclusive_on_the_right() {
        let n = DyadicScale::from_exponent(4);
        let one = |_: DyadicScale| 1.0;
        let s = dyadic_sum(n, 1.0, DyadicScale::from_exponent(0), 8.0, one);
        assert!((s - (1.0 + 2.0 + 4.0 + 8.0) / 16.0).abs() < 1e-15);
    }
}
