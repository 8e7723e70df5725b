//! Run configuration: JSON file, then command-line overrides.
//!
//! Precedence, lowest first: built-in defaults, the `--config` file, flags.
//! Unknown keys are rejected. The schema is in `schema/run_config.schema.json`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use radnls_core::evolution::Stepper;
use radnls_core::recurrence::RecurrenceParams;
use radnls_core::{Coupling, DyadicScale, RadialGrid, SimulationConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = include_str!("../schema/run_config.schema.json");

/// Environment variable naming the directory relative output paths resolve against.
pub const OUTPUT_ROOT_ENV: &str = "RADNLS_OUTPUT_ROOT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dimension: u32,
    /// `-1` focusing, `+1` defocusing.
    pub mu: f64,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub initial: InitialCondition,
    pub ground_state: GroundStateConfig,
    pub diagnostics: Vec<Diagnostic>,
    pub lemma: LemmaConfig,
    pub output: PathBuf,
    /// Seed for every random corpus; recorded in every output.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dimension: 4,
            mu: -1.0,
            grid: GridConfig::default(),
            time: TimeConfig::default(),
            initial: InitialCondition::Sw,
            ground_state: GroundStateConfig::default(),
            diagnostics: Diagnostic::defaults(),
            lemma: LemmaConfig::default(),
            output: PathBuf::from("run"),
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub r_max: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { r_max: 20.0, n: 512 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub dt: f64,
    /// Length of the run.
    pub duration: f64,
    pub t_start: f64,
    /// Store a snapshot every `cadence` steps.
    pub cadence: usize,
    pub stepper: Stepper,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { dt: 1e-3, duration: 1.0, t_start: 0.0, cadence: 10, stepper: Stepper::Strang }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `amplitude · e^{-width · r²}`
    Gaussian { amplitude: f64, width: f64 },
    /// `Q`
    GroundState,
    /// `e^{i t_start} Q`
    Sw,
    /// The pseudo-conformal solution at `t_start < 0`.
    PcGroundState,
    /// A binary snapshot or a three-column text file on the configured grid.
    File { path: PathBuf },
}

impl InitialCondition {
    pub fn needs_ground_state(&self) -> bool {
        matches!(self, InitialCondition::GroundState | InitialCondition::Sw | InitialCondition::PcGroundState)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundStateConfig {
    /// Residual tolerance of the solver and of the certification.
    pub tol: f64,
    /// Reuse a certified profile from the cache under the output root.
    pub cache: bool,
}

impl Default for GroundStateConfig {
    fn default() -> Self {
        GroundStateConfig { tol: 1e-10, cache: true }
    }
}

/// One entry of the diagnostics list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Diagnostic {
    /// Mass and energy drift against tolerances.
    Conservation { mass_tol: f64, energy_tol: f64 },
    /// `∂_tt V_R` at the given times (interior quartiles when empty) against
    /// `16E`, which is `8‖∇u‖²` for the free flow; `radius: null` is untruncated.
    /// Also checks `V_R ≤ (25R/24)² M` on every snapshot when `R` is finite.
    Virial {
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default)]
        times: Vec<f64>,
        tol: f64,
    },
    /// Kinetic localization radius at `fraction · ‖∇u(t)‖²`, required to stay
    /// within `max_cells` of its initial cell.
    Localization { fraction: f64, max_cells: usize },
    /// Spatial and frequency concentration radii at `fraction · M(u)`.
    Concentration { fraction: f64 },
    /// Fit of `max_t ‖φ_{>shell} P_N u(t)‖₂` over `N ∈ [lo, hi]`.
    FrequencyDecay { shell: f64, scales: (f64, f64) },
    /// Fit of `max_{t, N} ‖φ_{>R} P_N u(t)‖₂` over the radii.
    SpatialDecay { scales: (f64, f64), radii: Vec<f64> },
    /// Per-snapshot mass, energy, virial, band norms and radii.
    Records { virial_radius: f64, scales: (f64, f64), fraction: f64 },
}

impl Diagnostic {
    pub fn defaults() -> Vec<Diagnostic> {
        vec![
            Diagnostic::Conservation { mass_tol: 1e-8, energy_tol: 1e-5 },
            Diagnostic::Localization { fraction: 1e-2, max_cells: 1 },
            Diagnostic::FrequencyDecay { shell: 1.0, scales: (2.0, 16.0) },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Diagnostic::Conservation { .. } => "conservation",
            Diagnostic::Virial { .. } => "virial",
            Diagnostic::Localization { .. } => "localization",
            Diagnostic::Concentration { .. } => "concentration",
            Diagnostic::FrequencyDecay { .. } => "frequency_decay",
            Diagnostic::SpatialDecay { .. } => "spatial_decay",
            Diagnostic::Records { .. } => "records",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaConfig {
    pub s: f64,
    pub gamma: f64,
    pub c1: f64,
    /// Power of two.
    pub m0: f64,
    pub beta: f64,
    pub a: f64,
    pub source: SequenceSource,
    /// Tabulate the induction when the constants are admissible.
    pub induction: bool,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            s: 1.25,
            gamma: 0.2,
            c1: 1.0,
            m0: 1.0,
            beta: 1e-3,
            a: 10.0,
            source: SequenceSource::Synthetic { n_max: 1_048_576.0, saturate: true },
            induction: true,
        }
    }
}

impl LemmaConfig {
    pub fn params(&self) -> CliResult<RecurrenceParams> {
        let p = RecurrenceParams {
            s: self.s,
            gamma: self.gamma,
            c1: self.c1,
            m0: DyadicScale::from_value(self.m0)?,
            beta: self.beta,
            a: self.a,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Where the `A_N` sequence comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSource {
    /// Sequence meeting both hypotheses, saturated or with random factors from the seed.
    Synthetic { n_max: f64, saturate: bool },
    /// `A_N = scale · N^{-exponent}` on `[M₀, n_max]`.
    Power { exponent: f64, scale: f64, n_max: f64 },
    /// Extracted from a stored trajectory directory.
    Trajectory { path: PathBuf, scales: (f64, f64), window_exponent: f64 },
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dimension: Option<u32>,
    pub mu: Option<f64>,
    pub r_max: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub t_start: Option<f64>,
    pub cadence: Option<usize>,
    pub initial: Option<InitialCondition>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::format("configuration", e))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($src:expr, $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        set!(o.dimension, self.dimension);
        set!(o.mu, self.mu);
        set!(o.r_max, self.grid.r_max);
        set!(o.n, self.grid.n);
        set!(o.dt, self.time.dt);
        set!(o.duration, self.time.duration);
        set!(o.t_start, self.time.t_start);
        set!(o.cadence, self.time.cadence);
        set!(o.initial, self.initial);
        set!(o.output, self.output);
        set!(o.seed, self.seed);
    }

    /// Checks everything that does not need a solve: grid, coupling, time
    /// stepping, initial condition and diagnostic parameters.
    pub fn validate(&self) -> CliResult<()> {
        self.grid()?;
        self.coupling()?;
        self.simulation()?.steps()?;
        if !(self.ground_state.tol > 0.0) {
            return Err(CliError::Invalid("ground_state.tol must be positive".into()));
        }
        match &self.initial {
            InitialCondition::Gaussian { amplitude, width } => {
                if !amplitude.is_finite() || !(*width > 0.0) {
                    return Err(CliError::Invalid("gaussian needs finite amplitude and positive width".into()));
                }
            }
            InitialCondition::PcGroundState if !(self.time.t_start < 0.0) => {
                return Err(CliError::Invalid("pc_ground_state needs time.t_start < 0".into()));
            }
            InitialCondition::File { path } if !path.exists() => {
                return Err(CliError::Invalid(format!("initial file {} does not exist", path.display())));
            }
            _ => {}
        }
        if let SequenceSource::Trajectory { path, .. } = &self.lemma.source {
            if !path.exists() {
                return Err(CliError::Invalid(format!("lemma trajectory {} does not exist", path.display())));
            }
        }
        for d in &self.diagnostics {
            let fraction_ok = |f: f64| f > 0.0 && f < 1.0;
            let ok = match d {
                Diagnostic::Conservation { mass_tol, energy_tol } => *mass_tol > 0.0 && *energy_tol > 0.0,
                Diagnostic::Virial { radius, tol, .. } => *tol > 0.0 && radius.map_or(true, |r| r > 0.0),
                Diagnostic::Localization { fraction, .. } | Diagnostic::Concentration { fraction } => fraction_ok(*fraction),
                Diagnostic::FrequencyDecay { shell, scales } => *shell > 0.0 && scales.0 < scales.1,
                Diagnostic::SpatialDecay { scales, radii } => scales.0 <= scales.1 && !radii.is_empty(),
                Diagnostic::Records { virial_radius, fraction, scales } => {
                    *virial_radius > 0.0 && fraction_ok(*fraction) && scales.0 <= scales.1
                }
            };
            if !ok {
                return Err(CliError::Invalid(format!("bad parameters for diagnostic `{}`", d.name())));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::new(self.dimension, self.grid.r_max, self.grid.n)?))
    }

    pub fn coupling(&self) -> CliResult<Coupling> {
        Ok(Coupling::from_mu(self.mu)?)
    }

    pub fn simulation(&self) -> CliResult<SimulationConfig> {
        Ok(SimulationConfig::new(self.coupling()?, self.time.dt, self.time.duration)
            .with_start(self.time.t_start)
            .with_cadence(self.time.cadence)
            .with_stepper(self.time.stepper))
    }

    /// SHA-256 of the canonical JSON form, in hex. The output location is
    /// left out so that identical runs written to different places match.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v.as_object_mut().expect("object").remove("output");
        let bytes = serde_json::to_vec(&v).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// The output directory: relative paths resolve against `root`.
    pub fn output_dir(&self, root: &Path) -> PathBuf {
        if self.output.is_absolute() {
            self.output.clone()
        } else {
            root.join(&self.output)
        }
    }
}
