use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use radnls::commands::{self, Env, Outcome};
use radnls::config::{InitialCondition, Overrides, OUTPUT_ROOT_ENV, SCHEMA};
use radnls::{checks, exit, CliError, CliResult, Format, RunConfig};

/// Radial mass-critical NLS solver and diagnostics.
#[derive(Parser)]
#[command(name = "radnls", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for and certify the ground state Q.
    GroundState(Common),
    /// Evolve the configured initial condition and store the trajectory.
    Evolve(Common),
    /// Run the configured diagnostics on a stored trajectory.
    Diagnose {
        #[command(flatten)]
        common: Common,
        /// Trajectory directory (default: <output>/trajectory).
        trajectory: Option<PathBuf>,
    },
    /// Check the A_N recurrence and verify the recursive-control lemma.
    Lemma(Common),
    /// Run the acceptance and invariant suites.
    Selftest {
        #[command(flatten)]
        common: Common,
        /// Comma-separated suite ids (0 = transform, 1-9 = acceptance criteria).
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u8>>,
    },
    /// Print the JSON schema of the run configuration.
    Schema,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report format on stdout and in the output directory.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Directory that relative output paths resolve against.
    #[arg(long, env = OUTPUT_ROOT_ENV, default_value = ".")]
    output_root: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_start: Option<f64>,
    #[arg(long)]
    cadence: Option<usize>,
    /// Initial condition: ground_state, sw, pc_ground_state, or a profile file path.
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn env(&self) -> CliResult<Env> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let initial = match self.initial.as_deref() {
            None => None,
            Some("ground_state") => Some(InitialCondition::GroundState),
            Some("sw") => Some(InitialCondition::Sw),
            Some("pc_ground_state") => Some(InitialCondition::PcGroundState),
            Some(path) => Some(InitialCondition::File { path: PathBuf::from(path) }),
        };
        config.apply(&Overrides {
            dimension: self.dim,
            mu: self.mu,
            r_max: self.r_max,
            n: self.n,
            dt: self.dt,
            duration: self.duration,
            t_start: self.t_start,
            cadence: self.cadence,
            initial,
            output: self.output.clone(),
            seed: self.seed,
        });
        Ok(Env { config, root: self.output_root.clone() })
    }
}

fn emit(name: &str, common: &Common, env: &Env, outcome: Outcome) -> CliResult<u8> {
    let ext = match common.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    outcome.report.write(&env.output_dir().join(format!("{name}.{ext}")), common.format)?;
    print!("{}", outcome.report.render(common.format));
    if outcome.exit == exit::DIAGNOSTIC {
        let failed: Vec<_> = outcome.report.failures().into_iter().cloned().collect();
        let msg = serde_json::json!({
            "error": "diagnostic_failure",
            "exit_code": exit::DIAGNOSTIC,
            "failed_checks": failed,
        });
        eprintln!("{msg}");
    }
    Ok(outcome.exit)
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Schema => {
            print!("{SCHEMA}");
            Ok(exit::OK)
        }
        Command::GroundState(c) => {
            let env = c.env()?;
            emit("ground_state", &c, &env, commands::ground_state(&env)?)
        }
        Command::Evolve(c) => {
            let env = c.env()?;
            emit("evolve", &c, &env, commands::evolve_cmd(&env)?)
        }
        Command::Diagnose { common, trajectory } => {
            let env = common.env()?;
            let path = trajectory.unwrap_or_else(|| env.output_dir().join("trajectory"));
            emit("diagnose", &common, &env, commands::diagnose(&env, &path)?)
        }
        Command::Lemma(c) => {
            let env = c.env()?;
            emit("lemma", &c, &env, commands::lemma(&env)?)
        }
        Command::Selftest { common, criteria } => {
            let env = common.env()?;
            let ids = criteria.unwrap_or_else(|| checks::ALL.to_vec());
            if let Some(bad) = ids.iter().find(|&&i| i > 9) {
                return Err(CliError::Invalid(format!("no suite {bad}")));
            }
            emit("selftest", &common, &env, commands::selftest(&env, &ids)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
