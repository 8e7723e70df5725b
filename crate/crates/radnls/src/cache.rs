//! Certified ground states cached under `<root>/cache/ground_state/`.
//!
//! An entry is a binary snapshot of `Q` plus a JSON sidecar with the solver
//! outputs and certificate. It is keyed by the exact grid and tolerance, and
//! reused only when the stored residual is reproduced on load.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use radnls_core::groundstate::{self, certify, solve_ground_state, Certificate};
use radnls_core::{GroundState, RadialGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::formats::{read_snapshot, write_json, write_snapshot};
use crate::report::Stamp;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Entry {
    #[serde(flatten)]
    stamp: Stamp,
    tol: f64,
    mass: f64,
    kinetic: f64,
    potential: f64,
    residual: f64,
    iterations: usize,
    /// `groundstate::residual` of the stored samples; must reproduce bit for bit.
    stored_residual: f64,
    certificate: Certificate,
}

pub struct GroundStateCache {
    dir: PathBuf,
}

impl GroundStateCache {
    pub fn new(root: &Path) -> Self {
        GroundStateCache { dir: root.join("cache").join("ground_state") }
    }

    fn key(grid: &RadialGrid, tol: f64) -> String {
        format!("d{}_n{}_r{:016x}_tol{:016x}", grid.dim(), grid.len(), grid.r_max().to_bits(), tol.to_bits())
    }

    fn paths(&self, grid: &RadialGrid, tol: f64) -> (PathBuf, PathBuf) {
        let key = Self::key(grid, tol);
        (self.dir.join(format!("{key}.bin")), self.dir.join(format!("{key}.json")))
    }

    /// A cached state, if present and intact.
    pub fn load(&self, grid: &Arc<RadialGrid>, tol: f64) -> Option<(GroundState, Certificate)> {
        let (bin, json) = self.paths(grid, tol);
        let entry: Entry = serde_json::from_str(&std::fs::read_to_string(json).ok()?).ok()?;
        let (_, profile) = read_snapshot(&bin, Some(grid)).ok()?;
        if groundstate::residual(&profile).to_bits() != entry.stored_residual.to_bits() || !entry.certificate.passed {
            return None;
        }
        let ground = GroundState {
            profile,
            dim: grid.dim(),
            mass: entry.mass,
            kinetic: entry.kinetic,
            potential: entry.potential,
            residual: entry.residual,
            iterations: entry.iterations,
        };
        Some((ground, entry.certificate))
    }

    pub fn store(&self, ground: &GroundState, cert: &Certificate, tol: f64, stamp: &Stamp) -> CliResult<()> {
        let (bin, json) = self.paths(ground.grid(), tol);
        write_snapshot(&bin, &ground.profile, 0.0, stamp)?;
        let entry = Entry {
            stamp: stamp.clone(),
            tol,
            mass: ground.mass,
            kinetic: ground.kinetic,
            potential: ground.potential,
            residual: ground.residual,
            iterations: ground.iterations,
            stored_residual: groundstate::residual(&ground.profile),
            certificate: cert.clone(),
        };
        write_json(&json, &entry)
    }

    /// Cached state, or a fresh solve that is certified and stored. A failed
    /// certification is an error.
    pub fn get_or_solve(
        &self,
        grid: &Arc<RadialGrid>,
        tol: f64,
        use_cache: bool,
        stamp: &Stamp,
    ) -> CliResult<(GroundState, Certificate)> {
        if use_cache {
            if let Some(hit) = self.load(grid, tol) {
                return Ok(hit);
            }
        }
        let ground = solve_ground_state(grid.clone(), tol)?;
        let cert = certify(&ground, tol)?;
        if !cert.passed {
            return Err(CliError::Core(radnls_core::Error::Certification(format!("{cert:?}"))));
        }
        if use_cache {
            self.store(&ground, &cert, tol, stamp)?;
        }
        Ok((ground, cert))
    }
}
