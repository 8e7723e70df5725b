//! On-disk formats: binary snapshots, columnar text, trajectory directories.
//!
//! Binary snapshot, little endian:
//!
//! | offset | field |
//! |---|---|
//! | 0 | magic `RNLSNAP\0` |
//! | 8 | format version `u32` (= 1) |
//! | 12 | dimension `u32` |
//! | 16 | node count `n: u64` |
//! | 24 | `r_max: f64` |
//! | 32 | time `t: f64` |
//! | 40 | SHA-256 of the run configuration, 32 bytes |
//! | 72 | artifact version: `u16` length, then UTF-8 bytes |
//! | … | `n` pairs `(re, im)` of `f64` |
//!
//! Samples are stored as raw IEEE bits, so a round trip is exact.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use radnls_core::evolution::{ConservationEntry, RunOutcome};
use radnls_core::{Complex64, RadialField, RadialGrid, SimulationConfig, Snapshot, Trajectory};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::report::{Check, Stamp};

pub const MAGIC: [u8; 8] = *b"RNLSNAP\0";
pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub dim: u32,
    pub r_max: f64,
    pub n: usize,
}

impl GridHeader {
    pub fn of(grid: &RadialGrid) -> Self {
        GridHeader { dim: grid.dim(), r_max: grid.r_max(), n: grid.len() }
    }

    pub fn build(&self) -> CliResult<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::new(self.dim, self.r_max, self.n)?))
    }

    fn matches(&self, grid: &RadialGrid) -> bool {
        self.dim == grid.dim() && self.r_max.to_bits() == grid.r_max().to_bits() && self.n == grid.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotHeader {
    pub grid: GridHeader,
    pub t: f64,
    pub config_hash: [u8; 32],
    pub version: String,
}

fn create(path: &Path) -> CliResult<BufWriter<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn hash_bytes(stamp: &Stamp) -> [u8; 32] {
    let mut out = [0u8; 32];
    if let Ok(bytes) = hex::decode(&stamp.config_hash) {
        if bytes.len() == 32 {
            out.copy_from_slice(&bytes);
        }
    }
    out
}

pub fn write_snapshot(path: &Path, field: &RadialField, t: f64, stamp: &Stamp) -> CliResult<()> {
    let grid = field.grid();
    let mut buf = Vec::with_capacity(80 + 16 * grid.len());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&grid.dim().to_le_bytes());
    buf.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    buf.extend_from_slice(&grid.r_max().to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    buf.extend_from_slice(&hash_bytes(stamp));
    let version = stamp.version.as_bytes();
    buf.extend_from_slice(&(version.len() as u16).to_le_bytes());
    buf.extend_from_slice(version);
    for v in field.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    let mut w = create(path)?;
    w.write_all(&buf).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> CliResult<&'a [u8]> {
        let end = self.at.checked_add(k).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| CliError::format(format!("snapshot {}", self.path.display()), "truncated"))?;
        let out = &self.bytes[self.at..end];
        self.at = end;
        Ok(out)
    }

    fn array<const K: usize>(&mut self) -> CliResult<[u8; K]> {
        Ok(self.take(K)?.try_into().expect("length checked"))
    }
}

/// Reads a snapshot header and its raw samples.
pub fn read_snapshot_raw(path: &Path) -> CliResult<(SnapshotHeader, Vec<Complex64>)> {
    let mut bytes = Vec::new();
    fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| CliError::io(path, e))?;
    let what = || format!("snapshot {}", path.display());
    let mut c = Cursor { bytes: &bytes, at: 0, path };
    if c.array::<8>()? != MAGIC {
        return Err(CliError::format(what(), "bad magic"));
    }
    let format = u32::from_le_bytes(c.array()?);
    if format != FORMAT_VERSION {
        return Err(CliError::format(what(), format!("unsupported format version {format}")));
    }
    let dim = u32::from_le_bytes(c.array()?);
    let n = u64::from_le_bytes(c.array()?) as usize;
    let r_max = f64::from_le_bytes(c.array()?);
    let t = f64::from_le_bytes(c.array()?);
    let config_hash = c.array::<32>()?;
    let len = u16::from_le_bytes(c.array()?) as usize;
    let version = String::from_utf8(c.take(len)?.to_vec()).map_err(|e| CliError::format(what(), e))?;
    if bytes.len() - c.at != 16 * n {
        return Err(CliError::format(what(), format!("expected {n} samples")));
    }
    let values = (0..n)
        .map(|_| Ok(Complex64::new(f64::from_le_bytes(c.array()?), f64::from_le_bytes(c.array()?))))
        .collect::<CliResult<Vec<_>>>()?;
    Ok((SnapshotHeader { grid: GridHeader { dim, r_max, n }, t, config_hash, version }, values))
}

/// Reads a snapshot onto `grid` (built from the header when `None`).
pub fn read_snapshot(path: &Path, grid: Option<&Arc<RadialGrid>>) -> CliResult<(f64, RadialField)> {
    let (header, values) = read_snapshot_raw(path)?;
    let grid = match grid {
        Some(g) if header.grid.matches(g) => g.clone(),
        Some(_) => return Err(radnls_core::Error::GridMismatch.into()),
        None => header.grid.build()?,
    };
    Ok((header.t, RadialField::new(grid, values)?))
}

/// Columns `r Re(u) Im(u)` after `#` comment lines; values print in shortest
/// round-trip form.
pub fn write_text(path: &Path, field: &RadialField, t: f64, stamp: &Stamp) -> CliResult<()> {
    let grid = field.grid();
    let mut w = create(path)?;
    let mut body = format!(
        "# radnls {} config_hash={} seed={}\n# d={} r_max={:e} n={} t={:e}\n# r re im\n",
        stamp.version,
        stamp.config_hash,
        stamp.seed,
        grid.dim(),
        grid.r_max(),
        grid.len(),
        t
    );
    for (r, v) in grid.radii().iter().zip(field.values()) {
        body.push_str(&format!("{r:e} {:e} {:e}\n", v.re, v.im));
    }
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Reads a text profile whose radii coincide with the nodes of `grid`.
pub fn read_text(path: &Path, grid: &Arc<RadialGrid>) -> CliResult<RadialField> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let what = || format!("text profile {}", path.display());
    let mut values = Vec::with_capacity(grid.len());
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<f64> = line
            .split_whitespace()
            .map(|x| x.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::format(what(), e))?;
        if cols.len() != 3 {
            return Err(CliError::format(what(), "expected three columns r re im"));
        }
        let k = values.len();
        let node = *grid.radii().get(k).ok_or_else(|| CliError::format(what(), "more rows than grid nodes"))?;
        if (cols[0] - node).abs() > 1e-12 * node.max(1.0) {
            return Err(CliError::format(what(), format!("row {k}: r = {} is not the grid node {node}", cols[0])));
        }
        values.push(Complex64::new(cols[1], cols[2]));
    }
    if values.len() != grid.len() {
        return Err(CliError::format(what(), format!("{} rows for {} nodes", values.len(), grid.len())));
    }
    Ok(RadialField::new(grid.clone(), values)?)
}

/// Reads an initial profile: binary snapshot, or text when the extension is `txt`.
pub fn read_profile(path: &Path, grid: &Arc<RadialGrid>) -> CliResult<RadialField> {
    if path.extension().is_some_and(|e| e == "txt") {
        read_text(path, grid)
    } else {
        read_snapshot(path, Some(grid)).map(|(_, f)| f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub index: usize,
    pub t: f64,
    pub file: String,
}

/// `manifest.json` of a trajectory directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(flatten)]
    pub stamp: Stamp,
    pub grid: GridHeader,
    pub simulation: Option<SimulationConfig>,
    pub outcome: RunOutcome,
    pub snapshots: Vec<SnapshotEntry>,
    pub log: Vec<ConservationEntry>,
    pub checks: Vec<Check>,
}

/// Writes `dir/manifest.json` and `dir/snapshots/NNNNNN.bin`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory, stamp: &Stamp, checks: Vec<Check>) -> CliResult<Manifest> {
    let mut entries = Vec::with_capacity(traj.snapshots.len());
    for (index, s) in traj.snapshots.iter().enumerate() {
        let file = format!("snapshots/{index:06}.bin");
        write_snapshot(&dir.join(&file), &s.field, s.t, stamp)?;
        entries.push(SnapshotEntry { index, t: s.t, file });
    }
    let manifest = Manifest {
        stamp: stamp.clone(),
        grid: GridHeader::of(traj.grid()),
        simulation: traj.config.clone(),
        outcome: traj.outcome,
        snapshots: entries,
        log: traj.log.clone(),
        checks,
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(format!("manifest {}", path.display()), e))
}

pub fn read_trajectory(dir: &Path) -> CliResult<(Manifest, Trajectory)> {
    let manifest = read_manifest(dir)?;
    let grid = manifest.grid.build()?;
    let snapshots = manifest
        .snapshots
        .iter()
        .map(|e| {
            let (t, field) = read_snapshot(&dir.join(&e.file), Some(&grid))?;
            if t.to_bits() != e.t.to_bits() {
                return Err(CliError::format(e.file.clone(), "time disagrees with the manifest"));
            }
            Ok(Snapshot { t, field })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut traj = Trajectory::from_snapshots(snapshots)?;
    traj.config = manifest.simulation.clone();
    traj.log = manifest.log.clone();
    traj.outcome = manifest.outcome;
    Ok((manifest, traj))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format("json output", e))?;
    text.push('\n');
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Creates `dir` and its parents.
pub fn ensure_dir(dir: &Path) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir.to_path_buf())
}
