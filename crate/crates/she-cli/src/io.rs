//! On-disk artifact formats.
//!
//! Three formats, all self-describing:
//! * trajectory CSV — `t,x,u` rows with provenance in `#` header comments;
//! * trajectory binary — magic `SHETRJ01`, little-endian u64 header length,
//!   JSON header (lattice, recorded times, provenance), then the recorded
//!   values as little-endian f64 in row-major order;
//! * noise-sheet CSV — one row per cell increment with the generating seed
//!   and grid in the header, enough to regenerate the sheet exactly.

use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use she_core::{Boundary, Lattice, NoiseSheet, Trajectory};

use crate::{CliError, CliResult};

pub const TRAJECTORY_MAGIC: &[u8; 8] = b"SHETRJ01";

fn lattice_comment(lat: &Lattice) -> String {
    format!(
        "# lattice: half_width={} dx={} dt={} horizon={} boundary={:?}",
        lat.half_width(),
        lat.dx(),
        lat.dt(),
        lat.horizon(),
        lat.boundary()
    )
}

/// Writes a recorded trajectory as `t,x,u` CSV.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> CliResult<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let prov = serde_json::to_string(traj.provenance())
        .map_err(|e| CliError::Io(format!("cannot serialize provenance: {e}")))?;
    writeln!(w, "# she-trajectory/1")?;
    writeln!(w, "# provenance={prov}")?;
    writeln!(w, "{}", lattice_comment(traj.lattice()))?;
    writeln!(w, "t,x,u")?;
    let lat = traj.lattice();
    for k in 0..traj.n_recorded() {
        let t = traj.times()[k];
        let row = traj.values_at(k);
        for j in 0..lat.n_space() {
            writeln!(w, "{t},{},{}", lat.x(j), row[j])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct BinaryHeader {
    format: String,
    half_width: f64,
    dx: f64,
    dt: f64,
    horizon: f64,
    boundary: Boundary,
    times: Vec<f64>,
    provenance: serde_json::Value,
}

/// Writes a recorded trajectory in the compact binary format.
pub fn write_trajectory_binary(path: &Path, traj: &Trajectory) -> CliResult<()> {
    let lat = traj.lattice();
    let header = BinaryHeader {
        format: "she-trajectory-binary/1".into(),
        half_width: lat.half_width(),
        dx: lat.dx(),
        dt: lat.dt(),
        horizon: lat.horizon(),
        boundary: lat.boundary(),
        times: traj.times().to_vec(),
        provenance: serde_json::to_value(traj.provenance())
            .map_err(|e| CliError::Io(format!("cannot serialize provenance: {e}")))?,
    };
    let header_bytes = serde_json::to_vec(&header)
        .map_err(|e| CliError::Io(format!("cannot serialize header: {e}")))?;

    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(TRAJECTORY_MAGIC)?;
    w.write_all(&(header_bytes.len() as u64).to_le_bytes())?;
    w.write_all(&header_bytes)?;
    for k in 0..traj.n_recorded() {
        for &v in traj.values_at(k) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// A trajectory read back from the binary format.
#[derive(Debug)]
pub struct LoadedTrajectory {
    pub lattice: Lattice,
    pub times: Vec<f64>,
    /// Row-major recorded values, `times.len() x n_space`.
    pub values: Vec<f64>,
    pub provenance: serde_json::Value,
}

pub fn read_trajectory_binary(path: &Path) -> CliResult<LoadedTrajectory> {
    let mut file = std::fs::File::open(path)?;
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)?;
    if &magic != TRAJECTORY_MAGIC {
        return Err(CliError::Io(format!("{} is not a trajectory binary", path.display())));
    }
    let mut len_bytes = [0u8; 8];
    file.read_exact(&mut len_bytes)?;
    let header_len = u64::from_le_bytes(len_bytes) as usize;
    let mut header_bytes = vec![0u8; header_len];
    file.read_exact(&mut header_bytes)?;
    let header: BinaryHeader = serde_json::from_slice(&header_bytes)
        .map_err(|e| CliError::Io(format!("bad trajectory header: {e}")))?;
    let lattice =
        she_core::build_lattice(header.half_width, header.dx, header.dt, header.horizon, header.boundary)
            .map_err(|e| CliError::Io(format!("header describes an invalid lattice: {e}")))?;

    let mut raw = Vec::new();
    file.read_to_end(&mut raw)?;
    let expect = header.times.len() * lattice.n_space() * 8;
    if raw.len() != expect {
        return Err(CliError::Io(format!(
            "trajectory payload is {} bytes, expected {expect}",
            raw.len()
        )));
    }
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(LoadedTrajectory { lattice, times: header.times, values, provenance: header.provenance })
}

/// Dumps every cell increment of a noise sheet as CSV; the header records
/// the seed and grid, so the file is reproducible byte for byte.
pub fn write_noise_csv(path: &Path, sheet: &NoiseSheet) -> CliResult<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let lat = sheet.lattice();
    writeln!(w, "# she-noise/1")?;
    writeln!(w, "# seed={}", sheet.seed())?;
    writeln!(w, "{}", lattice_comment(lat))?;
    writeln!(w, "i,j,t,x,xi")?;
    for i in 0..lat.n_time() {
        let t = lat.t(i);
        let row = sheet.row(i);
        for j in 0..lat.n_space() {
            writeln!(w, "{i},{j},{t},{},{}", lat.x(j), row[j])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes aligned columns as CSV with the given header names.
pub fn write_series_csv(path: &Path, names: &[&str], columns: &[&[f64]]) -> CliResult<()> {
    if names.len() != columns.len() || columns.is_empty() {
        return Err(CliError::Io("series CSV needs one name per column".into()));
    }
    let rows = columns[0].len();
    if columns.iter().any(|c| c.len() != rows) {
        return Err(CliError::Io("series CSV columns have unequal lengths".into()));
    }
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", names.join(","))?;
    for r in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| c[r].to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Sibling path with a new suffix appended to the file stem.
pub fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("artifact");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}
