//! Report files: pretty JSON, the margin table, and heat snapshots as CSV or
//! a columnar little-endian binary, each with a JSON sidecar holding the grid.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use liyau_core::verify::MarginRow;
use liyau_core::{FieldOnGrid, Grid};
use serde::{Deserialize, Serialize};

use crate::config::SnapshotFormat;
use crate::HarnessError;

pub const BINARY_MAGIC: &[u8; 8] = b"LYSNAP01";

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Config(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_margins_csv(path: &Path, rows: &[MarginRow]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "x_r", "x_θ", "lhs", "rhs", "margin"])?;
    for r in rows {
        w.write_record([r.t, r.r, r.theta, r.lhs, r.rhs, r.margin].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Grid and time stamps of a snapshot file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub field: String,
    pub nr: usize,
    pub ntheta: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    pub times: Vec<f64>,
    pub format: SnapshotFormat,
    /// Data file next to this sidecar.
    pub data: String,
}

fn meta_for(name: &str, grid: &Grid, times: Vec<f64>, format: SnapshotFormat, data: &Path) -> SnapshotMeta {
    SnapshotMeta {
        field: name.to_string(),
        nr: grid.nr(),
        ntheta: grid.ntheta(),
        r_lo: grid.r_lo(),
        r_hi: grid.r_hi(),
        times,
        format,
        data: data.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    }
}

/// Writes `<dir>/<name>.csv` (or `.bin`) and `<dir>/<name>.meta.json`.
/// Returns the data path.
pub fn write_snapshots(
    dir: &Path,
    name: &str,
    format: SnapshotFormat,
    snapshots: &[(f64, &FieldOnGrid)],
) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(dir)?;
    let grid = match snapshots.first() {
        Some((_, f)) => *f.grid(),
        None => return Err(HarnessError::Config(format!("no {name} snapshots to write"))),
    };
    let times: Vec<f64> = snapshots.iter().map(|(t, _)| *t).collect();
    let data = match format {
        SnapshotFormat::Csv => {
            let path = dir.join(format!("{name}.csv"));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["t", "r", "theta", name])?;
            for (t, field) in snapshots {
                for i in 0..grid.nr() {
                    for j in 0..grid.ntheta() {
                        w.write_record([*t, grid.r(i), grid.theta(j), field.get(i, j)].map(|v| v.to_string()))?;
                    }
                }
            }
            w.flush()?;
            path
        }
        SnapshotFormat::Binary => {
            let path = dir.join(format!("{name}.bin"));
            let mut w = BufWriter::new(File::create(&path)?);
            w.write_all(BINARY_MAGIC)?;
            for v in [grid.nr() as u64, grid.ntheta() as u64, snapshots.len() as u64] {
                w.write_all(&v.to_le_bytes())?;
            }
            for v in [grid.r_lo(), grid.r_hi()] {
                w.write_all(&v.to_le_bytes())?;
            }
            for t in &times {
                w.write_all(&t.to_le_bytes())?;
            }
            // one column per snapshot, radial-major inside
            for (_, field) in snapshots {
                for v in field.values() {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
            w.flush()?;
            path
        }
    };
    write_json(&dir.join(format!("{name}.meta.json")), &meta_for(name, &grid, times, format, &data))?;
    Ok(data)
}

/// Snapshots read back from the binary format.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySnapshots {
    pub nr: usize,
    pub ntheta: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    pub times: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

pub fn read_binary_snapshots(path: &Path) -> Result<BinarySnapshots, HarnessError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let bad = || HarnessError::Config(format!("{} is not a snapshot file", path.display()));
    if bytes.len() < 48 || &bytes[..8] != BINARY_MAGIC {
        return Err(bad());
    }
    let mut pos = 8;
    let mut word = || {
        let b: [u8; 8] = bytes[pos..pos + 8].try_into().unwrap();
        pos += 8;
        b
    };
    let nr = u64::from_le_bytes(word()) as usize;
    let ntheta = u64::from_le_bytes(word()) as usize;
    let count = u64::from_le_bytes(word()) as usize;
    let r_lo = f64::from_le_bytes(word());
    let r_hi = f64::from_le_bytes(word());
    let len = nr * ntheta;
    if bytes.len() != 48 + 8 * (count + count * len) {
        return Err(bad());
    }
    let floats: Vec<f64> = bytes[48..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let times = floats[..count].to_vec();
    let columns = floats[count..].chunks_exact(len.max(1)).map(<[f64]>::to_vec).collect();
    Ok(BinarySnapshots { nr, ntheta, r_lo, r_hi, times, columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use liyau_core::{Units, WarpedSurface};

    #[test]
    fn binary_snapshots_round_trip() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 9, 4).unwrap();
        let a = FieldOnGrid::from_fn(g, Units::Density, |i, j| (i * 10 + j) as f64);
        let b = a.map(Units::Density, |v| -v);
        let dir = tempfile::tempdir().unwrap();
        let path = write_snapshots(dir.path(), "u", SnapshotFormat::Binary, &[(0.1, &a), (0.2, &b)]).unwrap();
        let back = read_binary_snapshots(&path).unwrap();
        assert_eq!((back.nr, back.ntheta, back.times.clone()), (9, 4, vec![0.1, 0.2]));
        assert_eq!(back.columns[0], a.values());
        assert_eq!(back.columns[1], b.values());
        let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(dir.path().join("u.meta.json")).unwrap()).unwrap();
        assert_eq!(meta.data, "u.bin");
    }

    #[test]
    fn csv_snapshots_have_one_row_per_node() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 9, 4).unwrap();
        let a = FieldOnGrid::constant(g, Units::Density, 1.5);
        let dir = tempfile::tempdir().unwrap();
        let path = write_snapshots(dir.path(), "u", SnapshotFormat::Csv, &[(0.5, &a)]).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 1 + 36);
        assert_eq!(text.lines().next().unwrap(), "t,r,theta,u");
    }
}
