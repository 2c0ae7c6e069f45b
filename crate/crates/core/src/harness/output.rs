//! Files written by a run: `diagnostics.csv`, `snapshots.json`, `summary.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::Result;
use crate::grid::Grid1D;
use crate::solver::Trajectory;

/// First line of every diagnostics file.
pub fn schema_line() -> String {
    format!("# bdflow diagnostics schema v{}", DiagnosticsRecord::SCHEMA_VERSION)
}

pub fn write_diagnostics_csv<'a>(
    path: &Path,
    records: impl IntoIterator<Item = &'a DiagnosticsRecord>,
) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "{}", schema_line())?;
    let mut w = csv::Writer::from_writer(file);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_diagnostics_csv`].
pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = std::fs::read_to_string(path)?;
    let body = text
        .strip_prefix(&schema_line())
        .ok_or_else(|| crate::Error::Parameter(format!("{}: missing schema line", path.display())))?;
    let mut r = csv::Reader::from_reader(body.trim_start().as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[derive(Debug, Serialize)]
struct SnapshotOut<'a> {
    t: f64,
    rho: &'a [f64],
    m: &'a [f64],
}

#[derive(Debug, Serialize)]
struct SnapshotsOut<'a> {
    x_min: f64,
    dx: f64,
    cells: usize,
    snapshots: Vec<SnapshotOut<'a>>,
}

/// Indices of at most `max` snapshots out of `len`, evenly spread and always
/// keeping the first and the last.
pub fn subsample(len: usize, max: usize) -> Vec<usize> {
    let max = max.max(2);
    if len <= max {
        return (0..len).collect();
    }
    let mut out: Vec<usize> = (0..max)
        .map(|k| ((k * (len - 1)) as f64 / (max - 1) as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

pub fn write_snapshots_json(path: &Path, traj: &Trajectory, grid: &Grid1D, max: usize) -> Result<()> {
    let out = SnapshotsOut {
        x_min: grid.x_min,
        dx: grid.dx,
        cells: grid.cells,
        snapshots: subsample(traj.snapshots.len(), max)
            .into_iter()
            .map(|k| {
                let s = &traj.snapshots[k].state;
                SnapshotOut {
                    t: s.t,
                    rho: &s.rho,
                    m: &s.m,
                }
            })
            .collect(),
    };
    write_json(path, &out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file)?;
    file.flush()?;
    Ok(())
}

/// Writes rows as CSV with a header.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsample_keeps_ends() {
        assert_eq!(subsample(3, 11), vec![0, 1, 2]);
        assert_eq!(subsample(101, 11), (0..11).map(|k| 10 * k).collect::<Vec<_>>());
        let s = subsample(14, 5);
        assert_eq!((s[0], *s.last().unwrap(), s.len()), (0, 13, 5));
    }
}
