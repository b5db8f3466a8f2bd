//! Output files: per-round CSV or JSON, robot positions and batch summaries.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{BatchSummary, RunOutput, SeedRow};
use crate::engine::Trajectory;
use crate::equilibria::BetaSeries;
use crate::error::{Error, Result};

pub const TRAJECTORY_COLUMNS: [&str; 10] = [
    "round",
    "agent",
    "action_index",
    "action_value",
    "belief_mean",
    "tv_to_reference",
    "track_err_centroid",
    "track_err_pairwise",
    "beta_t",
    "beta_cesaro",
];

pub const POSITION_COLUMNS: [&str; 4] = ["round", "agent", "x", "y"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A trajectory with its diagnostics, as written in JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub trajectory: Trajectory,
    pub beta_t: Option<Vec<f64>>,
    pub beta_cesaro: Option<Vec<f64>>,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse { path: path.to_path_buf(), message: format!("{other:?}") },
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::domain(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// One row per round and agent. Empty cells mark diagnostics that do not
/// apply, such as the belief mean of a multi-dimensional state.
pub fn write_trajectory_csv(path: &Path, t: &Trajectory, beta: Option<&BetaSeries>) -> Result<()> {
    let rows = t.records.iter().enumerate().flat_map(move |(idx, r)| {
        let beta_t = beta.map(|b| b.beta[idx]);
        let cesaro = beta.map(|b| b.cesaro[idx]);
        (0..t.num_agents).map(move |i| {
            let a = r.actions[i];
            let mean = match r.beliefs[i].mean.as_slice() {
                [x] => Some(*x),
                _ => None,
            };
            vec![
                r.round.to_string(),
                (i + 1).to_string(),
                a.index().to_string(),
                t.action_values[a.slot()].to_string(),
                opt(mean),
                opt(r.tv_to_reference[i]),
                opt(r.track_err_centroid),
                opt(r.track_err_pairwise),
                opt(beta_t),
                opt(cesaro),
            ]
        })
    });
    write_csv(path, &TRAJECTORY_COLUMNS, rows)
}

/// Robot paths, starting with the positions before round one as round 0.
pub fn write_positions_csv(path: &Path, t: &Trajectory) -> Result<bool> {
    let Some(start) = &t.initial_positions else { return Ok(false) };
    let frames = std::iter::once((0, start)).chain(t.records.iter().filter_map(|r| r.positions.as_ref().map(|p| (r.round, p))));
    let rows = frames.flat_map(|(round, ps)| {
        ps.iter().enumerate().map(move |(i, p)| vec![round.to_string(), (i + 1).to_string(), p[0].to_string(), p[1].to_string()])
    });
    write_csv(path, &POSITION_COLUMNS, rows)?;
    Ok(true)
}

/// Writes `trajectory.csv` or `trajectory.json`, `positions.csv` when the
/// agents move, and a one-run `summary.json`. Returns the files written.
pub fn emit_run(out: &RunOutput, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    match format {
        Format::Csv => {
            let path = dir.join("trajectory.csv");
            write_trajectory_csv(&path, &out.trajectory, out.beta.as_ref())?;
            written.push(path);
        }
        Format::Json => {
            let path = dir.join("trajectory.json");
            let file = TrajectoryFile {
                trajectory: out.trajectory.clone(),
                beta_t: out.beta.as_ref().map(|b| b.beta.clone()),
                beta_cesaro: out.beta.as_ref().map(|b| b.cesaro.clone()),
            };
            write_json(&path, &file)?;
            written.push(path);
        }
    }
    let path = dir.join("positions.csv");
    if write_positions_csv(&path, &out.trajectory)? {
        written.push(path);
    }
    let path = dir.join("summary.json");
    write_json(&path, &BatchSummary::from_rows(out.scenario.horizon, vec![SeedRow::from_output(out)]))?;
    written.push(path);
    Ok(written)
}

pub fn emit_summary(summary: &BatchSummary, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("summary.json");
    write_json(&path, summary)?;
    Ok(path)
}

pub fn load_trajectory(path: &Path) -> Result<TrajectoryFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
}

pub fn load_summary(path: &Path) -> Result<BatchSummary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
}
