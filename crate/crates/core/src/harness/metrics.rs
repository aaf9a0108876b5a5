//! CSV and JSON outputs of an experiment.
//!
//! Each combination gets its own directory holding `metrics.csv` (one row per
//! run and episode), `episodes.csv` (per-episode mean and spread across runs)
//! and `meta.json` (the resolved configuration). `summary.csv` at the top
//! level has one row per combination.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Config;
use super::experiment::{aggregate, summarize, EpisodeMetrics, Summary};
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub combo: String,
    pub config: Config,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_error(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error(path))?;
    for row in rows {
        writer.serialize(row).map_err(csv_error(path))?;
    }
    writer.flush().map_err(io_error(path))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error(path))?;
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(csv_error(path))
}

/// Writes one combination's directory and returns its summary row.
pub fn write_combo(
    root: &Path,
    combo: &str,
    config: &Config,
    metrics: &[EpisodeMetrics],
) -> Result<Summary, HarnessError> {
    let dir = root.join(combo);
    fs::create_dir_all(&dir).map_err(io_error(&dir))?;
    write_csv(&dir.join("metrics.csv"), metrics)?;
    write_csv(&dir.join("episodes.csv"), &aggregate(metrics))?;
    let meta = Meta {
        combo: combo.to_string(),
        config: config.clone(),
    };
    let meta_path = dir.join("meta.json");
    let text = serde_json::to_string_pretty(&meta).expect("configuration serializes");
    fs::write(&meta_path, text + "\n").map_err(io_error(&meta_path))?;
    Ok(summarize(combo, &config.user.label(), metrics))
}

pub fn write_summary(root: &Path, rows: &[Summary]) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(root).map_err(io_error(root))?;
    let path = root.join("summary.csv");
    write_csv(&path, rows)?;
    Ok(path)
}

/// Rebuilds summaries from the combination directories under `root`, in
/// directory-name order.
pub fn report(root: &Path) -> Result<Vec<Summary>, HarnessError> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(io_error(root))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("metrics.csv").is_file() && p.join("meta.json").is_file())
        .collect();
    dirs.sort();
    let mut rows = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let meta_path = dir.join("meta.json");
        let text = fs::read_to_string(&meta_path).map_err(io_error(&meta_path))?;
        let meta: Meta = serde_json::from_str(&text).map_err(|e| HarnessError::Csv {
            path: meta_path.clone(),
            message: e.to_string(),
        })?;
        let metrics: Vec<EpisodeMetrics> = read_csv(&dir.join("metrics.csv"))?;
        rows.push(summarize(&meta.combo, &meta.config.user.label(), &metrics));
    }
    Ok(rows)
}
