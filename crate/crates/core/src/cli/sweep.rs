//! Parameter sweeps: the cartesian product of `key=start:end:count` axes,
//! each cell run into `<output_dir>/cell_NNNN` and summarized in
//! `<output_dir>/manifest.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{error_exit_code, exit_code};
use crate::error::{Error, Result};
use crate::integrator::{run, RunStatus};
use crate::io::config::{parse_config_with_overrides, KEYS};
use crate::io::output::OutputWriter;

pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    /// Parses `key=start:end:count`; `count` evenly spaced values including
    /// both ends (`count = 1` gives just `start`).
    pub fn parse(spec: &str) -> Result<Self, String> {
        let (key, range) = spec
            .split_once('=')
            .ok_or_else(|| format!("expected key=start:end:count, got `{spec}`"))?;
        let key = key.trim();
        if !KEYS.contains(&key) || key == "output_dir" {
            return Err(format!("`{key}` cannot be swept"));
        }
        let parts: Vec<&str> = range.split(':').collect();
        let [start, end, count] = parts.as_slice() else {
            return Err(format!("expected start:end:count, got `{range}`"));
        };
        let start: f64 = start.trim().parse().map_err(|e| format!("bad start `{start}`: {e}"))?;
        let end: f64 = end.trim().parse().map_err(|e| format!("bad end `{end}`: {e}"))?;
        let count: usize = count.trim().parse().map_err(|e| format!("bad count `{count}`: {e}"))?;
        if count == 0 {
            return Err("count must be at least 1".into());
        }
        let values = if count == 1 {
            vec![start]
        } else {
            (0..count)
                .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
                .collect()
        };
        Ok(Self {
            key: key.to_string(),
            values,
        })
    }
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub index: usize,
    pub dir: PathBuf,
    pub values: Vec<f64>,
    pub status: String,
    pub exit_code: i32,
    pub steps: u64,
}

fn cartesian(axes: &[SweepAxis]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut row = prefix.clone();
                    row.push(v);
                    row
                })
            })
            .collect()
    })
}

fn run_cell(base_text: &str, dir: &Path, keys: &[&str], values: &[f64]) -> (String, i32, u64) {
    let mut overrides: Vec<(String, String)> = keys
        .iter()
        .zip(values)
        .map(|(k, v)| {
            // integer-valued keys need integer text
            let text = if matches!(*k, "n" | "block_side" | "rng_seed" | "report_every" | "snapshot_every") {
                format!("{}", v.round() as i64)
            } else {
                v.to_string()
            };
            (k.to_string(), text)
        })
        .collect();
    overrides.push(("output_dir".into(), format!("{}", dir.display())));

    let config = match parse_config_with_overrides(base_text, &overrides) {
        Ok(c) => c,
        Err(e) => return (format!("config error: {e}"), super::EXIT_USAGE, 0),
    };
    let mut writer = match OutputWriter::create(dir, config.emit_images) {
        Ok(w) => w,
        Err(e) => return (format!("error: {e}"), super::EXIT_CHECK_FAILED, 0),
    };
    match run(&config, &mut writer) {
        Ok(outcome) => {
            let status = match &outcome.status {
                RunStatus::Clean => "clean".to_string(),
                RunStatus::Violations => "violations".to_string(),
                RunStatus::Diverged { step, .. } => format!("diverged@{step}"),
            };
            (status, exit_code(&outcome), outcome.final_state.step)
        }
        Err(Error::Unstable(_)) => ("unstable".into(), super::EXIT_CHECK_FAILED, 0),
        Err(e) => (format!("error: {e}"), error_exit_code(&e), 0),
    }
}

/// Runs every cell (in parallel) and writes the manifest.
pub fn run_sweep(base_text: &str, base_dir: &Path, axes: &[SweepAxis], jobs: Option<usize>) -> Result<Vec<CellResult>> {
    fs::create_dir_all(base_dir).map_err(|e| Error::io("creating sweep directory", base_dir, e))?;
    let keys: Vec<&str> = axes.iter().map(|a| a.key.as_str()).collect();
    let grid = cartesian(axes);

    let work = || {
        grid.par_iter()
            .enumerate()
            .map(|(index, values)| {
                let dir = base_dir.join(format!("cell_{index:04}"));
                let (status, exit_code, steps) = run_cell(base_text, &dir, &keys, values);
                CellResult {
                    index,
                    dir,
                    values: values.clone(),
                    status,
                    exit_code,
                    steps,
                }
            })
            .collect::<Vec<_>>()
    };
    let cells = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut manifest = String::from("cell,dir");
    for k in &keys {
        let _ = write!(manifest, ",{k}");
    }
    manifest.push_str(",status,exit_code,steps\n");
    for c in &cells {
        let _ = write!(manifest, "{},{}", c.index, c.dir.display());
        for v in &c.values {
            let _ = write!(manifest, ",{v}");
        }
        let _ = writeln!(manifest, ",{},{},{}", c.status, c.exit_code, c.steps);
    }
    let path = base_dir.join(MANIFEST_FILE);
    fs::write(&path, manifest).map_err(|e| Error::io("writing sweep manifest", &path, e))?;
    Ok(cells)
}
