//! Full experiment sweeps: a worker pool over the (n, SNR, trial) grid,
//! deterministic aggregation, and CSV emission.
//!
//! Reproducibility: each trial's RNG is derived from grid indices (see
//! [`crate::trial`]), results are collected in submission order, and rows
//! are emitted in a fixed order (estimator config order, then training
//! length, then SNR, then trial). The emitted CSVs are therefore identical
//! across runs and thread counts, except for the raw file's wall-time
//! column, which reports real measured durations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use amp_retrieval::{Error, Result};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::trial::{run_trial, TrialResult};

/// Where a sweep wrote its outputs.
pub struct SweepPaths {
    pub aggregate: PathBuf,
    pub raw: PathBuf,
}

/// One aggregate row: mean/deviation of NMSE over trials for a grid cell.
pub struct AggregateRow {
    pub estimator: String,
    pub snr_db: f64,
    pub n_train: usize,
    pub trials: usize,
    pub mean_nmse: f64,
    pub std_nmse: f64,
}

/// The raw-file companion of an aggregate path: `results.csv` →
/// `results_raw.csv`.
pub fn raw_path_for(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut name = format!("{stem}_raw");
    if let Some(ext) = path.extension() {
        name.push('.');
        name.push_str(&ext.to_string_lossy());
    }
    path.with_file_name(name)
}

/// Runs the whole grid and writes the aggregate and raw CSV files.
///
/// `threads` selects a dedicated worker-pool size; `None` uses the process
/// default. The output bytes do not depend on this choice.
pub fn run_sweep(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<SweepPaths> {
    cfg.validate()?;
    let (rows, aggregates) = match threads {
        None => execute(cfg)?,
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
            pool.install(|| execute(cfg))?
        }
    };

    let aggregate = PathBuf::from(&cfg.output_path);
    let raw = raw_path_for(&aggregate);
    write_file(&aggregate, &render_aggregate_csv(cfg, &aggregates))?;
    write_file(&raw, &render_raw_csv(cfg, &rows))?;
    Ok(SweepPaths { aggregate, raw })
}

/// Runs every grid cell in the current rayon context and aggregates.
/// Returns raw rows in emission order plus the aggregate rows.
fn execute(cfg: &ExperimentConfig) -> Result<(Vec<TrialResult>, Vec<AggregateRow>)> {
    let n_grid = cfg.effective_n_grid();
    let mut cells = Vec::new();
    for n_idx in 0..n_grid.len() {
        for snr_idx in 0..cfg.snr_grid_db.len() {
            for trial_idx in 0..cfg.trials {
                cells.push((n_idx, snr_idx, trial_idx));
            }
        }
    }

    // One work item per trial; collect preserves submission order.
    let per_cell: Vec<Vec<TrialResult>> = cells
        .par_iter()
        .map(|&(n_idx, snr_idx, trial_idx)| {
            run_trial(cfg, cfg.snr_grid_db[snr_idx], n_grid[n_idx], trial_idx)
        })
        .collect::<Result<_>>()?;

    // Raw rows in (estimator, n, snr, trial) order. run_trial returns one
    // result per estimator in config order, so index e picks the estimator.
    let mut rows = Vec::with_capacity(cells.len() * cfg.estimators.len());
    for e in 0..cfg.estimators.len() {
        for results in &per_cell {
            rows.push(results[e].clone());
        }
    }

    let mut aggregates = Vec::new();
    for (e, est) in cfg.estimators.iter().enumerate() {
        for (n_idx, &n_train) in n_grid.iter().enumerate() {
            for (snr_idx, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
                let nmses: Vec<f64> = cells
                    .iter()
                    .zip(&per_cell)
                    .filter(|((ni, si, _), _)| *ni == n_idx && *si == snr_idx)
                    .map(|(_, results)| results[e].nmse)
                    .collect();
                debug_assert_eq!(nmses.len(), cfg.trials);
                let mean = nmses.iter().sum::<f64>() / nmses.len() as f64;
                let std = if nmses.len() > 1 {
                    let var = nmses.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
                        / (nmses.len() - 1) as f64;
                    var.sqrt()
                } else {
                    0.0
                };
                aggregates.push(AggregateRow {
                    estimator: est.to_string(),
                    snr_db,
                    n_train,
                    trials: nmses.len(),
                    mean_nmse: mean,
                    std_nmse: std,
                });
            }
        }
    }
    Ok((rows, aggregates))
}

fn render_aggregate_csv(cfg: &ExperimentConfig, rows: &[AggregateRow]) -> String {
    let mut out = String::from("estimator,snr_db,n_train,m_r,m_t,k_paths,trials,mean_nmse,std_nmse\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.estimator, r.snr_db, r.n_train, cfg.m_r, cfg.m_t, cfg.k_paths, r.trials,
            r.mean_nmse, r.std_nmse
        )
        .expect("string write");
    }
    out
}

fn render_raw_csv(cfg: &ExperimentConfig, rows: &[TrialResult]) -> String {
    let mut out = String::from(
        "estimator,snr_db,n_train,m_r,m_t,k_paths,trials,trial_idx,seed,nmse,iterations,wall_time_ms\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.estimator, r.snr_db, r.n_train, cfg.m_r, cfg.m_t, cfg.k_paths, cfg.trials,
            r.trial_idx, r.seed, r.nmse, r.iterations, r.wall_time_ms
        )
        .expect("string write");
    }
    out
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::InvalidArgument(format!("create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| Error::InvalidArgument(format!("write {}: {e}", path.display())))
}
