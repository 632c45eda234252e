//! Parameter sweeps over the optimization grid.

use std::panic::{self, AssertUnwindSafe};

use lhsim_core::config::expand_grid;
use lhsim_core::{run_point, select_optimum, Algorithm, CqiTable, GridPoint, ScenarioConfig, SweepGrid, SweepRow};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Sweep runs are this long unless overridden.
pub const SWEEP_SIM_TIME_MS: u32 = 1000;

/// Applies `f` to every item on a pool of `workers` threads. The output
/// order matches the input order regardless of scheduling.
pub fn par_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Result<Vec<R>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::InvalidArgs(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointFailure {
    pub point: GridPoint,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// In grid order; failed points are missing.
    pub rows: Vec<SweepRow>,
    pub failures: Vec<PointFailure>,
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "run panicked".to_owned())
}

/// Runs every grid point for every seed. A failing point is reported in
/// `failures` and does not stop the others.
pub fn run_sweep(
    cfg: &ScenarioConfig,
    table: &CqiTable,
    grid: &SweepGrid,
    seeds: &[u64],
    workers: usize,
) -> Result<SweepOutcome, CliError> {
    let points = expand_grid(grid);
    let results = par_map(&points, workers, |p| {
        match panic::catch_unwind(AssertUnwindSafe(|| run_point(cfg, table, p, seeds))) {
            Ok(Ok(row)) => Ok(row),
            Ok(Err(e)) => Err(e.to_string()),
            Err(payload) => Err(panic_message(payload)),
        }
    })?;
    let mut outcome = SweepOutcome { rows: Vec::new(), failures: Vec::new() };
    for (point, result) in points.into_iter().zip(results) {
        match result {
            Ok(row) => outcome.rows.push(row),
            Err(message) => outcome.failures.push(PointFailure { point, message }),
        }
    }
    Ok(outcome)
}

/// One entry of `optima.json`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub algorithm: Algorithm,
    pub speed_kmh: f64,
    pub hom_db: f64,
    /// TTT in ms for HOA1/HOA4, beta for HOA2, alpha for HOA3.
    pub ttt_or_factor: f64,
    pub optimize_ratio: f64,
    pub st_bps: f64,
    pub anoh: f64,
}

impl From<&SweepRow> for Optimum {
    fn from(r: &SweepRow) -> Self {
        Optimum {
            algorithm: r.algorithm,
            speed_kmh: r.speed_kmh,
            hom_db: r.hom_db,
            ttt_or_factor: r.ttt_or_factor,
            optimize_ratio: r.optimize_ratio,
            st_bps: r.st_bps,
            anoh: r.anoh,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimaFile {
    pub sim_time_ms: u32,
    pub seeds: Vec<u64>,
    pub optima: Vec<Optimum>,
}

pub fn optima(rows: &[SweepRow]) -> Vec<Optimum> {
    select_optimum(rows).iter().map(Optimum::from).collect()
}

/// Bar-chart data for one (algorithm, speed): whitespace separated columns
/// `hom_db ttt_or_factor optimize_ratio`, one line per grid point.
pub fn bar_chart_data(rows: &[SweepRow], algorithm: Algorithm, speed_kmh: f64) -> String {
    let secondary = if algorithm.uses_ttt() {
        "ttt_ms"
    } else if algorithm == Algorithm::Hoa2 {
        "beta"
    } else {
        "alpha"
    };
    let mut out = format!("# {} at {} km/h\n# hom_db {} optimize_ratio\n", algorithm, speed_kmh, secondary);
    for r in rows.iter().filter(|r| r.algorithm == algorithm && r.speed_kmh == speed_kmh) {
        out.push_str(&format!("{} {} {}\n", r.hom_db, r.ttt_or_factor, r.optimize_ratio));
    }
    out
}

pub fn bar_chart_file_name(algorithm: Algorithm, speed_kmh: f64) -> String {
    format!("optimize_ratio_{}_{}kmh.dat", algorithm.id().to_lowercase(), speed_kmh)
}
