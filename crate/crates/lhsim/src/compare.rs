//! Evaluation of all algorithms at their chosen parameters over the three
//! speed scenarios, plus the summary rows and relative improvements of HOA4.

use lhsim_core::metrics::RunSummary;
use lhsim_core::{run, Algorithm, CqiTable, PolicyParams, RunOptions, ScenarioConfig};
use serde::Serialize;

use crate::error::CliError;
use crate::sweep::{par_map, Optimum};

/// One evaluated (algorithm, speed) combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting {
    pub speed_kmh: f64,
    pub params: PolicyParams,
}

impl Setting {
    pub fn from_optimum(o: &Optimum) -> Result<Self, CliError> {
        let params = PolicyParams::new(o.algorithm, o.hom_db, o.ttt_or_factor)
            .map_err(|e| CliError::InvalidArgs(format!("optimum {} at {} km/h: {e}", o.algorithm, o.speed_kmh)))?;
        Ok(Setting { speed_kmh: o.speed_kmh, params })
    }
}

/// A row of `compare.csv`. Sum rows leave the speed and parameters empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    pub row: &'static str,
    pub algorithm: Algorithm,
    pub speed_kmh: Option<f64>,
    pub hom_db: Option<f64>,
    pub ttt_or_factor: Option<f64>,
    pub ho_avg: f64,
    pub total_throughput_bps: f64,
    pub total_delay_ms: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    HoAvg,
    TotalThroughput,
    TotalDelay,
}

/// HOA4 against another algorithm on the three-speed sums. Positive means
/// HOA4 is better: fewer handovers, more throughput or less delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Improvement {
    pub metric: Metric,
    pub versus: Algorithm,
    pub percent: f64,
}

/// Relative improvement of `hoa4` over `other`; `(other - hoa4) / other`
/// for costs and `(hoa4 - other) / other` for throughput.
pub fn improvement(metric: Metric, hoa4: f64, other: f64) -> f64 {
    let gain = match metric {
        Metric::TotalThroughput => hoa4 - other,
        Metric::HoAvg | Metric::TotalDelay => other - hoa4,
    };
    if other == 0.0 {
        0.0
    } else {
        100.0 * gain / other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// Per (algorithm, speed), algorithms in order, speeds ascending.
    pub rows: Vec<CompareRow>,
    /// One per algorithm, the sum of its speed rows.
    pub sums: Vec<CompareRow>,
    pub improvements: Vec<Improvement>,
}

impl Comparison {
    pub fn from_rows(mut rows: Vec<CompareRow>) -> Self {
        rows.sort_by(|a, b| {
            a.algorithm.cmp(&b.algorithm).then(a.speed_kmh.unwrap_or(0.0).total_cmp(&b.speed_kmh.unwrap_or(0.0)))
        });
        let mut sums: Vec<CompareRow> = Vec::new();
        for r in &rows {
            match sums.iter_mut().find(|s| s.algorithm == r.algorithm) {
                Some(s) => {
                    s.ho_avg += r.ho_avg;
                    s.total_throughput_bps += r.total_throughput_bps;
                    s.total_delay_ms += r.total_delay_ms;
                }
                None => sums.push(CompareRow { row: "sum", speed_kmh: None, hom_db: None, ttt_or_factor: None, ..*r }),
            }
        }
        let mut improvements = Vec::new();
        if let Some(h4) = sums.iter().find(|s| s.algorithm == Algorithm::Hoa4) {
            for other in sums.iter().filter(|s| s.algorithm != Algorithm::Hoa4) {
                for (metric, a, b) in [
                    (Metric::HoAvg, h4.ho_avg, other.ho_avg),
                    (Metric::TotalThroughput, h4.total_throughput_bps, other.total_throughput_bps),
                    (Metric::TotalDelay, h4.total_delay_ms, other.total_delay_ms),
                ] {
                    improvements.push(Improvement {
                        metric,
                        versus: other.algorithm,
                        percent: improvement(metric, a, b),
                    });
                }
            }
        }
        Comparison { rows, sums, improvements }
    }

    pub fn row(&self, algorithm: Algorithm, speed_kmh: f64) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.speed_kmh == Some(speed_kmh))
    }

    pub fn sum(&self, algorithm: Algorithm) -> Option<&CompareRow> {
        self.sums.iter().find(|r| r.algorithm == algorithm)
    }

    pub fn speeds(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.rows.iter().filter_map(|r| r.speed_kmh).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Gnuplot data: one line per speed, one column per algorithm.
    pub fn figure_data(&self, metric: Metric) -> String {
        let (title, scale) = match metric {
            Metric::HoAvg => ("handovers per UE per second", 1.0),
            Metric::TotalThroughput => ("total system throughput [Mbps]", 1e-6),
            Metric::TotalDelay => ("total system delay [ms]", 1.0),
        };
        let algs: Vec<Algorithm> = self.sums.iter().map(|s| s.algorithm).collect();
        let mut out = format!("# {title}\n# speed_kmh");
        for a in &algs {
            out.push(' ');
            out.push_str(a.id());
        }
        out.push('\n');
        for speed in self.speeds() {
            out.push_str(&speed.to_string());
            for &a in &algs {
                let v = self.row(a, speed).map_or(f64::NAN, |r| match metric {
                    Metric::HoAvg => r.ho_avg,
                    Metric::TotalThroughput => r.total_throughput_bps * scale,
                    Metric::TotalDelay => r.total_delay_ms,
                });
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs every setting for every seed and averages per setting.
pub fn compare(
    cfg: &ScenarioConfig,
    table: &CqiTable,
    settings: &[Setting],
    seeds: &[u64],
    workers: usize,
) -> Result<Comparison, CliError> {
    let jobs: Vec<(usize, u64)> = (0..settings.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let results = par_map(&jobs, workers, |&(i, seed)| {
        let s = settings[i];
        let cfg = ScenarioConfig { ue_speed_kmh: s.speed_kmh, ..cfg.clone() };
        run(&cfg, table, s.params, seed, RunOptions::default()).map(|o| o.summary())
    })?;
    let mut per_setting: Vec<Vec<RunSummary>> = vec![Vec::new(); settings.len()];
    for (&(i, _), r) in jobs.iter().zip(results) {
        per_setting[i].push(r?);
    }
    let rows = settings
        .iter()
        .zip(&per_setting)
        .map(|(s, runs)| {
            let n = runs.len().max(1) as f64;
            CompareRow {
                row: "speed",
                algorithm: s.params.algorithm(),
                speed_kmh: Some(s.speed_kmh),
                hom_db: Some(s.params.hom_db()),
                ttt_or_factor: Some(s.params.secondary()),
                ho_avg: runs.iter().map(|r| r.ho_avg).sum::<f64>() / n,
                total_throughput_bps: runs.iter().map(|r| r.total_throughput_bps).sum::<f64>() / n,
                total_delay_ms: runs.iter().map(|r| r.total_delay_ms).sum::<f64>() / n,
                seeds: runs.len(),
            }
        })
        .collect();
    Ok(Comparison::from_rows(rows))
}
