//! Command-line interface: `run`, `sweep`, `compare` and `oracle`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lhsim_core::metrics::{optimize_ratio, RunSummary};
use lhsim_core::{run, Algorithm, HandoverEvent, PolicyParams, RunOptions, ScenarioConfig};
use serde::Serialize;

use crate::compare::{compare, Metric, Setting};
use crate::error::CliError;
use crate::io::{create_dir, load_cqi_table, load_grid, load_scenario, write_atomic, write_csv, write_json};
use crate::metadata::Metadata;
use crate::oracle::run_oracles;
use crate::sweep::{bar_chart_data, bar_chart_file_name, optima, par_map, run_sweep, OptimaFile, SWEEP_SIM_TIME_MS};

#[derive(Debug, Parser)]
#[command(name = "lhsim", version, about = "Downlink LTE handover simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one algorithm with one parameter pair.
    Run(RunArgs),
    /// Sweep the optimization grid and pick the best parameters.
    Sweep(SweepArgs),
    /// Evaluate all algorithms at chosen parameters over every speed.
    Compare(CompareArgs),
    /// Check the simulator against independent desk calculations.
    Oracle,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario key/value file; defaults apply when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// CQI/BLER table CSV; the built-in table when omitted.
    #[arg(long)]
    pub cqi_table: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Repeatable.
    #[arg(long = "seed")]
    pub seeds: Vec<u64>,
    /// Worker threads; all available cores when omitted.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Overrides the scenario's simulated time.
    #[arg(long)]
    pub sim_time: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub hom: Option<f64>,
    /// Time-to-trigger in ms (HOA1, HOA4).
    #[arg(long)]
    pub ttt: Option<f64>,
    /// Integrator factor (HOA3).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// RSS filter factor (HOA2).
    #[arg(long)]
    pub beta: Option<f64>,
}

impl ParamArgs {
    pub fn policy(&self, algorithm: Algorithm) -> Result<PolicyParams, CliError> {
        let missing = |flag: &str| CliError::InvalidArgs(format!("{algorithm} needs --{flag}"));
        let hom = self.hom.ok_or_else(|| missing("hom"))?;
        let secondary = match algorithm {
            Algorithm::Hoa1 | Algorithm::Hoa4 => self.ttt.ok_or_else(|| missing("ttt"))?,
            Algorithm::Hoa2 => self.beta.ok_or_else(|| missing("beta"))?,
            Algorithm::Hoa3 => self.alpha.ok_or_else(|| missing("alpha"))?,
        };
        Ok(PolicyParams::new(algorithm, hom, secondary)?)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub algo: Algorithm,
    #[command(flatten)]
    pub params: ParamArgs,
    /// UE speed in km/h; the scenario's speed when omitted.
    #[arg(long)]
    pub speed: Option<f64>,
    #[arg(long)]
    pub dump_channel_trace: bool,
    #[arg(long)]
    pub dump_ho_events: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Grid key/value file; the default grid when omitted.
    #[arg(long)]
    pub grid: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `optima.json` from a sweep.
    #[arg(long)]
    pub optima: Option<PathBuf>,
    /// Used for every algorithm when no optima file is given.
    #[command(flatten)]
    pub params: ParamArgs,
    /// Speeds for explicit parameters (repeatable); 3, 30 and 120 by default.
    #[arg(long = "speed")]
    pub speeds: Vec<f64>,
}

/// A row of `results.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResultRow {
    pub algorithm: Algorithm,
    pub speed_kmh: f64,
    pub hom_db: f64,
    pub ttt_or_factor: f64,
    pub seed: u64,
    pub ho_avg: f64,
    pub total_throughput_bps: f64,
    pub total_delay_ms: f64,
    pub optimize_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct HoEventRow {
    time_ms: u64,
    ue_id: usize,
    source: usize,
    target: usize,
    algorithm: Algorithm,
    hom: f64,
    ttt_or_alpha_beta: f64,
}

#[derive(Debug, Serialize)]
struct SeedMetrics {
    seed: u64,
    #[serde(flatten)]
    summary: RunSummary,
}

#[derive(Debug, Serialize)]
struct RunMetrics {
    params: PolicyParams,
    speed_kmh: f64,
    sim_time_ms: u32,
    runs: Vec<SeedMetrics>,
    mean_ho_avg: f64,
    mean_total_throughput_bps: f64,
    mean_total_delay_ms: f64,
}

fn workers(common: &CommonArgs) -> usize {
    common.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn scenario(common: &CommonArgs, default_sim_time: Option<u32>) -> Result<ScenarioConfig, CliError> {
    let mut cfg = load_scenario(common.scenario.as_deref())?;
    if let Some(t) = common.sim_time.or(default_sim_time) {
        cfg.sim_time_ms = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let mut cfg = scenario(&args.common, None)?;
    if let Some(speed) = args.speed {
        cfg.ue_speed_kmh = speed;
    }
    cfg.validate()?;
    let params = args.params.policy(args.algo)?;
    let (table, cqi_text) = load_cqi_table(args.common.cqi_table.as_deref())?;
    let seeds = if args.common.seeds.is_empty() { vec![cfg.seed] } else { args.common.seeds.clone() };
    let opts = RunOptions { record_channel: args.dump_channel_trace, ..RunOptions::default() };

    let outputs = par_map(&seeds, workers(&args.common), |&seed| run(&cfg, &table, params, seed, opts))?;
    let outputs = outputs.into_iter().collect::<Result<Vec<_>, _>>()?;

    let out = &args.common.out;
    create_dir(out)?;
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (&seed, output) in seeds.iter().zip(&outputs) {
        let s = output.summary();
        rows.push(ResultRow {
            algorithm: args.algo,
            speed_kmh: cfg.ue_speed_kmh,
            hom_db: params.hom_db(),
            ttt_or_factor: params.secondary(),
            seed,
            ho_avg: s.ho_avg,
            total_throughput_bps: s.total_throughput_bps,
            total_delay_ms: s.total_delay_ms,
            optimize_ratio: optimize_ratio(s.total_throughput_bps, s.ho_avg),
        });
        runs.push(SeedMetrics { seed, summary: s });
        if args.dump_channel_trace {
            write_csv(&out.join(format!("channel_trace_seed{seed}.csv")), output.trace.channel.iter().copied())?;
        }
        if args.dump_ho_events {
            write_csv(&out.join(format!("ho_events_seed{seed}.csv")), ho_rows(&output.trace.handovers, params))?;
        }
    }
    let metrics = RunMetrics {
        params,
        speed_kmh: cfg.ue_speed_kmh,
        sim_time_ms: cfg.sim_time_ms,
        mean_ho_avg: mean(rows.iter().map(|r| r.ho_avg)),
        mean_total_throughput_bps: mean(rows.iter().map(|r| r.total_throughput_bps)),
        mean_total_delay_ms: mean(rows.iter().map(|r| r.total_delay_ms)),
        runs,
    };
    write_csv(&out.join("results.csv"), rows.iter().copied())?;
    write_json(&out.join("metrics.json"), &metrics)?;
    write_json(&out.join("metadata.json"), &Metadata::new("run", &cfg, &cqi_text, &seeds))?;

    println!(
        "{params} at {} km/h, {} seed(s): HO_avg {:.4} /UE/s, throughput {:.3} Mbps, delay {:.1} ms",
        cfg.ue_speed_kmh,
        seeds.len(),
        metrics.mean_ho_avg,
        metrics.mean_total_throughput_bps / 1e6,
        metrics.mean_total_delay_ms
    );
    Ok(())
}

fn ho_rows(events: &[HandoverEvent], params: PolicyParams) -> impl Iterator<Item = HoEventRow> + '_ {
    events.iter().map(move |e| HoEventRow {
        time_ms: e.time_ms,
        ue_id: e.ue_id,
        source: e.source_cell,
        target: e.target_cell,
        algorithm: params.algorithm(),
        hom: params.hom_db(),
        ttt_or_alpha_beta: params.secondary(),
    })
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let cfg = scenario(&args.common, Some(args.common.sim_time.unwrap_or(SWEEP_SIM_TIME_MS)))?;
    let grid = load_grid(args.grid.as_deref())?;
    let (table, cqi_text) = load_cqi_table(args.common.cqi_table.as_deref())?;
    let seeds = if args.common.seeds.is_empty() { vec![cfg.seed] } else { args.common.seeds.clone() };

    let outcome = run_sweep(&cfg, &table, &grid, &seeds, workers(&args.common))?;

    let out = &args.common.out;
    let plots = out.join("plots");
    create_dir(&plots)?;
    write_csv(&out.join("sweep.csv"), outcome.rows.iter().copied())?;
    let best = optima(&outcome.rows);
    write_json(
        &out.join("optima.json"),
        &OptimaFile { sim_time_ms: cfg.sim_time_ms, seeds: seeds.clone(), optima: best.clone() },
    )?;
    for &alg in &grid.algorithms {
        for &speed in &grid.speeds_kmh {
            write_atomic(
                &plots.join(bar_chart_file_name(alg, speed)),
                bar_chart_data(&outcome.rows, alg, speed).as_bytes(),
            )?;
        }
    }
    write_json(&out.join("metadata.json"), &Metadata::new("sweep", &cfg, &cqi_text, &seeds))?;

    println!("{} rows x {} seed(s) at {} ms", outcome.rows.len(), seeds.len(), cfg.sim_time_ms);
    for o in &best {
        println!(
            "  {} {:>5} km/h: HOM {:>4}, {:>4}  ratio {:.4e}  (ST {:.3} Mbps, ANOH {:.4})",
            o.algorithm,
            o.speed_kmh,
            o.hom_db,
            o.ttt_or_factor,
            o.optimize_ratio,
            o.st_bps / 1e6,
            o.anoh
        );
    }
    if !outcome.failures.is_empty() {
        write_json(&out.join("failures.json"), &outcome.failures)?;
        for f in &outcome.failures {
            eprintln!("failed: {} at {} km/h: {}", f.point.policy, f.point.speed_kmh, f.message);
        }
        return Err(CliError::SweepFailures {
            failed: outcome.failures.len(),
            total: outcome.failures.len() + outcome.rows.len(),
        });
    }
    Ok(())
}

fn read_optima(path: &Path) -> Result<OptimaFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Input { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::BadInput { path: path.to_owned(), message: e.to_string() })
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let cfg = scenario(&args.common, None)?;
    let (table, cqi_text) = load_cqi_table(args.common.cqi_table.as_deref())?;
    let seeds = if args.common.seeds.is_empty() { (1..=5).collect() } else { args.common.seeds.clone() };
    let settings: Vec<Setting> = match &args.optima {
        Some(path) => read_optima(path)?.optima.iter().map(Setting::from_optimum).collect::<Result<_, _>>()?,
        None => {
            let speeds = if args.speeds.is_empty() { vec![3.0, 30.0, 120.0] } else { args.speeds.clone() };
            let mut v = Vec::new();
            for alg in Algorithm::ALL {
                let params = args.params.policy(alg).map_err(|e| {
                    CliError::InvalidArgs(format!("compare needs --optima or explicit parameters: {e}"))
                })?;
                v.extend(speeds.iter().map(|&speed_kmh| Setting { speed_kmh, params }));
            }
            v
        }
    };

    let comparison = compare(&cfg, &table, &settings, &seeds, workers(&args.common))?;

    let out = &args.common.out;
    create_dir(out)?;
    write_csv(&out.join("compare.csv"), comparison.rows.iter().chain(&comparison.sums).copied())?;
    write_csv(&out.join("improvements.csv"), comparison.improvements.iter().copied())?;
    write_json(&out.join("compare.json"), &comparison)?;
    for (name, metric) in [
        ("ho_avg.dat", Metric::HoAvg),
        ("total_throughput.dat", Metric::TotalThroughput),
        ("total_delay.dat", Metric::TotalDelay),
    ] {
        write_atomic(&out.join(name), comparison.figure_data(metric).as_bytes())?;
    }
    write_json(&out.join("metadata.json"), &Metadata::new("compare", &cfg, &cqi_text, &seeds))?;

    println!("{} settings x {} seed(s) at {} ms", settings.len(), seeds.len(), cfg.sim_time_ms);
    for r in comparison.rows.iter().chain(&comparison.sums) {
        let speed = r.speed_kmh.map_or("sum".to_owned(), |s| format!("{s} km/h"));
        println!(
            "  {} {:>9}: HO_avg {:.4}  throughput {:.3} Mbps  delay {:.1} ms",
            r.algorithm,
            speed,
            r.ho_avg,
            r.total_throughput_bps / 1e6,
            r.total_delay_ms
        );
    }
    Ok(())
}

pub fn cmd_oracle() -> Result<(), CliError> {
    let checks = run_oracles();
    for c in &checks {
        println!("{c}");
    }
    match checks.iter().filter(|c| !c.pass).count() {
        0 => Ok(()),
        n => Err(CliError::OracleFailed(n)),
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Oracle => cmd_oracle(),
    }
}
