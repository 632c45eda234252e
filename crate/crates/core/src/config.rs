//! Scenario parameters and the optimization grid.
//!
//! Both are read from a flat `key = value` text format (one pair per line,
//! `#` starts a comment). Unknown keys are rejected so that typos in sweep
//! scripts fail loudly instead of silently falling back to defaults.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::handover::{PolicyParams, NUM_CELLS};
use crate::mobility::Rect;
use crate::units::linear_to_db;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown key `{key}` at line {line}")]
    UnknownKey { line: usize, key: String },
    #[error("invalid value `{value}` for `{key}`")]
    InvalidValue { key: String, value: String },
    #[error("validation error: {0}")]
    Invariant(&'static str),
}

/// The four handover algorithms under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    /// Standard hard handover: margin plus time-to-trigger.
    #[serde(rename = "HOA1")]
    Hoa1,
    /// Filtered RSS compared over a fixed window.
    #[serde(rename = "HOA2")]
    Hoa2,
    /// Integrator of filtered RSRP differences, no time-to-trigger.
    #[serde(rename = "HOA3")]
    Hoa3,
    /// Hard handover gated by the serving cell's running-average RSRP.
    #[serde(rename = "HOA4")]
    Hoa4,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Hoa1, Algorithm::Hoa2, Algorithm::Hoa3, Algorithm::Hoa4];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Hoa1 => "HOA1",
            Algorithm::Hoa2 => "HOA2",
            Algorithm::Hoa3 => "HOA3",
            Algorithm::Hoa4 => "HOA4",
        }
    }

    /// Whether the secondary grid parameter is a time-to-trigger (as opposed
    /// to a filter factor).
    pub fn uses_ttt(self) -> bool {
        matches!(self, Algorithm::Hoa1 | Algorithm::Hoa4)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "HOA1" | "1" => Ok(Algorithm::Hoa1),
            "HOA2" | "2" => Ok(Algorithm::Hoa2),
            "HOA3" | "3" => Ok(Algorithm::Hoa3),
            "HOA4" | "4" => Ok(Algorithm::Hoa4),
            _ => Err(ConfigError::InvalidValue { key: "algorithm".into(), value: s.into() }),
        }
    }
}

/// Every simulation parameter of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub num_cells: usize,
    pub cell_radius_m: f64,
    pub carrier_freq_mhz: f64,
    pub bandwidth_mhz: f64,
    pub num_rbs: usize,
    pub subcarriers_per_rb: u32,
    pub subcarrier_spacing_khz: f64,
    pub enodeb_total_tx_dbm: f64,
    pub num_users: usize,
    pub ue_speed_kmh: f64,
    pub tti_ms: u32,
    pub measurement_interval_ms: u32,
    pub sim_time_ms: u32,
    pub traffic_rate_bps: f64,
    pub cqi_delay_ms: u32,
    pub harq_ack_delay_ms: u32,
    pub max_retransmissions: u32,
    pub bler_target: f64,
    pub shadow_std_db: f64,
    pub seed: u64,
    pub bounding_rect_m: Rect,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub shadow_decorr_m: f64,
    pub noise_figure_db: f64,
    pub data_res_per_rb: u32,
    pub hoa2_window_ms: u32,
    pub harq_processes: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_cells: 7,
            cell_radius_m: 100.0,
            carrier_freq_mhz: 2000.0,
            bandwidth_mhz: 5.0,
            num_rbs: 25,
            subcarriers_per_rb: 12,
            subcarrier_spacing_khz: 15.0,
            enodeb_total_tx_dbm: 43.01,
            num_users: 100,
            ue_speed_kmh: 3.0,
            tti_ms: 1,
            measurement_interval_ms: 50,
            sim_time_ms: 10_000,
            traffic_rate_bps: 1_000_000.0,
            cqi_delay_ms: 3,
            harq_ack_delay_ms: 4,
            max_retransmissions: 3,
            bler_target: 0.10,
            shadow_std_db: 8.0,
            seed: 1,
            bounding_rect_m: Rect::new(300.0, 300.0),
            bs_height_m: 30.0,
            ue_height_m: 1.5,
            shadow_decorr_m: 20.0,
            noise_figure_db: 9.0,
            data_res_per_rb: 120,
            hoa2_window_ms: 100,
            harq_processes: 8,
        }
    }
}

/// Keys accepted in a scenario file, in canonical serialization order.
pub const SCENARIO_KEYS: &[&str] = &[
    "num_cells",
    "cell_radius_m",
    "carrier_freq_mhz",
    "bandwidth_mhz",
    "num_rbs",
    "subcarriers_per_rb",
    "subcarrier_spacing_khz",
    "enodeb_total_tx_dbm",
    "num_users",
    "ue_speed_kmh",
    "tti_ms",
    "measurement_interval_ms",
    "sim_time_ms",
    "traffic_rate_bps",
    "cqi_delay_ms",
    "harq_ack_delay_ms",
    "max_retransmissions",
    "bler_target",
    "shadow_std_db",
    "seed",
    "bounding_rect_m",
    "bs_height_m",
    "ue_height_m",
    "shadow_decorr_m",
    "noise_figure_db",
    "data_res_per_rb",
    "hoa2_window_ms",
    "harq_processes",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::InvalidValue { key: key.into(), value: value.into() })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|tok| parse_value(key, tok.trim())).collect()
}

/// Splits `text` into `(line_number, key, value)` triples, skipping blanks
/// and comments.
fn key_values(text: &str) -> impl Iterator<Item = Result<(usize, &str, &str), ConfigError>> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            return None;
        }
        let line_no = idx + 1;
        Some(match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => Ok((line_no, k.trim(), v.trim())),
            _ => Err(ConfigError::Parse { line: line_no, message: format!("expected `key = value`, got `{line}`") }),
        })
    })
}

impl ScenarioConfig {
    /// Parses a scenario document; missing keys keep their defaults.
    pub fn from_kv_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        for entry in key_values(text) {
            let (line, key, value) = entry?;
            cfg.set(line, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "num_cells" => self.num_cells = parse_value(key, v)?,
            "cell_radius_m" => self.cell_radius_m = parse_value(key, v)?,
            "carrier_freq_mhz" => self.carrier_freq_mhz = parse_value(key, v)?,
            "bandwidth_mhz" => self.bandwidth_mhz = parse_value(key, v)?,
            "num_rbs" => self.num_rbs = parse_value(key, v)?,
            "subcarriers_per_rb" => self.subcarriers_per_rb = parse_value(key, v)?,
            "subcarrier_spacing_khz" => self.subcarrier_spacing_khz = parse_value(key, v)?,
            "enodeb_total_tx_dbm" => self.enodeb_total_tx_dbm = parse_value(key, v)?,
            "num_users" => self.num_users = parse_value(key, v)?,
            "ue_speed_kmh" => self.ue_speed_kmh = parse_value(key, v)?,
            "tti_ms" => self.tti_ms = parse_value(key, v)?,
            "measurement_interval_ms" => self.measurement_interval_ms = parse_value(key, v)?,
            "sim_time_ms" => self.sim_time_ms = parse_value(key, v)?,
            "traffic_rate_bps" => self.traffic_rate_bps = parse_value(key, v)?,
            "cqi_delay_ms" => self.cqi_delay_ms = parse_value(key, v)?,
            "harq_ack_delay_ms" => self.harq_ack_delay_ms = parse_value(key, v)?,
            "max_retransmissions" => self.max_retransmissions = parse_value(key, v)?,
            "bler_target" => self.bler_target = parse_value(key, v)?,
            "shadow_std_db" => self.shadow_std_db = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "bounding_rect_m" => {
                let dims: Vec<f64> = parse_list(key, v)?;
                match dims.as_slice() {
                    [w, h] => self.bounding_rect_m = Rect::new(*w, *h),
                    [s] => self.bounding_rect_m = Rect::new(*s, *s),
                    _ => return Err(ConfigError::InvalidValue { key: key.into(), value: v.into() }),
                }
            }
            "bs_height_m" => self.bs_height_m = parse_value(key, v)?,
            "ue_height_m" => self.ue_height_m = parse_value(key, v)?,
            "shadow_decorr_m" => self.shadow_decorr_m = parse_value(key, v)?,
            "noise_figure_db" => self.noise_figure_db = parse_value(key, v)?,
            "data_res_per_rb" => self.data_res_per_rb = parse_value(key, v)?,
            "hoa2_window_ms" => self.hoa2_window_ms = parse_value(key, v)?,
            "harq_processes" => self.harq_processes = parse_value(key, v)?,
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        }
        Ok(())
    }

    /// Serializes every key in canonical order. `from_kv_str` of the result
    /// yields an identical config.
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("num_cells", self.num_cells.to_string());
        push("cell_radius_m", self.cell_radius_m.to_string());
        push("carrier_freq_mhz", self.carrier_freq_mhz.to_string());
        push("bandwidth_mhz", self.bandwidth_mhz.to_string());
        push("num_rbs", self.num_rbs.to_string());
        push("subcarriers_per_rb", self.subcarriers_per_rb.to_string());
        push("subcarrier_spacing_khz", self.subcarrier_spacing_khz.to_string());
        push("enodeb_total_tx_dbm", self.enodeb_total_tx_dbm.to_string());
        push("num_users", self.num_users.to_string());
        push("ue_speed_kmh", self.ue_speed_kmh.to_string());
        push("tti_ms", self.tti_ms.to_string());
        push("measurement_interval_ms", self.measurement_interval_ms.to_string());
        push("sim_time_ms", self.sim_time_ms.to_string());
        push("traffic_rate_bps", self.traffic_rate_bps.to_string());
        push("cqi_delay_ms", self.cqi_delay_ms.to_string());
        push("harq_ack_delay_ms", self.harq_ack_delay_ms.to_string());
        push("max_retransmissions", self.max_retransmissions.to_string());
        push("bler_target", self.bler_target.to_string());
        push("shadow_std_db", self.shadow_std_db.to_string());
        push("seed", self.seed.to_string());
        push(
            "bounding_rect_m",
            format!("{},{}", self.bounding_rect_m.half_width_m, self.bounding_rect_m.half_height_m),
        );
        push("bs_height_m", self.bs_height_m.to_string());
        push("ue_height_m", self.ue_height_m.to_string());
        push("shadow_decorr_m", self.shadow_decorr_m.to_string());
        push("noise_figure_db", self.noise_figure_db.to_string());
        push("data_res_per_rb", self.data_res_per_rb.to_string());
        push("hoa2_window_ms", self.hoa2_window_ms.to_string());
        push("harq_processes", self.harq_processes.to_string());
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        use ConfigError::Invariant;
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.num_cells != NUM_CELLS {
            return Err(Invariant("num_cells must be 7 (hexagonal 7-cell layout)"));
        }
        if !positive(self.cell_radius_m) {
            return Err(Invariant("cell_radius_m > 0"));
        }
        if !positive(self.carrier_freq_mhz) || !positive(self.bandwidth_mhz) || !positive(self.subcarrier_spacing_khz) {
            return Err(Invariant("frequencies must be > 0"));
        }
        if self.num_rbs == 0 || self.subcarriers_per_rb == 0 || self.num_users == 0 {
            return Err(Invariant("num_rbs, subcarriers_per_rb and num_users must be > 0"));
        }
        if !self.enodeb_total_tx_dbm.is_finite() {
            return Err(Invariant("enodeb_total_tx_dbm must be finite"));
        }
        if !positive(self.ue_speed_kmh) {
            return Err(Invariant("ue_speed_kmh > 0"));
        }
        if self.tti_ms == 0 || self.measurement_interval_ms == 0 {
            return Err(Invariant("tti_ms and measurement_interval_ms must be > 0"));
        }
        if !self.measurement_interval_ms.is_multiple_of(self.tti_ms) {
            return Err(Invariant("measurement_interval_ms must be a multiple of tti_ms"));
        }
        if self.cqi_delay_ms == 0 || self.harq_ack_delay_ms == 0 || self.hoa2_window_ms == 0 {
            return Err(Invariant("cqi_delay_ms, harq_ack_delay_ms and hoa2_window_ms must be > 0"));
        }
        if !self.cqi_delay_ms.is_multiple_of(self.tti_ms) || !self.harq_ack_delay_ms.is_multiple_of(self.tti_ms) {
            return Err(Invariant("feedback delays must be multiples of tti_ms"));
        }
        if !self.sim_time_ms.is_multiple_of(self.tti_ms) {
            return Err(Invariant("sim_time_ms must be a multiple of tti_ms"));
        }
        if !(self.traffic_rate_bps.is_finite() && self.traffic_rate_bps >= 0.0) {
            return Err(Invariant("traffic_rate_bps >= 0"));
        }
        if self.max_retransmissions == 0 || self.harq_processes == 0 {
            return Err(Invariant("max_retransmissions and harq_processes must be > 0"));
        }
        if !(self.bler_target > 0.0 && self.bler_target < 1.0) {
            return Err(Invariant("bler_target in (0,1)"));
        }
        if !(self.shadow_std_db.is_finite() && self.shadow_std_db >= 0.0) {
            return Err(Invariant("shadow_std_db >= 0"));
        }
        if !(self.shadow_decorr_m.is_finite() && self.shadow_decorr_m >= 0.0) {
            return Err(Invariant("shadow_decorr_m >= 0"));
        }
        if !positive(self.bounding_rect_m.half_width_m) || !positive(self.bounding_rect_m.half_height_m) {
            return Err(Invariant("bounding_rect_m half-extents must be > 0"));
        }
        if !positive(self.bs_height_m) || !positive(self.ue_height_m) {
            return Err(Invariant("antenna heights must be > 0"));
        }
        if !self.noise_figure_db.is_finite() {
            return Err(Invariant("noise_figure_db must be finite"));
        }
        if self.data_res_per_rb == 0 {
            return Err(Invariant("data_res_per_rb > 0"));
        }
        let used_khz = self.num_rbs as f64 * self.subcarriers_per_rb as f64 * self.subcarrier_spacing_khz;
        if used_khz > self.bandwidth_mhz * 1000.0 {
            return Err(Invariant("num_rbs x subcarriers_per_rb x subcarrier_spacing_khz <= bandwidth_mhz x 1000"));
        }
        Ok(())
    }

    /// Equal split of the total eNodeB power over all RBs.
    pub fn tx_per_rb_dbm(&self) -> f64 {
        self.enodeb_total_tx_dbm - linear_to_db(self.num_rbs as f64)
    }

    pub fn rb_bandwidth_hz(&self) -> f64 {
        self.subcarriers_per_rb as f64 * self.subcarrier_spacing_khz * 1000.0
    }

    pub fn max_transmissions(&self) -> u32 {
        1 + self.max_retransmissions
    }

    pub fn sim_seconds(&self) -> f64 {
        self.sim_time_ms as f64 / 1000.0
    }
}

/// The optimization grid: which algorithms, margins, timers/factors and
/// speeds to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub algorithms: Vec<Algorithm>,
    pub hom_db_values: Vec<f64>,
    pub ttt_values: Vec<f64>,
    pub alpha_beta_values: Vec<f64>,
    pub speeds_kmh: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.to_vec(),
            hom_db_values: (0..=10).map(f64::from).collect(),
            ttt_values: (0..=5).map(f64::from).collect(),
            alpha_beta_values: alloc::vec![0.25, 0.5, 0.75, 1.0],
            speeds_kmh: alloc::vec![3.0, 30.0, 120.0],
        }
    }
}

/// One cell of the sweep: an algorithm at one speed with one parameter pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub speed_kmh: f64,
    pub policy: PolicyParams,
}

impl GridPoint {
    pub fn algorithm(&self) -> Algorithm {
        self.policy.algorithm()
    }
}

impl SweepGrid {
    pub fn from_kv_str(text: &str) -> Result<Self, ConfigError> {
        let mut grid = SweepGrid::default();
        for entry in key_values(text) {
            let (line, key, value) = entry?;
            match key {
                "algorithms" => grid.algorithms = parse_list(key, value)?,
                "hom_db_values" => grid.hom_db_values = parse_list(key, value)?,
                "ttt_values" => grid.ttt_values = parse_list(key, value)?,
                "alpha_beta_values" => grid.alpha_beta_values = parse_list(key, value)?,
                "speeds_kmh" => grid.speeds_kmh = parse_list(key, value)?,
                _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            }
        }
        grid.validate()?;
        Ok(grid)
    }

    pub fn to_kv_string(&self) -> String {
        fn join<T: fmt::Display>(xs: &[T]) -> String {
            xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        format!(
            "algorithms = {}\nhom_db_values = {}\nttt_values = {}\nalpha_beta_values = {}\nspeeds_kmh = {}\n",
            join(&self.algorithms),
            join(&self.hom_db_values),
            join(&self.ttt_values),
            join(&self.alpha_beta_values),
            join(&self.speeds_kmh),
        )
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        use ConfigError::Invariant;
        if self.alpha_beta_values.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
            return Err(Invariant("alpha_beta values in (0, 1]"));
        }
        if self.hom_db_values.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Invariant("hom values >= 0"));
        }
        if self.ttt_values.iter().any(|&x| !(x >= 0.0 && x <= u32::MAX as f64 && libm::floor(x) == x)) {
            return Err(Invariant("ttt values must be whole milliseconds >= 0"));
        }
        if self.speeds_kmh.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Invariant("speeds must be > 0"));
        }
        Ok(())
    }

    /// Number of points `expand_grid` produces for `algorithm`.
    pub fn points_for(&self, algorithm: Algorithm) -> usize {
        let secondary = if algorithm.uses_ttt() { self.ttt_values.len() } else { self.alpha_beta_values.len() };
        self.speeds_kmh.len() * self.hom_db_values.len() * secondary
    }
}

/// Cartesian product of the grid. TTT-based algorithms pair each margin with
/// each TTT value; the filter-based ones pair it with each alpha/beta factor.
pub fn expand_grid(grid: &SweepGrid) -> Vec<GridPoint> {
    let mut points = Vec::new();
    for &algorithm in &grid.algorithms {
        let secondary = if algorithm.uses_ttt() { &grid.ttt_values } else { &grid.alpha_beta_values };
        for &speed_kmh in &grid.speeds_kmh {
            for &hom in &grid.hom_db_values {
                for &param in secondary {
                    if let Ok(policy) = PolicyParams::new(algorithm, hom, param) {
                        points.push(GridPoint { speed_kmh, policy });
                    }
                }
            }
        }
    }
    points
}
