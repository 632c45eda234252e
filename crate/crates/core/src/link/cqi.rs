use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NUM_CQI_LEVELS: usize = 16;

/// The shipped table: efficiencies of the 16-level LTE CQI table with
/// logistic waterfall BLER constants. Thresholds are the lowest SINR at which
/// the waterfall drops below 10% BLER, found by bisection and rounded up to
/// the next micro-dB.
pub const STANDARD_TABLE_CSV: &str = include_str!("../../data/cqi_table.csv");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("cqi table line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cqi table: {0}")]
    Invalid(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqiLevel {
    pub cqi: u8,
    pub sinr_threshold_db: f64,
    pub efficiency_bits_per_re: f64,
    pub bler_slope: f64,
    pub bler_offset: f64,
}

/// Block error probability of a transport block sent at `level` and
/// received at `sinr_db`: `1 / (1 + exp(slope * (sinr - offset)))`.
pub fn bler_model(level: &CqiLevel, sinr_db: f64) -> f64 {
    if level.cqi == 0 {
        return 1.0;
    }
    1.0 / (1.0 + libm::exp(level.bler_slope * (sinr_db - level.bler_offset)))
}

/// Transport block size for `num_rbs` RBs at the given spectral efficiency.
pub fn transport_block_bits(efficiency_bits_per_re: f64, data_res_per_rb: u32, num_rbs: u32) -> u32 {
    libm::floor(efficiency_bits_per_re * data_res_per_rb as f64 * num_rbs as f64) as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqiTable {
    levels: Vec<CqiLevel>,
}

impl CqiTable {
    pub fn standard() -> Self {
        Self::from_csv(STANDARD_TABLE_CSV).expect("shipped cqi table is valid")
    }

    /// Parses `cqi,sinr_threshold_db,efficiency_bits_per_re,bler_slope,bler_offset`
    /// rows (header line required).
    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim().starts_with("cqi") => {}
            _ => return Err(TableError::Invalid("missing header row")),
        }
        let mut levels = Vec::with_capacity(NUM_CQI_LEVELS);
        for (idx, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse_err = |message: String| TableError::Parse { line: idx + 1, message };
            if fields.len() != 5 {
                return Err(parse_err(format!("expected 5 columns, got {}", fields.len())));
            }
            let num = |i: usize| -> Result<f64, TableError> {
                fields[i].parse::<f64>().map_err(|_| parse_err(format!("bad number `{}`", fields[i])))
            };
            let cqi = fields[0].parse::<u8>().map_err(|_| parse_err(format!("bad cqi `{}`", fields[0])))?;
            levels.push(CqiLevel {
                cqi,
                sinr_threshold_db: num(1)?,
                efficiency_bits_per_re: num(2)?,
                bler_slope: num(3)?,
                bler_offset: num(4)?,
            });
        }
        let table = Self { levels };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<(), TableError> {
        if self.levels.len() != NUM_CQI_LEVELS {
            return Err(TableError::Invalid("expected 16 levels"));
        }
        if self.levels.iter().enumerate().any(|(i, l)| l.cqi as usize != i) {
            return Err(TableError::Invalid("levels must be listed 0..15 in order"));
        }
        if self.levels[0].efficiency_bits_per_re != 0.0 {
            return Err(TableError::Invalid("level 0 must carry no data"));
        }
        for w in self.levels.windows(2) {
            if !(w[1].sinr_threshold_db > w[0].sinr_threshold_db) {
                return Err(TableError::Invalid("thresholds must be strictly increasing"));
            }
            if !(w[1].efficiency_bits_per_re > w[0].efficiency_bits_per_re) {
                return Err(TableError::Invalid("efficiencies must be strictly increasing"));
            }
        }
        if self.levels[1..].iter().any(|l| !(l.bler_slope > 0.0)) {
            return Err(TableError::Invalid("bler slopes must be > 0"));
        }
        Ok(())
    }

    pub fn levels(&self) -> &[CqiLevel] {
        &self.levels
    }

    pub fn level(&self, cqi: u8) -> &CqiLevel {
        &self.levels[cqi as usize]
    }

    /// Highest level whose threshold does not exceed `sinr_db`; 0 if none.
    pub fn cqi_from_sinr(&self, sinr_db: f64) -> u8 {
        self.levels.iter().rposition(|l| l.sinr_threshold_db <= sinr_db).unwrap_or(0) as u8
    }

    pub fn bler(&self, cqi: u8, sinr_db: f64) -> f64 {
        bler_model(self.level(cqi), sinr_db)
    }

    pub fn efficiency(&self, cqi: u8) -> f64 {
        self.level(cqi).efficiency_bits_per_re
    }

    pub fn transport_block_bits(&self, cqi: u8, data_res_per_rb: u32, num_rbs: u32) -> u32 {
        if cqi == 0 {
            return 0;
        }
        transport_block_bits(self.efficiency(cqi), data_res_per_rb, num_rbs)
    }
}
