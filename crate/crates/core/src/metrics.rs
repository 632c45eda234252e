//! Run metrics and sweep aggregation.
//!
//! A [`MetricsLedger`] is fed one [`UeSample`] per UE per TTI plus a count of
//! executed handovers; every reported figure is a pure function of those
//! inputs, so a stored sample trace can be replayed into a fresh ledger and
//! yields bit-identical results.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, GridPoint};
use crate::handover::{CellId, NUM_CELLS};

/// ANOH value substituted for zero before dividing.
pub const ZERO_ANOH_SUBSTITUTE: f64 = 0.5;

/// What one UE contributed during one TTI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UeSample {
    /// Serving cell at the sample instant.
    pub cell: CellId,
    /// Bits correctly received this TTI.
    pub bits: u32,
    /// Head-of-line delay, 0 for an empty queue.
    pub hol_delay_ms: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsLedger {
    num_users: usize,
    tti_ms: u32,
    ticks: u64,
    ho_total: u64,
    cell_bits: [u64; NUM_CELLS],
    cell_delay_sum_ms: [u64; NUM_CELLS],
    cell_samples: [u64; NUM_CELLS],
    ue_bits: Vec<u64>,
}

impl MetricsLedger {
    pub fn new(num_users: usize, tti_ms: u32) -> Self {
        Self {
            num_users,
            tti_ms,
            ticks: 0,
            ho_total: 0,
            cell_bits: [0; NUM_CELLS],
            cell_delay_sum_ms: [0; NUM_CELLS],
            cell_samples: [0; NUM_CELLS],
            ue_bits: vec![0; num_users],
        }
    }

    /// Accumulates one TTI. `samples` is indexed by UE id.
    pub fn record_tti(&mut self, samples: &[UeSample]) {
        assert_eq!(samples.len(), self.num_users, "one sample per UE per TTI");
        for (ue, s) in samples.iter().enumerate() {
            self.cell_bits[s.cell] += s.bits as u64;
            self.cell_delay_sum_ms[s.cell] += s.hol_delay_ms as u64;
            self.cell_samples[s.cell] += 1;
            self.ue_bits[ue] += s.bits as u64;
        }
        self.ticks += 1;
    }

    pub fn record_handover(&mut self) {
        self.ho_total += 1;
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    /// TTIs recorded so far; every UE has exactly this many samples.
    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn ho_total(&self) -> u64 {
        self.ho_total
    }

    pub fn sim_seconds(&self) -> f64 {
        self.ticks as f64 * self.tti_ms as f64 / 1000.0
    }

    pub fn ue_bits(&self) -> &[u64] {
        &self.ue_bits
    }

    pub fn cell_bits(&self, cell: CellId) -> u64 {
        self.cell_bits[cell]
    }

    /// Handovers per UE per second; 0 for an empty run.
    pub fn avg_handovers(&self) -> f64 {
        avg_handovers(self.ho_total, self.num_users, self.sim_seconds())
    }

    pub fn cell_throughput_bps(&self, cell: CellId) -> f64 {
        let t = self.sim_seconds();
        if t > 0.0 {
            self.cell_bits[cell] as f64 / t
        } else {
            0.0
        }
    }

    pub fn total_throughput_bps(&self) -> f64 {
        (0..NUM_CELLS).map(|c| self.cell_throughput_bps(c)).sum()
    }

    /// Mean HOL delay over all (TTI, UE) samples attributed to `cell`.
    pub fn cell_delay_ms(&self, cell: CellId) -> f64 {
        match self.cell_samples[cell] {
            0 => 0.0,
            n => self.cell_delay_sum_ms[cell] as f64 / n as f64,
        }
    }

    pub fn total_delay_ms(&self) -> f64 {
        (0..NUM_CELLS).map(|c| self.cell_delay_ms(c)).sum()
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            ho_total: self.ho_total,
            ho_avg: self.avg_handovers(),
            total_throughput_bps: self.total_throughput_bps(),
            total_delay_ms: self.total_delay_ms(),
            cell_throughput_bps: core::array::from_fn(|c| self.cell_throughput_bps(c)),
            cell_delay_ms: core::array::from_fn(|c| self.cell_delay_ms(c)),
        }
    }
}

pub fn avg_handovers(ho_total: u64, num_users: usize, sim_seconds: f64) -> f64 {
    let denom = num_users as f64 * sim_seconds;
    if denom > 0.0 {
        ho_total as f64 / denom
    } else {
        0.0
    }
}

/// Headline numbers of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub ho_total: u64,
    pub ho_avg: f64,
    pub total_throughput_bps: f64,
    pub total_delay_ms: f64,
    pub cell_throughput_bps: [f64; NUM_CELLS],
    pub cell_delay_ms: [f64; NUM_CELLS],
}

/// System throughput per handover rate; a zero rate counts as 0.5.
pub fn optimize_ratio(st_bps: f64, anoh: f64) -> f64 {
    let anoh = if anoh == 0.0 { ZERO_ANOH_SUBSTITUTE } else { anoh };
    st_bps / anoh
}

/// One grid point averaged over its seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub speed_kmh: f64,
    pub hom_db: f64,
    pub ttt_or_factor: f64,
    pub st_bps: f64,
    pub anoh: f64,
    pub optimize_ratio: f64,
    pub total_delay_ms: f64,
    pub seeds: usize,
}

impl SweepRow {
    /// Averages the runs of one point, then forms the ratio from the means.
    pub fn from_runs(point: &GridPoint, runs: &[RunSummary]) -> Self {
        let n = runs.len().max(1) as f64;
        let st_bps = runs.iter().map(|r| r.total_throughput_bps).sum::<f64>() / n;
        let anoh = runs.iter().map(|r| r.ho_avg).sum::<f64>() / n;
        let total_delay_ms = runs.iter().map(|r| r.total_delay_ms).sum::<f64>() / n;
        SweepRow {
            algorithm: point.algorithm(),
            speed_kmh: point.speed_kmh,
            hom_db: point.policy.hom_db(),
            ttt_or_factor: point.policy.secondary(),
            st_bps,
            anoh,
            optimize_ratio: optimize_ratio(st_bps, anoh),
            total_delay_ms,
            seeds: runs.len(),
        }
    }
}

/// `true` if `a` should replace the current best `b` of its group.
fn beats(a: &SweepRow, b: &SweepRow) -> bool {
    if a.optimize_ratio != b.optimize_ratio {
        return a.optimize_ratio > b.optimize_ratio;
    }
    if a.hom_db != b.hom_db {
        return a.hom_db < b.hom_db;
    }
    a.ttt_or_factor < b.ttt_or_factor
}

/// Best row per (algorithm, speed), sorted by algorithm then speed.
///
/// Ties on the ratio go to the smaller margin, then the smaller TTT/factor,
/// so the result does not depend on the input order.
pub fn select_optimum(rows: &[SweepRow]) -> Vec<SweepRow> {
    let mut best: Vec<SweepRow> = Vec::new();
    for row in rows {
        match best.iter_mut().find(|b| b.algorithm == row.algorithm && b.speed_kmh == row.speed_kmh) {
            Some(b) => {
                if beats(row, b) {
                    *b = *row;
                }
            }
            None => best.push(*row),
        }
    }
    best.sort_by(|a, b| a.algorithm.cmp(&b.algorithm).then(a.speed_kmh.total_cmp(&b.speed_kmh)));
    best
}
