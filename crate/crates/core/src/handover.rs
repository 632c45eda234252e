//! Measurement reports and handover decision policies.
//!
//! Each policy consumes the periodic [`MeasurementReport`]s of one UE and
//! proposes a target cell. Policies are plain state machines: the engine
//! feeds them reports and clock ticks and executes whatever they return, so
//! any measurement trace can be replayed through them deterministically.
//!
//! | id   | rule |
//! |------|------|
//! | HOA1 | `RSRP_T > RSRP_S + HOM` held for `TTT` |
//! | HOA2 | filtered `RSS_T >= RSS_S + HOM` held over a `T_u` window |
//! | HOA3 | filtered difference `FDIF > threshold`, immediately |
//! | HOA4 | HOA1 plus `RSRP_T >` running average of the serving RSRP |
//!
//! The time-to-trigger is counted in milliseconds: once the entry condition
//! holds at a report, the per-target timer runs every TTI until the next
//! report re-evaluates it. The HOA2 window is only checked at reports.

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, ConfigError};

pub const NUM_CELLS: usize = 7;

pub type CellId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub ue_id: usize,
    pub time_ms: u64,
    pub rsrp_dbm: [f64; NUM_CELLS],
}

/// A completed serving-cell switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandoverEvent {
    pub ue_id: usize,
    pub time_ms: u64,
    pub source_cell: CellId,
    pub target_cell: CellId,
    /// Queued bits moved from the source to the target eNodeB.
    pub forwarded_bits: u64,
}

/// Algorithm choice with its two tunable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm")]
pub enum PolicyParams {
    #[serde(rename = "HOA1")]
    Hoa1 { hom_db: f64, ttt_ms: u32 },
    #[serde(rename = "HOA2")]
    Hoa2 { hom_db: f64, beta: f64 },
    #[serde(rename = "HOA3")]
    Hoa3 { threshold_db: f64, alpha: f64 },
    #[serde(rename = "HOA4")]
    Hoa4 { hom_db: f64, ttt_ms: u32 },
}

impl PolicyParams {
    /// Builds parameters from a margin and the secondary value (TTT in ms
    /// for HOA1/HOA4, the filter factor for HOA2/HOA3).
    pub fn new(algorithm: Algorithm, hom_db: f64, secondary: f64) -> Result<Self, ConfigError> {
        if !(hom_db.is_finite() && hom_db >= 0.0) {
            return Err(ConfigError::Invariant("hom values >= 0"));
        }
        let ttt = || {
            if secondary >= 0.0 && secondary <= u32::MAX as f64 && libm::floor(secondary) == secondary {
                Ok(secondary as u32)
            } else {
                Err(ConfigError::Invariant("ttt values must be whole milliseconds >= 0"))
            }
        };
        let factor = || {
            if secondary > 0.0 && secondary <= 1.0 {
                Ok(secondary)
            } else {
                Err(ConfigError::Invariant("alpha_beta values in (0, 1]"))
            }
        };
        Ok(match algorithm {
            Algorithm::Hoa1 => PolicyParams::Hoa1 { hom_db, ttt_ms: ttt()? },
            Algorithm::Hoa2 => PolicyParams::Hoa2 { hom_db, beta: factor()? },
            Algorithm::Hoa3 => PolicyParams::Hoa3 { threshold_db: hom_db, alpha: factor()? },
            Algorithm::Hoa4 => PolicyParams::Hoa4 { hom_db, ttt_ms: ttt()? },
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            PolicyParams::Hoa1 { .. } => Algorithm::Hoa1,
            PolicyParams::Hoa2 { .. } => Algorithm::Hoa2,
            PolicyParams::Hoa3 { .. } => Algorithm::Hoa3,
            PolicyParams::Hoa4 { .. } => Algorithm::Hoa4,
        }
    }

    /// HOM, or the FDIF threshold for HOA3.
    pub fn hom_db(&self) -> f64 {
        match *self {
            PolicyParams::Hoa1 { hom_db, .. }
            | PolicyParams::Hoa2 { hom_db, .. }
            | PolicyParams::Hoa4 { hom_db, .. } => hom_db,
            PolicyParams::Hoa3 { threshold_db, .. } => threshold_db,
        }
    }

    /// TTT in ms, or the alpha/beta factor.
    pub fn secondary(&self) -> f64 {
        match *self {
            PolicyParams::Hoa1 { ttt_ms, .. } | PolicyParams::Hoa4 { ttt_ms, .. } => ttt_ms as f64,
            PolicyParams::Hoa2 { beta, .. } => beta,
            PolicyParams::Hoa3 { alpha, .. } => alpha,
        }
    }
}

impl fmt::Display for PolicyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PolicyParams::Hoa1 { hom_db, ttt_ms } => write!(f, "HOA1 [HOM, TTT] = [{hom_db}, {ttt_ms}]"),
            PolicyParams::Hoa2 { hom_db, beta } => write!(f, "HOA2 [HOM, beta] = [{hom_db}, {beta}]"),
            PolicyParams::Hoa3 { threshold_db, alpha } => write!(f, "HOA3 [HOM, alpha] = [{threshold_db}, {alpha}]"),
            PolicyParams::Hoa4 { hom_db, ttt_ms } => write!(f, "HOA4 [HOM, TTT] = [{hom_db}, {ttt_ms}]"),
        }
    }
}

/// Picks the candidate with the highest RSRP; ties go to the lowest id.
fn strongest(rsrp: &[f64; NUM_CELLS], candidates: impl Iterator<Item = CellId>) -> Option<CellId> {
    let mut best: Option<CellId> = None;
    for c in candidates {
        if best.is_none_or(|b| rsrp[c] > rsrp[b]) {
            best = Some(c);
        }
    }
    best
}

/// Per-target "condition holds since" stamps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TriggerTimers {
    since: [Option<u64>; NUM_CELLS],
}

impl TriggerTimers {
    /// Starts timers for newly qualifying targets, keeps running ones and
    /// clears the rest.
    pub fn update(&mut self, now_ms: u64, qualifies: impl Fn(CellId) -> bool) {
        for (c, slot) in self.since.iter_mut().enumerate() {
            *slot = if qualifies(c) { Some(slot.unwrap_or(now_ms)) } else { None };
        }
    }

    /// Elapsed HOTrigger for `target`, `None` if the condition is not held.
    pub fn elapsed(&self, target: CellId, now_ms: u64) -> Option<u64> {
        self.since[target].map(|s| now_ms.saturating_sub(s))
    }

    pub fn clear(&mut self) {
        self.since = [None; NUM_CELLS];
    }

    fn expired(&self, now_ms: u64, duration_ms: u64) -> impl Iterator<Item = CellId> + '_ {
        (0..NUM_CELLS).filter(move |&c| self.elapsed(c, now_ms).is_some_and(|e| e >= duration_ms))
    }
}

/// HOA1: LTE hard handover.
#[derive(Debug, Clone, PartialEq)]
pub struct HardHandover {
    pub hom_db: f64,
    pub ttt_ms: u32,
    timers: TriggerTimers,
    last_rsrp: [f64; NUM_CELLS],
}

impl HardHandover {
    pub fn new(hom_db: f64, ttt_ms: u32) -> Self {
        Self { hom_db, ttt_ms, timers: TriggerTimers::default(), last_rsrp: [f64::NEG_INFINITY; NUM_CELLS] }
    }

    pub fn on_report(&mut self, report: &MeasurementReport, serving: CellId) {
        let r = &report.rsrp_dbm;
        let hom = self.hom_db;
        self.timers.update(report.time_ms, |c| c != serving && r[c] - r[serving] > hom);
        self.last_rsrp = *r;
    }

    pub fn poll(&self, now_ms: u64) -> Option<CellId> {
        strongest(&self.last_rsrp, self.timers.expired(now_ms, self.ttt_ms as u64))
    }

    pub fn decide(&mut self, report: &MeasurementReport, serving: CellId, now_ms: u64) -> Option<CellId> {
        self.on_report(report, serving);
        self.poll(now_ms)
    }

    pub fn ho_trigger_ms(&self, target: CellId, now_ms: u64) -> Option<u64> {
        self.timers.elapsed(target, now_ms)
    }

    pub fn reset(&mut self) {
        self.timers.clear();
    }
}

/// HOA2: received-signal-strength TTT window.
///
/// `RSS_F(n) = beta * RSS(n) + (1 - beta) * RSS_F(n - 1)`, seeded with the
/// first raw sample. A target wins once `RSS_F_T >= RSS_F_S + HOM` has held
/// at every report spanning `window_ms`.
#[derive(Debug, Clone, PartialEq)]
pub struct RssTttWindow {
    pub hom_db: f64,
    pub beta: f64,
    pub window_ms: u32,
    filtered: [Option<f64>; NUM_CELLS],
    timers: TriggerTimers,
}

impl RssTttWindow {
    pub fn new(hom_db: f64, beta: f64, window_ms: u32) -> Self {
        Self { hom_db, beta, window_ms, filtered: [None; NUM_CELLS], timers: TriggerTimers::default() }
    }

    pub fn filtered(&self, cell: CellId) -> Option<f64> {
        self.filtered[cell]
    }

    pub fn decide(&mut self, report: &MeasurementReport, serving: CellId, now_ms: u64) -> Option<CellId> {
        for (f, &raw) in self.filtered.iter_mut().zip(report.rsrp_dbm.iter()) {
            *f = Some(match *f {
                None => raw,
                Some(prev) => self.beta * raw + (1.0 - self.beta) * prev,
            });
        }
        let f = self.filtered.map(|x| x.unwrap_or(f64::NEG_INFINITY));
        let hom = self.hom_db;
        self.timers.update(report.time_ms, |c| c != serving && f[c] >= f[serving] + hom);
        strongest(&report.rsrp_dbm, self.timers.expired(now_ms, self.window_ms as u64))
    }

    pub fn reset(&mut self) {
        self.filtered = [None; NUM_CELLS];
        self.timers.clear();
    }
}

/// HOA3: integrator handover.
///
/// `FDIF(t) = (1 - alpha) * FDIF(t - 1) + alpha * (RSRP_T - RSRP_S)` per
/// target, starting from 0; hands over as soon as any `FDIF` exceeds the
/// threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrator {
    pub threshold_db: f64,
    pub alpha: f64,
    fdif: [f64; NUM_CELLS],
}

impl Integrator {
    pub fn new(threshold_db: f64, alpha: f64) -> Self {
        Self { threshold_db, alpha, fdif: [0.0; NUM_CELLS] }
    }

    pub fn fdif(&self, target: CellId) -> f64 {
        self.fdif[target]
    }

    pub fn decide(&mut self, report: &MeasurementReport, serving: CellId) -> Option<CellId> {
        let r = &report.rsrp_dbm;
        for c in (0..NUM_CELLS).filter(|&c| c != serving) {
            let dif = r[c] - r[serving];
            self.fdif[c] = (1.0 - self.alpha) * self.fdif[c] + self.alpha * dif;
        }
        let thr = self.threshold_db;
        let fdif = self.fdif;
        strongest(r, (0..NUM_CELLS).filter(|&c| c != serving && fdif[c] > thr))
    }

    pub fn reset(&mut self) {
        self.fdif = [0.0; NUM_CELLS];
    }
}

/// HOA4: hard handover with an average-RSRP constraint.
///
/// Keeps the dB-domain mean of every serving-cell sample since the last
/// handover. A target must beat that mean as well as `RSRP_S + HOM`, and both
/// must hold for `TTT`.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageRsrpConstraint {
    pub hom_db: f64,
    pub ttt_ms: u32,
    rsrp_sum_db: f64,
    samples: u32,
    timers: TriggerTimers,
    last_rsrp: [f64; NUM_CELLS],
}

impl AverageRsrpConstraint {
    pub fn new(hom_db: f64, ttt_ms: u32) -> Self {
        Self {
            hom_db,
            ttt_ms,
            rsrp_sum_db: 0.0,
            samples: 0,
            timers: TriggerTimers::default(),
            last_rsrp: [f64::NEG_INFINITY; NUM_CELLS],
        }
    }

    pub fn samples(&self) -> u32 {
        self.samples
    }

    pub fn average_serving_rsrp(&self) -> Option<f64> {
        (self.samples > 0).then(|| self.rsrp_sum_db / self.samples as f64)
    }

    pub fn on_report(&mut self, report: &MeasurementReport, serving: CellId) {
        let r = &report.rsrp_dbm;
        self.rsrp_sum_db += r[serving];
        self.samples += 1;
        let avg = self.rsrp_sum_db / self.samples as f64;
        let hom = self.hom_db;
        self.timers.update(report.time_ms, |c| c != serving && r[c] > avg && r[c] - r[serving] > hom);
        self.last_rsrp = *r;
    }

    pub fn poll(&self, now_ms: u64) -> Option<CellId> {
        strongest(&self.last_rsrp, self.timers.expired(now_ms, self.ttt_ms as u64))
    }

    pub fn decide(&mut self, report: &MeasurementReport, serving: CellId, now_ms: u64) -> Option<CellId> {
        self.on_report(report, serving);
        self.poll(now_ms)
    }

    pub fn ho_trigger_ms(&self, target: CellId, now_ms: u64) -> Option<u64> {
        self.timers.elapsed(target, now_ms)
    }

    pub fn reset(&mut self) {
        self.rsrp_sum_db = 0.0;
        self.samples = 0;
        self.timers.clear();
    }
}

/// Per-UE working state of whichever policy the run uses.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyState {
    Hoa1(HardHandover),
    Hoa2(RssTttWindow),
    Hoa3(Integrator),
    Hoa4(AverageRsrpConstraint),
}

impl PolicyState {
    pub fn new(params: PolicyParams, hoa2_window_ms: u32) -> Self {
        match params {
            PolicyParams::Hoa1 { hom_db, ttt_ms } => PolicyState::Hoa1(HardHandover::new(hom_db, ttt_ms)),
            PolicyParams::Hoa2 { hom_db, beta } => PolicyState::Hoa2(RssTttWindow::new(hom_db, beta, hoa2_window_ms)),
            PolicyParams::Hoa3 { threshold_db, alpha } => PolicyState::Hoa3(Integrator::new(threshold_db, alpha)),
            PolicyParams::Hoa4 { hom_db, ttt_ms } => PolicyState::Hoa4(AverageRsrpConstraint::new(hom_db, ttt_ms)),
        }
    }

    /// Processes a measurement report taken at `now_ms`.
    pub fn on_report(&mut self, report: &MeasurementReport, serving: CellId, now_ms: u64) -> Option<CellId> {
        match self {
            PolicyState::Hoa1(p) => p.decide(report, serving, now_ms),
            PolicyState::Hoa2(p) => p.decide(report, serving, now_ms),
            PolicyState::Hoa3(p) => p.decide(report, serving),
            PolicyState::Hoa4(p) => p.decide(report, serving, now_ms),
        }
    }

    /// Clock tick between reports; only the TTT-based policies can fire here.
    pub fn on_tti(&self, now_ms: u64) -> Option<CellId> {
        match self {
            PolicyState::Hoa1(p) => p.poll(now_ms),
            PolicyState::Hoa4(p) => p.poll(now_ms),
            PolicyState::Hoa2(_) | PolicyState::Hoa3(_) => None,
        }
    }

    /// Clears all filter, timer and average state after a handover.
    pub fn reset(&mut self) {
        match self {
            PolicyState::Hoa1(p) => p.reset(),
            PolicyState::Hoa2(p) => p.reset(),
            PolicyState::Hoa3(p) => p.reset(),
            PolicyState::Hoa4(p) => p.reset(),
        }
    }
}
