//! The per-TTI simulation loop.
//!
//! Each TTI runs, in order: mobility, channel update, measurement reports and
//! handover decisions, handover execution, traffic arrival, round-robin
//! scheduling and transmission, HARQ feedback, and metric sampling.
//!
//! CQI used for scheduling at `t` is computed from the channel measured at
//! `t - cqi_delay_ms` towards the current serving cell; block errors are drawn
//! against the channel actually seen at `t`. Bits are credited in the TTI of
//! the transmission that decodes; the ACK/NACK reaches the eNodeB
//! `harq_ack_delay_ms` later. Data is conserved: every enqueued bit is
//! either credited, still queued, in flight, or dropped after the last
//! HARQ attempt.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::channel::{
    clamp_sinr_db, clamped_pathloss, doppler_hz, noise_dbm, raw_sinr_db, shadow_correlation, FadingProcess,
    ShadowProcess,
};
use crate::config::{ConfigError, GridPoint, ScenarioConfig};
use crate::handover::{CellId, HandoverEvent, MeasurementReport, PolicyParams, PolicyState, NUM_CELLS};
use crate::link::{
    generate_traffic, grants, harq_step, CqiTable, HarqProcess, HarqResult, HarqState, Packet, RoundRobin, UeQueue,
};
use crate::metrics::{MetricsLedger, RunSummary, SweepRow, UeSample};
use crate::mobility::{build_layout, place_users, step, CellLayout, UeKinematics};
use crate::rng::{substream, Substream};
use crate::units::{db_to_linear, dbm_to_mw, kmh_to_mps, linear_to_db};

/// Fading power gains below this are clamped so dB values stay finite.
const MIN_FADING_GAIN: f64 = 1e-12;

/// What to keep beyond the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunOptions {
    /// Per-TTI per-UE metric samples, needed for [`Trace::replay`].
    pub record_samples: bool,
    /// Per-link channel state at every measurement instant.
    pub record_channel: bool,
    /// Every transmission and HARQ feedback.
    pub record_link: bool,
}

impl RunOptions {
    pub fn everything() -> Self {
        Self { record_samples: true, record_channel: true, record_link: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSample {
    pub time_ms: u64,
    pub ue_id: usize,
    pub cell_id: CellId,
    pub pathloss_db: f64,
    pub shadow_db: f64,
    pub fading_db: f64,
    pub rsrp_dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TxRecord {
    pub time_ms: u64,
    pub ue_id: usize,
    pub cell: CellId,
    pub cqi: u8,
    /// When the channel behind `cqi` was measured.
    pub cqi_measured_ms: u64,
    pub num_rbs: u32,
    pub payload_bits: u32,
    /// 1 for a first transmission.
    pub attempt: u32,
    pub decoded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub time_ms: u64,
    pub ue_id: usize,
    /// TTI of the transmission being acknowledged.
    pub tx_ms: u64,
    pub ack: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub handovers: Vec<HandoverEvent>,
    /// One entry per TTI, indexed by UE.
    pub samples: Vec<Vec<UeSample>>,
    pub channel: Vec<ChannelSample>,
    pub transmissions: Vec<TxRecord>,
    pub feedback: Vec<FeedbackRecord>,
}

impl Trace {
    /// Rebuilds the ledger from recorded samples and handover events.
    pub fn replay(&self, num_users: usize, tti_ms: u32) -> MetricsLedger {
        let mut ledger = MetricsLedger::new(num_users, tti_ms);
        for tick in &self.samples {
            ledger.record_tti(tick);
        }
        for _ in &self.handovers {
            ledger.record_handover();
        }
        ledger
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub ledger: MetricsLedger,
    pub trace: Trace,
}

impl RunOutput {
    pub fn summary(&self) -> RunSummary {
        self.ledger.summary()
    }
}

/// Channel state of one (UE, cell) link.
#[derive(Debug, Clone)]
struct Link {
    shadow: ShadowProcess,
    fading: FadingProcess,
    pathloss_db: f64,
    fading_gain: f64,
}

pub struct Simulator {
    cfg: ScenarioConfig,
    table: CqiTable,
    params: PolicyParams,
    opts: RunOptions,
    layout: CellLayout,
    tx_per_rb_dbm: f64,
    noise_mw: f64,
    max_tx: u32,

    ues: Vec<UeKinematics>,
    links: Vec<[Link; NUM_CELLS]>,
    /// Received power per RB in mW, one slot per TTI of CQI delay.
    rx_history: Vec<Vec<[f64; NUM_CELLS]>>,
    serving: Vec<CellId>,
    policies: Vec<PolicyState>,
    queues: Vec<UeQueue>,
    harq: Vec<Vec<HarqProcess>>,
    schedulers: Vec<RoundRobin>,

    shadow_rng: ChaCha8Rng,
    error_rng: ChaCha8Rng,

    dropped_bits: Vec<u64>,

    now_ms: u64,
    ledger: MetricsLedger,
    trace: Trace,
}

impl Simulator {
    pub fn new(
        cfg: &ScenarioConfig,
        table: &CqiTable,
        params: PolicyParams,
        seed: u64,
        opts: RunOptions,
    ) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let cfg = cfg.clone();
        let layout = build_layout(cfg.cell_radius_m);
        let speed = kmh_to_mps(cfg.ue_speed_kmh);
        let ues = place_users(cfg.num_users, cfg.bounding_rect_m, speed, &mut substream(seed, Substream::Placement));

        let mut shadow_rng = substream(seed, Substream::Shadowing);
        let mut fading_rng = substream(seed, Substream::Fading);
        let rho = shadow_correlation(speed, cfg.measurement_interval_ms as f64, cfg.shadow_decorr_m);
        let fd = doppler_hz(speed, cfg.carrier_freq_mhz);
        let tti_s = cfg.tti_ms as f64 / 1000.0;
        let mut links = Vec::with_capacity(ues.len());
        for _ in &ues {
            let ue_links: [Link; NUM_CELLS] = core::array::from_fn(|_| Link {
                shadow: ShadowProcess::new(&mut shadow_rng, cfg.shadow_std_db, rho),
                fading: FadingProcess::new(&mut fading_rng, fd, tti_s),
                pathloss_db: 0.0,
                fading_gain: 1.0,
            });
            links.push(ue_links);
        }

        let tx_per_rb_dbm = cfg.tx_per_rb_dbm();
        let mut sim = Simulator {
            table: table.clone(),
            params,
            opts,
            tx_per_rb_dbm,
            noise_mw: dbm_to_mw(noise_dbm(cfg.rb_bandwidth_hz(), cfg.noise_figure_db)),
            max_tx: cfg.max_transmissions(),
            rx_history: vec![vec![[0.0; NUM_CELLS]; ues.len()]; cfg.cqi_delay_ms as usize / cfg.tti_ms as usize + 1],
            serving: vec![0; ues.len()],
            policies: vec![PolicyState::new(params, cfg.hoa2_window_ms); ues.len()],
            queues: vec![UeQueue::new(); ues.len()],
            harq: vec![Vec::new(); ues.len()],
            schedulers: vec![RoundRobin::new(); NUM_CELLS],
            shadow_rng,
            error_rng: substream(seed, Substream::BlockError),
            dropped_bits: vec![0; ues.len()],
            now_ms: 0,
            ledger: MetricsLedger::new(ues.len(), cfg.tti_ms),
            trace: Trace::default(),
            links,
            ues,
            layout,
            cfg,
        };

        // Initial attachment: strongest cell on pathloss and initial shadowing.
        for ue in 0..sim.ues.len() {
            sim.update_pathloss(ue);
            let links = &sim.links[ue];
            let mut best = 0;
            for c in 1..NUM_CELLS {
                let power = |l: &Link| l.shadow.value_db - l.pathloss_db;
                if power(&links[c]) > power(&links[best]) {
                    best = c;
                }
            }
            sim.serving[ue] = best;
            sim.schedulers[best].join(ue);
        }
        Ok(sim)
    }

    pub fn now_ms(&self) -> u64 {
        self.now_ms
    }

    pub fn serving_cells(&self) -> &[CellId] {
        &self.serving
    }

    pub fn ledger(&self) -> &MetricsLedger {
        &self.ledger
    }

    pub fn params(&self) -> PolicyParams {
        self.params
    }

    fn update_pathloss(&mut self, ue: usize) {
        let pos = self.ues[ue].position;
        for (c, link) in self.links[ue].iter_mut().enumerate() {
            let d = pos.distance(self.layout.centers[c]);
            link.pathloss_db =
                clamped_pathloss(d, self.cfg.carrier_freq_mhz, self.cfg.bs_height_m, self.cfg.ue_height_m);
        }
    }

    fn rsrp_dbm(&self, link: &Link) -> f64 {
        self.tx_per_rb_dbm - link.pathloss_db + link.shadow.value_db + linear_to_db(link.fading_gain)
    }

    fn history_slot(&self, t: u64) -> usize {
        (t / self.cfg.tti_ms as u64) as usize % self.rx_history.len()
    }

    /// Advances the simulation by one TTI.
    pub fn step(&mut self) {
        let t = self.now_ms;
        let tti = self.cfg.tti_ms;
        let report_tick = t.is_multiple_of(self.cfg.measurement_interval_ms as u64);

        // (1) mobility
        if t > 0 {
            for ue in &mut self.ues {
                *ue = step(*ue, tti as f64, self.cfg.bounding_rect_m);
            }
        }

        // (2) channels
        let slot = self.history_slot(t);
        for ue in 0..self.ues.len() {
            self.update_pathloss(ue);
            for c in 0..NUM_CELLS {
                let link = &mut self.links[ue][c];
                if report_tick && t > 0 {
                    link.shadow.redraw(&mut self.shadow_rng);
                }
                link.fading_gain = link.fading.next_gain().max(MIN_FADING_GAIN);
                let rsrp = self.rsrp_dbm(&self.links[ue][c]);
                self.rx_history[slot][ue][c] = dbm_to_mw(rsrp);
            }
        }
        if report_tick && self.opts.record_channel {
            for ue in 0..self.ues.len() {
                for (c, link) in self.links[ue].iter().enumerate() {
                    self.trace.channel.push(ChannelSample {
                        time_ms: t,
                        ue_id: ue,
                        cell_id: c,
                        pathloss_db: link.pathloss_db,
                        shadow_db: link.shadow.value_db,
                        fading_db: linear_to_db(link.fading_gain),
                        rsrp_dbm: self.rsrp_dbm(link),
                    });
                }
            }
        }

        // (3) + (4) measurement reports, decisions, execution
        for ue in 0..self.ues.len() {
            let serving = self.serving[ue];
            let target = if report_tick {
                let report = MeasurementReport {
                    ue_id: ue,
                    time_ms: t,
                    rsrp_dbm: core::array::from_fn(|c| self.rsrp_dbm(&self.links[ue][c])),
                };
                self.policies[ue].on_report(&report, serving, t)
            } else {
                self.policies[ue].on_tti(t)
            };
            if let Some(target) = target.filter(|&c| c != serving) {
                self.execute_handover(ue, target);
            }
        }

        // (5) traffic, scheduling, transmission
        for queue in &mut self.queues {
            generate_traffic(queue, t, self.cfg.traffic_rate_bps, tti);
        }
        let mut credited = vec![0u32; self.ues.len()];
        self.schedule(t, &mut credited);

        // (6) HARQ feedback due now
        self.resolve_feedback(t);

        // (7) metrics
        let samples: Vec<UeSample> = (0..self.ues.len())
            .map(|ue| UeSample {
                cell: self.serving[ue],
                bits: credited[ue],
                hol_delay_ms: self.queues[ue].hol_delay_ms(t) as u32,
            })
            .collect();
        self.ledger.record_tti(&samples);
        if self.opts.record_samples {
            self.trace.samples.push(samples);
        }

        self.now_ms += tti as u64;
    }

    /// Switches `ue` to `target`. HARQ soft buffers are lost: blocks not yet
    /// decoded go back to the head of the queue, which is forwarded to the
    /// target with its timestamps. The UE joins the end of the target's
    /// round-robin cycle.
    fn execute_handover(&mut self, ue: usize, target: CellId) {
        let source = self.serving[ue];
        let mut undelivered: Vec<HarqProcess> = self.harq[ue]
            .drain(..)
            .filter(|p| !matches!(p.state, HarqState::AwaitingFeedback { decoded: true, .. }))
            .collect();
        undelivered.sort_by_key(|p| core::cmp::Reverse(p.data_arrival_ms));
        for p in undelivered {
            self.queues[ue].push_front(Packet { arrival_ms: p.data_arrival_ms, size_bits: p.payload_bits });
        }
        self.schedulers[source].leave(ue);
        self.schedulers[target].join(ue);
        self.serving[ue] = target;
        self.policies[ue].reset();
        self.ledger.record_handover();
        self.trace.handovers.push(HandoverEvent {
            ue_id: ue,
            time_ms: self.now_ms,
            source_cell: source,
            target_cell: target,
            forwarded_bits: self.queues[ue].queued_bits(),
        });
    }

    pub fn queue(&self, ue: usize) -> &UeQueue {
        &self.queues[ue]
    }

    /// Bits in HARQ processes whose latest attempt failed.
    pub fn undecoded_bits(&self, ue: usize) -> u64 {
        self.harq[ue]
            .iter()
            .filter(|p| !matches!(p.state, HarqState::AwaitingFeedback { decoded: true, .. }))
            .map(|p| p.payload_bits as u64)
            .sum()
    }

    /// Bits lost after the last HARQ attempt failed.
    pub fn dropped_bits(&self, ue: usize) -> u64 {
        self.dropped_bits[ue]
    }

    fn sinr_db(&self, t: u64, ue: usize) -> f64 {
        let slot = self.history_slot(t);
        clamp_sinr_db(raw_sinr_db(self.serving[ue], &self.rx_history[slot][ue], self.noise_mw))
    }

    /// CQI available at `t`, with the time its channel was measured.
    fn reported_cqi(&self, t: u64, ue: usize) -> Option<(u8, u64)> {
        let delay = self.cfg.cqi_delay_ms as u64;
        let measured = t.checked_sub(delay)?;
        Some((self.table.cqi_from_sinr(self.sinr_db(measured, ue)), measured))
    }

    fn uniform(&mut self) -> f64 {
        (self.error_rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn schedule(&mut self, t: u64, credited: &mut [u32]) {
        let res = self.cfg.data_res_per_rb;
        let num_rbs = self.cfg.num_rbs;
        let n = self.ues.len();

        let mut cqi = vec![None; n];
        let mut demand = vec![0u32; n];
        for ue in 0..n {
            if let Some(p) = self.harq[ue].iter().find(|p| p.is_schedulable()) {
                demand[ue] = p.num_rbs;
                continue;
            }
            let Some((level, measured)) = self.reported_cqi(t, ue) else { continue };
            cqi[ue] = Some((level, measured));
            let per_rb = self.table.transport_block_bits(level, res, 1) as u64;
            let queued = self.queues[ue].queued_bits();
            if per_rb == 0 || queued == 0 || self.harq[ue].len() >= self.cfg.harq_processes {
                continue;
            }
            demand[ue] = queued.div_ceil(per_rb).min(num_rbs as u64) as u32;
        }

        for cell in 0..NUM_CELLS {
            let allocation = self.schedulers[cell].allocate(num_rbs, |ue| demand[ue]);
            for (ue, rbs) in grants(&allocation) {
                let sinr_lin = db_to_linear(self.sinr_db(t, ue));
                let u = self.uniform();
                let retx = self.harq[ue].iter().position(|p| p.is_schedulable());
                let idx = match retx {
                    Some(i) => i,
                    None => {
                        let (level, _) = cqi[ue].expect("new data is only granted with a CQI");
                        let tbs = self.table.transport_block_bits(level, res, rbs) as u64;
                        let arrival = self.queues[ue].hol_arrival_ms().expect("granted UEs have data");
                        let payload = self.queues[ue].take_bits(tbs) as u32;
                        let mut proc = HarqProcess::new(ue, payload, level, rbs, t);
                        proc.data_arrival_ms = arrival;
                        self.harq[ue].push(proc);
                        self.harq[ue].len() - 1
                    }
                };
                let proc = &mut self.harq[ue][idx];
                let bler = self.table.bler(proc.cqi, proc.combined_after(sinr_lin));
                let decoded = u >= bler;
                proc.transmit(sinr_lin, t, self.cfg.harq_ack_delay_ms as u64, decoded, self.max_tx)
                    .expect("only schedulable processes with attempts left are granted");
                if decoded {
                    credited[ue] += proc.payload_bits;
                }
                if self.opts.record_link {
                    // retransmissions reuse the CQI of their first attempt
                    let cqi_measured_ms = proc.first_tx_ms - self.cfg.cqi_delay_ms as u64;
                    self.trace.transmissions.push(TxRecord {
                        time_ms: t,
                        ue_id: ue,
                        cell,
                        cqi: proc.cqi,
                        cqi_measured_ms,
                        num_rbs: rbs,
                        payload_bits: proc.payload_bits,
                        attempt: proc.transmissions_used,
                        decoded,
                    });
                }
            }
        }
    }

    fn resolve_feedback(&mut self, t: u64) {
        for ue in 0..self.harq.len() {
            let mut i = 0;
            while i < self.harq[ue].len() {
                let proc = self.harq[ue][i];
                if proc.due_ms() != Some(t) {
                    i += 1;
                    continue;
                }
                let feedback = proc.pending_feedback().expect("awaiting feedback");
                let result = harq_step(proc, feedback, t, self.max_tx).expect("feedback arrives exactly when due");
                if self.opts.record_link {
                    self.trace.feedback.push(FeedbackRecord {
                        time_ms: t,
                        ue_id: ue,
                        tx_ms: t - self.cfg.harq_ack_delay_ms as u64,
                        ack: matches!(result, HarqResult::Delivered { .. }),
                    });
                }
                match result {
                    HarqResult::Retransmit(p) => {
                        self.harq[ue][i] = p;
                        i += 1;
                    }
                    HarqResult::Delivered { .. } => {
                        self.harq[ue].remove(i);
                    }
                    HarqResult::Dropped { bits } => {
                        self.dropped_bits[ue] += bits as u64;
                        self.harq[ue].remove(i);
                    }
                }
            }
        }
    }

    /// Runs the remaining TTIs up to `sim_time_ms`.
    pub fn run_to_end(&mut self) {
        while self.now_ms < self.cfg.sim_time_ms as u64 {
            self.step();
        }
    }

    pub fn finish(self) -> RunOutput {
        RunOutput { ledger: self.ledger, trace: self.trace }
    }
}

/// One complete run of `params` under `cfg` with the given seed.
pub fn run(
    cfg: &ScenarioConfig,
    table: &CqiTable,
    params: PolicyParams,
    seed: u64,
    opts: RunOptions,
) -> Result<RunOutput, ConfigError> {
    let mut sim = Simulator::new(cfg, table, params, seed, opts)?;
    sim.run_to_end();
    Ok(sim.finish())
}

/// Runs one grid point for every seed and averages the results.
pub fn run_point(
    cfg: &ScenarioConfig,
    table: &CqiTable,
    point: &GridPoint,
    seeds: &[u64],
) -> Result<SweepRow, ConfigError> {
    let cfg = ScenarioConfig { ue_speed_kmh: point.speed_kmh, ..cfg.clone() };
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        runs.push(run(&cfg, table, point.policy, seed, RunOptions::default())?.summary());
    }
    Ok(SweepRow::from_runs(point, &runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Algorithm;

    fn small(sim_time_ms: u32, speed: f64) -> ScenarioConfig {
        ScenarioConfig { sim_time_ms, ue_speed_kmh: speed, num_users: 20, ..ScenarioConfig::default() }
    }

    fn hoa(alg: Algorithm, hom: f64, secondary: f64) -> PolicyParams {
        PolicyParams::new(alg, hom, secondary).unwrap()
    }

    #[test]
    fn empty_run() {
        let out =
            run(&small(0, 3.0), &CqiTable::standard(), hoa(Algorithm::Hoa1, 2.0, 1.0), 1, RunOptions::everything())
                .unwrap();
        assert_eq!(out.ledger.ticks(), 0);
        let s = out.summary();
        assert_eq!((s.ho_total, s.ho_avg, s.total_throughput_bps, s.total_delay_ms), (0, 0.0, 0.0, 0.0));
        assert!(out.trace.handovers.is_empty());
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = ScenarioConfig { num_cells: 3, ..small(10, 3.0) };
        assert!(run(&cfg, &CqiTable::standard(), hoa(Algorithm::Hoa1, 2.0, 1.0), 1, RunOptions::default()).is_err());
    }

    #[test]
    fn same_seed_same_trace() {
        let cfg = small(600, 120.0);
        let table = CqiTable::standard();
        for alg in Algorithm::ALL {
            let p = hoa(alg, 1.0, if alg.uses_ttt() { 1.0 } else { 0.5 });
            let a = run(&cfg, &table, p, 9, RunOptions::everything()).unwrap();
            let b = run(&cfg, &table, p, 9, RunOptions::everything()).unwrap();
            assert_eq!(a, b);
            let c = run(&cfg, &table, p, 10, RunOptions::everything()).unwrap();
            assert_ne!(a.trace.samples, c.trace.samples);
        }
    }

    #[test]
    fn replay_matches_live_ledger() {
        let cfg = small(800, 30.0);
        let out =
            run(&cfg, &CqiTable::standard(), hoa(Algorithm::Hoa3, 0.0, 1.0), 4, RunOptions::everything()).unwrap();
        assert!(!out.trace.handovers.is_empty());
        let replayed = out.trace.replay(cfg.num_users, cfg.tti_ms);
        assert_eq!(replayed, out.ledger);
        assert_eq!(replayed.summary(), out.summary());
    }

    #[test]
    fn ledger_shape_and_conservation() {
        let cfg = small(500, 3.0);
        let out =
            run(&cfg, &CqiTable::standard(), hoa(Algorithm::Hoa4, 2.0, 2.0), 2, RunOptions::everything()).unwrap();
        assert_eq!(out.ledger.ticks(), 500);
        assert!(out.trace.samples.iter().all(|s| s.len() == cfg.num_users));
        assert_eq!(out.ledger.ho_total(), out.trace.handovers.len() as u64);
        let enqueued = 500 * 1000;
        for &bits in out.ledger.ue_bits() {
            assert!(bits <= enqueued);
        }
        assert!(out.summary().total_throughput_bps > 0.0);
    }

    #[test]
    fn every_bit_is_accounted_for() {
        for (alg, speed) in [(Algorithm::Hoa3, 120.0), (Algorithm::Hoa1, 30.0)] {
            let cfg = small(700, speed);
            let mut sim =
                Simulator::new(&cfg, &CqiTable::standard(), hoa(alg, 0.0, 1.0), 12, RunOptions::default()).unwrap();
            sim.run_to_end();
            assert!(sim.ledger().ho_total() > 0);
            for ue in 0..cfg.num_users {
                let q = &sim.queues[ue];
                let accounted =
                    sim.ledger().ue_bits()[ue] + q.queued_bits() + sim.undecoded_bits(ue) + sim.dropped_bits[ue];
                assert_eq!(accounted, q.enqueued_bits(), "ue {ue}");
            }
        }
    }

    #[test]
    fn causality_of_feedback_loops() {
        let cfg = small(400, 120.0);
        let out =
            run(&cfg, &CqiTable::standard(), hoa(Algorithm::Hoa1, 0.0, 0.0), 3, RunOptions::everything()).unwrap();
        assert!(!out.trace.transmissions.is_empty());
        for tx in &out.trace.transmissions {
            assert!(tx.time_ms >= tx.cqi_measured_ms + 3, "{tx:?}");
            if tx.attempt == 1 {
                assert_eq!(tx.time_ms, tx.cqi_measured_ms + 3);
            }
            assert!((1..=4).contains(&tx.attempt));
        }
        for fb in &out.trace.feedback {
            assert_eq!(fb.time_ms, fb.tx_ms + 4);
            assert!(out.trace.transmissions.iter().any(|tx| tx.ue_id == fb.ue_id && tx.time_ms == fb.tx_ms));
        }
    }

    #[test]
    fn at_most_one_handover_per_report_interval() {
        let cfg = small(2000, 120.0);
        let out = run(&cfg, &CqiTable::standard(), hoa(Algorithm::Hoa3, 0.0, 1.0), 5, RunOptions::default()).unwrap();
        let mut seen = Vec::new();
        for ho in &out.trace.handovers {
            let interval = (ho.ue_id, ho.time_ms / 50);
            assert!(!seen.contains(&interval), "two handovers in one interval: {ho:?}");
            seen.push(interval);
            assert_ne!(ho.source_cell, ho.target_cell);
        }
        // handover chain per UE is consistent
        for ue in 0..cfg.num_users {
            let hos: Vec<_> = out.trace.handovers.iter().filter(|h| h.ue_id == ue).collect();
            for w in hos.windows(2) {
                assert_eq!(w[0].target_cell, w[1].source_cell);
            }
        }
    }

    #[test]
    fn handover_discards_harq_and_forwards_queue() {
        let cfg = small(300, 3.0);
        let mut sim =
            Simulator::new(&cfg, &CqiTable::standard(), hoa(Algorithm::Hoa1, 500.0, 0.0), 6, RunOptions::default())
                .unwrap();
        let ue = loop {
            sim.step();
            if let Some(ue) = (0..cfg.num_users).find(|&u| sim.undecoded_bits(u) > 0) {
                break ue;
            }
        };
        let undecoded = sim.undecoded_bits(ue);
        let queued = sim.queues[ue].queued_bits() + undecoded;
        let head_before = sim.queues[ue].hol_arrival_ms().unwrap_or(u64::MAX);
        let source = sim.serving[ue];
        let target = (source + 1) % NUM_CELLS;
        sim.execute_handover(ue, target);
        assert!(sim.harq[ue].is_empty());
        assert_eq!(sim.queues[ue].queued_bits(), queued);
        let arrivals: Vec<u64> = sim.queues[ue].packets().map(|p| p.arrival_ms).collect();
        assert!(arrivals.windows(2).all(|w| w[0] <= w[1]));
        assert!(arrivals[0] <= head_before);
        assert_eq!(sim.serving[ue], target);
        assert!(!sim.schedulers[source].members().contains(&ue));
        assert_eq!(sim.schedulers[target].members().last(), Some(&ue));
        assert_eq!(sim.trace.handovers.last().unwrap().forwarded_bits, queued);
        sim.run_to_end();
        assert_eq!(sim.ledger().ho_total(), 1);
    }

    #[test]
    fn initial_attachment_is_strongest_without_fading() {
        let cfg = small(0, 3.0);
        let sim = Simulator::new(&cfg, &CqiTable::standard(), hoa(Algorithm::Hoa1, 2.0, 1.0), 8, RunOptions::default())
            .unwrap();
        for ue in 0..cfg.num_users {
            let s = sim.serving[ue];
            let power = |c: usize| sim.links[ue][c].shadow.value_db - sim.links[ue][c].pathloss_db;
            assert!((0..NUM_CELLS).all(|c| power(c) <= power(s)));
            assert!(sim.schedulers[s].members().contains(&ue));
        }
    }
}
