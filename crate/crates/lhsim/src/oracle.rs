//! Desk oracles: closed-form and brute-force re-derivations of values the
//! simulator computes, checked against the simulator's own functions.
//!
//! The expected values here are written out by hand or recomputed with
//! `std` float math and explicit sums, never by calling the code under test.

use lhsim_core::channel::{cost231_pathloss, noise_dbm, raw_sinr_db, rsrp, RadioLink};
use lhsim_core::handover::{Integrator, MeasurementReport, RssTttWindow};
use lhsim_core::metrics::{avg_handovers, optimize_ratio};
use lhsim_core::mobility::{build_layout, Point};
use lhsim_core::rng::{substream, Substream};
use lhsim_core::NUM_CELLS;
use rand_core::RngCore;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleCheck {
    fn new(name: impl Into<String>, expected: f64, actual: f64, tolerance: f64) -> Self {
        let pass = (actual - expected).abs() <= tolerance;
        Self { name: name.into(), expected, actual, tolerance, pass }
    }

    fn exact(name: impl Into<String>, expected: f64, actual: f64) -> Self {
        Self::new(name, expected, actual, 0.0)
    }
}

impl std::fmt::Display for OracleCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {} (expected {} +/- {:e})", self.name, self.actual, self.expected, self.tolerance)
    }
}

/// Hand evaluation at f = 2000 MHz, hb = 30 m, hm = 1.5 m:
/// a(hm) = (1.1*3.30103 - 0.7)*1.5 - (1.56*3.30103 - 0.8) = 0.04709,
/// PL(1 km) = 46.3 + 111.90492 - 20.41382 - 0.04709 = 137.74401,
/// slope 44.9 - 6.55*1.47712 = 35.22486 dB per decade.
const PL_1KM_DB: f64 = 137.74401;
const PL_100M_DB: f64 = 137.74401 - 35.22486;

fn uniform(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    lo + (hi - lo) * u
}

fn random_reports(seed: u64, steps: usize) -> Vec<MeasurementReport> {
    let mut rng = substream(seed, Substream::Placement);
    (0..steps)
        .map(|k| MeasurementReport {
            ue_id: 0,
            time_ms: 50 * k as u64,
            rsrp_dbm: std::array::from_fn(|_| uniform(&mut rng, -120.0, -60.0)),
        })
        .collect()
}

/// RSS_F after k steps written out as an explicit weighted sum.
fn rss_filter_brute_force(xs: &[f64], beta: f64) -> f64 {
    let k = xs.len() - 1;
    let mut acc = (1.0 - beta).powi(k as i32) * xs[0];
    for (i, &x) in xs.iter().enumerate().skip(1) {
        acc += beta * (1.0 - beta).powi((k - i) as i32) * x;
    }
    acc
}

/// FDIF after k steps from a zero start, as an explicit weighted sum.
fn fdif_brute_force(difs: &[f64], alpha: f64) -> f64 {
    let k = difs.len();
    difs.iter().enumerate().map(|(i, &d)| alpha * (1.0 - alpha).powi((k - 1 - i) as i32) * d).sum()
}

pub fn run_oracles() -> Vec<OracleCheck> {
    let mut checks = Vec::new();

    // Pathloss
    let pl = |d| cost231_pathloss(d, 2000.0, 30.0, 1.5).expect("positive distance");
    checks.push(OracleCheck::new("cost231 100 m, 2000 MHz, 30 m, 1.5 m [dB]", PL_100M_DB, pl(100.0), 0.1));
    checks.push(OracleCheck::new("cost231 1 km [dB]", PL_1KM_DB, pl(1000.0), 1e-3));
    checks.push(OracleCheck::new("cost231 slope per decade [dB]", 35.22486, pl(1000.0) - pl(100.0), 1e-4));

    // Link budget
    let link = RadioLink { pathloss_db: 102.5, shadow_db: 0.0, fading_gain_db: 0.0, rsrp_dbm: 0.0 };
    checks.push(OracleCheck::new("rsrp tx 29.03 dBm, PL 102.5 dB [dBm]", -73.47, rsrp(29.03, &link), 1e-9));
    let noise = noise_dbm(180_000.0, 9.0);
    checks.push(OracleCheck::new("noise per RB [dBm]", -174.0 + 10.0 * 180_000f64.log10() + 9.0, noise, 1e-9));
    let to_mw = |dbm: f64| 10f64.powf(dbm / 10.0);
    let mut rx = [0.0; NUM_CELLS];
    rx[0] = to_mw(-73.47);
    checks.push(OracleCheck::new(
        "interference-free SINR [dB]",
        -73.47 - noise,
        raw_sinr_db(0, &rx, to_mw(noise)),
        1e-9,
    ));

    // Filters on random 20-step traces
    for (trace_seed, factor) in [(1, 0.25), (2, 0.5), (3, 0.75), (4, 1.0)] {
        let reports = random_reports(trace_seed, 20);
        let mut hoa2 = RssTttWindow::new(f64::INFINITY, factor, 100);
        let mut hoa3 = Integrator::new(f64::INFINITY, factor);
        let (mut worst2, mut worst3) = (0.0f64, 0.0f64);
        for k in 0..reports.len() {
            hoa2.decide(&reports[k], 0, reports[k].time_ms);
            hoa3.decide(&reports[k], 0);
            for c in 0..NUM_CELLS {
                let xs: Vec<f64> = reports[..=k].iter().map(|r| r.rsrp_dbm[c]).collect();
                let expected = rss_filter_brute_force(&xs, factor);
                worst2 = worst2.max((hoa2.filtered(c).expect("filter seeded") - expected).abs() / expected.abs());
                if c != 0 {
                    let difs: Vec<f64> = reports[..=k].iter().map(|r| r.rsrp_dbm[c] - r.rsrp_dbm[0]).collect();
                    let expected = fdif_brute_force(&difs, factor);
                    worst3 = worst3.max((hoa3.fdif(c) - expected).abs() / expected.abs().max(1.0));
                }
            }
        }
        checks.push(OracleCheck::new(format!("HOA2 filter, beta {factor}, max rel. error"), 0.0, worst2, 1e-12));
        checks.push(OracleCheck::new(format!("HOA3 filter, alpha {factor}, max rel. error"), 0.0, worst3, 1e-12));
    }

    // Handover rate and optimize ratio
    checks.push(OracleCheck::exact("ANOH 150 HOs, 100 UEs, 10 s", 0.15, avg_handovers(150, 100, 10.0)));
    checks.push(OracleCheck::exact("ANOH 0 HOs", 0.0, avg_handovers(0, 100, 10.0)));
    checks.push(OracleCheck::exact("OptimizeRatio ST 5e7, ANOH 2", 2.5e7, optimize_ratio(5.0e7, 2.0)));
    checks.push(OracleCheck::exact("OptimizeRatio ST 5e7, ANOH 0 -> 0.5", 1.0e8, optimize_ratio(5.0e7, 0.0)));

    // Hexagonal layout
    let layout = build_layout(100.0);
    let isd = 3f64.sqrt() * 100.0;
    let mut worst = 0.0f64;
    for k in 1..NUM_CELLS {
        let c = layout.centers[k];
        worst = worst.max((c.distance(Point::ORIGIN) - isd).abs());
        let next = layout.centers[if k == NUM_CELLS - 1 { 1 } else { k + 1 }];
        worst = worst.max((((c.x - next.x).powi(2) + (c.y - next.y).powi(2)).sqrt() - isd).abs());
    }
    checks.push(OracleCheck::new("hex layout distance error [m]", 0.0, worst, 1e-9));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_oracles_pass() {
        let checks = run_oracles();
        assert!(checks.len() >= 15);
        for c in &checks {
            assert!(c.pass, "{c}");
        }
    }

    #[test]
    fn brute_force_helpers() {
        assert_eq!(rss_filter_brute_force(&[4.0], 0.5), 4.0);
        assert_eq!(rss_filter_brute_force(&[4.0, 8.0], 0.5), 6.0);
        assert_eq!(fdif_brute_force(&[2.0], 0.25), 0.5);
        assert_eq!(fdif_brute_force(&[2.0, 2.0], 1.0), 2.0);
    }
}
