//! Radio channel: pathloss, shadowing, fast fading, RSRP and SINR.
//!
//! Received power on every RB is `tx_per_rb - pathloss + shadow + fading`,
//! all in dB. Fading is flat across the band, so the per-RB values of one
//! link are identical within a TTI and the wideband RSRP used for handover
//! equals any single RB's power.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{dbm_to_mw, linear_to_db, mw_to_dbm};

pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;
pub const SPEED_OF_LIGHT_MPS: f64 = 3.0e8;
/// Reported SINR is clamped to this range so CQI mapping stays total.
pub const SINR_FLOOR_DB: f64 = -30.0;
pub const SINR_CEIL_DB: f64 = 40.0;
/// Distances below this are clamped before evaluating the pathloss law.
pub const MIN_DISTANCE_M: f64 = 1.0;
/// Sinusoids per quadrature component of a fading process.
pub const FADING_SINUSOIDS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ChannelError {
    #[error("pathloss distance must be > 0, got {0} m")]
    NonPositiveDistance(f64),
}

/// Cost-231 Hata urban pathloss in dB (medium city, no metropolitan
/// correction).
pub fn cost231_pathloss(d_m: f64, f_mhz: f64, hb_m: f64, hm_m: f64) -> Result<f64, ChannelError> {
    if !(d_m > 0.0) {
        return Err(ChannelError::NonPositiveDistance(d_m));
    }
    let log_f = libm::log10(f_mhz);
    let log_hb = libm::log10(hb_m);
    let a_hm = (1.1 * log_f - 0.7) * hm_m - (1.56 * log_f - 0.8);
    let d_km = d_m / 1000.0;
    Ok(46.3 + 33.9 * log_f - 13.82 * log_hb - a_hm + (44.9 - 6.55 * log_hb) * libm::log10(d_km))
}

/// Pathloss with the minimum-distance clamp applied.
pub fn clamped_pathloss(d_m: f64, f_mhz: f64, hb_m: f64, hm_m: f64) -> f64 {
    cost231_pathloss(d_m.max(MIN_DISTANCE_M), f_mhz, hb_m, hm_m).expect("clamped distance is positive")
}

/// One zero-mean Gaussian draw in dB.
pub fn sample_shadowing<R: RngCore>(rng: &mut R, std_db: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    std_db * z
}

/// Exponential autocorrelation between two shadowing draws `interval_ms`
/// apart for a user moving at `speed_mps`.
pub fn shadow_correlation(speed_mps: f64, interval_ms: f64, decorr_m: f64) -> f64 {
    if decorr_m <= 0.0 {
        return 0.0;
    }
    libm::pow(0.5, speed_mps * interval_ms / 1000.0 / decorr_m)
}

/// First-order autoregressive shadowing: redrawn once per measurement
/// interval and held in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowProcess {
    pub value_db: f64,
    std_db: f64,
    rho: f64,
}

impl ShadowProcess {
    pub fn new<R: RngCore>(rng: &mut R, std_db: f64, rho: f64) -> Self {
        Self { value_db: sample_shadowing(rng, std_db), std_db, rho }
    }

    pub fn redraw<R: RngCore>(&mut self, rng: &mut R) {
        let innovation = sample_shadowing(rng, self.std_db);
        self.value_db = self.rho * self.value_db + libm::sqrt(1.0 - self.rho * self.rho) * innovation;
    }
}

pub fn doppler_hz(speed_mps: f64, carrier_mhz: f64) -> f64 {
    speed_mps * carrier_mhz * 1e6 / SPEED_OF_LIGHT_MPS
}

/// Flat Rayleigh fading as a sum of sinusoids.
///
/// In-phase and quadrature parts are each a sum of `M` cosines,
/// `M^-1/2 * sum_n cos(2 pi f_d cos(a_n) t + phi_n)` and the same with
/// `sin(a_n)` and independent phases `psi_n`, where
/// `a_n = (2 pi n - pi + theta) / (4M)`. Keeping the angles inside one
/// quadrant makes every Doppler frequency distinct, so a single realization
/// is ergodic: its time statistics converge to unit mean power with an
/// (almost) exponential distribution. Each cosine is the real part of a
/// phasor advanced by a fixed rotation per TTI, so no trigonometry is
/// evaluated in the hot loop.
#[derive(Debug, Clone)]
pub struct FadingProcess {
    /// In-phase phasors, then quadrature phasors.
    state: [(f64, f64); 2 * FADING_SINUSOIDS],
    rotation: [(f64, f64); 2 * FADING_SINUSOIDS],
}

impl FadingProcess {
    pub fn new<R: RngCore>(rng: &mut R, doppler_hz: f64, tti_s: f64) -> Self {
        let angle = Uniform::new(-PI, PI).expect("valid range");
        let phase = Uniform::new(0.0, TAU).expect("valid range");
        let theta = angle.sample(rng);
        let m = FADING_SINUSOIDS as f64;
        let mut state = [(0.0, 0.0); 2 * FADING_SINUSOIDS];
        let mut rotation = [(0.0, 0.0); 2 * FADING_SINUSOIDS];
        for n in 0..FADING_SINUSOIDS {
            let alpha = (TAU * (n + 1) as f64 - PI + theta) / (4.0 * m);
            let (sin_a, cos_a) = libm::sincos(alpha);
            for (k, dir) in [(n, cos_a), (FADING_SINUSOIDS + n, sin_a)] {
                let (s, c) = libm::sincos(phase.sample(rng));
                state[k] = (c, s);
                let (ws, wc) = libm::sincos(TAU * doppler_hz * dir * tti_s);
                rotation[k] = (wc, ws);
            }
        }
        Self { state, rotation }
    }

    /// Linear power gain at the current instant.
    pub fn gain(&self) -> f64 {
        let (in_phase, quadrature) = self.state.split_at(FADING_SINUSOIDS);
        let i: f64 = in_phase.iter().map(|p| p.0).sum();
        let q: f64 = quadrature.iter().map(|p| p.0).sum();
        (i * i + q * q) / FADING_SINUSOIDS as f64
    }

    /// Moves the process forward by one TTI.
    pub fn advance(&mut self) {
        for (s, r) in self.state.iter_mut().zip(self.rotation.iter()) {
            *s = (s.0 * r.0 - s.1 * r.1, s.0 * r.1 + s.1 * r.0);
        }
    }

    /// Returns the current gain and advances by one TTI.
    pub fn next_gain(&mut self) -> f64 {
        let g = self.gain();
        self.advance();
        g
    }
}

/// State of one (UE, cell) link for the current TTI.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RadioLink {
    pub pathloss_db: f64,
    pub shadow_db: f64,
    /// Flat across RBs.
    pub fading_gain_db: f64,
    pub rsrp_dbm: f64,
}

/// Per-RB received power of `link`.
pub fn rsrp(tx_per_rb_dbm: f64, link: &RadioLink) -> f64 {
    tx_per_rb_dbm - link.pathloss_db + link.shadow_db + link.fading_gain_db
}

/// Thermal noise over one RB plus the UE noise figure.
pub fn noise_dbm(rb_bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + linear_to_db(rb_bandwidth_hz) + noise_figure_db
}

/// Unclamped SINR in dB; every cell other than `serving` interferes at full
/// load.
pub fn raw_sinr_db(serving: usize, rx_mw: &[f64], noise_mw: f64) -> f64 {
    let interference: f64 = rx_mw.iter().enumerate().filter(|&(c, _)| c != serving).map(|(_, p)| p).sum();
    linear_to_db(rx_mw[serving] / (interference + noise_mw))
}

pub fn clamp_sinr_db(sinr_db: f64) -> f64 {
    if sinr_db.is_nan() {
        return SINR_FLOOR_DB;
    }
    sinr_db.clamp(SINR_FLOOR_DB, SINR_CEIL_DB)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrReport {
    pub sinr_db: Vec<f64>,
    pub timestamp_ms: u64,
}

/// Per-RB SINR towards `serving` given each cell's per-RB received power.
pub fn sinr_per_rb(serving: usize, rx_dbm: &[f64], noise_dbm: f64, num_rbs: usize, timestamp_ms: u64) -> SinrReport {
    let rx_mw: Vec<f64> = rx_dbm.iter().map(|&p| dbm_to_mw(p)).collect();
    let sinr = clamp_sinr_db(raw_sinr_db(serving, &rx_mw, dbm_to_mw(noise_dbm)));
    SinrReport { sinr_db: vec![sinr; num_rbs], timestamp_ms }
}

/// Wideband RSRP as the linear mean of per-RB powers.
pub fn wideband_rsrp_dbm(per_rb_dbm: &[f64]) -> f64 {
    let mean = per_rb_dbm.iter().map(|&p| dbm_to_mw(p)).sum::<f64>() / per_rb_dbm.len() as f64;
    mw_to_dbm(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Substream};
    use crate::units::db_to_linear;
    use proptest::prelude::*;

    // Hand evaluation of the closed form at f = 2000 MHz, hb = 30 m, hm = 1.5 m:
    //   a(hm) = (1.1*3.30103 - 0.7)*1.5 - (1.56*3.30103 - 0.8) = 0.04709
    //   PL(1 km) = 46.3 + 111.90492 - 20.41382 - 0.04709 = 137.74401
    //   slope = 44.9 - 6.55*1.47712 = 35.22486 dB/decade
    const PL_1KM: f64 = 137.744_01;
    const SLOPE: f64 = 35.224_86;

    #[test]
    fn cost231_reference_points() {
        let pl100 = cost231_pathloss(100.0, 2000.0, 30.0, 1.5).unwrap();
        let pl1000 = cost231_pathloss(1000.0, 2000.0, 30.0, 1.5).unwrap();
        assert!((pl100 - (PL_1KM - SLOPE)).abs() < 1e-3, "{pl100}");
        assert!((pl100 - 102.5).abs() < 0.1);
        assert!((pl1000 - PL_1KM).abs() < 1e-3, "{pl1000}");
        assert!((pl1000 - pl100 - SLOPE).abs() < 1e-3);
    }

    #[test]
    fn cost231_base_height_sensitivity() {
        // d PL / d log10(hb) = -13.82 - 6.55 log10(d_km): negative for d < 130 km
        let oracle_sign = |d_km: f64| -13.82 - 6.55 * libm::log10(d_km);
        for d in [50.0, 100.0, 1000.0, 5000.0] {
            let lo = cost231_pathloss(d, 2000.0, 30.0, 1.5).unwrap();
            let hi = cost231_pathloss(d, 2000.0, 60.0, 1.5).unwrap();
            assert_eq!((hi - lo).signum(), oracle_sign(d / 1000.0).signum());
        }
    }

    #[test]
    fn cost231_rejects_non_positive_distance() {
        assert_eq!(cost231_pathloss(0.0, 2000.0, 30.0, 1.5), Err(ChannelError::NonPositiveDistance(0.0)));
        assert!(cost231_pathloss(-5.0, 2000.0, 30.0, 1.5).is_err());
        assert_eq!(clamped_pathloss(0.0, 2000.0, 30.0, 1.5), clamped_pathloss(1.0, 2000.0, 30.0, 1.5));
    }

    #[test]
    fn shadowing_statistics() {
        let mut rng = substream(3, Substream::Shadowing);
        assert!((0..100).all(|_| sample_shadowing(&mut rng, 0.0) == 0.0));
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_shadowing(&mut rng, 8.0);
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let std = libm::sqrt(s2 / n as f64 - mean * mean);
        assert!((std - 8.0).abs() < 0.05, "std {std}");
        assert!(mean.abs() < 0.03, "mean {mean}");

        let a = sample_shadowing(&mut substream(9, Substream::Shadowing), 8.0);
        let b = sample_shadowing(&mut substream(9, Substream::Shadowing), 8.0);
        assert_eq!(a, b);
    }

    #[test]
    fn correlated_shadowing_keeps_variance() {
        let rho = shadow_correlation(33.333, 50.0, 20.0);
        assert!((rho - libm::pow(0.5, 1.666_65 / 20.0)).abs() < 1e-6);
        assert_eq!(shadow_correlation(10.0, 50.0, 0.0), 0.0);
        let mut rng = substream(4, Substream::Shadowing);
        let n = 200_000;
        let mut s2 = 0.0;
        for _ in 0..n / 1000 {
            let mut p = ShadowProcess::new(&mut rng, 8.0, 0.9);
            for _ in 0..1000 {
                p.redraw(&mut rng);
                s2 += p.value_db * p.value_db;
            }
        }
        let std = libm::sqrt(s2 / n as f64);
        assert!((std - 8.0).abs() < 0.15, "std {std}");
    }

    #[test]
    fn doppler_at_120_kmh() {
        let fd = doppler_hz(120.0 / 3.6, 2000.0);
        assert!((fd - 222.222).abs() < 0.01, "{fd}");
    }

    #[test]
    fn fading_long_run_statistics() {
        // Exponential(1) power: mean 1, P(g < 1) = 1 - 1/e.
        let mut rng = substream(17, Substream::Fading);
        let mut process = FadingProcess::new(&mut rng, doppler_hz(120.0 / 3.6, 2000.0), 1e-3);
        let n = 1_000_000;
        let (mut sum, mut below) = (0.0, 0usize);
        for _ in 0..n {
            let g = process.next_gain();
            sum += g;
            below += (g < 1.0) as usize;
        }
        let mean = sum / n as f64;
        let cdf = below as f64 / n as f64;
        assert!((mean - 1.0).abs() < 0.005, "mean {mean}");
        assert!((cdf - (1.0 - libm::exp(-1.0))).abs() < 0.005, "cdf {cdf}");
    }

    #[test]
    fn fading_ensemble_statistics_at_low_speed() {
        let mut rng = substream(18, Substream::Fading);
        let fd = doppler_hz(3.0 / 3.6, 2000.0);
        let (mut sum, mut below, mut n) = (0.0, 0usize, 0usize);
        for _ in 0..2000 {
            let mut p = FadingProcess::new(&mut rng, fd, 1e-3);
            for _ in 0..500 {
                let g = p.next_gain();
                sum += g;
                below += (g < 1.0) as usize;
                n += 1;
            }
        }
        assert!((sum / n as f64 - 1.0).abs() < 0.02);
        assert!((below as f64 / n as f64 - 0.632).abs() < 0.01);
    }

    #[test]
    fn static_fading_without_motion() {
        let mut p = FadingProcess::new(&mut substream(1, Substream::Fading), 0.0, 1e-3);
        let g0 = p.next_gain();
        assert!((0..100).all(|_| (p.next_gain() - g0).abs() < 1e-12));
    }

    #[test]
    fn rsrp_arithmetic() {
        let link = RadioLink { pathloss_db: 102.5, shadow_db: 0.0, fading_gain_db: 0.0, rsrp_dbm: 0.0 };
        assert!((rsrp(29.03, &link) - -73.47).abs() < 1e-9);
        let faded = RadioLink { fading_gain_db: 3.0, ..link };
        assert!((rsrp(29.03, &faded) - -70.47).abs() < 1e-9);
        assert_eq!(rsrp(29.03, &link), rsrp(29.03, &link));
    }

    #[test]
    fn sinr_cases() {
        let noise = noise_dbm(180_000.0, 9.0);
        assert!((noise - -112.447_274_948_966_94).abs() < 1e-9);

        // no interference: -73.47 - (-112.447) = 38.977 dB
        let rx = [-73.47, -400.0, -400.0, -400.0, -400.0, -400.0, -400.0];
        let r = sinr_per_rb(0, &rx, noise, 25, 0);
        assert_eq!(r.sinr_db.len(), 25);
        assert!((r.sinr_db[0] - 38.977_274_948_966_94).abs() < 1e-6);

        // one interferer at the serving level dominates the noise
        let rx = [-60.0, -60.0, -400.0, -400.0, -400.0, -400.0, -400.0];
        assert!(sinr_per_rb(0, &rx, noise, 1, 0).sinr_db[0].abs() < 1e-3);

        // serving power vanishing hits the floor
        let rx = [f64::NEG_INFINITY, -80.0, -400.0, -400.0, -400.0, -400.0, -400.0];
        assert_eq!(sinr_per_rb(0, &rx, noise, 1, 0).sinr_db[0], SINR_FLOOR_DB);
    }

    #[test]
    fn wideband_rsrp_is_linear_mean() {
        let got = wideband_rsrp_dbm(&[-70.0, -80.0]);
        let expected = linear_to_db((db_to_linear(-70.0) + db_to_linear(-80.0)) / 2.0);
        assert!((got - expected).abs() < 1e-12);
        assert_eq!(wideband_rsrp_dbm(&[-75.0; 25]), -75.0);
    }

    proptest! {
        #[test]
        fn rsrp_monotone_in_distance(d1 in 1.0f64..5000.0, d2 in 1.0f64..5000.0) {
            let link = |d: f64| RadioLink { pathloss_db: clamped_pathloss(d, 2000.0, 30.0, 1.5), ..RadioLink::default() };
            let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(rsrp(29.03, &link(near)) >= rsrp(29.03, &link(far)));
        }

        #[test]
        fn sinr_bounded_by_snr(rx in proptest::array::uniform7(-140.0f64..-40.0), serving in 0usize..7) {
            let noise = noise_dbm(180_000.0, 9.0);
            let sinr = sinr_per_rb(serving, &rx, noise, 3, 0).sinr_db[0];
            let snr = clamp_sinr_db(rx[serving] - noise);
            prop_assert!(sinr <= snr + 1e-12);
            prop_assert!(sinr.is_finite());
        }
    }
}
