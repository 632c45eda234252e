//! `metadata.json`: what produced a set of outputs.

use std::collections::BTreeMap;

use lhsim_core::ScenarioConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Hash of the canonical key/value form of the scenario.
    pub config_sha256: String,
    pub cqi_table_sha256: String,
    pub seeds: Vec<u64>,
    pub scenario: ScenarioConfig,
    pub modelling_choices: BTreeMap<&'static str, String>,
}

impl Metadata {
    pub fn new(command: &str, cfg: &ScenarioConfig, cqi_text: &str, seeds: &[u64]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            config_sha256: sha256_hex(cfg.to_kv_string().as_bytes()),
            cqi_table_sha256: sha256_hex(cqi_text.as_bytes()),
            seeds: seeds.to_vec(),
            scenario: cfg.clone(),
            modelling_choices: modelling_choices(cfg),
        }
    }
}

/// Every modelling assumption the simulator makes where the source model
/// leaves room for interpretation.
pub fn modelling_choices(cfg: &ScenarioConfig) -> BTreeMap<&'static str, String> {
    let mut m = BTreeMap::new();
    let mut put = |k, v: String| {
        m.insert(k, v);
    };
    put("antenna_heights_m", format!("bs {} / ue {}", cfg.bs_height_m, cfg.ue_height_m));
    put("pathloss", "Cost-231 Hata urban, medium city, applied at all distances, 1 m clamp".into());
    put(
        "shadowing",
        format!(
            "per link, redrawn every {} ms, AR(1) rho = 0.5^(v*dt/{} m), std {} dB",
            cfg.measurement_interval_ms, cfg.shadow_decorr_m, cfg.shadow_std_db
        ),
    );
    put("fading", "flat Rayleigh, quadrature sum of 2x32 sinusoids, Doppler v*fc/c".into());
    put("noise", format!("-174 dBm/Hz over one RB plus {} dB noise figure", cfg.noise_figure_db));
    put("sinr_clamp_db", "[-30, 40]".into());
    put("interference", "all 7 cells transmit on every RB (full load)".into());
    put("rsrp_for_handover", "linear mean over RBs of per-RB power incl. fading (flat, so equal to one RB)".into());
    put("cqi_bler", "logistic BLER per CQI, thresholds at 10% BLER frozen in the table file".into());
    put("transport_block", format!("floor(efficiency * {} REs * RBs)", cfg.data_res_per_rb));
    put("packet_size_bits", "rate * TTI (1000 bits at 1 Mbps)".into());
    put(
        "harq",
        format!(
            "chase combining, {} processes per UE, at most {} transmissions",
            cfg.harq_processes,
            cfg.max_transmissions()
        ),
    );
    put("throughput_credit", "TTI of the transmission that decodes".into());
    put("scheduler", "round robin, one RB per UE per pass, pointer kept per cell, handover joins at the end".into());
    put("hoa2_filter", "recursive on the previous filtered value, seeded with the first sample".into());
    put("hoa2_beta", "free parameter from the grid".into());
    put("hoa2_window", format!("condition at both ends of a {} ms span (elapsed >= window)", cfg.hoa2_window_ms));
    put("ttt_units", "milliseconds, timer advances every TTI while the last report satisfies the condition".into());
    put(
        "hoa4_average",
        "dB-domain mean of serving RSRP samples since the last handover, including the current one".into(),
    );
    put("candidate_order", "highest RSRP, then lowest cell id".into());
    put(
        "handover_execution",
        "instantaneous; queue forwarded with timestamps; undecoded HARQ blocks re-queued; soft buffers lost".into(),
    );
    put("hol_delay_empty_queue", "0".into());
    put("cell_delay", "mean over all (TTI, UE) samples attributed to the cell".into());
    put("initial_cell", "strongest pathloss + shadowing at t = 0, no fading".into());
    put("warm_up", "none".into());
    put("anoh_zero_substitute", "0.5".into());
    put("optimum_tie_break", "smaller HOM, then smaller TTT/factor".into());
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashes_are_stable_and_sensitive() {
        let cfg = ScenarioConfig::default();
        let a = Metadata::new("run", &cfg, "x", &[1]);
        let b = Metadata::new("run", &cfg, "x", &[1]);
        assert_eq!(a.config_sha256, b.config_sha256);
        assert_eq!(a.config_sha256.len(), 64);
        let other = ScenarioConfig { num_users: 99, ..cfg };
        assert_ne!(Metadata::new("run", &other, "x", &[1]).config_sha256, a.config_sha256);
        assert_ne!(Metadata::new("run", &other, "y", &[1]).cqi_table_sha256, a.cqi_table_sha256);
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
