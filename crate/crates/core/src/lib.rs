//! Deterministic system-level simulation of downlink LTE hard handover.
//!
//! The crate is `no_std` (with `alloc`) so the whole simulation can be
//! embedded anywhere; file IO, the CLI and concurrency live in the `lhsim`
//! companion crate. All floating point math goes through `libm`, which keeps
//! traces bit-identical across platforms for a given seed.
//!
//! Module map:
//!
//! - [`config`]: scenario parameters, sweep grid and their key/value text format.
//! - [`mobility`]: the 7-cell hexagonal layout and reflecting constant-velocity motion.
//! - [`channel`]: Cost-231 Hata pathloss, correlated shadowing, Rayleigh fading, RSRP and SINR.
//! - [`link`]: CQI/BLER mapping, HARQ, round-robin scheduling and traffic queues.
//! - [`handover`]: measurement reports and the four handover decision policies.
//! - [`metrics`]: handover rate, throughput, HOL delay and the optimize ratio.
//! - [`engine`]: the per-TTI loop tying everything together.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channel;
pub mod config;
pub mod engine;
pub mod handover;
pub mod link;
pub mod metrics;
pub mod mobility;
pub mod rng;
pub mod units;

pub use config::{Algorithm, ConfigError, GridPoint, ScenarioConfig, SweepGrid};
pub use engine::{run, run_point, RunOptions, RunOutput, Simulator, Trace};
pub use handover::{CellId, HandoverEvent, PolicyParams, NUM_CELLS};
pub use link::CqiTable;
pub use metrics::{select_optimum, MetricsLedger, SweepRow};
