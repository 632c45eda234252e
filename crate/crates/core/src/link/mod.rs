//! MAC/PHY abstraction: link adaptation, HARQ, scheduling and traffic.

mod cqi;
mod harq;
mod scheduler;
mod traffic;

pub use cqi::{bler_model, transport_block_bits, CqiLevel, CqiTable, TableError, NUM_CQI_LEVELS, STANDARD_TABLE_CSV};
pub use harq::{chase_combine_db, harq_step, Feedback, HarqError, HarqProcess, HarqResult, HarqState};
pub use scheduler::{grants, RoundRobin};
pub use traffic::{generate_traffic, Packet, UeQueue};
