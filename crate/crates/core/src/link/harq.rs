use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{db_to_linear, linear_to_db};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feedback {
    Ack,
    Nack,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HarqState {
    /// Transmitted; feedback lands at `due_ms`. `decoded` is the receiver's
    /// outcome, fixed at transmission time.
    AwaitingFeedback { due_ms: u64, decoded: bool },
    /// NACKed and waiting for the scheduler to grant a retransmission.
    Schedulable,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum HarqError {
    #[error("feedback for a process that is not awaiting feedback")]
    NotAwaitingFeedback,
    #[error("feedback at {now_ms} ms but process expects it at {due_ms} ms")]
    WrongTime { now_ms: u64, due_ms: u64 },
    #[error("process already used all {0} transmissions")]
    Exhausted(u32),
}

/// One stop-and-wait HARQ process carrying a single transport block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarqProcess {
    pub ue_id: usize,
    pub payload_bits: u32,
    /// MCS chosen for the first transmission, reused for retransmissions.
    pub cqi: u8,
    pub num_rbs: u32,
    pub transmissions_used: u32,
    /// Sum of linear SINRs of all attempts (chase combining).
    pub combined_sinr_linear: f64,
    pub first_tx_ms: u64,
    /// Arrival time of the oldest queued bit carried by the block.
    pub data_arrival_ms: u64,
    pub state: HarqState,
}

impl HarqProcess {
    pub fn new(ue_id: usize, payload_bits: u32, cqi: u8, num_rbs: u32, now_ms: u64) -> Self {
        Self {
            ue_id,
            payload_bits,
            cqi,
            num_rbs,
            transmissions_used: 0,
            combined_sinr_linear: 0.0,
            first_tx_ms: now_ms,
            data_arrival_ms: now_ms,
            state: HarqState::Schedulable,
        }
    }

    pub fn is_schedulable(&self) -> bool {
        matches!(self.state, HarqState::Schedulable)
    }

    pub fn due_ms(&self) -> Option<u64> {
        match self.state {
            HarqState::AwaitingFeedback { due_ms, .. } => Some(due_ms),
            HarqState::Schedulable => None,
        }
    }

    /// Soft-combined SINR in dB after adding an attempt at `sinr_linear`.
    pub fn combined_after(&self, sinr_linear: f64) -> f64 {
        linear_to_db(self.combined_sinr_linear + sinr_linear)
    }

    /// Records one (re)transmission. `decoded` is the block-error outcome
    /// drawn by the caller against the combined SINR.
    pub fn transmit(
        &mut self,
        sinr_linear: f64,
        now_ms: u64,
        ack_delay_ms: u64,
        decoded: bool,
        max_transmissions: u32,
    ) -> Result<(), HarqError> {
        if !self.is_schedulable() {
            return Err(HarqError::NotAwaitingFeedback);
        }
        if self.transmissions_used >= max_transmissions {
            return Err(HarqError::Exhausted(max_transmissions));
        }
        self.transmissions_used += 1;
        self.combined_sinr_linear += sinr_linear;
        self.state = HarqState::AwaitingFeedback { due_ms: now_ms + ack_delay_ms, decoded };
        Ok(())
    }

    /// Feedback the receiver will send for the pending attempt.
    pub fn pending_feedback(&self) -> Option<Feedback> {
        match self.state {
            HarqState::AwaitingFeedback { decoded: true, .. } => Some(Feedback::Ack),
            HarqState::AwaitingFeedback { decoded: false, .. } => Some(Feedback::Nack),
            HarqState::Schedulable => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HarqResult {
    Delivered { bits: u32, transmissions: u32 },
    Retransmit(HarqProcess),
    Dropped { bits: u32 },
}

/// Applies ACK/NACK feedback arriving at `now_ms`.
///
/// ACK delivers the payload. NACK either returns the process to the
/// schedulable set (soft buffer kept) or, once `max_transmissions` attempts
/// are used up, drops the block.
pub fn harq_step(
    mut proc: HarqProcess,
    feedback: Feedback,
    now_ms: u64,
    max_transmissions: u32,
) -> Result<HarqResult, HarqError> {
    let due_ms = proc.due_ms().ok_or(HarqError::NotAwaitingFeedback)?;
    if due_ms != now_ms {
        return Err(HarqError::WrongTime { now_ms, due_ms });
    }
    Ok(match feedback {
        Feedback::Ack => HarqResult::Delivered { bits: proc.payload_bits, transmissions: proc.transmissions_used },
        Feedback::Nack if proc.transmissions_used >= max_transmissions => {
            HarqResult::Dropped { bits: proc.payload_bits }
        }
        Feedback::Nack => {
            proc.state = HarqState::Schedulable;
            HarqResult::Retransmit(proc)
        }
    })
}

/// Chase-combined SINR in dB of attempts given in dB.
pub fn chase_combine_db(attempts_db: &[f64]) -> f64 {
    linear_to_db(attempts_db.iter().map(|&s| db_to_linear(s)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MAX_TX: u32 = 4;

    fn sent(decoded: bool) -> HarqProcess {
        let mut p = HarqProcess::new(3, 1000, 7, 2, 10);
        p.transmit(1.0, 10, 4, decoded, MAX_TX).unwrap();
        p
    }

    #[test]
    fn ack_first_attempt() {
        let p = sent(true);
        assert_eq!(p.pending_feedback(), Some(Feedback::Ack));
        let r = harq_step(p, Feedback::Ack, 14, MAX_TX).unwrap();
        assert_eq!(r, HarqResult::Delivered { bits: 1000, transmissions: 1 });
    }

    #[test]
    fn four_nacks_drop() {
        let mut p = HarqProcess::new(0, 800, 5, 1, 0);
        let mut now = 0;
        for attempt in 1..=4 {
            p.transmit(0.5, now, 4, false, MAX_TX).unwrap();
            now += 4;
            match harq_step(p, Feedback::Nack, now, MAX_TX).unwrap() {
                HarqResult::Retransmit(next) => {
                    assert!(attempt < 4);
                    p = next;
                }
                HarqResult::Dropped { bits } => {
                    assert_eq!(attempt, 4);
                    assert_eq!(bits, 800);
                }
                other => panic!("unexpected {other:?}"),
            }
            now += 1;
        }
        assert_eq!(p.transmissions_used, 4);
    }

    #[test]
    fn chase_combining_gain() {
        let combined = chase_combine_db(&[0.0, 0.0]);
        assert!((combined - 3.010_299_956_639_812).abs() < 1e-12);
        let mut p = HarqProcess::new(0, 100, 1, 1, 0);
        p.transmit(1.0, 0, 4, false, MAX_TX).unwrap();
        assert!((p.combined_after(1.0) - 3.010_299_956_639_812).abs() < 1e-12);
    }

    #[test]
    fn protocol_errors() {
        let idle = HarqProcess::new(0, 100, 1, 1, 0);
        assert_eq!(harq_step(idle, Feedback::Ack, 4, MAX_TX), Err(HarqError::NotAwaitingFeedback));
        assert_eq!(
            harq_step(sent(true), Feedback::Ack, 13, MAX_TX),
            Err(HarqError::WrongTime { now_ms: 13, due_ms: 14 })
        );
        let mut waiting = sent(false);
        assert_eq!(waiting.transmit(1.0, 11, 4, true, MAX_TX), Err(HarqError::NotAwaitingFeedback));
    }

    proptest! {
        #[test]
        fn never_exceeds_max_transmissions(outcomes in proptest::collection::vec(any::<bool>(), 1..12)) {
            let mut p = HarqProcess::new(0, 500, 3, 1, 0);
            let mut now = 0;
            let mut finished = false;
            for decoded in outcomes {
                if finished {
                    break;
                }
                p.transmit(0.3, now, 4, decoded, MAX_TX).unwrap();
                prop_assert!(p.transmissions_used <= MAX_TX);
                now += 4;
                let fb = p.pending_feedback().unwrap();
                match harq_step(p, fb, now, MAX_TX).unwrap() {
                    HarqResult::Retransmit(next) => p = next,
                    HarqResult::Delivered { transmissions, .. } => { prop_assert!(transmissions <= MAX_TX); finished = true; }
                    HarqResult::Dropped { .. } => { prop_assert_eq!(p.transmissions_used, MAX_TX); finished = true; }
                }
            }
        }
    }
}
