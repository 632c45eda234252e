use alloc::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packet {
    pub arrival_ms: u64,
    /// Bits not yet handed to HARQ.
    pub size_bits: u32,
}

/// FIFO of a UE's downlink packets at its serving eNodeB.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UeQueue {
    packets: VecDeque<Packet>,
    queued_bits: u64,
    enqueued_bits: u64,
}

impl UeQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, packet: Packet) {
        debug_assert!(self.packets.back().is_none_or(|p| p.arrival_ms <= packet.arrival_ms));
        self.queued_bits += packet.size_bits as u64;
        self.enqueued_bits += packet.size_bits as u64;
        self.packets.push_back(packet);
    }

    /// Puts undelivered data back at the head of the queue. Does not count
    /// as newly enqueued.
    pub fn push_front(&mut self, packet: Packet) {
        debug_assert!(self.packets.front().is_none_or(|p| packet.arrival_ms <= p.arrival_ms));
        self.queued_bits += packet.size_bits as u64;
        self.packets.push_front(packet);
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.packets.iter()
    }

    pub fn queued_bits(&self) -> u64 {
        self.queued_bits
    }

    /// Total bits ever enqueued.
    pub fn enqueued_bits(&self) -> u64 {
        self.enqueued_bits
    }

    pub fn hol_arrival_ms(&self) -> Option<u64> {
        self.packets.front().map(|p| p.arrival_ms)
    }

    /// Head-of-line delay at `now_ms`; 0 when empty.
    pub fn hol_delay_ms(&self, now_ms: u64) -> u64 {
        self.hol_arrival_ms().map_or(0, |a| now_ms.saturating_sub(a))
    }

    /// Removes up to `bits` from the head, splitting the last packet if
    /// needed. Returns the number of bits removed.
    pub fn take_bits(&mut self, bits: u64) -> u64 {
        let mut left = bits;
        while left > 0 {
            let Some(head) = self.packets.front_mut() else { break };
            let size = head.size_bits as u64;
            if size <= left {
                left -= size;
                self.packets.pop_front();
            } else {
                head.size_bits -= left as u32;
                left = 0;
            }
        }
        let taken = bits - left;
        self.queued_bits -= taken;
        taken
    }
}

/// Enqueues one TTI's worth of constant-rate traffic as a single packet
/// stamped `now_ms`. A zero rate adds nothing.
pub fn generate_traffic(queue: &mut UeQueue, now_ms: u64, rate_bps: f64, tti_ms: u32) {
    let bits = libm::round(rate_bps * tti_ms as f64 / 1000.0) as u32;
    if bits > 0 {
        queue.push(Packet { arrival_ms: now_ms, size_bits: bits });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rate_source() {
        let mut q = UeQueue::new();
        for t in 0..10 {
            generate_traffic(&mut q, t, 1_000_000.0, 1);
        }
        assert_eq!(q.len(), 10);
        assert_eq!(q.queued_bits(), 10_000);
        let arrivals: alloc::vec::Vec<u64> = q.packets().map(|p| p.arrival_ms).collect();
        assert!(arrivals.windows(2).all(|w| w[1] == w[0] + 1));

        let mut idle = UeQueue::new();
        generate_traffic(&mut idle, 0, 0.0, 1);
        assert!(idle.is_empty());
    }

    #[test]
    fn hol_delay_and_partial_take() {
        let mut q = UeQueue::new();
        assert_eq!(q.hol_delay_ms(50), 0);
        generate_traffic(&mut q, 10, 1_000_000.0, 1);
        generate_traffic(&mut q, 11, 1_000_000.0, 1);
        assert_eq!(q.hol_delay_ms(15), 5);
        assert_eq!(q.take_bits(1500), 1500);
        assert_eq!(q.hol_arrival_ms(), Some(11));
        assert_eq!(q.queued_bits(), 500);
        assert_eq!(q.take_bits(5000), 500);
        assert!(q.is_empty());
        assert_eq!(q.enqueued_bits(), 2000);
    }

    #[test]
    fn requeue_at_head() {
        let mut q = UeQueue::new();
        generate_traffic(&mut q, 3, 1_000_000.0, 1);
        generate_traffic(&mut q, 4, 1_000_000.0, 1);
        let arrival = q.hol_arrival_ms().unwrap();
        assert_eq!(q.take_bits(1200), 1200);
        q.push_front(Packet { arrival_ms: arrival, size_bits: 1200 });
        assert_eq!(q.queued_bits(), 2000);
        assert_eq!(q.enqueued_bits(), 2000);
        assert_eq!(q.hol_delay_ms(10), 7);
    }
}
