use alloc::vec;
use alloc::vec::Vec;

/// Round-robin RB allocation for one cell.
///
/// Members are kept in join order. Each TTI the scheduler walks the cycle
/// starting just after the last UE served in the previous TTI and hands out
/// one RB per UE per pass, skipping UEs with no remaining demand, until the
/// RBs or the demand run out.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundRobin {
    members: Vec<usize>,
    next: usize,
}

impl RoundRobin {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Adds `ue` at the end of the cycle (new arrival or handover target).
    pub fn join(&mut self, ue: usize) {
        debug_assert!(!self.members.contains(&ue));
        self.members.push(ue);
    }

    pub fn leave(&mut self, ue: usize) {
        if let Some(pos) = self.members.iter().position(|&m| m == ue) {
            self.members.remove(pos);
            if pos < self.next {
                self.next -= 1;
            }
            if self.next >= self.members.len() {
                self.next = 0;
            }
        }
    }

    /// Allocates `num_rbs` RBs. `demand(ue)` is the number of RBs the UE can
    /// use this TTI (0 = not backlogged). Returns the UE owning each RB.
    pub fn allocate(&mut self, num_rbs: usize, mut demand: impl FnMut(usize) -> u32) -> Vec<Option<usize>> {
        let mut grid = vec![None; num_rbs];
        let n = self.members.len();
        if n == 0 || num_rbs == 0 {
            return grid;
        }
        let wants: Vec<u32> = (0..n).map(|k| demand(self.members[(self.next + k) % n])).collect();
        let mut granted = vec![0u32; n];
        let mut rb = 0;
        let mut last_served = None;
        while rb < num_rbs {
            let mut progressed = false;
            for k in 0..n {
                if rb == num_rbs {
                    break;
                }
                if granted[k] < wants[k] {
                    granted[k] += 1;
                    grid[rb] = Some(self.members[(self.next + k) % n]);
                    rb += 1;
                    last_served = Some(k);
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }
        if let Some(k) = last_served {
            self.next = (self.next + k + 1) % n;
        }
        grid
    }
}

/// Collapses a per-RB allocation into `(ue, rb_count)` pairs in first-grant
/// order.
pub fn grants(allocation: &[Option<usize>]) -> Vec<(usize, u32)> {
    let mut out: Vec<(usize, u32)> = Vec::new();
    for ue in allocation.iter().flatten() {
        match out.iter_mut().find(|(u, _)| u == ue) {
            Some((_, n)) => *n += 1,
            None => out.push((*ue, 1)),
        }
    }
    out
}
