//! Independent random substreams derived from one master seed.
//!
//! Every consumer of randomness gets its own ChaCha stream id, so adding a draw
//! in one subsystem never shifts the sequence seen by another.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Substream {
    Placement = 1,
    Shadowing = 2,
    Fading = 3,
    BlockError = 4,
}

pub fn substream(seed: u64, which: Substream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
