//! Seeded random substreams.
//!
//! One root seed fans out into independent ChaCha streams so that extra draws in
//! one component never shift the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic random source used throughout the simulator.
pub type RandomSource = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substream {
    Scheduler,
    Frames,
    Faults,
    /// Coin tosses of one robot.
    Coins(usize),
}

impl Substream {
    fn id(self) -> u64 {
        match self {
            Substream::Scheduler => 1,
            Substream::Frames => 2,
            Substream::Faults => 3,
            Substream::Coins(r) => 1_000 + r as u64,
        }
    }
}

pub fn substream(seed: u64, which: Substream) -> RandomSource {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}
