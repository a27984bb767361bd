//! Seeded substreams.
//!
//! Each random factor gets its own ChaCha key derived from the master seed,
//! and each path its own stream under that key, so draws never depend on
//! thread scheduling or on how many paths another factor consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Factor {
    Rates = 1,
    CounterpartyDefault = 2,
    FirmDefault = 3,
}

pub fn substream(seed: u64, factor: Factor, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(factor as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
