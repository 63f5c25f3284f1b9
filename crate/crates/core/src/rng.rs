//! Counter-style seeding: every sweep cell or Monte Carlo trial draws from its
//! own ChaCha stream, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep streams of different experiment stages apart.
pub mod domain {
    pub const EVE_RESPONSES: u64 = 0x4556_455f_5253_5030;
    pub const BOB_RESPONSES: u64 = 0x424f_425f_5253_5030;
    pub const PLACEMENT: u64 = 0x504c_4143_454d_4e54;
    pub const SER_TRIALS: u64 = 0x5345_525f_5452_4c53;
    pub const TX_ANGLES: u64 = 0x5458_5f41_4e47_4c45;
}

/// Generator for item `index` of the stream family `(seed, domain)`.
pub fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain);
    rng.set_stream(index);
    rng
}
